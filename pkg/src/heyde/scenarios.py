"""Randomized sweeps over small finite groups.

Each case draws a pair of measures from a mix of families (generic, sparse,
degenerate, shifted measures on the 2-torsion subgroup, kernel witnesses,
Haar measures on subgroups) so that both symmetric and non-symmetric pairs
occur, then runs every check the engine offers and records the residuals.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import config
from .endomorphism import Endo, automorphisms, kernel
from .engine import (
    brute_force_conditional_symmetry,
    check_forms_independence,
    check_symmetry_charfn,
    decompose_A,
    derive_A_B,
    factorization_residual,
    joint_table,
    kernel_witness,
    quadratic_solution_dimension,
    test_membership_gamma_G,
    verify_eq9_eq10,
    _p_forms,
)
from .groups import FiniteSubgroup, GroupSpec, abelian_groups, subgroups, torsion_subgroup_order2
from .measures import FiniteMeasure, convolve

__all__ = [
    "random_pair",
    "run_sweep",
    "SweepResult",
    "kernel_witness_trials",
    "shifted_torsion_pairs",
    "FAMILIES",
]

FAMILIES = ("generic", "sparse", "point", "torsion_shift", "kernel", "haar_shift")


def _dirichlet(rng, n: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n))


def _on_subset(spec: GroupSpec, idx: np.ndarray, w: np.ndarray) -> FiniteMeasure:
    m = np.zeros(spec.order)
    np.add.at(m, idx, w)
    return FiniteMeasure(spec, m)


def _point(spec: GroupSpec, rng) -> FiniteMeasure:
    m = np.zeros(spec.order)
    m[rng.integers(spec.order)] = 1.0
    return FiniteMeasure(spec, m)


def _on_torsion(spec: GroupSpec, rng, G: FiniteSubgroup, nonvanishing: bool = False) -> FiniteMeasure:
    idx = np.flatnonzero(G.mask)
    w = _dirichlet(rng, len(idx))
    if nonvanishing:
        # keep more than half the mass at 0 so |omega^| >= 2 w_0 - 1 > 0
        s = rng.uniform(0.05, 0.45)
        w = s * w
        w[0] += 1 - s
    return _on_subset(spec, idx, w)


def random_pair(spec: GroupSpec, alpha: Endo, rng, family: str,
                subgroup_list=None) -> tuple[FiniteMeasure, FiniteMeasure]:
    N = spec.order
    if family == "generic":
        return FiniteMeasure(spec, _dirichlet(rng, N)), FiniteMeasure(spec, _dirichlet(rng, N))
    if family == "sparse":
        out = []
        for _ in range(2):
            k = int(rng.integers(1, min(3, N) + 1))
            out.append(_on_subset(spec, rng.choice(N, k, replace=False), _dirichlet(rng, k)))
        return tuple(out)
    if family == "point":
        return _point(spec, rng), _point(spec, rng)
    if family == "torsion_shift":
        G = torsion_subgroup_order2(spec)
        return (convolve(_point(spec, rng), _on_torsion(spec, rng, G)),
                convolve(_point(spec, rng), _on_torsion(spec, rng, G)))
    if family == "kernel":
        K = kernel(Endo.identity(spec) + alpha)
        if K.order > 1:
            mu, _ = kernel_witness(alpha, _dirichlet(rng, K.order))
            # shift by (a, b) with 2(a + alpha b) = 0 keeps the verdict
            b = spec.elements[rng.integers(N)]
            base = -alpha.apply(b)
            G = np.asarray(torsion_subgroup_order2(spec).elements)
            a = spec.reduce(base + G[rng.integers(len(G))])
            return convolve(mu, FiniteMeasure.point(spec, a)), convolve(mu, FiniteMeasure.point(spec, b))
        family = "haar_shift"
    if family == "haar_shift":
        subs = subgroup_list if subgroup_list is not None else subgroups(spec)
        out = []
        for _ in range(2):
            S = subs[rng.integers(len(subs))]
            out.append(convolve(FiniteMeasure.haar(S), _point(spec, rng)))
        return tuple(out)
    raise ValueError(f"unknown family {family!r}")


def _faulty_convolve(mu, nu):
    # test hook: a convolution that lands one element off
    good = convolve(mu, nu)
    return FiniteMeasure(good.spec, np.roll(good.flat, 1), good.signed)


COLUMNS = (
    "group", "alpha", "case", "family",
    "charfn_residual", "brute_residual", "charfn_verdict", "brute_verdict", "agree",
    "factorization_residual", "independence_residual", "symmetric_implies_ok", "equivalence_ok",
    "convolution_residual", "eq9_residual", "eq10_residual", "decompose_residual",
    "theorem_ok", "ok",
)


@dataclass
class SweepResult:
    rows: list[dict]
    groups: list[dict]
    tolerance: float
    summary: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.rows) and all(g["ok"] for g in self.groups)

    def violations(self) -> list[dict]:
        return [r for r in self.rows if not r["ok"]] + [g for g in self.groups if not g["ok"]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: ("" if r[k] is None else r[k]) for k in COLUMNS})
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"summary": self.summary, "groups": self.groups,
                "violations": self.violations()[:20]}


def run_sweep(max_order: int = 12, pairs: int = 200, seed: int = 0,
              tol: float = config.TOL_FINITE, fault: str | None = None,
              families=FAMILIES, max_automorphisms: int | None = None,
              deep: bool = True) -> SweepResult:
    """Sweep every group of order ``<= max_order`` and (up to ``max_automorphisms``
    of) its automorphisms with ``pairs`` random measure pairs each.

    ``deep`` also runs the finite-difference chain and the characterization
    check on symmetric pairs with nonvanishing characteristic functions.
    """
    groups = abelian_groups(max_order)
    if not groups or pairs < 1 or not families:
        raise ValueError("empty sweep: no groups, no pairs, or no families selected")
    if fault not in (None, "convolve"):
        raise ValueError(f"unknown fault hook {fault!r}")
    conv = _faulty_convolve if fault == "convolve" else convolve
    rng = np.random.default_rng(seed)
    rows, group_rows = [], []
    for spec in groups:
        dim = quadratic_solution_dimension(spec)
        group_rows.append({"group": str(spec), "quadratic_solution_dim": dim, "ok": dim == 0})
        subs = subgroups(spec)
        autos = automorphisms(spec)
        if max_automorphisms is not None and len(autos) > max_automorphisms:
            pick = rng.choice(len(autos), max_automorphisms, replace=False)
            autos = [autos[i] for i in sorted(pick)]
        for alpha in autos:
            d1 = kernel(Endo.identity(spec) + alpha).order == 1
            forms = _p_forms(alpha)
            for case in range(pairs):
                family = families[case % len(families)]
                mu1, mu2 = random_pair(spec, alpha, rng, family, subs)
                rows.append(_run_case(spec, alpha, case, family, mu1, mu2, tol, conv, forms, d1, deep))
    n_sym = sum(r["brute_verdict"] for r in rows)
    result = SweepResult(rows, group_rows, tol)
    result.summary = {
        "max_order": max_order, "pairs_per_automorphism": pairs, "seed": seed,
        "tolerance": tol, "fault": fault, "groups": len(groups), "cases": len(rows),
        "symmetric_cases": n_sym,
        "agreement_rate": sum(r["agree"] for r in rows) / len(rows),
        "violations": len(result.violations()),
        "ok": result.ok,
    }
    return result


def _run_case(spec, alpha, case, family, mu1, mu2, tol, conv, forms, d1, deep) -> dict:
    cf = check_symmetry_charfn(mu1, mu2, alpha, tol=tol)
    bf = brute_force_conditional_symmetry(mu1, mu2, alpha, tol=tol)
    fac = factorization_residual(joint_table(mu1, mu2, *forms))
    indep = check_forms_independence(mu1, mu2, alpha, tol=tol).max_residual
    symmetric_implies_ok = (not bf.verdict) or (fac < tol and indep < tol)
    equivalence_ok = (indep < tol) == (fac < tol)
    prod = conv(mu1, mu2)
    conv_res = float(np.max(np.abs(prod.charfn_table() - mu1.charfn_table() * mu2.charfn_table())))

    eq9 = eq10 = dec = None
    theorem_ok = True
    if deep and bf.verdict:
        try:
            psi = derive_A_B(mu1, mu2, alpha)
        except ValueError:
            psi = None  # vanishing characteristic function: hypotheses fail
        if psi is not None:
            fd = verify_eq9_eq10(psi.A, alpha, tol=1e-10)
            eq9 = fd.eq9.max_residual
            eq10 = None if fd.eq10 is None else fd.eq10.max_residual
            dec = decompose_A(psi.A, spec, tol=1e-10).max_residual if fd.eq10 is not None else None
            if d1:
                theorem_ok = (test_membership_gamma_G(mu1).verdict
                              and test_membership_gamma_G(mu2).verdict)
    ok = (
        cf.verdict == bf.verdict and symmetric_implies_ok and equivalence_ok and conv_res < tol
        and (eq9 is None or eq9 < 1e-10) and (eq10 is None or eq10 < 1e-10)
        and (dec is None or dec < 1e-10) and theorem_ok
    )
    return {
        "group": str(spec), "alpha": str(alpha.to_list()), "case": case, "family": family,
        "charfn_residual": repr(cf.max_residual), "brute_residual": repr(bf.max_residual),
        "charfn_verdict": cf.verdict, "brute_verdict": bf.verdict, "agree": cf.verdict == bf.verdict,
        "factorization_residual": repr(fac), "independence_residual": repr(indep),
        "symmetric_implies_ok": symmetric_implies_ok, "equivalence_ok": equivalence_ok,
        "convolution_residual": repr(conv_res),
        "eq9_residual": None if eq9 is None else repr(eq9),
        "eq10_residual": None if eq10 is None else repr(eq10),
        "decompose_residual": None if dec is None else repr(dec),
        "theorem_ok": theorem_ok, "ok": ok,
    }


def kernel_witness_trials(n: int = 20, seed: int = 0, max_order: int = 12):
    """``n`` random (group, alpha, mu on Ker(I + alpha)) triples with a nontrivial kernel.

    Yields ``(spec, alpha, mu, report)`` with the brute-force symmetry report
    of the i.i.d. pair.
    """
    rng = np.random.default_rng(seed)
    pool = []
    for spec in abelian_groups(max_order):
        for alpha in automorphisms(spec):
            K = kernel(Endo.identity(spec) + alpha)
            if K.order > 1:
                pool.append((spec, alpha, K))
    for i in rng.choice(len(pool), n, replace=len(pool) < n):
        spec, alpha, K = pool[i]
        mu1, mu2 = kernel_witness(alpha, _dirichlet(rng, K.order))
        yield spec, alpha, mu1, brute_force_conditional_symmetry(mu1, mu2, alpha)


def shifted_torsion_pairs(spec: GroupSpec, alpha: Endo, n: int, seed: int = 0, max_tries: int = 10_000):
    """``n`` pairs ``E_x * omega`` (``omega`` on ``G``, nonvanishing transform) that
    pass the brute-force symmetry oracle."""
    rng = np.random.default_rng(seed)
    G = torsion_subgroup_order2(spec)
    out = []
    for _ in range(max_tries):
        mu1 = convolve(_point(spec, rng), _on_torsion(spec, rng, G, nonvanishing=True))
        mu2 = convolve(_point(spec, rng), _on_torsion(spec, rng, G, nonvanishing=True))
        if brute_force_conditional_symmetry(mu1, mu2, alpha).verdict:
            out.append((mu1, mu2))
            if len(out) == n:
                return out
    raise ValueError(f"found only {len(out)} symmetric pairs in {max_tries} tries")
