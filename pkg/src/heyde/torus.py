"""Non-Gaussian pair on the 2-torus with a symmetric conditional law.

Construction: pick ``alpha`` with ``det = 1`` and trace ``< -2``, a PSD pair
``A_1 + A_2 alpha~ = 0``, the proper sublattice ``H = (I - alpha~) Z^2`` and the
finite subgroup ``K`` it annihilates. The coefficients

    g_j(y) = exp(-k <A_j y, y>) * pi_j(y),   pi_1 = 1 | kappa,   pi_2 = 1 | 1/kappa  (on H | off H)

satisfy the symmetry equation, are summable to less than 2 for large ``k``
(so they are Fourier coefficients of positive densities), and are not
Gaussian-times-G on ``2Z^2`` because ``2Z^2`` is not contained in ``H``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import config
from .endomorphism import Endo, check_condition_d1, image_lattice
from .engine import (
    check_symmetry_charfn,
    parallelogram_value,
    test_membership_gamma_G,
)
from .groups import DualSublattice, GroupSpec
from .measures import TorusCharFn, box_points, density_on_grid, gaussian_tail_bound

log = logging.getLogger(__name__)

__all__ = [
    "CounterexampleConfig",
    "PsdPair",
    "HInfo",
    "PiCharFns",
    "DampedPair",
    "CounterexampleCertificate",
    "find_psd_pair",
    "build_H_and_checks",
    "build_pi_charfns",
    "select_k_and_build_g",
    "build_counterexample",
    "certify",
    "certify_counterexample",
]

DEFAULT_ALPHA = ((-1, 1), (1, -2))


@dataclass(frozen=True)
class CounterexampleConfig:
    alpha: tuple[tuple[int, int], tuple[int, int]] = DEFAULT_ALPHA
    kappa: float = 0.5
    k: int | None = None
    window: int = config.DEFAULT_WINDOW
    grid_n: int = config.DEFAULT_GRID

    def __post_init__(self):
        a = np.asarray(self.alpha)
        if a.shape != (2, 2) or not np.all(a == np.round(a)):
            raise ValueError(f"alpha must be a 2x2 integer matrix, got {self.alpha!r}")
        a = a.astype(np.int64)
        object.__setattr__(self, "alpha", tuple(tuple(int(v) for v in r) for r in a))
        det = int(round(np.linalg.det(a)))
        if det != 1 or np.trace(a) >= -2:
            raise ValueError(f"need det(alpha) = 1 and trace(alpha) < -2; got det {det}, trace {np.trace(a)}")
        # kappa = 1 is the degenerate limit: accepted, and it fails non-membership
        if not 0 < self.kappa <= 1:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")
        if self.k is not None and int(self.k) < 1:
            raise ValueError("damping exponent k must be a positive integer")
        if self.window < 1 or self.grid_n <= 2 * self.window:
            raise ValueError("need window >= 1 and grid_n > 2 * window")

    @classmethod
    def from_dict(cls, data: dict) -> CounterexampleConfig:
        known = {"alpha", "kappa", "k", "window", "grid_n"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown counterexample keys: {sorted(extra)}")
        return cls(**data)

    @property
    def endo(self) -> Endo:
        return Endo(GroupSpec.torus(2), self.alpha)

    @property
    def alpha_adjoint(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=np.int64).T

    def to_dict(self) -> dict:
        return {"alpha": [list(r) for r in self.alpha], "kappa": self.kappa, "k": self.k,
                "window": self.window, "grid_n": self.grid_n}


@dataclass(frozen=True)
class PsdPair:
    A1: np.ndarray
    A2: np.ndarray

    def residual(self, alpha_adjoint) -> float:
        return float(np.max(np.abs(self.A1 + self.A2 @ np.asarray(alpha_adjoint))))

    @property
    def eps(self) -> tuple[float, float]:
        return float(np.linalg.eigvalsh(self.A1).min()), float(np.linalg.eigvalsh(self.A2).min())

    def to_dict(self) -> dict:
        return {"A1": self.A1.tolist(), "A2": self.A2.tolist(),
                "det_A1": float(np.linalg.det(self.A1)), "det_A2": float(np.linalg.det(self.A2))}


def find_psd_pair(alpha_adjoint, steps: int = 3600) -> PsdPair:
    """Symmetric PSD ``A_1, A_2`` with ``A_1 + A_2 alpha~ = 0`` and ``det A_1 = det A_2 > 0``.

    ``A_2`` ranges over the symmetric matrices making ``A_2 alpha~`` symmetric
    (a linear condition); ``A_1 = -A_2 alpha~``. The angle in that 2-plane is
    scanned for the direction maximizing the smaller eigenvalue of the pair.
    """
    at = np.asarray(alpha_adjoint, dtype=float)
    if at.shape != (2, 2):
        raise ValueError("alpha~ must be 2x2")
    if round(np.linalg.det(at)) != 1 or np.trace(at) >= -2:
        raise ValueError("need det(alpha~) = 1 and trace(alpha~) < -2")
    if np.array_equal(at, at.T):
        # symmetric with det 1, trace < -2: alpha~ is negative definite
        A2 = np.eye(2)
        return PsdPair(-A2 @ at, A2)

    (a, b), (c, d) = at
    # A2 = [[p, q], [q, r]]; A2 alpha~ symmetric  <=>  b p + (d - a) q - c r = 0
    _, _, vt = np.linalg.svd(np.array([[b, d - a, -c]]))
    basis = vt[1:]

    def build(theta):
        p, q, r = np.cos(theta) * basis[0] + np.sin(theta) * basis[1]
        A2 = np.array([[p, q], [q, r]])
        A1 = -A2 @ at
        A1 = (A1 + A1.T) / 2
        return A1, A2

    best, best_val = None, -np.inf
    for theta in np.linspace(0, 2 * np.pi, steps, endpoint=False):
        A1, A2 = build(theta)
        val = min(np.linalg.eigvalsh(A1).min(), np.linalg.eigvalsh(A2).min())
        if val > best_val:
            best, best_val = (A1, A2), val
    if best_val <= 0:
        raise ValueError("no positive definite pair found; alpha violates the hypothesis")
    A1, A2 = best
    scale = 1.0 / np.sqrt(np.linalg.det(A2))
    return PsdPair(A1 * scale, A2 * scale)


def _even_points_ordered(radius: int) -> np.ndarray:
    """Nonzero points of ``2Z^2`` by L1 norm, then descending lexicographic."""
    pts = box_points(2, radius // 2) * 2
    pts = pts[np.any(pts != 0, axis=1)]
    order = sorted(range(len(pts)), key=lambda i: (int(np.abs(pts[i]).sum()), tuple(-pts[i])))
    return pts[order]


@dataclass(frozen=True)
class HInfo:
    H: DualSublattice
    K_order: int
    y2_minus_H_witness: tuple[int, int]
    K_points: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        B = np.asarray(self.H.basis)
        adj = self.H.adjugate
        return {
            "basis": B.tolist(),
            "index": self.H.index,
            "membership": f"adj(B) y = 0 mod {self.H.index}, adj(B) = {adj.tolist()}",
            "K_order": self.K_order,
            "K_points": [f"({p[0]}/{self.K_order}, {p[1]}/{self.K_order})" for p in self.K_points.tolist()],
            "y2_minus_H_witness": list(self.y2_minus_H_witness),
        }


def build_H_and_checks(alpha_adjoint, search_radius: int = 8) -> HInfo:
    """``H = (I - alpha~) Z^2``, ``|K| = |det(I - alpha~)|``, and a point of ``2Z^2`` off ``H``."""
    at = np.asarray(alpha_adjoint, dtype=np.int64)
    H = image_lattice(np.eye(2, dtype=np.int64) - at)
    for y in _even_points_ordered(search_radius):
        if not H.contains(y):
            return HInfo(H, H.index, (int(y[0]), int(y[1])), H.annihilated_points())
    raise ValueError("inconsistency: every even lattice point searched lies in H")


@dataclass(frozen=True)
class PiCharFns:
    """Two-valued characteristic functions of ``pi_1`` (a distribution) and ``pi_2`` (signed)."""

    H: DualSublattice
    kappa: float

    def pi1(self, y) -> np.ndarray:
        return np.where(self.H.contains(y), 1.0, self.kappa)

    def pi2(self, y) -> np.ndarray:
        return np.where(self.H.contains(y), 1.0, 1.0 / self.kappa)

    def exact(self, y, kappa: Fraction) -> tuple[Fraction, Fraction]:
        if self.H.contains(y):
            return Fraction(1), Fraction(1)
        return kappa, 1 / kappa


def build_pi_charfns(H: DualSublattice, kappa: float) -> PiCharFns:
    if not 0 < kappa <= 1:
        raise ValueError(f"kappa must lie in (0, 1], got {kappa}")
    return PiCharFns(H, float(kappa))


@dataclass(frozen=True)
class DampedPair:
    g1: TorusCharFn
    g2: TorusCharFn
    k: int
    sums: tuple[float, float]


def _damped(A: np.ndarray, pi, k: int, window: int, scale: float) -> TorusCharFn:
    def quad(y):
        y = np.asarray(y, dtype=float)
        return np.einsum("...i,ij,...j->...", y, A, y)

    def g(y):
        return np.exp(-k * quad(y)) * pi(y)

    def log_g(y):
        return -k * quad(y) + np.log(np.abs(pi(y)))

    eps = float(np.linalg.eigvalsh(A).min())
    tail = gaussian_tail_bound(k * eps, window, 2, scale)
    return TorusCharFn.from_function(g, 2, window, tail, log_modulus=log_g)


def select_k_and_build_g(pair: PsdPair, pis: PiCharFns, window: int = config.DEFAULT_WINDOW,
                         k: int | None = None, max_k: int = config.MAX_DAMPING) -> DampedPair:
    """Smallest ``k`` (or the given one) with ``sum_y |g_j(y)| < 2`` for both ``j``.

    The sums are the windowed sums plus the Gaussian tail bound outside the window.
    """
    scales = (1.0, max(1.0, 1.0 / pis.kappa))
    candidates = [k] if k is not None else range(1, max_k + 1)
    last = None
    for kk in candidates:
        g1 = _damped(pair.A1, pis.pi1, kk, window, scales[0])
        g2 = _damped(pair.A2, pis.pi2, kk, window, scales[1])
        sums = (g1.abs_sum(), g2.abs_sum())
        last = DampedPair(g1, g2, kk, sums)
        if max(sums) < 2:
            log.debug("damping k=%d, coefficient sums %s", kk, sums)
            return last
    if k is not None:
        return last
    raise ValueError(f"no k <= {max_k} makes both coefficient sums < 2")


@dataclass
class CounterexampleCertificate:
    config: CounterexampleConfig
    pair: PsdPair | None = None
    H: HInfo | None = None
    k: int | None = None
    sums: tuple[float, float] | None = None
    stages: dict = field(default_factory=dict)
    failed_stage: str | None = None
    error: str | None = None

    @property
    def valid(self) -> bool:
        return self.failed_stage is None

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "valid": self.valid,
            "failed_stage": self.failed_stage,
            "error": self.error,
            "psd_pair": None if self.pair is None else self.pair.to_dict(),
            "H": None if self.H is None else self.H.to_dict(),
            "k": self.k,
            "coefficient_sums": None if self.sums is None else list(self.sums),
            "stages": self.stages,
        }

    def summary(self) -> str:
        rows = [("stage", "check", "value", "pass")]
        names = {
            "a": "Ker(I+alpha) trivial",
            "b": "symmetry equation residual",
            "c": "min density (certified)",
            "d": "non-membership witnesses",
            "e": "normalization",
        }
        for key in "abcde":
            st = self.stages.get(key)
            if st is None:
                rows.append((key, names[key], "-", "skipped"))
                continue
            rows.append((key, names[key], st.get("value", ""), "yes" if st["pass"] else "NO"))
        widths = [max(len(str(r[i])) for r in rows) for i in range(4)]
        lines = ["  ".join(str(c).ljust(w) for c, w in zip(r, widths)) for r in rows]
        lines.append(f"certificate valid: {self.valid}")
        return "\n".join(lines)


@dataclass(frozen=True)
class Construction:
    config: CounterexampleConfig
    alpha: Endo
    pair: PsdPair
    H: HInfo
    pis: PiCharFns
    damped: DampedPair


def build_counterexample(cfg: CounterexampleConfig) -> Construction:
    at = cfg.alpha_adjoint
    pair = find_psd_pair(at)
    H = build_H_and_checks(at)
    pis = build_pi_charfns(H.H, cfg.kappa)
    damped = select_k_and_build_g(pair, pis, cfg.window, cfg.k)
    return Construction(cfg, cfg.endo, pair, H, pis, damped)


def _witness_pair(H: HInfo, g: TorusCharFn, radius: int) -> dict:
    """First ``v`` in ``2Z^2`` with ``v, u +- v`` all off ``H``, for ``u`` the stored witness."""
    u = np.asarray(H.y2_minus_H_witness)
    for v in _even_points_ordered(radius):
        if not any(H.H.contains(p) for p in (v, u + v, u - v)):
            val = float(parallelogram_value(lambda y: -g.log_abs(y), u, v))
            return {"u": u.tolist(), "v": v.tolist(), "value": val}
    raise ValueError("no parallelogram witness found")


def certify(c: Construction, sym_radius: int | None = None) -> CounterexampleCertificate:
    """Run stages (a)-(e) on a built construction; the first failure invalidates it."""
    cfg = c.config
    cert = CounterexampleCertificate(cfg, c.pair, c.H, c.damped.k, c.damped.sums)
    g1, g2 = c.damped.g1, c.damped.g2
    tol_sym = config.TOL_FINITE
    kappa_log = float(np.log(cfg.kappa))

    def stage_a():
        rep = check_condition_d1(c.alpha)
        det_ima = int(round(np.linalg.det(np.eye(2) - cfg.alpha_adjoint)))
        return {"pass": rep.is_trivial, "value": f"det(I+alpha)={rep.det}",
                "det_I_plus_alpha": rep.det, "det_I_minus_alpha_adjoint": det_ima,
                "psd_residual": c.pair.residual(cfg.alpha_adjoint)}

    def stage_b():
        rep = check_symmetry_charfn(g1, g2, c.alpha, radius=sym_radius or cfg.window, tol=tol_sym)
        d = rep.to_dict()
        return {"pass": rep.verdict, "value": f"{rep.max_residual:.3e}", "report": d}

    def stage_c():
        out = {"pass": True}
        for name, g in (("rho1", g1), ("rho2", g2)):
            dens = density_on_grid(g, cfg.grid_n)
            margin = 2 - g.abs_sum()
            ok = dens.certified_min > 0 and margin > 0 and dens.grid_min >= margin - 1e-12
            out[name] = {**dens.to_dict(), "margin_2_minus_abs_sum": margin, "pass": ok}
            out["pass"] &= ok
        out["value"] = f"{min(out['rho1']['certified_min'], out['rho2']['certified_min']):.4f}"
        return out

    def stage_d():
        out = {"pass": True}
        for name, g, sign in (("g1", g1, 1), ("g2", g2, -1)):
            mem = test_membership_gamma_G(g, radius=cfg.window)
            wit = _witness_pair(c.H, g, cfg.window)
            expected = sign * 2 * kappa_log
            ok = (not mem.verdict) and abs(wit["value"]) > config.TOL_TORUS
            out[name] = {"membership": mem.to_dict(), "witness": wit,
                         "expected_value": expected, "pass": ok}
            out["pass"] &= ok
        out["value"] = f"{out['g1']['witness']['value']:+.4f} / {out['g2']['witness']['value']:+.4f}"
        return out

    def stage_e():
        out = {"pass": True}
        for name, g in (("rho1", g1), ("rho2", g2)):
            integral = density_on_grid(g, cfg.grid_n).integral
            ok = abs(integral - 1) < 1e-9
            out[name] = {"integral": integral, "pass": ok}
            out["pass"] &= ok
        out["value"] = f"{out['rho1']['integral']:.12f}"
        return out

    for key, fn in (("a", stage_a), ("b", stage_b), ("c", stage_c), ("d", stage_d), ("e", stage_e)):
        try:
            cert.stages[key] = fn()
        except ValueError as exc:
            cert.stages[key] = {"pass": False, "value": "error", "error": str(exc)}
        if not cert.stages[key]["pass"] and cert.failed_stage is None:
            cert.failed_stage = key
    return cert


def certify_counterexample(cfg: CounterexampleConfig | None = None) -> CounterexampleCertificate:
    cfg = cfg or CounterexampleConfig()
    try:
        c = build_counterexample(cfg)
    except ValueError as exc:
        cert = CounterexampleCertificate(cfg)
        cert.failed_stage = "build"
        cert.error = str(exc)
        return cert
    return certify(c)

