import dataclasses
import time
from fractions import Fraction

import numpy as np
import pytest

from heyde.engine import check_symmetry_charfn, parallelogram_value
from heyde.measures import box_points
from heyde.torus import (
    CounterexampleConfig,
    PsdPair,
    build_counterexample,
    build_H_and_checks,
    build_pi_charfns,
    certify,
    certify_counterexample,
    find_psd_pair,
    select_k_and_build_g,
)

ALPHA = np.array([[-1, 1], [1, -2]])
AT = ALPHA.T


@pytest.fixture(scope="module")
def construction():
    return build_counterexample(CounterexampleConfig())


@pytest.fixture(scope="module")
def certificate(construction):
    return certify(construction)


# -- configuration ---------------------------------------------------------------------


def test_config_validation():
    CounterexampleConfig(alpha=((0, 1), (-1, -3)))
    for bad in (dict(alpha=((1, 0), (0, 1))), dict(alpha=((-1, 1), (1, -1))),
                dict(kappa=0.0), dict(kappa=1.5), dict(k=0), dict(window=12, grid_n=20),
                dict(alpha=((1, 2), (3,)))):
        with pytest.raises((ValueError, TypeError)):
            CounterexampleConfig(**bad)
    with pytest.raises(ValueError, match="unknown"):
        CounterexampleConfig.from_dict({"kapa": 0.5})
    cfg = CounterexampleConfig.from_dict({"kappa": 0.25, "alpha": [[-1, 1], [1, -2]]})
    assert CounterexampleConfig.from_dict(cfg.to_dict()) == cfg


# -- PSD pair ------------------------------------------------------------------------


def test_psd_pair_default():
    p = find_psd_pair(AT)
    assert np.array_equal(p.A2, np.eye(2))
    assert np.array_equal(p.A1, [[1, -1], [-1, 2]])
    assert np.linalg.det(p.A1) == pytest.approx(1) and np.linalg.det(p.A2) == pytest.approx(1)
    assert p.residual(AT) == 0
    c = 3.5
    assert PsdPair(c * p.A1, c * p.A2).residual(AT) == 0


@pytest.mark.parametrize("at", [[[-2, 1], [1, -1]], [[0, -1], [1, -3]], [[-4, 3], [1, -1]], [[1, 5], [-1, -4]]])
def test_psd_pair_solver(at):
    at = np.array(at)
    p = find_psd_pair(at)
    assert p.residual(at) < 1e-12
    assert np.allclose(p.A1, p.A1.T) and np.allclose(p.A2, p.A2.T)
    assert min(p.eps) > 0
    assert np.linalg.det(p.A1) == pytest.approx(np.linalg.det(p.A2), rel=1e-9)


def test_psd_pair_rejects_bad_alpha():
    with pytest.raises(ValueError):
        find_psd_pair([[1, 0], [0, 1]])


def test_quadratic_parts_satisfy_symmetry_identity():
    p = find_psd_pair(AT)
    rng = np.random.default_rng(0)
    q = lambda A, y: np.einsum("...i,ij,...j->...", y, A, y)  # noqa: E731
    u = rng.integers(-50, 51, size=(1000, 2))
    v = rng.integers(-50, 51, size=(1000, 2))
    av = v @ AT.T
    lhs = q(p.A1, u + v) + q(p.A2, u + av)
    rhs = q(p.A1, u - v) + q(p.A2, u - av)
    assert np.max(np.abs(lhs - rhs)) == 0


# -- H and pi --------------------------------------------------------------------------


def test_H_and_witness():
    info = build_H_and_checks(AT)
    assert info.K_order == 5 and info.H.index == 5
    assert info.y2_minus_H_witness == (2, 0)
    pts = box_points(2, 10)
    assert np.array_equal(info.H.contains(pts), (3 * pts[:, 0] + pts[:, 1]) % 5 == 0)
    assert info.H.contains([0, 0]) and info.H.contains([2, -1])
    assert len(info.K_points) == 5


def test_determinant_anchors():
    assert round(np.linalg.det(np.eye(2) + ALPHA)) == -1
    assert round(np.linalg.det(np.eye(2) - AT)) == 5


def test_pi_values():
    info = build_H_and_checks(AT)
    pis = build_pi_charfns(info.H, 0.5)
    assert pis.pi1([2, -1]) == 1 and pis.pi2([2, -1]) == 1
    assert pis.pi1([2, 0]) == 0.5 and pis.pi2([2, 0]) == 2.0
    ones = build_pi_charfns(info.H, 1.0)
    pts = box_points(2, 5)
    assert np.all(ones.pi1(pts) == 1) and np.all(ones.pi2(pts) == 1)


def test_pi_symmetry_equation_exact():
    info = build_H_and_checks(AT)
    pis = build_pi_charfns(info.H, 0.5)
    kappa = Fraction(1, 2)
    pts = [tuple(p) for p in box_points(2, 5)]
    for u in pts:
        for v in pts:
            u_, v_ = np.array(u), np.array(v)
            av = AT @ v_
            l1, _ = pis.exact(u_ + v_, kappa)
            _, l2 = pis.exact(u_ + av, kappa)
            r1, _ = pis.exact(u_ - v_, kappa)
            _, r2 = pis.exact(u_ - av, kappa)
            assert l1 * l2 == r1 * r2


# -- damping ---------------------------------------------------------------------------


def test_k_selection_is_minimal(construction):
    c = construction
    assert c.damped.k == 3
    assert max(c.damped.sums) < 2
    prev = select_k_and_build_g(c.pair, c.pis, 12, k=c.damped.k - 1)
    assert max(prev.sums) >= 2
    assert min(c.damped.sums) >= 1  # the y = 0 term


def test_damped_coefficients(construction):
    g1, g2 = construction.damped.g1, construction.damped.g2
    for g in (g1, g2):
        assert g([0, 0]) == 1 and g.is_hermitian()
        pts = box_points(2, 12)
        assert np.allclose(g(pts), g(-pts))
    # doubling k squares the Gaussian factor: g(2k) = g(k)^2 / pi
    c = construction
    g1k = select_k_and_build_g(c.pair, c.pis, 12, k=3).g1
    g12k = select_k_and_build_g(c.pair, c.pis, 12, k=6).g1
    y = box_points(2, 3)
    assert np.allclose(g12k(y), g1k(y) ** 2 / c.pis.pi1(y))


def test_default_k_sum_bounds_from_dominant_terms(construction):
    # off-zero mass of g_2 at k: four neighbours (+-1, 0), (0, +-1) carry exp(-k) / kappa each
    # when off H; (1, 0) and friends are off H, so sum_2 - 1 >= 4 * 2 * exp(-3)
    s1, s2 = construction.damped.sums
    assert s2 - 1 >= 8 * np.exp(-3)


# -- certificate -----------------------------------------------------------------------


def test_default_certificate(certificate):
    cert = certificate
    assert cert.valid, cert.summary()
    a, b, c, d, e = (cert.stages[k] for k in "abcde")
    assert a["det_I_plus_alpha"] == -1 and a["det_I_minus_alpha_adjoint"] == 5
    assert b["report"]["max_residual"] < 1e-12
    for rho in ("rho1", "rho2"):
        assert c[rho]["certified_min"] > 0
        assert c[rho]["margin_2_minus_abs_sum"] > 0
        assert c[rho]["grid_min"] >= c[rho]["margin_2_minus_abs_sum"] - 1e-12
        assert abs(e[rho]["integral"] - 1) < 1e-9
    assert d["g1"]["witness"]["u"] == [2, 0] and d["g1"]["witness"]["v"] == [0, 2]
    assert d["g1"]["witness"]["value"] == pytest.approx(2 * np.log(0.5), abs=1e-9)
    assert d["g2"]["witness"]["value"] == pytest.approx(-2 * np.log(0.5), abs=1e-9)
    assert "certificate valid: True" in cert.summary()


def test_witness_value_oracle(construction):
    # direct evaluation: the quadratic part cancels, pi contributes via H-membership
    H = lambda y: (3 * y[0] + y[1]) % 5 == 0  # noqa: E731
    u, v = np.array([2, 0]), np.array([0, 2])
    pts = [u + v, u - v, u, v]
    assert not any(H(p) for p in pts)
    # -log pi_1 is -log(kappa) at each point: 1 + 1 - 2 - 2 = -2 copies
    expected = -2 * -np.log(0.5)
    got = parallelogram_value(lambda y: -construction.damped.g1.log_abs(y), u, v)
    assert got == pytest.approx(expected, abs=1e-9)


def test_kappa_one_fails_stage_d():
    cert = certify_counterexample(CounterexampleConfig(kappa=1.0))
    assert not cert.valid and cert.failed_stage == "d"


def test_perturbed_coefficient_fails_stage_b(construction):
    c = construction
    g1 = c.damped.g1
    # (2, -1) lies in H: with u = (1, -1), v = (1, 0) the product picks g_2(0) = 1
    bumped = g1.with_coefficient([2, -1], g1([2, -1]) + 1e-6)
    damped = dataclasses.replace(c.damped, g1=bumped)
    cert = certify(dataclasses.replace(c, damped=damped))
    assert cert.failed_stage == "b"
    res = cert.stages["b"]["report"]["max_residual"]
    assert 0.5e-6 < res < 2e-6


def test_trace_minus_five_fails_condition_one():
    # det(I + alpha) = 2 + trace, so only trace -3 gives a trivial kernel on T^2
    cert = certify_counterexample(CounterexampleConfig(alpha=((-4, 3), (1, -1))))
    assert cert.failed_stage == "a"
    assert cert.stages["a"]["det_I_plus_alpha"] == -3


def test_nonsymmetric_alpha_certifies():
    cert = certify_counterexample(CounterexampleConfig(alpha=((0, 1), (-1, -3))))
    assert cert.valid, cert.summary()


def test_forced_small_k_fails_positivity():
    cert = certify_counterexample(CounterexampleConfig(k=1))
    assert cert.failed_stage == "c"


def test_certificate_serializes_and_is_deterministic(certificate):
    import json
    a = json.dumps(certificate.to_dict(), sort_keys=True, default=float)
    b = json.dumps(certify_counterexample().to_dict(), sort_keys=True, default=float)
    assert a == b


def test_symmetry_window_scan_matches_certificate(construction):
    c = construction
    t0 = time.perf_counter()
    rep = check_symmetry_charfn(c.damped.g1, c.damped.g2, c.alpha, radius=12)
    assert rep.max_residual < 1e-12
    assert time.perf_counter() - t0 < 60


def test_decompose_counterexample_A(construction):
    from heyde.engine import decompose_A, derive_A_B, verify_eq9_eq10
    from heyde.groups import GroupSpec

    c = construction
    psi = derive_A_B(c.damped.g1, c.damped.g2, c.alpha)
    k = c.damped.k
    ipa = np.eye(2) + AT
    Q = 2 * k * (ipa.T @ c.pair.A1 @ ipa + 4 * AT.T @ c.pair.A2 @ AT)
    assert np.allclose(Q, 2 * k * 5 * np.array([[2, -3], [-3, 5]]))
    dec = decompose_A(psi.A, GroupSpec.torus(2), radius=6)
    assert dec.verdict and dec.max_residual < 1e-9
    assert np.allclose(dec.Q, Q, atol=1e-8)
    # (I + a~) y and 2 a~ y agree mod H, so the kappa-terms cancel in A
    assert all(abs(v) < 1e-9 for v in dec.constants.values())
    fd = verify_eq9_eq10(psi.A, c.alpha, radius=2)
    assert fd.verdict
    # psi_1 alone is not quadratic on 2Z^2: the kappa-terms survive there
    assert abs(parallelogram_value(psi.psi1, np.array([2, 0]), np.array([0, 2]))) > 1
