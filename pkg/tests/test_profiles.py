import math
from fractions import Fraction as F

import numpy as np
import pytest

from kepler_balance.errors import CapabilityError, DomainError, NormalizationError
from kepler_balance.profiles import (
    RadialProfile,
    density_in_L,
    eval_profile,
    germ_residual,
    m_delta_from_v,
    monge_ampere_density,
    phi_v,
    phi_v_l_coefficients,
    phi_v_l_series,
)
from kepler_balance.series import PowerLogSeries as S

ALL_CATALOG = [
    RadialProfile.sqrt_poincare(),
    RadialProfile.explicit_n(3),
    RadialProfile.explicit_n(5),
    RadialProfile.phi_v_candidate(1),
    RadialProfile.constant_one(),
]


def test_eval_sqrt_poincare_spot():
    assert eval_profile(RadialProfile.sqrt_poincare(), 0.25) == (1.0, -2.0, 4.0)


def test_eval_constant_one():
    assert eval_profile(RadialProfile.constant_one(), 0.5) == (1.0, 0.0, 0.0)


def test_boundary_normalization():
    # kinds with f(1) = 0: value -> 0 and f' -> -1 at t -> 1-
    for p in ALL_CATALOG[:4]:
        f, fp, _ = p.eval(1 - 1e-9)
        assert abs(f) < 1e-8
        assert fp == pytest.approx(-1.0, abs=1e-7)


@pytest.mark.parametrize("p", ALL_CATALOG, ids=lambda p: p.kind + str(p.params.get("n", "")))
def test_derivatives_match_finite_differences(p):
    ts = np.linspace(0.1, 0.9, 7)
    f, fp, fpp = p.eval(ts)
    h = 1e-6
    fd1 = (p.eval(ts + h)[0] - p.eval(ts - h)[0]) / (2 * h)
    fd2 = (p.eval(ts + h)[0] - 2 * f + p.eval(ts - h)[0]) / h ** 2
    scale1 = np.maximum(np.abs(fd1), 1e-3)
    scale2 = np.maximum(np.abs(fd2), 1e-3)
    assert np.max(np.abs(fp - fd1) / scale1) < 1e-6
    assert np.max(np.abs(fpp - fd2) / scale2) < 1e-3  # fd2 itself is O(h^2 / h^2 eps)


def test_eval_domain_and_order_errors():
    p = RadialProfile.sqrt_poincare()
    with pytest.raises(DomainError):
        p.eval(1.5)
    with pytest.raises(DomainError):
        p.eval(-0.1)
    with pytest.raises(CapabilityError):
        p.eval(0.5, order=3)


def test_monge_ampere_identities_grid():
    grid = np.linspace(1e-6, 1 - 1e-6, 1000)
    assert np.max(np.abs(monge_ampere_density(RadialProfile.sqrt_poincare(), 2, grid) - 1)) <= 1e-12
    for n in range(2, 7):
        g = RadialProfile.explicit_n(n)
        assert np.max(np.abs(monge_ampere_density(g, n, grid) - 1)) <= 1e-12


def test_monge_ampere_candidate_value():
    # 16t(1+t)(1+2t+5t^2)/(1+3t)^4 at t = 0.1
    w = monge_ampere_density(RadialProfile.phi_v_candidate(1), 2, 0.1)
    expect = 16 * 0.1 * 1.1 * (1 + 0.2 + 0.05) / 1.3 ** 4
    assert w == pytest.approx(expect, rel=1e-13)
    assert w == pytest.approx(0.77028, abs=5e-6)


def test_phi_v_values():
    assert phi_v(1, 0.3) == pytest.approx(1.0, abs=1e-15)
    assert phi_v(9, 0.25) == pytest.approx(5.0 / 3.0, rel=1e-14)
    # t -> 1: phi -> 1 for any v
    for v in (0, 0.5, 2, 9, -4):
        assert phi_v(v, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_phi_v_branch_symmetry_and_v0():
    # +sqrt(v) / -sqrt(v) symmetry is automatic in the closed form; check the
    # trig/taylor/power branches glue continuously across v = 0
    ts = np.linspace(0.05, 0.95, 9)
    for v in (1e-6, -1e-6):
        a = phi_v(v, ts)
        b = phi_v(0, ts)
        assert np.max(np.abs(a - b)) < 1e-6
    v0_exact = ts ** -0.25 * (1 + 0.25 * np.log(ts))
    assert np.max(np.abs(phi_v(0, ts) - v0_exact)) < 1e-14


def test_phi_v_sqrt_branch_agreement():
    # value invariant under sqrt(v) -> -sqrt(v): compare power form against
    # the explicit two-power formula with the opposite root
    for v in (0.5, 1.0, 4.0, 9.0):
        w = math.sqrt(v)
        for t in np.linspace(0.1, 0.9, 9):
            ref = ((1 - w) * t ** ((-1 - w) / 4) - (1 + w) * t ** ((-1 + w) / 4)) / (-2 * w)
            assert phi_v(v, t) == pytest.approx(ref, rel=1e-14)


def test_phi_v_flat_at_one():
    # |phi_v(1-h) - 1| <= C h^2 with stable fitted C (a_1 = 0)
    for v in (0.5, 4, 9):
        cs = []
        for h in (1e-3, 1e-4):
            cs.append(abs(phi_v(v, 1 - h) - 1.0) / h ** 2)
        assert cs[0] == pytest.approx(cs[1], rel=0.05)


def test_m_delta():
    assert m_delta_from_v(1) == (0, F(1, 2))
    assert m_delta_from_v(9) == (1, F(0))
    assert m_delta_from_v(0) == (0, F(1, 4))
    assert m_delta_from_v(4) == (0, F(3, 4))


def test_phi_v_l_coefficients():
    assert phi_v_l_coefficients(1, 3) == [1, 0, 0, 0]
    for v in (0, F(1, 4), 2, 9):
        assert phi_v_l_coefficients(v, 1)[1] == 0  # a_1 always vanishes
    assert phi_v_l_coefficients(9, 2)[2] == F(1, 4)
    assert phi_v_l_coefficients(0, 2)[2] == F(-1, 32)  # (1-j)/(4^j j!) at j=2


def test_density_in_L_of_plain_L():
    phi = density_in_L(S.variable(10))
    # e^L: constant term 1
    assert phi.coeff(0) == 1
    assert phi.coeff(1) == 1
    assert phi.coeff(2) == F(1, 2)


def test_density_in_L_germ_chain():
    # germ chain with generic A1, A2: these f-germ coefficients produce
    # phi = 1 - (2 A1/3) L + ((4 A1^2 + A1 - 6 A2)/12) L^2 + ...
    A1, A2 = F(5, 7), F(1, 3)
    f = S({(F(1), 0): F(1),
           (F(2), 0): -(2 * A1 + 3) / 12,
           (F(3), 0): (4 * A1 ** 2 + 6 * A1 + 3 - 12 * A2) / 72}, 3)
    phi = density_in_L(f)
    assert phi.coeff(0) == 1
    assert phi.coeff(1) == -2 * A1 / 3
    assert phi.coeff(2) == (4 * A1 ** 2 + A1 - 6 * A2) / 12


def test_density_in_L_checks_normalization():
    with pytest.raises(NormalizationError):
        density_in_L(S.from_power_coeffs([F(1)]))  # constant lead
    with pytest.raises(NormalizationError):
        density_in_L(S({(F(1), 0): F(2)}, 6))  # non-unit L coefficient


def test_density_in_L_matches_numeric_density_near_one():
    # coefficient extraction vs numeric W[f] at small L, catalog profiles
    for p in (RadialProfile.sqrt_poincare(), RadialProfile.explicit_n(3),
              RadialProfile.phi_v_candidate(1)):
        ser = density_in_L(p.l_series(12))
        for L in (1e-3, 1e-2):
            t = math.exp(-L)
            assert ser.evaluate(L) == pytest.approx(
                monge_ampere_density(p, 2, t), abs=1e-8)


def test_sqrt_poincare_l_series_vs_density():
    # re-expanding 2 - 2 sqrt(t) at t = 1 gives density identically 1
    ser = density_in_L(RadialProfile.sqrt_poincare().l_series(12))
    assert ser.coeff(0) == 1
    assert all(ser.coeff(j) == 0 for j in range(1, ser.order + 1))


def test_germ_residuals():
    assert germ_residual(RadialProfile.sqrt_poincare(), 1, 8) == [0] * 9
    # f = L against v = 0: nonzero at some order <= 1
    taylor = RadialProfile.taylor_at_one([1.0])
    res = germ_residual(taylor, 0, 1)
    assert any(abs(float(r)) > 0 for r in res)
    # balanced candidate matches its germ through order 3, deviates at 4
    res3 = germ_residual(RadialProfile.phi_v_candidate(1), 1, 3)
    assert res3 == [0, 0, 0, 0]
    res4 = germ_residual(RadialProfile.phi_v_candidate(1), 1, 4)
    assert res4[4] != 0


def test_taylor_profile_validity_window():
    p = RadialProfile.taylor_at_one([1.0, -0.25])
    p.eval(0.75)  # L ~ 0.29 ok
    with pytest.raises(DomainError):
        p.eval(0.3)  # L ~ 1.2 beyond the trusted window


def test_taylor_truncation_bound():
    p = RadialProfile.taylor_at_one([1.0, -0.25])
    t = 0.8
    L = -np.log(t)
    assert p.taylor_truncation_bound(t) == pytest.approx(0.25 * L ** 2)
    with pytest.raises(CapabilityError):
        RadialProfile.sqrt_poincare().taylor_truncation_bound(0.8)


def test_taylor_profile_normalization():
    p = RadialProfile.taylor_at_one([2.0, 1.0])
    f, fp, _ = p.eval(1 - 1e-8)
    assert fp == pytest.approx(-1.0, abs=1e-6)
    with pytest.raises(NormalizationError):
        RadialProfile.taylor_at_one([0.0, 1.0])


def test_json_round_trip():
    p = RadialProfile.phi_v_candidate(1)
    q = RadialProfile.from_json(p.to_json())
    assert q.kind == p.kind and q.params["v"] == 1
    r = RadialProfile.from_json('{"kind": "explicit_n", "params": {"n": 4}}')
    assert r.params["n"] == 4
    with pytest.raises(DomainError):
        RadialProfile.from_json('{"params": {}}')


def test_scale_applies_after_normalization():
    p = RadialProfile.sqrt_poincare(scale=2.0)
    f, fp, fpp = p.eval(0.25)
    assert (f, fp, fpp) == (2.0, -4.0, 8.0)
