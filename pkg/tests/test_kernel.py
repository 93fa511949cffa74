import math
import warnings
from fractions import Fraction as F

import numpy as np
import pytest

from kepler_balance import kernel as K
from kepler_balance.errors import (
    CapabilityError,
    DivergenceError,
    DomainError,
    SignedDensityWarning,
)
from kepler_balance.profiles import RadialProfile


def test_dimension_count():
    assert K.dimension_count(3, 2) == 7
    assert K.dimension_count(0, 2) == 1
    assert K.dimension_count(2, 3) == 9
    assert all(K.dimension_count(k, 2) == 2 * k + 1 for k in range(20))
    with pytest.raises(DomainError):
        K.dimension_count(-1, 2)


def test_moments_constant_one():
    ms = K.moments(RadialProfile.constant_one(), 10)
    for k in range(11):
        assert ms.c(k) == pytest.approx(1.0 / (k + 1), rel=1e-13)
        assert ms.err(k) <= 1e-12


def test_moment_spot_values():
    assert K.moments(K.phi_v_density(9), 3).c(1) == pytest.approx(0.6, rel=1e-12)
    assert K.moments(K.phi_v_density(0), 3).c(0) == pytest.approx(8 / 9, rel=1e-12)


@pytest.mark.parametrize("v", [0, 0.5, 1, 4, 9])
def test_moments_match_closed_form(v):
    dens = K.phi_v_density(v)
    ms = K.moments(dens, 20, tol=1e-12)
    for k in range(ms.k_min, 21):
        cf = float(K.moment_phi_v_closed(v, k))
        assert ms.c(k) == pytest.approx(cf, rel=1e-10)


def test_moment_monotone_decreasing():
    for v in (0, 1, 9):
        ms = K.moments(K.phi_v_density(v), 15)
        cs = [ms.c(k) for k in range(ms.k_min, 16)]
        assert all(c > 0 for c in cs)
        assert all(a > b for a, b in zip(cs, cs[1:]))


def test_k_min_detection_and_divergence():
    assert K.phi_v_density(9).k_min == 1
    assert K.phi_v_density(1).k_min == 0
    with pytest.raises(DivergenceError) as exc:
        K.moments(K.phi_v_density(9), 5).c(0)
    assert exc.value.k_min == 1
    with pytest.raises(DivergenceError):
        K.moment_phi_v_closed(9, 0)
    with pytest.raises(DivergenceError):
        K.moments(K.phi_v_density(9), 0)


def test_moment_closed_form_values():
    assert K.moment_phi_v_closed(1, 2) == F(1, 3)
    assert K.moment_phi_v_closed(9, 1) == F(3, 5)
    assert K.moment_phi_v_closed(0, 0) == F(8, 9)
    with pytest.raises(CapabilityError):
        K.moment_phi_v_closed(-1, 0)


def test_negative_v_density_flagged():
    K._PHI_V_DENSITIES.pop(-4.0, None)
    with pytest.warns(SignedDensityWarning):
        dens = K.phi_v_density(-4)
    assert dens.sign_changing
    ms = K.moments(dens, 5)
    assert ms.sign_changing
    assert all(np.isfinite(ms.c(k)) for k in range(6))


def test_kernel_series_examples():
    dens = K.profile_as_density(RadialProfile.constant_one())
    assert K.kernel_series(dens, 2, 0.5, 1e-11).value == pytest.approx(20.0, rel=1e-11)
    assert K.kernel_series(dens, 2, 0.0).value == pytest.approx(1.0, rel=1e-13)
    ke = K.kernel_series(K.phi_v_density(9), 2, 0.5, 1e-11)
    assert ke.value == pytest.approx(K.closed_form_F_phi_v(9, 0.5), rel=1e-9)


@pytest.mark.parametrize("v", [0, 1, 9])
@pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
def test_kernel_series_vs_closed_form(v, t):
    ke = K.kernel_series(K.phi_v_density(v), 2, t, tol=1e-12)
    cf = K.closed_form_F_phi_v(v, t)
    assert ke.value == pytest.approx(cf, rel=1e-9)
    assert ke.tail_bound <= 1e-12 * 1.01


def test_kernel_eval_tail_invariant():
    dens = K.phi_v_density(1)
    ke = K.kernel_series(dens, 2, 0.6, tol=1e-9)
    total = 0.0
    for k in range(2 * ke.terms_used):
        total += K.dimension_count(k, 2) / dens.moment(k)[0] * 0.6 ** k
    assert abs(total - ke.value) < ke.tail_bound


def test_kernel_series_vanishes_at_zero_when_moments_diverge():
    # for v = 9 the k = 0 moment diverges: its reciprocal vanishes, F(0) = 0
    assert K.kernel_series(K.phi_v_density(9), 2, 0.0).value == 0.0
    assert K.closed_form_F_phi_v(9, 0.0) == 0.0


def test_closed_form_values():
    assert K.closed_form_F_phi_v(1, 0.5) == pytest.approx(20.0)
    assert K.closed_form_F_phi_v(1, 0.0) == pytest.approx(1.0)
    assert K.closed_form_F_phi_v(9, 0.5) == pytest.approx(18.0)
    # v=9, t=0.5: numerator t(5 - t) per m=1, delta=0
    assert K.closed_form_F_phi_v(9, 0.5) == pytest.approx(0.5 * 4.5 / 0.125)


def test_balanced_defect_candidate_grid():
    cand = RadialProfile.phi_v_candidate(1)
    dens = K.associated_density(cand, 2)
    grid = np.linspace(0.01, 0.95, 40)
    defs = K.balanced_defect(cand, 2, 4, grid, density=dens)
    assert np.max(np.abs(defs)) <= 1e-9
    assert K.balanced_defect(cand, 2, 4, 0.5, density=dens) == pytest.approx(0.0, abs=1e-10)
    assert K.balanced_defect(cand, 2, 4, 0.0, density=dens) == pytest.approx(0.0, abs=1e-10)


def test_balanced_defect_sqrt_at_zero():
    assert K.balanced_defect(RadialProfile.sqrt_poincare(), 2, 4, 0.0) == pytest.approx(0.5, abs=1e-10)


def test_estimate_c():
    assert K.estimate_c(RadialProfile.phi_v_candidate(1), 2) == pytest.approx(4.0, abs=1e-6)
    assert K.estimate_c(RadialProfile.sqrt_poincare(), 2) == pytest.approx(4.0, abs=1e-4)


def test_estimate_c_scaling_homogeneity():
    # holding the density fixed, f -> 2f scales f^(n+1) F by 2^(n+1)
    base = K.density_from_profile(RadialProfile.sqrt_poincare(), 2)
    c2 = K.estimate_c(RadialProfile.sqrt_poincare(scale=2.0), 2, density=base)
    assert c2 == pytest.approx(32.0, abs=1e-3)


def test_moment_determinism():
    dens = K.Density(lambda t: np.ones_like(t), 0.0, label="unit")
    a = dens.moment(7)[0]
    dens2 = K.Density(lambda t: np.ones_like(t), 0.0, label="unit2")
    dens2.moments_block(12)
    assert dens2._cache[7][0] == a  # identical bits regardless of fill order
