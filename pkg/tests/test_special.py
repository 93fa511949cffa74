"""Oracle checks of the zeta/Gamma machinery against mpmath (optional dep)."""

import math

import pytest

mpmath = pytest.importorskip("mpmath")

from kepler_balance.special import (
    gamma_derivs,
    stieltjes_euler_maclaurin,
    zeta_deriv,
    zeta_deriv_over_factorial,
)

mpmath.mp.dps = 30


@pytest.mark.parametrize("s", [-8.5, -3, -2, -1, -0.5, 0, 0.25, 0.5, 2, 3, 1.1])
@pytest.mark.parametrize("n", [0, 1, 2])
def test_zeta_derivs_vs_mpmath(s, n):
    mine = zeta_deriv(s, n)
    ref = float(mpmath.zeta(s, derivative=n)) if n else float(mpmath.zeta(s))
    assert mine == pytest.approx(ref, rel=1e-11, abs=1e-12)


@pytest.mark.parametrize("x", [1.0, 0.5, 2.0, 3.7, -0.5, -1.5, -2.3])
def test_gamma_derivs_vs_mpmath(x):
    gd = gamma_derivs(x, 5)
    for j in range(6):
        ref = float(mpmath.diff(mpmath.gamma, x, j)) if j else float(mpmath.gamma(x))
        assert gd[j] == pytest.approx(ref, rel=1e-11, abs=1e-11)


def test_scaled_zeta_terms_vs_mpmath():
    for (s, k, n) in ((0.5, 300, 2), (2.0, 260, 1), (0.0, 49, 0), (3.0, 170, 2)):
        mine = zeta_deriv_over_factorial(s, k, n)
        ref = float(mpmath.zeta(s - k, derivative=n) / mpmath.factorial(k))
        assert mine == pytest.approx(ref, rel=2e-12)


def test_stieltjes_vs_mpmath():
    em = stieltjes_euler_maclaurin(10)
    for j in range(11):
        assert em[j] == pytest.approx(float(mpmath.stieltjes(j)), abs=2e-13)
