import math
from fractions import Fraction as F

import pytest

from kepler_balance.errors import NormalizationError
from kepler_balance.series import PowerLogSeries as S
from kepler_balance.series import nth_root_fraction


def test_exp_log_roundtrip():
    L = S.variable(10)
    e = L.exp()
    assert [e.coeff(i) for i in range(5)] == [1, 1, F(1, 2), F(1, 6), F(1, 24)]
    back = e.log()
    assert back.coeff(1) == 1
    assert all(back.coeff(i) == 0 for i in (0, 2, 3, 4))


def test_reciprocal_geometric():
    L = S.variable(8)
    g = (S.const(F(1), 8) - L).reciprocal()
    assert all(g.coeff(i) == 1 for i in range(8))
    # product is 1 to the stored order
    prod = g * (S.const(F(1), 8) - L)
    assert prod.coeff(0) == 1
    assert all(prod.coeff(i) == 0 for i in range(1, prod.order + 1))


def test_laurent_reciprocal():
    L = S.variable(8)
    h = (L * (S.const(F(1), 8) + L)).reciprocal()
    assert h.coeff(F(-1)) == 1
    assert h.coeff(0) == -1
    assert h.coeff(1) == 1


def test_pow_fraction_exact():
    one = S.const(F(1), 10)
    L = S.variable(10)
    a = (one + L).pow_fraction(F(1, 3))
    b = (one + L).pow_fraction(F(2, 3))
    prod = a * b
    assert prod.coeff(0) == 1
    assert prod.coeff(1) == 1
    assert all(prod.coeff(i) == 0 for i in range(2, prod.order + 1))
    assert prod.is_rational()


def test_pow_fraction_monomial_leading():
    L = S.variable(9)
    # (4 L^2 (1+L))^(1/2) = 2 L (1+L)^(1/2)
    ser = ((L * L) * (S.const(F(4), 9) + L * 4)).pow_fraction(F(1, 2))
    assert ser.coeff(1) == 2
    assert ser.coeff(2) == 1


def test_deriv_with_logs():
    # d/dX [X^2 log(1/X)] = 2X log(1/X) - X
    d = S({(F(2), 1): F(1)}, 8).deriv()
    assert d.coeff(1, 1) == 2
    assert d.coeff(1, 0) == -1


def test_mul_order_propagation():
    a = S.from_power_coeffs([1, 1], order=2)   # 1 + X, known through X^2
    b = S.variable(5)                           # X known through X^5
    prod = a * b
    assert prod.order == 3  # unknown X^3 of a times X shifts to X^4


def test_exp_requires_vanishing():
    with pytest.raises(NormalizationError):
        S.const(F(1), 5).exp()


def test_reciprocal_requires_monomial_lead():
    bad = S({(F(0), 1): F(1)}, 5)  # leading term carries a log
    with pytest.raises(NormalizationError):
        bad.reciprocal()


def test_evaluate_log_space_path():
    # coefficient 1/600! at X^600 times X = 6: representable product even
    # though 6^600 and 600! overflow separately
    ser = S({(F(600), 0): F(1, math.factorial(600)), (F(0), 0): F(1)}, 600)
    val = ser.evaluate(6.0)
    expected = 1.0 + math.exp(600 * math.log(6.0) - math.lgamma(601))
    assert val == pytest.approx(expected, rel=1e-12)


def test_evaluate_exact():
    ser = S.from_power_coeffs([F(1), F(1, 2), F(1, 3)])
    assert ser.evaluate_exact(F(1, 2)) == F(1) + F(1, 4) + F(1, 12)


def test_nth_root_fraction():
    assert nth_root_fraction(F(4, 9), 2) == F(2, 3)
    assert nth_root_fraction(F(8, 27), 3) == F(2, 3)
    assert nth_root_fraction(F(2), 2) is None
