"""Truncated bi-graded power-log expansions with exact or floating coefficients.

A :class:`PowerLogSeries` is a finite sum

    sum_{(a, j)} c[a, j] * X**a * log(1/X)**j

in a formal small variable ``X``, truncated at a known order: terms with
``a > order`` are unknown (not zero).  Powers ``a`` may be negative and
rational (``Fraction``) or floating; log-powers ``j`` are nonnegative
integers.  Coefficients stay ``Fraction`` as long as every input is
rational, so chains of operations can be checked identically.

Two views of the same structure are used elsewhere:

* ``LSeries`` -- X = L = log(1/t), boundary expansions at t = 1;
* ``InverseKSeries`` -- X = 1/(k+1), large-index moment asymptotics,
  where log(1/X) = log(k+1).
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from .errors import NormalizationError, TruncationError

DEFAULT_ORDER = 12

_INF = float("inf")


def _as_power(a):
    """Normalize an exponent to Fraction when it is rational."""
    if isinstance(a, float):
        return a
    if isinstance(a, Rational):
        return Fraction(a)
    raise TypeError(f"bad exponent type: {type(a)!r}")


def nth_root_fraction(x: Fraction, q: int):
    """Exact q-th root of a nonnegative Fraction, or None if irrational."""
    if x < 0:
        return None
    num = round(x.numerator ** (1.0 / q))
    den = round(x.denominator ** (1.0 / q))
    for n in (num - 1, num, num + 1):
        for d in (den - 1, den, den + 1):
            if n >= 0 and d > 0 and Fraction(n, d) ** q == x:
                return Fraction(n, d)
    return None


class PowerLogSeries:
    """Finite expansion sum c[a,j] X^a (log 1/X)^j, truncated past ``order``."""

    __slots__ = ("terms", "order")

    def __init__(self, terms=None, order=DEFAULT_ORDER):
        if isinstance(order, Fraction) and order.denominator == 1:
            order = int(order)
        self.order = order
        self.terms = {}
        if terms:
            for (a, j), c in terms.items():
                a = _as_power(a)
                if j < 0 or int(j) != j:
                    raise ValueError("log powers must be nonnegative integers")
                if c != 0 and a <= order:
                    self.terms[(a, int(j))] = self.terms.get((a, int(j)), 0) + c
            self.terms = {k: v for k, v in self.terms.items() if v != 0}

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, order=DEFAULT_ORDER):
        return cls({}, order)

    @classmethod
    def const(cls, c, order=DEFAULT_ORDER):
        return cls({(Fraction(0), 0): c}, order)

    @classmethod
    def variable(cls, order=DEFAULT_ORDER):
        return cls({(Fraction(1), 0): Fraction(1)}, order)

    @classmethod
    def from_power_coeffs(cls, coeffs, order=None, start=0):
        """Plain power series from a coefficient list: coeffs[i] * X^(start+i)."""
        if order is None:
            order = start + len(coeffs) - 1
        return cls({(Fraction(start + i), 0): c for i, c in enumerate(coeffs)}, order)

    # -- inspection ---------------------------------------------------

    def coeff(self, a, j=0):
        return self.terms.get((_as_power(a), j), Fraction(0))

    def min_power(self):
        if not self.terms:
            return _INF
        return min(a for (a, _j) in self.terms)

    def max_log_power(self):
        return max((j for (_a, j) in self.terms), default=0)

    def is_log_free(self):
        return self.max_log_power() == 0

    def is_rational(self):
        return all(isinstance(c, Rational) for c in self.terms.values()) and all(
            not isinstance(a, float) for (a, _j) in self.terms
        )

    def items_sorted(self):
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1]))

    def power_coeffs(self, through, j=0):
        """Coefficients of X^0..X^through at log power j (integer grading)."""
        if through > self.order:
            raise TruncationError(
                f"series known through order {self.order}, requested {through}"
            )
        return [self.coeff(Fraction(i), j) for i in range(through + 1)]

    def __repr__(self):
        if not self.terms:
            return f"PowerLogSeries(0; order={self.order})"
        bits = []
        for (a, j), c in self.items_sorted()[:8]:
            piece = f"{c}*X^{a}"
            if j:
                piece += f"*log(1/X)^{j}"
            bits.append(piece)
        if len(self.terms) > 8:
            bits.append("...")
        return f"PowerLogSeries({' + '.join(bits)}; order={self.order})"

    # -- ring operations ----------------------------------------------

    def truncate(self, order):
        return PowerLogSeries(
            {k: c for k, c in self.terms.items() if k[0] <= order}, order
        )

    def __neg__(self):
        return PowerLogSeries({k: -c for k, c in self.terms.items()}, self.order)

    def _coerce(self, other):
        if isinstance(other, PowerLogSeries):
            return other
        if isinstance(other, (int, Fraction)):
            return PowerLogSeries.const(Fraction(other), self.order)
        if isinstance(other, float):
            return PowerLogSeries.const(other, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        order = min(self.order, other.order)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return PowerLogSeries(out, order)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, Fraction)):
            return PowerLogSeries(
                {k: c * other for k, c in self.terms.items()}, self.order
            )
        if not isinstance(other, PowerLogSeries):
            return NotImplemented
        # first unknown power of the product
        a0 = self.min_power()
        b0 = other.min_power()
        if a0 is _INF and b0 is _INF:
            return PowerLogSeries.zero(min(self.order, other.order))
        ua = self.order + 1 if a0 is not _INF else _INF
        ub = other.order + 1 if b0 is not _INF else _INF
        unknown = min(
            (ua + b0) if ua is not _INF else _INF,
            (ub + a0) if ub is not _INF else _INF,
        )
        order = unknown - 1 if unknown is not _INF else min(self.order, other.order)
        out = {}
        for (a1, j1), c1 in self.terms.items():
            for (a2, j2), c2 in other.terms.items():
                a = a1 + a2
                if a > order:
                    continue
                k = (a, j1 + j2)
                out[k] = out.get(k, 0) + c1 * c2
        return PowerLogSeries(out, order)

    __rmul__ = __mul__

    def deriv(self):
        """Formal d/dX.  d/dX [X^a log(1/X)^j] = a X^(a-1) log^j - j X^(a-1) log^(j-1)."""
        out = {}
        for (a, j), c in self.terms.items():
            k1 = (a - 1, j)
            out[k1] = out.get(k1, 0) + c * a
            if j >= 1:
                k2 = (a - 1, j - 1)
                out[k2] = out.get(k2, 0) - c * j
        return PowerLogSeries(out, self.order - 1)

    # -- leading-term helpers ------------------------------------------

    def _leading_monomial(self):
        """(a0, c0) of the unique minimal-power term; requires log-free leading slice."""
        if not self.terms:
            raise NormalizationError("cannot invert the zero series")
        a0 = self.min_power()
        lead = [(j, c) for (a, j), c in self.terms.items() if a == a0]
        if len(lead) != 1 or lead[0][0] != 0:
            raise NormalizationError(
                "leading slice must be a single log-free monomial"
            )
        return a0, lead[0][1]

    def _one_plus_u(self):
        """Split A = c0 X^a0 (1 + u) and return (a0, c0, u) with min_power(u) > 0."""
        a0, c0 = self._leading_monomial()
        shifted = {}
        for (a, j), c in self.terms.items():
            if (a, j) == (a0, 0):
                continue
            shifted[(a - a0, j)] = c / c0
        u = PowerLogSeries(shifted, self.order - a0)
        if u.terms and u.min_power() <= 0:
            raise NormalizationError("series is not monomial-led")
        return a0, c0, u

    def _shift(self, da):
        return PowerLogSeries(
            {(a + da, j): c for (a, j), c in self.terms.items()}, self.order + da
        )

    def reciprocal(self):
        """1/A for a monomial-led series (geometric expansion)."""
        a0, c0, u = self._one_plus_u()
        inv_c0 = Fraction(1, 1) / c0 if isinstance(c0, Rational) else 1.0 / c0
        acc = PowerLogSeries.const(Fraction(1), u.order)
        if u.terms:
            p0 = u.min_power()
            nmax = int(math.floor(float(u.order) / float(p0))) + 1
            term = PowerLogSeries.const(Fraction(1), u.order)
            for n in range(1, nmax + 1):
                term = (term * u).truncate(u.order)
                if not term.terms:
                    break
                acc = acc + term * Fraction(-1) ** n
        return (acc * inv_c0)._shift(-a0)

    def log(self):
        """log(A) for A = 1 + u with u small; returns log-free-constant + series."""
        a0, c0, u = self._one_plus_u()
        if a0 != 0 or c0 != 1:
            raise NormalizationError("log requires unit leading coefficient")
        acc = PowerLogSeries.zero(u.order)
        if u.terms:
            p0 = u.min_power()
            nmax = int(math.floor(float(u.order) / float(p0))) + 1
            term = PowerLogSeries.const(Fraction(1), u.order)
            for n in range(1, nmax + 1):
                term = (term * u).truncate(u.order)
                if not term.terms:
                    break
                acc = acc + term * (Fraction(-1) ** (n + 1) / Fraction(n))
        return acc

    def exp(self):
        """exp(A) for A with strictly positive minimal power."""
        if self.terms and self.min_power() <= 0:
            raise NormalizationError("exp requires a series vanishing at X=0")
        acc = PowerLogSeries.const(Fraction(1), self.order)
        if not self.terms:
            return acc
        p0 = self.min_power()
        nmax = int(math.floor(float(self.order) / float(p0))) + 1
        term = PowerLogSeries.const(Fraction(1), self.order)
        fact = Fraction(1)
        for n in range(1, nmax + 1):
            term = (term * self).truncate(self.order)
            if not term.terms:
                break
            fact = fact / n
            acc = acc + term * fact
        return acc

    def pow_fraction(self, alpha):
        """A**alpha via exp(alpha log) on the unit part; exact for rational data."""
        alpha = Fraction(alpha) if not isinstance(alpha, float) else alpha
        a0, c0, u = self._one_plus_u()
        unit = PowerLogSeries({(Fraction(0), 0): Fraction(1)}, u.order)
        body = (unit + u).log() * alpha
        powered = body.exp()
        if c0 == 1:
            c_pow = Fraction(1)
        elif isinstance(c0, Rational) and isinstance(alpha, Fraction):
            root = nth_root_fraction(Fraction(c0), alpha.denominator)
            c_pow = root ** alpha.numerator if root is not None else float(c0) ** float(alpha)
        else:
            c_pow = float(c0) ** float(alpha)
        new_a0 = a0 * alpha
        return (powered * c_pow)._shift(new_a0)

    def cbrt(self):
        return self.pow_fraction(Fraction(1, 3))

    # -- evaluation ----------------------------------------------------

    def evaluate(self, x, log_inv_x=None):
        """Numeric value at X = x (float).  log(1/X) supplied or computed.

        Terms like c X^a with c ~ 1/a! and x^a overflowing pairwise are
        combined in log space.
        """
        x = float(x)
        if log_inv_x is None:
            log_inv_x = math.log(1.0 / x) if any(j for (_a, j) in self.terms) else 0.0
        lx = math.log(x)
        total = 0.0
        for (a, j), c in self.items_sorted():
            cf = float(c)
            if cf == 0.0:
                continue
            la = float(a) * lx
            if abs(la) > 650.0:
                lt = la + math.log(abs(cf))
                power = 0.0 if lt < -745.0 else math.copysign(math.exp(lt), cf)
            else:
                power = cf * x ** float(a)
            total += power * log_inv_x ** j
        return total

    def evaluate_exact(self, x):
        """Exact evaluation at rational x; requires a log-free rational series."""
        if not self.is_log_free() or not self.is_rational():
            raise NormalizationError("exact evaluation needs a log-free rational series")
        x = Fraction(x)
        return sum(c * x ** a for (a, _j), c in self.terms.items())

    def last_term_magnitude(self, x):
        """Magnitude of the highest-order retained term at X = x (error proxy)."""
        if not self.terms:
            return 0.0
        amax = max(a for (a, _j) in self.terms)
        x = float(x)
        lx = math.log(1.0 / x)
        return sum(
            abs(float(c)) * x ** float(a) * abs(lx) ** j
            for (a, j), c in self.terms.items()
            if a == amax
        )


# Aliases used by the domain modules: the L-variable boundary series and the
# 1/(k+1) moment-asymptotics series share the representation.
LSeries = PowerLogSeries
InverseKSeries = PowerLogSeries
