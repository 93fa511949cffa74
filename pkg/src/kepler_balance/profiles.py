"""Radial weight profiles f(t), their derivatives, and the Monge-Ampere density.

A profile is the radial part of a weight u(z) = f(|z|^2) on the unit ball of
the Kepler manifold, normalized so that f(1) = 0 and f'(1) = -1 for the
boundary-vanishing kinds.  The catalog manipulated here:

    sqrt_poincare     f(t) = 2 - 2 sqrt(t)
    explicit_n        g_n(t) = n/(n-1) (1 - t^((n-1)/n)),  n >= 2
    phi_v_candidate   the closed-form balanced candidate for parameter v >= 0
    taylor_at_one     finite L-series at t = 1 (L = log 1/t)
    poincare_numeric  numeric radial Kahler-Einstein solution (module poincare)
    constant_one      the constant density 1

All evaluations are closed-form (finite-difference free) and accept scalars
or numpy arrays.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
import numpy as np

from .errors import CapabilityError, DomainError, NormalizationError, TruncationError
from .series import LSeries, PowerLogSeries, nth_root_fraction

KINDS = (
    "sqrt_poincare",
    "explicit_n",
    "phi_v_candidate",
    "taylor_at_one",
    "poincare_numeric",
    "constant_one",
)

TAYLOR_VALID_L = 0.5  # taylor_at_one profiles are trusted for L <= 0.5


def sqrt_of(v):
    """Square root keeping Fractions exact when possible."""
    if isinstance(v, Rational):
        r = nth_root_fraction(Fraction(v), 2)
        if r is not None:
            return r
    if v < 0:
        raise DomainError("negative argument")
    return math.sqrt(float(v))


def m_delta_from_v(v):
    """Split (sqrt(v) - 3)/4 = m - 1 + delta with integer m >= 0, 0 <= delta < 1."""
    if v < 0:
        raise DomainError("v must be nonnegative")
    w = sqrt_of(v)
    x = (w + 1) / 4
    m = int(math.floor(float(x)))
    if isinstance(x, Fraction) and x == m:
        delta = Fraction(0)
    else:
        delta = x - m
    return m, delta


def _maybe_scalar(value, scalar_in):
    if scalar_in:
        return float(value)
    return value


def phi_v(v, t):
    """The boundary germ family phi_v(t); invariant under sqrt(v) -> -sqrt(v).

    For v > 0 the two-power form is used; v ~ 0 goes through a short Taylor
    expansion in v to dodge the 0/0 cancellation; v < 0 uses the
    trigonometric form (the density then changes sign as t -> 0).
    """
    scalar = np.isscalar(t)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or np.any(t > 1):
        raise DomainError("t must lie in (0, 1]")
    v = float(v)
    if abs(v) <= 1e-6:
        L = -np.log(t)
        x = L / 4.0
        acc = np.zeros_like(t)
        for i in range(3, -1, -1):
            coef = x ** (2 * i) / math.factorial(2 * i) - x ** (2 * i + 1) / math.factorial(2 * i + 1)
            acc = acc * v + coef
        return _maybe_scalar(np.exp(x) * acc, scalar)
    if v > 0:
        w = math.sqrt(v)
        val = ((1 + w) * t ** ((-1 + w) / 4) - (1 - w) * t ** ((-1 - w) / 4)) / (2 * w)
        return _maybe_scalar(val, scalar)
    s = math.sqrt(-v)
    L = -np.log(t)
    val = np.exp(L / 4) * (np.cos(L * s / 4) - np.sin(L * s / 4) / s)
    return _maybe_scalar(val, scalar)


def phi_v_l_coefficients(v, J):
    """Taylor coefficients a_0..a_J of phi_v in L at L = 0.

    a_j = [(1+w)(1-w)^j - (1-w)(1+w)^j] / (4^j j! 2w) with w = sqrt(v);
    at v = 0 the limit is (1-j)/(4^j j!).  Exact rationals whenever sqrt(v)
    is rational.
    """
    if J < 0:
        raise DomainError("J must be >= 0")
    if v == 0:
        return [Fraction(1 - j, 4 ** j * math.factorial(j)) for j in range(J + 1)]
    w = sqrt_of(v)
    out = []
    for j in range(J + 1):
        num = (1 + w) * (1 - w) ** j - (1 - w) * (1 + w) ** j
        den = 4 ** j * math.factorial(j) * 2 * w
        if isinstance(w, Fraction):
            out.append(Fraction(num) / den)
        else:
            out.append(num / den)
    return out


def phi_v_l_series(v, order):
    """phi_v as an LSeries at the boundary."""
    coeffs = phi_v_l_coefficients(v, order)
    return PowerLogSeries({(Fraction(j), 0): c for j, c in enumerate(coeffs)}, order)


@dataclass(frozen=True)
class RadialProfile:
    """Immutable radial profile; ``scale`` multiplies f after normalization."""

    kind: str
    params: dict = field(default_factory=dict)
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS and self.kind != "custom":
            raise DomainError(f"unknown profile kind {self.kind!r}")
        if self.kind == "explicit_n" and int(self.params.get("n", 0)) < 2:
            raise DomainError("explicit_n requires integer n >= 2")
        if self.kind == "phi_v_candidate":
            if float(self.params.get("v", -1)) < 0:
                raise DomainError("phi_v_candidate requires v >= 0")
        if self.kind == "taylor_at_one":
            coeffs = self.params.get("coeffs")
            if not coeffs or coeffs[0] == 0:
                raise NormalizationError(
                    "taylor_at_one needs L-coefficients starting with nonzero a_1"
                )

    # -- constructors ---------------------------------------------------

    @classmethod
    def sqrt_poincare(cls, scale=1.0):
        return cls("sqrt_poincare", {}, scale)

    @classmethod
    def explicit_n(cls, n, scale=1.0):
        return cls("explicit_n", {"n": int(n)}, scale)

    @classmethod
    def phi_v_candidate(cls, v, scale=1.0):
        return cls("phi_v_candidate", {"v": v}, scale)

    @classmethod
    def taylor_at_one(cls, coeffs, scale=1.0):
        """Coefficients of L^1, L^2, ... ; rescaled so the leading one is 1."""
        a1 = coeffs[0]
        if a1 == 0:
            raise NormalizationError("leading L-coefficient must be nonzero")
        normalized = [c / a1 for c in coeffs]
        return cls("taylor_at_one", {"coeffs": tuple(normalized)}, scale)

    @classmethod
    def poincare_numeric(cls, solution, scale=1.0):
        return cls("poincare_numeric", {"solution": solution}, scale)

    @classmethod
    def constant_one(cls, scale=1.0):
        return cls("constant_one", {}, scale)

    @classmethod
    def custom(cls, f, fp, fpp, scale=1.0):
        """Internal/testing escape hatch: explicit callables (not in the JSON schema)."""
        return cls("custom", {"f": f, "fp": fp, "fpp": fpp}, scale)

    # -- JSON interface ---------------------------------------------------

    @classmethod
    def from_json(cls, payload):
        """Build from {"kind": ..., "params": {...}} (dict, JSON text, or path)."""
        if isinstance(payload, str):
            try:
                data = json.loads(payload)
            except json.JSONDecodeError:
                with open(payload, "r", encoding="utf-8") as fh:
                    data = json.load(fh)
        else:
            data = payload
        if not isinstance(data, dict) or "kind" not in data:
            raise DomainError("profile JSON must carry a 'kind' field")
        kind = data["kind"]
        params = dict(data.get("params", {}))
        scale = float(params.pop("scale", 1.0))
        if kind == "sqrt_poincare":
            return cls.sqrt_poincare(scale)
        if kind == "explicit_n":
            return cls.explicit_n(params["n"], scale)
        if kind == "phi_v_candidate":
            return cls.phi_v_candidate(params["v"], scale)
        if kind == "taylor_at_one":
            return cls.taylor_at_one(list(params["coeffs"]), scale)
        if kind == "constant_one":
            return cls.constant_one(scale)
        if kind == "poincare_numeric":
            from .poincare import solve_poincare

            sol = solve_poincare(
                params["c"],
                t_min=params.get("t_min", 1e-4),
                tol=params.get("tol", 1e-10),
            )
            return cls.poincare_numeric(sol, scale)
        raise DomainError(f"unknown profile kind {kind!r}")

    def to_json(self):
        params = {
            k: v for k, v in self.params.items() if k not in ("solution", "f", "fp", "fpp")
        }
        if self.kind == "poincare_numeric" and "solution" in self.params:
            params["c"] = self.params["solution"].c
        if self.scale != 1.0:
            params["scale"] = self.scale
        return json.dumps({"kind": self.kind, "params": params}, sort_keys=True)

    # -- evaluation -------------------------------------------------------

    def eval(self, t, order=2):
        """Return (f, f', f'') at t in (0,1); entries past ``order`` still filled.

        Closed-form derivatives for the catalog kinds; poincare_numeric
        reconstructs f'' from the unit Monge-Ampere relation.
        """
        if order not in (0, 1, 2):
            raise CapabilityError("order must be 0, 1 or 2")
        scalar = np.isscalar(t)
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0.0) or np.any(t >= 1.0 + 1e-15):
            raise DomainError("t must lie in (0, 1)")
        f, fp, fpp = self._eval_impl(t)
        s = self.scale
        if s != 1.0:
            f, fp, fpp = f * s, fp * s, fpp * s
        if scalar:
            return (
                float(np.asarray(f).reshape(-1)[0]),
                float(np.asarray(fp).reshape(-1)[0]),
                float(np.asarray(fpp).reshape(-1)[0]),
            )
        return f, fp, fpp

    def _eval_impl(self, t):
        kind = self.kind
        if kind == "sqrt_poincare":
            rt = np.sqrt(t)
            return 2.0 - 2.0 * rt, -1.0 / rt, 0.5 * t ** -1.5
        if kind == "explicit_n":
            n = self.params["n"]
            b = (n - 1.0) / n
            f = (n / (n - 1.0)) * (1.0 - t ** b)
            fp = -t ** (b - 1.0)
            fpp = (1.0 / n) * t ** (b - 2.0)
            return f, fp, fpp
        if kind == "phi_v_candidate":
            return self._eval_candidate(t)
        if kind == "taylor_at_one":
            return self._eval_taylor(t)
        if kind == "poincare_numeric":
            sol = self.params["solution"]
            return sol.eval(t)
        if kind == "constant_one":
            one = np.ones_like(t)
            zero = np.zeros_like(t)
            return one, zero, zero
        if kind == "custom":
            p = self.params
            return (
                np.asarray(p["f"](t), dtype=float),
                np.asarray(p["fp"](t), dtype=float),
                np.asarray(p["fpp"](t), dtype=float),
            )
        raise CapabilityError(f"kind {kind!r} cannot be evaluated")

    def _eval_candidate(self, t):
        v = self.params["v"]
        m, delta = m_delta_from_v(v)
        m = float(m)
        delta = float(delta)
        dcoef = delta * (4 * m + 2 * delta - 1)
        u = 1.0 - t
        D = 1.0 + 3.0 * t + 4.0 * m * u - dcoef * u * u
        Dp = 3.0 - 4.0 * m + 2.0 * dcoef * u
        Dpp = -2.0 * dcoef
        f = 2.0 ** (2.0 / 3.0) * t ** (-m / 3.0) * u * D ** (-1.0 / 3.0)
        # g1 = f'/f,  g1' = (f'/f)'
        g1 = -m / (3.0 * t) - 1.0 / u - Dp / (3.0 * D)
        g1p = m / (3.0 * t * t) - 1.0 / (u * u) - (Dpp * D - Dp * Dp) / (3.0 * D * D)
        fp = f * g1
        fpp = f * (g1p + g1 * g1)
        return f, fp, fpp

    def _eval_taylor(self, t):
        L = -np.log(t)
        if np.any(L > TAYLOR_VALID_L):
            raise DomainError(
                f"taylor_at_one profile valid only for L <= {TAYLOR_VALID_L}"
            )
        coeffs = [float(c) for c in self.params["coeffs"]]
        f = sum(c * L ** (i + 1) for i, c in enumerate(coeffs))
        fL = sum((i + 1) * c * L ** i for i, c in enumerate(coeffs))
        fLL = sum((i + 1) * i * c * L ** (i - 1) for i, c in enumerate(coeffs) if i >= 1)
        fp = -fL / t
        fpp = (fL + fLL) / (t * t)
        return np.asarray(f), np.asarray(fp), np.asarray(fpp)

    def taylor_truncation_bound(self, t):
        """Last-term magnitude of the stored L-series at t (taylor_at_one only)."""
        if self.kind != "taylor_at_one":
            raise CapabilityError("only taylor_at_one carries a truncation bound")
        coeffs = self.params["coeffs"]
        L = -math.log(float(t))
        return abs(float(coeffs[-1])) * L ** len(coeffs)

    # -- boundary series ----------------------------------------------------

    def l_series(self, order):
        """Exact L-expansion of f at t = 1 (kinds with closed forms)."""
        one = PowerLogSeries.const(Fraction(1), order)
        L = PowerLogSeries.variable(order)
        kind = self.kind
        if kind == "sqrt_poincare":
            ser = (one - (L * Fraction(-1, 2)).exp()) * Fraction(2)
        elif kind == "explicit_n":
            n = self.params["n"]
            ser = (one - (L * Fraction(-(n - 1), n)).exp()) * Fraction(n, n - 1)
        elif kind == "phi_v_candidate":
            ser = self._candidate_l_series(order)
        elif kind == "taylor_at_one":
            # the stored coefficients ARE the profile: a finite L-polynomial,
            # so higher coefficients are exactly zero
            coeffs = self.params["coeffs"]
            ser = PowerLogSeries(
                {(Fraction(i + 1), 0): _fract(c) for i, c in enumerate(coeffs)}, order
            )
        elif kind == "constant_one":
            ser = one
        elif kind == "poincare_numeric":
            if order > 4:
                raise CapabilityError(
                    "poincare_numeric boundary data is exact only through order 4"
                )
            from .poincare import taylor_at_one as poincare_taylor

            derivs = poincare_taylor(self.params["solution"].c, order=4)
            tm1 = (L * Fraction(-1)).exp() - one  # t - 1 as a series in L
            ser = PowerLogSeries.zero(order)
            pw = one
            for i, d in enumerate(derivs):
                if i > 0:
                    pw = pw * tm1
                ser = ser + pw * (d / math.factorial(i))
        else:
            raise CapabilityError(f"kind {kind!r} has no boundary series")
        if self.scale != 1.0:
            ser = ser * _fract(self.scale)
        return ser.truncate(order)

    def _candidate_l_series(self, order):
        v = self.params["v"]
        m, delta = m_delta_from_v(v)
        if not isinstance(delta, Fraction):
            m, delta = Fraction(m), delta  # float delta: coefficients go float
        dcoef = delta * (4 * m + 2 * delta - 1)
        one = PowerLogSeries.const(Fraction(1), order + 1)
        L = PowerLogSeries.variable(order + 1)
        t_ser = (L * Fraction(-1)).exp()
        u = one - t_ser
        D = one + t_ser * 3 + u * (4 * m) - (u * u) * dcoef
        # f = 2^(2/3) t^(-m/3) u D^(-1/3);  2^(2/3) 4^(-1/3) = 1 exactly
        body = (D * Fraction(1, 4)).pow_fraction(Fraction(-1, 3))
        exp_part = (L * Fraction(m, 3)).exp() if m else one
        return (exp_part * u * body).truncate(order)

    def associated_density_kind(self):
        """Density paired with this profile in the balanced check.

        The balanced candidate is constructed against its germ phi_v (the
        kernel moments in its defining identity are phi_v moments);
        constant_one IS a density (W[1] vanishes identically); every other
        kind pairs with its own Monge-Ampere density W[f].
        """
        if self.kind == "phi_v_candidate":
            return ("phi_v", self.params["v"])
        if self.kind == "constant_one":
            return ("self", None)
        return ("monge_ampere", None)


def _fract(x):
    """Integral floats become exact Fractions; everything else passes through."""
    if isinstance(x, Rational):
        return Fraction(x)
    if float(x).is_integer():
        return Fraction(int(x))
    return x


def eval_profile(p: RadialProfile, t, order=2):
    """Closed-form (f, f', f'') of the profile at t (no finite differences)."""
    return p.eval(t, order=order)


def monge_ampere_density(p: RadialProfile, n: int, t):
    """W[f](t) = (-1)^n t f'^(n-1) (f f' + t f f'' - t f'^2).

    This is the density of u^(n+1) wedge^n(i/2 ddbar log 1/u) against the
    invariant measure, up to the constant (n+1)^2 factor.
    """
    if int(n) < 2:
        raise DomainError("n must be an integer >= 2")
    n = int(n)
    scalar = np.isscalar(t)
    f, fp, fpp = p.eval(np.asarray(t, dtype=float) if not scalar else t, order=2)
    f = np.asarray(f, dtype=float)
    fp = np.asarray(fp, dtype=float)
    fpp = np.asarray(fpp, dtype=float)
    tt = np.asarray(t, dtype=float)
    w = (-1.0) ** n * tt * fp ** (n - 1) * (f * fp + tt * f * fpp - tt * fp * fp)
    return _maybe_scalar(w, scalar)


def density_in_L(f_series: LSeries) -> LSeries:
    """L-series of the density W[f] from the L-series of f (n = 2).

    In the boundary variable L the density is exp(L) f'(f'^2 - f f'') with
    primes denoting d/dL; for the normalized germ (f = L + ...) the constant
    term is 1.
    """
    if not f_series.terms or f_series.min_power() != 1:
        raise NormalizationError("f-series must have leading term L")
    if f_series.coeff(1, 0) != 1:
        raise NormalizationError("f-series must be normalized to f'(1) = -1 (unit L-coefficient)")
    order = f_series.order
    fL = f_series.deriv()
    fLL = fL.deriv()
    eL = PowerLogSeries.variable(order).exp()
    return eL * fL * (fL * fL - f_series * fLL)


def germ_residual(p: RadialProfile, v, order: int):
    """Taylor coefficients (in L) of W[f] - phi_v at t = 1 up to ``order``.

    All-zero output means f matches the balanced germ family at that order.
    """
    f_ser = p.l_series(order + 2)
    phi = density_in_L(f_ser)
    if phi.order < order:
        raise TruncationError("profile series too short for requested order")
    target = phi_v_l_coefficients(v, order)
    return [phi.coeff(Fraction(j), 0) - target[j] for j in range(order + 1)]
