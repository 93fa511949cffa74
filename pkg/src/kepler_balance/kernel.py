"""Moments, the weighted Bergman kernel diagonal F(t), and the balanced defect.

F(t) = sum_k N(k) / c_{k+n-2} * t^k, where N(k) counts the degree-k
holomorphic components and c_k are the moments of the density phi against
t^k on (0, 1).  For the phi_v germ family everything also has closed forms,
which the series path is cross-checked against.

Moments are computed by tanh-sinh quadrature over a fixed node set shared
across k (calibrated against the next refinement level, so every entry
carries an observed error bound); distinct k are independent and the totals
never depend on evaluation order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    CapabilityError,
    ConvergenceBudgetError,
    DivergenceError,
    DomainError,
    EstimationError,
    SignedDensityWarning,
)
from .profiles import RadialProfile, m_delta_from_v, monge_ampere_density, phi_v
from .quadrature import MAX_LEVEL, nodes_up_to

HARD_TERM_CAP = 10 ** 6


def dimension_count(k: int, n: int) -> int:
    """N(k) = C(k+n-1, n-1) + C(k+n-2, n-1); for n = 2 this is 2k + 1."""
    if k < 0:
        raise DomainError("k must be >= 0")
    if n < 2:
        raise DomainError("n must be >= 2")
    return math.comb(k + n - 1, n - 1) + math.comb(k + n - 2, n - 1)


def _k_min_from_exponent(p0) -> int:
    """Smallest integer k with k + p0 > -1 (finite moment)."""
    return max(0, math.floor(-float(p0) - 1) + 1)


@dataclass
class MomentSequence:
    """Moments c_k with per-entry absolute error bounds."""

    values: dict
    k_min: int
    sign_changing: bool = False

    def c(self, k: int) -> float:
        if k < self.k_min:
            raise DivergenceError(
                f"moment c_{k} diverges; smallest finite index is k_min={self.k_min}",
                k_min=self.k_min,
            )
        return self.values[k][0]

    def err(self, k: int) -> float:
        return self.values[k][1]

    def ks(self):
        return sorted(self.values)


@dataclass
class KernelEval:
    """One kernel-diagonal value with truncation metadata."""

    t: float
    value: float
    terms_used: int
    tail_bound: float


class Density:
    """A density on (0, 1) with a known endpoint exponent at t = 0.

    ``fn`` is vectorized; ``origin_exponent`` p0 means phi(t) ~ C t^p0
    (possibly times logs) as t -> 0, which fixes which moments exist.
    Moment values are cached; the node level is calibrated once per density.
    """

    def __init__(self, fn, origin_exponent, label="density", sign_changing=False,
                 t_floor=None):
        self.fn = fn
        self.origin_exponent = origin_exponent
        self.label = label
        self.sign_changing = sign_changing
        self.k_min = _k_min_from_exponent(origin_exponent)
        if t_floor is None:
            # keep only nodes whose truncated mass ~ t_floor^(k_min+p0+1) is
            # below roundoff; also keeps intermediate powers finite
            margin = self.k_min + float(origin_exponent) + 1.0
            t_floor = 10.0 ** (-16.0 / max(margin, 0.064))
        self.t_floor = float(min(max(t_floor, 1e-250), 1e-16))
        self._level = None
        self._values = None  # (w_level * phi, w_prev * phi, t)
        self._cache = {}

    def __repr__(self):
        return f"Density({self.label}, p0={self.origin_exponent}, k_min={self.k_min})"

    # -- node machinery -------------------------------------------------

    def _setup(self, level):
        t, _omt, w = nodes_up_to(level, t_floor=self.t_floor)
        t_prev, _o, w_prev = nodes_up_to(level - 1, t_floor=self.t_floor)
        phi = np.asarray(self.fn(t), dtype=float)
        if not np.all(np.isfinite(phi)):
            raise DomainError(f"{self.label}: non-finite density values on the node set")
        # level-(L-1) rule over the same concatenated array: its nodes are the
        # leading len(t_prev) entries, with weights twice the level-L scale.
        wp = np.zeros_like(w)
        wp[: len(w_prev)] = w_prev
        self._level = level
        self._values = (w * phi, wp * phi, t)

    def _raw_moment(self, k):
        wphi, wphi_prev, t = self._values
        pw = t ** float(k)
        val = float(np.dot(wphi, pw))
        prev = float(np.dot(wphi_prev, pw))
        return val, abs(val - prev)

    def calibrate(self, tol):
        """Pick the node level: coarsest whose k_min-moment settles within tol/4."""
        if self._level is not None:
            return
        for level in (9, 10, 11, MAX_LEVEL):
            self._setup(level)
            probes = [self.k_min, self.k_min + 7, self.k_min + 64]
            deltas = [self._raw_moment(k)[1] for k in probes]
            if max(deltas) <= max(tol, 1e-15) / 4 or level == MAX_LEVEL:
                return

    def moment(self, k, tol=1e-13):
        """c_k with an observed error bound; DivergenceError below k_min."""
        if k < self.k_min:
            raise DivergenceError(
                f"moment c_{k} of {self.label} diverges (k_min={self.k_min})",
                k_min=self.k_min,
            )
        hit = self._cache.get(k)
        if hit is not None:
            return hit
        self.calibrate(tol)
        val = self._raw_moment(k)
        self._cache[k] = val
        return val

    def moments_block(self, k_max, tol=1e-13):
        """Fill the cache for all finite k <= k_max in one incremental pass."""
        self.calibrate(tol)
        wphi, wphi_prev, t = self._values
        if all(k in self._cache for k in range(self.k_min, k_max + 1)):
            return
        pw = t ** float(self.k_min)
        for k in range(self.k_min, k_max + 1):
            if k not in self._cache:
                val = float(np.dot(wphi, pw))
                prev = float(np.dot(wphi_prev, pw))
                self._cache[k] = (val, abs(val - prev))
            pw = pw * t


_PHI_V_DENSITIES = {}


def phi_v_density(v) -> Density:
    """phi_v as a Density (cached per v); v < 0 is sign-changing but integrable."""
    key = float(v)
    if key in _PHI_V_DENSITIES:
        return _PHI_V_DENSITIES[key]
    if v >= 0:
        w = math.sqrt(float(v))
        p0 = (-1.0 - w) / 4.0
        dens = Density(lambda t, v=v: phi_v(v, t), p0, label=f"phi_{v}")
    else:
        dens = Density(
            lambda t, v=v: phi_v(v, t), -0.25, label=f"phi_{v}", sign_changing=True
        )
        warnings.warn(
            f"phi_v with v={v} < 0 changes sign: not a nonnegative volume element",
            SignedDensityWarning,
            stacklevel=2,
        )
    _PHI_V_DENSITIES[key] = dens
    return dens


def _monge_ampere_exponent(p: RadialProfile):
    kind = p.kind
    if kind in ("sqrt_poincare", "explicit_n", "constant_one", "poincare_numeric"):
        return 0.0
    if kind == "phi_v_candidate":
        m, _delta = m_delta_from_v(p.params["v"])
        return 1.0 if m == 0 else -float(m)
    raise CapabilityError(
        f"no known endpoint exponent for W[f] of kind {kind!r}; "
        "construct the Density explicitly"
    )


def density_from_profile(p: RadialProfile, n: int = 2, check_sign=True) -> Density:
    """The Monge-Ampere density W[f] of a profile, as an integrable Density."""
    p0 = _monge_ampere_exponent(p)
    dens = Density(
        lambda t: monge_ampere_density(p, n, t), p0, label=f"W[{p.kind}]"
    )
    if check_sign:
        probe = np.linspace(0.01, 0.99, 64)
        if np.any(np.asarray(monge_ampere_density(p, n, probe)) < -1e-12):
            dens.sign_changing = True
            warnings.warn(
                f"W[f] of {p.kind} takes negative values: volume form not nonnegative",
                SignedDensityWarning,
                stacklevel=2,
            )
    return dens


def profile_as_density(p: RadialProfile) -> Density:
    """A profile's own values f(t) used as a density (e.g. constant_one)."""
    if p.kind == "phi_v_candidate":
        m, _delta = m_delta_from_v(p.params["v"])
        p0 = -float(m) / 3.0
    elif p.kind == "taylor_at_one":
        raise CapabilityError("taylor_at_one is only valid near t = 1; cannot integrate")
    elif p.kind == "poincare_numeric":
        from .poincare import rho

        p0 = -rho(max(p.params["solution"].c, 0.0))
    else:
        p0 = 0.0
    return Density(lambda t: p.eval(t, order=0)[0], p0, label=f"f[{p.kind}]")


def as_density(obj, n: int = 2) -> Density:
    if isinstance(obj, Density):
        return obj
    if isinstance(obj, RadialProfile):
        return profile_as_density(obj)
    raise CapabilityError("expected a Density or RadialProfile")


def associated_density(p: RadialProfile, n: int = 2) -> Density:
    """Density paired with the profile in the balanced identity.

    The phi_v candidate was built against its germ phi_v; constant_one is
    itself the density; other kinds pair with their own W[f].
    """
    kind, v = p.associated_density_kind()
    if kind == "phi_v":
        return phi_v_density(v)
    if kind == "self":
        return profile_as_density(p)
    return density_from_profile(p, n)


def moments(phi, k_max: int, tol: float = 1e-12) -> MomentSequence:
    """Moments c_k = int_0^1 t^k phi(t) dt for k = k_min..k_max.

    ``phi`` may be a Density or a RadialProfile (interpreted as a density
    through its values).  Each entry carries an observed absolute error
    bound from comparing two quadrature refinement levels.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    dens = as_density(phi)
    if k_max < dens.k_min:
        raise DivergenceError(
            f"all requested moments diverge; k_min={dens.k_min}", k_min=dens.k_min
        )
    dens.moments_block(k_max, tol)
    vals = {k: dens._cache[k] for k in range(dens.k_min, k_max + 1)}
    return MomentSequence(vals, dens.k_min, dens.sign_changing)


def moment_phi_v_closed(v, k: int):
    """Closed-form moment of phi_v: (2k+1)/((2k+2m+2delta+1)(k+1-m-delta)).

    Exact rational whenever sqrt(v) is rational.  Only established for
    v >= 0; diverges for k < m.
    """
    if v < 0:
        raise CapabilityError("closed-form phi_v moments require v >= 0")
    m, delta = m_delta_from_v(v)
    if k < m:
        raise DivergenceError(f"moment diverges for k < m = {m}", k_min=m)
    num = 2 * k + 1
    den = (2 * k + 2 * m + 2 * delta + 1) * (k + 1 - m - delta)
    if isinstance(delta, Fraction):
        return Fraction(num) / Fraction(den)
    return num / den


def closed_form_F_phi_v(v, t):
    """Kernel diagonal for the phi_v density, in closed form (n = 2)."""
    if v < 0:
        raise CapabilityError("closed form established for v >= 0 only")
    m, delta = m_delta_from_v(v)
    m = float(m)
    delta = float(delta)
    scalar = np.isscalar(t)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t >= 1):
        raise DomainError("t must lie in [0, 1)")
    u = 1.0 - t
    num = 1.0 + 3.0 * t + 4.0 * m * u - delta * (4.0 * m + 2.0 * delta - 1.0) * u * u
    val = t ** m * num / u ** 3
    return float(val) if scalar else val


def kernel_series(phi, n: int, t: float, tol: float = 1e-10) -> KernelEval:
    """F(t) = sum_k N(k)/c_{k+n-2} t^k by direct summation with a tail bound.

    Terms whose moment index falls below k_min contribute zero (the moment
    diverges, its reciprocal vanishes).  Truncation: terms are dominated by
    C (k+1)^n t^k; the tail is bounded with the exact generating function
    sum_k C(k+n, n) t^k = (1-t)^-(n+1) and summation stops once the bound
    drops under ``tol``.
    """
    if not (0.0 <= t < 1.0):
        raise DomainError("t must lie in [0, 1)")
    if tol <= 0:
        raise DomainError("tol must be positive")
    dens = as_density(phi)
    k_start = max(0, dens.k_min - (n - 2))
    if t == 0.0:
        if k_start == 0:
            c0, _e = dens.moment(n - 2)
            return KernelEval(t=0.0, value=dimension_count(0, n) / c0, terms_used=1, tail_bound=0.0)
        return KernelEval(t=0.0, value=0.0, terms_used=0, tail_bound=0.0)

    # even ignoring the polynomial factor, t^K <= tol needs K terms:
    k_floor = math.log(max(tol, 1e-300)) / math.log(t)
    if k_floor > HARD_TERM_CAP:
        raise ConvergenceBudgetError(
            f"kernel series at t={t} needs ~{k_floor:.3g} terms (cap {HARD_TERM_CAP})"
        )
    n_fact = math.factorial(n)
    total = 0.0
    cmax = 0.0
    tk = t ** k_start
    binom_next = math.comb(k_start + 1 + n, n)
    k = k_start
    block = max(64, k_start + 64)
    dens.moments_block(block, min(1e-13, tol))
    while True:
        if k > block:
            block = min(2 * block, HARD_TERM_CAP)
            dens.moments_block(block, min(1e-13, tol))
        ck, _err = dens.moment(k + n - 2)
        ratio = dimension_count(k, n) / ck
        term = ratio * tk
        total += term
        cmax = max(cmax, abs(ratio) / (k + 1) ** n)
        # tail: terms <= cmax (k+1)^n t^k <= cmax n! C(k+n, n) t^k, and for
        # k > K the binomials grow no faster than q^(k-K-1), q = (K+2+n)/(K+2)
        q = t * (k + 2 + n) / (k + 2)
        if q < 1.0:
            tail = cmax * n_fact * binom_next * (tk * t) / (1.0 - q)
        else:
            tail = math.inf
        if (tail <= tol or tk == 0.0) and k >= k_start + 8:
            return KernelEval(t=t, value=total, terms_used=k - k_start + 1, tail_bound=tail)
        k += 1
        if k > HARD_TERM_CAP:
            raise ConvergenceBudgetError(
                f"kernel series needs more than {HARD_TERM_CAP} terms at t={t}"
            )
        tk *= t
        binom_next = binom_next * (k + 1 + n) // (k + 1)


def balanced_defect(p: RadialProfile, n: int, c, t, density: Density | None = None,
                    tol: float = 1e-11):
    """F(t) - c / f(t)^(n+1) for the profile's associated density.

    ``c`` may be "auto" (estimated by boundary extrapolation).  The default
    density is W[f], except for the phi_v candidate which pairs with its
    defining germ phi_v; pass ``density`` to override.  ``tol`` is the
    absolute truncation target for each kernel value.
    """
    dens = density if density is not None else associated_density(p, n)
    if dens.sign_changing:
        warnings.warn(
            "defect computed against a sign-changing density",
            SignedDensityWarning,
            stacklevel=2,
        )
    if c == "auto":
        c = estimate_c(p, n, density=dens)
    scalar = np.isscalar(t)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(ts)
    for i, ti in enumerate(ts):
        if ti == 0.0:
            f0 = _f_at_zero(p)
            F = kernel_series(dens, n, 0.0).value
            out[i] = F - c / f0 ** (n + 1)
            continue
        f, _fp, _fpp = p.eval(ti, order=0)
        F = kernel_series(dens, n, ti, tol=tol).value
        out[i] = F - c / f ** (n + 1)
    return float(out[0]) if scalar else out


def _f_at_zero(p: RadialProfile):
    """Limit f(0+) for kinds bounded at the origin."""
    if p.kind == "sqrt_poincare":
        return 2.0 * p.scale
    if p.kind == "explicit_n":
        n = p.params["n"]
        return n / (n - 1.0) * p.scale
    if p.kind == "constant_one":
        return 1.0 * p.scale
    if p.kind == "phi_v_candidate":
        m, delta = m_delta_from_v(p.params["v"])
        if m > 0:
            raise DomainError("candidate with m > 0 blows up at t = 0")
        d0 = 1.0 - float(delta * (2 * delta - 1))  # D(0) with m = 0
        return 2.0 ** (2.0 / 3.0) * d0 ** (-1.0 / 3.0) * p.scale
    raise CapabilityError(f"f(0) unavailable for kind {p.kind!r}")


def estimate_c(p: RadialProfile, n: int, density: Density | None = None,
               h0: float = 0.1, levels: int = 6) -> float:
    """Boundary value of f^(n+1) F by Richardson extrapolation on t = 1 - h0 2^-i.

    Declared failed (EstimationError) if the last two extrapolants differ
    by more than 1e-3.
    """
    dens = density if density is not None else associated_density(p, n)
    g = []
    for i in range(levels):
        ti = 1.0 - h0 * 2.0 ** (-i)
        f, _fp, _fpp = p.eval(ti, order=0)
        scale = abs(f) ** (n + 1)
        F = kernel_series(dens, n, ti, tol=max(1e-12, 1e-10 / scale)).value
        g.append(f ** (n + 1) * F)
    R = [list(g)]
    for j in range(1, levels):
        row = []
        for i in range(levels - j):
            prev = R[j - 1]
            row.append(prev[i + 1] + (prev[i + 1] - prev[i]) / (2.0 ** j - 1.0))
        R.append(row)
    best = R[levels - 1][0]
    prev_best = R[levels - 2][0] if levels >= 2 else g[-1]
    if not math.isfinite(best) or abs(best - prev_best) > 1e-3:
        raise EstimationError(
            f"Richardson extrapolation did not settle: {best} vs {prev_best}; "
            f"diagonal={[row[0] for row in R]}"
        )
    return best
