"""Command-line front end.

Subcommands: kernel, defect, poincare, asymptotics, lerch, profile-eval,
verify.  Profiles are given either inline (``kind:key=value,...``) or as a
JSON file/text ({"kind": ..., "params": {...}}).  All floating output uses
17 significant digits so identical configurations produce byte-identical
files.  KEPLER_BALANCE_THREADS caps grid parallelism (default 1); output
ordering never depends on completion order.

Exit codes: 0 success, 1 bad configuration, 2 numerical failure,
3 Poincare run terminated at an interior cusp (informational),
4 failing verify criterion.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import acceptance
from . import asymptotics as asym
from . import kernel as kern
from . import poincare as poin
from .errors import (
    CapabilityError,
    ConvergenceBudgetError,
    DivergenceError,
    DomainError,
    EstimationError,
    IntegrationError,
    NormalizationError,
)
from .profiles import RadialProfile, phi_v_l_series

NUMERICAL_ERRORS = (
    ConvergenceBudgetError,
    DivergenceError,
    EstimationError,
    IntegrationError,
)
CONFIG_ERRORS = (DomainError, CapabilityError, NormalizationError, ValueError, KeyError)


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _thread_count() -> int:
    raw = os.environ.get("KEPLER_BALANCE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _grid_map(fn, values):
    """Map fn over grid values; results ordered by index regardless of
    scheduling."""
    values = list(values)
    workers = min(_thread_count(), max(1, len(values)))
    if workers == 1:
        return [fn(v) for v in values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, values))


def parse_profile(spec: str) -> RadialProfile:
    """Inline ``kind:key=value,...``, JSON text, or a JSON file path."""
    spec = spec.strip()
    if spec.startswith("{") or os.path.exists(spec):
        return RadialProfile.from_json(spec)
    if ":" in spec:
        kind, _, rest = spec.partition(":")
        params = {}
        for piece in rest.split(","):
            if not piece:
                continue
            key, _, val = piece.partition("=")
            if ";" in val:
                params[key] = [float(x) for x in val.split(";")]
            else:
                try:
                    params[key] = int(val)
                except ValueError:
                    params[key] = float(val)
    else:
        kind, params = spec, {}
    return RadialProfile.from_json({"kind": kind, "params": params})


def parse_grid(spec: str):
    """start:stop:count, inclusive linear grid."""
    bits = spec.split(":")
    if len(bits) != 3:
        raise DomainError("grid must be start:stop:count")
    start, stop, count = float(bits[0]), float(bits[1]), int(bits[2])
    if count < 1:
        raise DomainError("grid count must be >= 1")
    if not (0.0 <= start <= stop < 1.0):
        raise DomainError("grid must lie within [0, 1)")
    return np.linspace(start, stop, count)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _t_values(args):
    if args.grid:
        return parse_grid(args.grid)
    if args.t is not None:
        return np.asarray([args.t])
    raise DomainError("supply --grid or --t")


def cmd_kernel(args) -> int:
    prof = parse_profile(args.profile)
    ts = _t_values(args)
    dens = kern.associated_density(prof, args.n)
    c = "auto" if args.c == "auto" else float(args.c)
    if c == "auto":
        c = kern.estimate_c(prof, args.n, density=dens)

    def one(t):
        F = kern.kernel_series(dens, args.n, float(t), tol=args.tol).value
        f = prof.eval(float(t), order=0)[0] if t > 0 else kern._f_at_zero(prof)
        return F, F - c / f ** (args.n + 1)

    rows = _grid_map(one, ts)
    if args.format == "json":
        payload = {
            "c": c,
            "rows": [
                {"t": float(t), "F": F, "defect": d}
                for t, (F, d) in zip(ts, rows)
            ],
        }
        _emit(json.dumps(payload, indent=2, default=float) + "\n", args.out)
    else:
        lines = ["t,F,defect"]
        for t, (F, d) in zip(ts, rows):
            lines.append(f"{fmt(t)},{fmt(F)},{fmt(d)}")
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_poincare(args) -> int:
    sol = poin.solve_poincare(args.c, t_min=args.tmin, tol=args.tol)
    lines = ["t,f,fp,fpp,psi_residual"]
    res = sol.psi_residuals()
    for (t, f, fp, fpp), r in zip(sol.grid, res):
        lines.append(f"{fmt(t)},{fmt(f)},{fmt(fp)},{fmt(fpp)},{fmt(r)}")
    _emit("\n".join(lines) + "\n", args.out)
    summary = {
        "c": sol.c,
        "t0": sol.t0,
        "t_min_reached": sol.t_min_reached,
        "psi_residual_max": sol.psi_residual_max,
        "exponent": None,
    }
    if sol.c >= 0 and sol.t_min_reached <= 1e-3:
        summary["exponent"] = poin.origin_exponent(sol)
    if sol.c == 0.0:
        ts = np.exp(np.linspace(math.log(sol.t_min_reached), math.log(1 - 1e-6), 2000))
        summary["sup_error_vs_exact"] = float(
            np.max(np.abs(sol.eval(ts)[0] - (2.0 - 2.0 * np.sqrt(ts))))
        )
    sys.stderr.write(json.dumps(summary, default=float) + "\n")
    return 3 if sol.t0 is not None else 0


def cmd_asymptotics(args) -> int:
    v = args.v
    vfrac = Fraction(v).limit_denominator(10 ** 9) if v == int(v) else v
    phiL = phi_v_l_series(vfrac if isinstance(vfrac, Fraction) else v, args.order + 3)
    cexp = asym.moment_expansion(phiL, args.order + 3)
    inv = asym.reciprocal_moments(cexp, args.order + 2)
    A = asym.a_m_coefficients(inv, args.order)
    exact = all(isinstance(a, Fraction) for a in A)
    payload = {
        "A": [str(a) if isinstance(a, Fraction) else a for a in A],
        "exact": exact,
        "v": v,
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def cmd_lerch(args) -> int:
    t = args.t
    if t is None:
        raise DomainError("lerch requires --t")
    L = -math.log(t)
    direct = asym.lerch_phi(t, args.s, args.n_deriv, method="direct")
    boundary = None
    if L < 2 * math.pi:
        boundary = asym.lerch_phi(t, args.s, args.n_deriv, method="boundary")
    payload = {
        "t": t,
        "s": args.s,
        "n_deriv": args.n_deriv,
        "direct": direct,
        "boundary": boundary,
        "diff": None if boundary is None else abs(direct - boundary),
    }
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def cmd_profile_eval(args) -> int:
    prof = parse_profile(args.profile)
    ts = _t_values(args)
    lines = ["t,f,fp,fpp,W"]
    from .profiles import monge_ampere_density

    for t in ts:
        t = float(t)
        f, fp, fpp = prof.eval(t)
        w = monge_ampere_density(prof, args.n, t)
        lines.append(f"{fmt(t)},{fmt(f)},{fmt(fp)},{fmt(fpp)},{fmt(w)}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_verify(args) -> int:
    results = acceptance.run(only=args.only)
    if not results:
        sys.stderr.write(f"no criteria match --only {args.only!r}\n")
        return 1
    return 0 if all(r.passed for r in results) else 4


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kepler-balance",
        description="Balanced-metric diagnostics on the Kepler-manifold ball",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, profile=False, grid=False):
        if profile:
            p.add_argument("--profile", required=True, help="kind:key=value,... or JSON")
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if grid:
            p.add_argument("--grid", default=None, help="start:stop:count")
            p.add_argument("--t", type=float, default=None)

    pk = sub.add_parser("kernel", help="kernel diagonal F, balanced defect")
    common(pk, profile=True, grid=True)
    pk.add_argument("--c", default="auto")
    pk.set_defaults(fn=cmd_kernel)

    pd = sub.add_parser("defect", help="alias of kernel emphasizing the defect")
    common(pd, profile=True, grid=True)
    pd.add_argument("--c", default="auto")
    pd.set_defaults(fn=cmd_kernel)

    pp = sub.add_parser("poincare", help="solve the radial Poincare flow")
    pp.add_argument("--c", type=float, required=True)
    pp.add_argument("--tmin", type=float, default=1e-3)
    pp.add_argument("--tol", type=float, default=1e-10)
    pp.add_argument("--out", default=None)
    pp.set_defaults(fn=cmd_poincare)

    pa = sub.add_parser("asymptotics", help="A_m reciprocal-moment coefficients")
    pa.add_argument("--v", type=float, required=True)
    pa.add_argument("--order", type=int, default=10)
    pa.add_argument("--out", default=None)
    pa.set_defaults(fn=cmd_asymptotics)

    pl = sub.add_parser("lerch", help="Lerch transcendent, two evaluation paths")
    pl.add_argument("--t", type=float, required=True)
    pl.add_argument("--s", type=float, required=True)
    pl.add_argument("--n-deriv", type=int, default=0)
    pl.add_argument("--out", default=None)
    pl.set_defaults(fn=cmd_lerch)

    pe = sub.add_parser("profile-eval", help="evaluate f, f', f'', W on a grid")
    common(pe, profile=True, grid=True)
    pe.set_defaults(fn=cmd_profile_eval)

    pv = sub.add_parser("verify", help="run the acceptance criteria")
    pv.add_argument("--only", default=None, help="substring filter")
    pv.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except NUMERICAL_ERRORS as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2
    except CONFIG_ERRORS as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
