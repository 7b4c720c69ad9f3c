"""Command-line interface: ``qising <subcommand> [flags]``.

Every subcommand writes one table (CSV with a header row, or JSON with
``meta`` and ``data``).  Floats are printed with 17 significant digits.

Exit codes: 0 success, 1 invalid flags or a failed acceptance check,
2 numerical failure (truncation, quadrature, divergence).
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from .errors import DivergenceError, NumericalError, QIsingError

EPILOG = """output columns:
  qpoch            a_re,a_im,q,n,re,im
  phi              z_re,z_im,re,im,terms,tail_bound
  poly             x,n,value
  measure          theta,density        (--atoms: x,w; both signs listed)
  zeros            k,z,x
  genfunc-check    n_max,series_re,series_im,closed_re,closed_im,residual
  magnetization    t,n,k,value          (k=0 marks superposed initial data)
  correlation      t,m,n,value          (m>n)
  stationary       m,n,value            (m>n)
  asymptotics      t,n,k,numeric,asymptotic,ratio   (--pair: t,m,n,k,l,...)
  oracle           t,n,value[,stderr]   (pair mode: t,m,n,value)
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


class ValidationError(Exception):
    pass


def _time_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("log", "lin")):
        raise ValidationError(f"--t-grid expects a:b:n[:log], got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValidationError(f"--t-grid expects a:b:n[:log], got {text!r}") from None
    if n < 1 or a < 0 or b < a:
        raise ValidationError("--t-grid needs 0 <= a <= b and n >= 1")
    if len(parts) == 4 and parts[3] == "log":
        if a <= 0:
            raise ValidationError("log time grid needs a > 0")
        return np.geomspace(a, b, n)
    return np.linspace(a, b, n)


def _sites(text: str) -> list[int]:
    try:
        if ":" in text:
            a, b = (int(x) for x in text.split(":"))
            out = list(range(a, b + 1))
        elif "," in text:
            out = [int(x) for x in text.split(",")]
        else:
            out = list(range(1, int(text) + 1))
    except ValueError:
        raise ValidationError(f"--sites expects N, a:b or a,b,c; got {text!r}") from None
    if not out or min(out) < 1:
        raise ValidationError("sites must be >= 1")
    return out


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def _json_value(v):
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, str):
        return v
    f = float(v)
    return f if math.isfinite(f) else str(f)


def _emit(args, columns, rows, meta):
    if args.format == "json":
        payload = {"meta": {k: _json_value(v) if not isinstance(v, (list, dict)) else v
                            for k, v in meta.items()},
                   "data": [{c: _json_value(v) for c, v in zip(columns, r)} for r in rows]}
        text = json.dumps(payload, indent=1) + "\n"
    else:
        buf = io.StringIO()
        buf.write(",".join(columns) + "\n")
        for r in rows:
            buf.write(",".join(_fmt(v) for v in r) + "\n")
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _triple(args):
    from .qseries import QTriple

    if args.kappa is not None:
        raise ValidationError("this subcommand takes --q/--alpha/--beta, not --kappa")
    if args.q is None or args.beta is None:
        raise ValidationError("--q and --beta are required")
    if args.alpha_eq_q and args.alpha is not None:
        raise ValidationError("give either --alpha or --alpha-eq-q")
    alpha = args.q if args.alpha_eq_q else args.alpha
    if alpha is None:
        raise ValidationError("--alpha (or --alpha-eq-q) is required")
    return QTriple(args.q, alpha, args.beta)


def _model(args):
    from .ising import ChainModel

    if args.q is not None or args.alpha is not None or args.beta is not None or args.alpha_eq_q:
        raise ValidationError("this subcommand takes --kappa, not --q/--alpha/--beta")
    if args.kappa is None:
        raise ValidationError("--kappa is required")
    return ChainModel(args.kappa)


def _times(args) -> np.ndarray:
    if args.t is not None and args.t_grid is not None:
        raise ValidationError("give either --t or --t-grid")
    if args.t is not None:
        if args.t < 0:
            raise ValidationError("--t must be >= 0")
        return np.array([args.t])
    if args.t_grid is not None:
        return _time_grid(args.t_grid)
    raise ValidationError("--t or --t-grid is required")


def _initial(name: str, n: int) -> np.ndarray:
    if name == "ones":
        return np.ones(n)
    if name == "alternating":
        return np.array([(-1.0) ** k for k in range(n)])
    raise ValidationError(f"unknown initial state {name!r}")


# subcommand handlers: each returns (columns, rows, meta)

def cmd_qpoch(args):
    from .qseries import qpoch

    if args.q is None or args.a is None:
        raise ValidationError("--a and --q are required")
    n = math.inf if args.n is None else args.n
    a = complex(args.a)
    v = complex(qpoch(a, args.q, n))
    return ["a_re", "a_im", "q", "n", "re", "im"], [[a.real, a.imag, args.q, str(n), v.real, v.imag]], {}


def _complex_list(text):
    if text in (None, ""):
        return []
    return [complex(x) for x in text.split(",")]


def cmd_phi(args):
    from .qseries import phi_rs

    if args.q is None or args.z is None:
        raise ValidationError("--q and --z are required")
    z = complex(args.z)
    r = phi_rs(_complex_list(args.num), _complex_list(args.den), args.q, z)
    v = complex(r.value)
    return (["z_re", "z_im", "re", "im", "terms", "tail_bound"],
            [[z.real, z.imag, v.real, v.imag, r.terms_used, r.tail_bound]], {})


def cmd_poly(args):
    from .orthopoly import poly_table

    params = _triple(args)
    if args.n is None or args.n < 0:
        raise ValidationError("--n >= 0 is required")
    try:
        lo, hi, cnt = (args.x_grid or "-2:2:9").split(":")
        xs = np.linspace(float(lo), float(hi), int(cnt))
    except ValueError:
        raise ValidationError(f"--x-grid expects a:b:count, got {args.x_grid!r}") from None
    table = poly_table(args.n, xs, params)
    rows = [[x, n, table[n, i]] for i, x in enumerate(xs) for n in range(args.n + 1)]
    return ["x", "n", "value"], rows, {"q": params.q, "alpha": params.alpha, "beta": params.beta}


def cmd_measure(args):
    from .measure import build_measure

    params = _triple(args)
    mu = build_measure(params)
    meta = {"q": params.q, "alpha": params.alpha, "beta": params.beta, "atoms": len(mu.atoms)}
    if args.atoms:
        return ["x", "w"], [[x, w] for x, w in mu.all_atoms()], meta
    theta = np.linspace(0.0, math.pi, args.points + 2)[1:-1]
    return ["theta", "density"], [[t, d] for t, d in zip(theta, mu.density(theta))], meta


def cmd_zeros(args):
    from .measure import find_zeros

    params = _triple(args)
    zs = find_zeros(params)
    return (["k", "z", "x"], [[k + 1, z, z + 1 / z] for k, z in enumerate(zs.zeros)],
            {"method": zs.method, "count": zs.count})


def cmd_genfunc_check(args):
    from .orthopoly import genfunc_closed, genfunc_series

    params = _triple(args)
    if args.z is None or args.gen_t is None:
        raise ValidationError("--z and --gen-t are required")
    z, t = complex(args.z), complex(args.gen_t)
    s = genfunc_series(t, z, params, args.n_max)
    c = genfunc_closed(t, z, params)
    v = complex(s.value)
    return (["n_max", "series_re", "series_im", "closed_re", "closed_im", "residual"],
            [[args.n_max, v.real, v.imag, c.real, c.imag, abs(v - c)]], {"tail_bound": s.tail_bound})


def cmd_magnetization(args):
    from .ising import magnetization, magnetization_matrix

    model = _model(args)
    times = _times(args)
    meta = {"kappa": model.kappa}
    rows = []
    if args.profile:
        for t in times:
            Q = magnetization_matrix(5, t, model, rtol=args.tol)
            rows += [[t, n, 3, Q[n - 1, 2]] for n in range(1, 6)]
    elif args.kernel:
        n, k = args.kernel
        if n < 1 or k < 1:
            raise ValidationError("--kernel indices must be >= 1")
        for t in times:
            Q = magnetization_matrix(max(n, k), t, model, rtol=args.tol)
            rows.append([t, n, k, Q[n - 1, k - 1]])
    else:
        sites = _sites(args.sites or "5")
        init = args.initial or "ones"
        _initial(init, 1)
        f = (lambda k: 1.0) if init == "ones" else (lambda k: (-1.0) ** (k - 1))
        meta["initial"] = init
        for t in times:
            q = magnetization(t, f, model, max(sites), tol=args.tol, site_max=args.site_max)
            rows += [[t, n, 0, q[n - 1]] for n in sites]
    return ["t", "n", "k", "value"], rows, meta


def cmd_correlation(args):
    from .ising import stationary, twospin, twospin_matrix

    model = _model(args)
    times = _times(args)
    M = max(_sites(args.sites or "6"))
    rows = []
    if args.pair:
        k, l = args.pair
        if not k > l >= 1:
            raise ValidationError("--pair needs k > l >= 1")
        for t in times:
            r = twospin_matrix(M, k, l, t, model)
            rows += [[t, m, n, r[m - 1, n - 1]] for m in range(2, M + 1) for n in range(1, m)]
    else:
        rho = stationary(model, M)
        for t in times:
            r = twospin(t, np.eye(M), model, rho)
            rows += [[t, m, n, r[m - 1, n - 1]] for m in range(2, M + 1) for n in range(1, m)]
    return ["t", "m", "n", "value"], rows, {"kappa": model.kappa, "sites": M}


def cmd_stationary(args):
    from .ising import stationary, stationary_residual

    model = _model(args)
    M = max(_sites(args.sites or "20"))
    rho = stationary(model, M, tol=max(args.tol, 1e-12))
    rows = [[m, n, rho[m - 1, n - 1]] for m in range(2, M + 1) for n in range(1, m)]
    return ["m", "n", "value"], rows, {"kappa": model.kappa, "sites": M,
                                       "fixed_point_residual": stationary_residual(rho, model)}


def cmd_asymptotics(args):
    from .ising import (magnetization_asymptotic, magnetization_matrix, twospin_asymptotic,
                        twospin_kernel)

    model = _model(args)
    times = _times(args)
    if np.any(times <= 0):
        raise ValidationError("asymptotics need t > 0")
    rows = []
    if args.pair4:
        m, n, k, l = args.pair4
        if not (m >= n >= 1 and k > l >= 1):
            raise ValidationError("--pair needs m >= n >= 1 and k > l >= 1")
        for t in times:
            num, asy = twospin_kernel(m, n, k, l, t, model), twospin_asymptotic(m, n, k, l, t, model)
            rows.append([t, m, n, k, l, num, asy, num / asy if asy else math.nan])
        return ["t", "m", "n", "k", "l", "numeric", "asymptotic", "ratio"], rows, {"kappa": model.kappa}
    n, k = args.kernel or (1, 1)
    for t in times:
        num = magnetization_matrix(max(n, k), t, model)[n - 1, k - 1]
        asy = magnetization_asymptotic(n, k, t, model, order=args.order)
        rows.append([t, n, k, num, asy, num / asy])
    return ["t", "n", "k", "numeric", "asymptotic", "ratio"], rows, {"kappa": model.kappa,
                                                                     "order": args.order}


def cmd_oracle(args):
    from .oracle import (glauber_sampler, jacobi_expm_magnetization, master_equation,
                         pair_ode_oracle, product_state)

    model = _model(args)
    times = _times(args)
    N = max(_sites(args.sites or "8"))
    q0 = _initial(args.initial or "ones", N)
    meta = {"kappa": model.kappa, "sites": N, "mode": args.mode}
    if args.mode == "expm":
        rows = [[t, n, v] for t in times
                for n, v in enumerate(jacobi_expm_magnetization(N, t, model, q0), 1)]
        return ["t", "n", "value"], rows, meta
    if args.mode == "master":
        rows = [[t, n, v] for t in times
                for n, v in enumerate(master_equation(N, model, q0, t).magnetization(), 1)]
        return ["t", "n", "value"], rows, meta
    if args.mode == "pair":
        r0 = product_state(N, q0).correlation() if N <= 12 else np.outer(q0, q0) + np.diag(1 - q0**2)
        rows = []
        for t in times:
            r = pair_ode_oracle(N, model, r0, t)
            rows += [[t, m, n, r[m - 1, n - 1]] for m in range(2, N + 1) for n in range(1, m)]
        return ["t", "m", "n", "value"], rows, meta
    if not np.all(np.abs(q0) == 1):
        raise ValidationError("sampler needs +-1 initial spins")
    if args.trajectories < 2:
        raise ValidationError("--trajectories must be >= 2")
    s = glauber_sampler(N, model, q0, times, args.trajectories, args.seed)
    meta.update(seed=args.seed, trajectories=args.trajectories)
    rows = [[t, n, s.q_mean[i, n - 1], s.q_se[i, n - 1]] for i, t in enumerate(s.times)
            for n in range(1, N + 1)]
    return ["t", "n", "value", "stderr"], rows, meta


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--kappa", type=float, help="chain parameter, gamma_n = tanh(kappa n)")
    common.add_argument("--q", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--beta", type=float)
    common.add_argument("--alpha-eq-q", action="store_true", help="set alpha = q")
    common.add_argument("--tol", type=float, default=1e-12, help="tolerance in (0, 1e-2]")
    common.add_argument("--t", type=float, help="single time")
    common.add_argument("--t-grid", help="time grid a:b:n[:log]")
    common.add_argument("--sites", help="N, a:b or a,b,c")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=12345)

    p = _Parser(prog="qising", description=__doc__.splitlines()[0], epilog=EPILOG,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("qpoch", parents=[common], help="q-shifted factorial (a;q)_n")
    s.add_argument("--a", type=complex)
    s.add_argument("--n", type=int, help="omit for n = infinity")
    s.set_defaults(func=cmd_qpoch)

    s = sub.add_parser("phi", parents=[common], help="basic hypergeometric series")
    s.add_argument("--num", help="comma-separated numerator parameters")
    s.add_argument("--den", help="comma-separated denominator parameters")
    s.add_argument("--z", help="argument (complex allowed, e.g. 0.3+0.1j)")
    s.set_defaults(func=cmd_phi)

    s = sub.add_parser("poly", parents=[common], help="p_0..p_n on an x grid")
    s.add_argument("--n", type=int)
    s.add_argument("--x-grid", help="a:b:count (default -2:2:9)")
    s.set_defaults(func=cmd_poly)

    s = sub.add_parser("measure", parents=[common], help="density samples or atoms")
    s.add_argument("--points", type=int, default=200)
    s.add_argument("--atoms", action="store_true")
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("zeros", parents=[common], help="zeros of psi^+_{-1} in (0, 1)")
    s.set_defaults(func=cmd_zeros)

    s = sub.add_parser("genfunc-check", parents=[common], help="generating function vs series")
    s.add_argument("--z", help="spectral point, 0 < |z| < 1")
    s.add_argument("--gen-t", help="generating variable, |t| < |z|")
    s.add_argument("--n-max", type=int, default=80)
    s.set_defaults(func=cmd_genfunc_check)

    s = sub.add_parser("magnetization", parents=[common], help="q_n^(k)(t) or superpositions")
    s.add_argument("--kernel", type=int, nargs=2, metavar=("N", "K"))
    s.add_argument("--profile", action="store_true", help="q_n^(3)(t) for n = 1..5")
    s.add_argument("--initial", choices=("ones", "alternating"))
    s.add_argument("--site-max", type=int, default=2000, help="cap on superposed initial sites")
    s.set_defaults(func=cmd_magnetization)

    s = sub.add_parser("correlation", parents=[common], help="pair correlations")
    s.add_argument("--pair", type=int, nargs=2, metavar=("K", "L"),
                   help="homogeneous kernel r^(k,l) instead of the uncorrelated start")
    s.set_defaults(func=cmd_correlation)

    s = sub.add_parser("stationary", parents=[common], help="stationary pair correlations")
    s.set_defaults(func=cmd_stationary)

    s = sub.add_parser("asymptotics", parents=[common], help="numeric vs large-t expansion")
    s.add_argument("--kernel", type=int, nargs=2, metavar=("N", "K"))
    s.add_argument("--pair", dest="pair4", type=int, nargs=4, metavar=("M", "N", "K", "L"))
    s.add_argument("--order", type=int, choices=(1, 2, 3), default=1)
    s.set_defaults(func=cmd_asymptotics)

    s = sub.add_parser("oracle", parents=[common], help="finite-chain ground truth")
    s.add_argument("mode", choices=("expm", "master", "pair", "sample"))
    s.add_argument("--initial", choices=("ones", "alternating"))
    s.add_argument("--trajectories", type=int, default=100_000)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    s.add_argument("--quick", action="store_true", help="fewer sampler trajectories")
    s.add_argument("--only", help="comma-separated check numbers")
    s.set_defaults(func=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not 0.0 < args.tol <= 1e-2:
        print("qising: error: --tol must lie in (0, 1e-2]", file=sys.stderr)
        return 1
    if args.cmd == "verify":
        from .acceptance import CHECKS, format_table, run

        try:
            only = [int(x) for x in args.only.split(",")] if args.only else None
        except ValueError:
            print("qising: error: --only expects comma-separated integers", file=sys.stderr)
            return 1
        if only and any(n not in CHECKS for n in only):
            print(f"qising: error: --only takes numbers in {min(CHECKS)}..{max(CHECKS)}", file=sys.stderr)
            return 1
        results = run(only, quick=args.quick)
        print(format_table(results))
        return 0 if all(r.passed for r in results) else 1
    try:
        columns, rows, meta = args.func(args)
    except ValidationError as exc:
        print(f"qising: error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, DivergenceError) as exc:
        print(f"qising: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (QIsingError, ValueError) as exc:
        print(f"qising: error: {exc}", file=sys.stderr)
        return 1
    _emit(args, columns, rows, {"command": args.cmd, **meta})
    return 0


if __name__ == "__main__":
    sys.exit(main())
