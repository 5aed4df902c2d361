"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 precondition violated, 3 a truncated
sum did not reach its tolerance.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
from importlib import metadata

from . import arith, basis, density, newform_sums, oracles, petersson
from .bessel import bessel_j
from .kloosterman import kloosterman
from .petersson import NonConvergenceError, PreconditionError, TruncatedSum

SCHEMA = "1"
EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_NONCONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n\n{self.format_help()}")


def _policy(args, default_tol=None):
    cmax = getattr(args, "cmax", None)
    if cmax is not None:
        return petersson.TruncationPolicy.fixed(cmax)
    tol = args.tol if getattr(args, "tol", None) is not None else default_tol
    if tol is None:
        return None
    return petersson.TruncationPolicy.tolerance(tol)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): "
                         + ", ".join("--" + n.replace("_", "-") for n in missing))


# each handler returns (record, rows); rows is a list of dicts for tabular output

def _cmd_kloosterman(args):
    _require(args, "m", "n", "c")
    return {"m": args.m, "n": args.n, "c": args.c,
            "value": kloosterman(args.m, args.n, args.c)}, None


def _cmd_besselj(args):
    _require(args, "nu", "x")
    return {"nu": args.nu, "x": args.x, "value": bessel_j(args.nu, args.x)}, None


def _cmd_delta(args):
    _require(args, "k", "N", "m", "n")
    wl = petersson.WeightLevel(args.k, args.N)
    res = petersson.delta_full(wl, args.m, args.n, _policy(args))
    return {"k": args.k, "N": args.N, "m": args.m, "n": args.n, **res.to_dict()}, None


def _cmd_puresum(args):
    _require(args, "k", "N", "n")
    res = newform_sums.pure_sum(args.k, args.N, args.n, X=args.X, Y=args.Y,
                                policy=_policy(args), threads=args.threads)
    out = {"k": args.k, "N": args.N, "n": args.n, **res.to_dict()}
    out["main_term"] = (args.k - 1) * arith.eta(args.N) / 12
    if args.n == 1:
        out["oracle_dim"] = oracles.newform_dim(args.k, args.N)
        out["rounded"] = int(round(res.value))
    return out, None


def _cmd_card(args):
    _require(args, "k", "N")
    res = newform_sums.cardinality_estimate(args.k, args.N, X=args.X, Y=args.Y,
                                            policy=_policy(args), threads=args.threads)
    return {"k": args.k, "N": args.N, **res.to_dict()}, None


def _cmd_tau(args):
    _require(args, "max")
    table = oracles.ramanujan_tau(args.max)
    rows = [{"n": n, "tau": t} for n, t in table.items()]
    return {"max": args.max, "tau": {str(n): t for n, t in table.items()}}, rows


def _cmd_dim(args):
    _require(args, "k", "N")
    return {"k": args.k, "N": args.N, "dim_cusp": oracles.dim_cusp(args.k, args.N)}, None


def _cmd_newdim(args):
    _require(args, "k", "N")
    return {"k": args.k, "N": args.N,
            "newform_dim": oracles.newform_dim(args.k, args.N),
            "main_term": (args.k - 1) * arith.eta(args.N) / 12}, None


def _rmt_all(phi):
    return {g: density.rmt_integral(g, phi) for g in density.GROUPS}


def _density_record(k, N, sigma, u, args):
    phi = density.fejer_pair(sigma)
    cfg = density.DensityConfig(k, N, u, R=args.R, X=args.X, Y=args.Y,
                                policy=_policy(args), threads=args.threads)
    est = density.one_level_estimate(cfg, phi)
    out = {"k": k, "N": N, "sigma": sigma, "u": u, "R": cfg.R, **est.to_dict()}
    out["rmt"] = _rmt_all(phi)
    return out


def _cmd_density(args):
    _require(args, "k", "N", "sigma", "u")
    return _density_record(args.k, args.N, args.sigma, args.u, args), None


def _cmd_density_grid(args):
    _require(args, "spec")
    spec = _read_keyvalue(args.spec)
    try:
        k = int(spec["k"])
        sigma = float(spec.get("sigma", 1.0))
        u = float(spec["u"])
        levels = [int(v) for v in spec["N"].split(",") if v.strip()]
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad grid spec {args.spec}: {exc}") from None
    rows = []
    for N in levels:
        rec = _density_record(k, N, sigma, u, args)
        rows.append({"k": k, "N": N, "sigma": sigma, "u": u, "E": rec["E"],
                     "Pstar": rec["Pstar"]["value"],
                     "Pstar_tail_bound": rec["Pstar"]["tail_bound"],
                     "card": rec["card"], "Pstar_over_card": rec["Pstar_over_card"],
                     "D1": rec["D1"], **{f"rmt_{g}": v for g, v in rec["rmt"].items()}})
    return {"grid": rows}, rows


def _cmd_rmt(args):
    _require(args, "group", "sigma")
    phi = density.fejer_pair(args.sigma)
    return {"group": args.group, "sigma": args.sigma,
            "time_side": density.rmt_integral_time(args.group, phi),
            "fourier_side": density.rmt_integral_fourier(args.group, phi)}, None


def _cmd_basis(args):
    _require(args, "eigen_data", "L")
    with open(args.eigen_data, encoding="utf-8") as fh:
        f = basis.NewformLocalData.from_json(fh.read())
    L = arith.as_factored(args.L)
    N = L * f.level
    return {"k": f.k, "M": f.level.value, "L": L.value, "N": N.value,
            "xi_one_sum_direct": basis.xi_one_sum_direct(f, L),
            "xi_one_sum_closed": basis.xi_one_sum_closed(f, L, N),
            "z_N": basis.z_N(f, N)}, None


def _add_truncation(p, xy=True):
    p.add_argument("--tol", type=float)
    if xy:
        p.add_argument("--X", type=int)
        p.add_argument("--Y", type=int)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--manifest", action="store_true",
                        help="attach a run manifest (parameters, versions, diagnostics)")
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    parser = _Parser(prog="heckesums", description="Petersson sums, newform counts and "
                     "one-level densities for holomorphic cusp forms.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, handler, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = add("kloosterman", _cmd_kloosterman, "Kloosterman sum S(m,n;c)")
    for a in ("m", "n", "c"):
        p.add_argument(f"--{a}", type=int)
    p = add("besselj", _cmd_besselj, "Bessel J_nu(x)")
    p.add_argument("--nu", type=int)
    p.add_argument("--x", type=float)
    p = add("delta", _cmd_delta, "Petersson sum Delta_{k,N}(m,n)")
    for a in ("k", "N", "m", "n"):
        p.add_argument(f"--{a}", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--cmax", type=int)
    p = add("puresum", _cmd_puresum, "pure newform sum of lambda_f(n)")
    for a in ("k", "N", "n"):
        p.add_argument(f"--{a}", type=int)
    _add_truncation(p)
    p = add("card", _cmd_card, "newform count via the pure sum at n=1")
    for a in ("k", "N"):
        p.add_argument(f"--{a}", type=int)
    _add_truncation(p)
    p = add("tau", _cmd_tau, "Ramanujan tau table (CSV by default)")
    p.add_argument("--max", type=int)
    p.set_defaults(default_format="csv")
    for name, handler, text in (("dim", _cmd_dim, "dimension of S_k(Gamma_0(N))"),
                                ("newdim", _cmd_newdim, "number of newforms of weight k, level N")):
        p = add(name, handler, text)
        p.add_argument("--k", type=int)
        p.add_argument("--N", type=int)
    p = add("density", _cmd_density, "one-level density estimate")
    p.add_argument("--k", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--sigma", type=float)
    p.add_argument("--u", type=float)
    p.add_argument("--R", type=float)
    _add_truncation(p)
    p = add("density-grid", _cmd_density_grid, "density estimates over a grid of levels")
    p.add_argument("--spec", help="key=value file with k, sigma, u and N=comma,separated")
    p.add_argument("--R", type=float)
    _add_truncation(p)
    p.set_defaults(default_format="csv")
    p = add("rmt", _cmd_rmt, "random-matrix integral, time and Fourier sides")
    p.add_argument("--group", choices=density.GROUPS)
    p.add_argument("--sigma", type=float)
    p = add("basis", _cmd_basis, "basis coefficient sums for supplied eigen-data")
    p.add_argument("--eigen-data", dest="eigen_data")
    p.add_argument("--L", type=int)
    return parser


def _read_keyvalue(path) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError(parser.format_help())
    if args.config:
        # re-parse with file values as defaults so explicit flags still win
        values = _read_keyvalue(args.config)
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in subparser._actions}
        unknown = sorted(set(values) - set(known))
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        defaults = {}
        for key, value in values.items():
            action = known[key]
            if action.type is not None:
                try:
                    value = action.type(value)
                except ValueError:
                    raise UsageError(f"config key {key}: bad value {value!r}") from None
            defaults[key] = value
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    return args


def _versions() -> dict:
    out = {"python": platform.python_version()}
    for dist in ("artifact", "numpy", "numba", "scipy", "gmpy2", "mpmath"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = None
    return out


def _manifest(args, record) -> dict:
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("handler", "manifest", "default_format", "format")}
    diag = {k: record[k] for k in ("tail_bound", "converged", "terms_used", "c_max", "X", "Y",
                                   "oscillation", "heuristic_bound") if k in record}
    return {"parameters": params, "versions": _versions(), "truncation": diag}


def _clean(obj):
    # JSON has no inf/nan; encode them as strings so output stays valid
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _converged(record) -> bool:
    if isinstance(record, dict):
        if record.get("converged") is False:
            return False
        return all(_converged(v) for v in record.values())
    if isinstance(record, list):
        return all(_converged(v) for v in record)
    return True


def _emit(args, record, rows, out) -> None:
    fmt = args.format or getattr(args, "default_format", "json")
    if fmt == "json":
        doc = {"schema": SCHEMA, "command": args.command, **record}
        if args.manifest:
            doc["manifest"] = _manifest(args, record)
        out.write(json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n")
        return
    if rows is None:
        rows = [{k: v for k, v in record.items() if not isinstance(v, (dict, list))}]
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    out.write(buf.getvalue())
    if args.manifest:
        sys.stderr.write(json.dumps(_clean(_manifest(args, record)), sort_keys=True) + "\n")


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = _parse(sys.argv[1:] if argv is None else list(argv))
        record, rows = args.handler(args)
    except UsageError as exc:
        sys.stderr.write(str(exc).rstrip("\n") + "\n")
        return EXIT_USAGE
    except NonConvergenceError as exc:
        sys.stderr.write(f"non-convergence: {exc}\n")
        if isinstance(exc.result, TruncatedSum):
            out.write(json.dumps(_clean({"schema": SCHEMA, **exc.result.to_dict()}),
                                 sort_keys=True, indent=2) + "\n")
        return EXIT_NONCONVERGENCE
    except (PreconditionError, ValueError, OverflowError) as exc:
        sys.stderr.write(f"precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    _emit(args, record, rows, out)
    return EXIT_OK if _converged(record) else EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
