"""Command-line front end: ``ends-sqfn <subcommand> ...``.

Every query subcommand prints a single JSON document on standard output so
results can be piped into jq or archived next to a suite run.  ``run``
executes a configured experiment suite and exits nonzero if any declared
contract fails; ``report`` summarizes a results directory produced by
``run``; ``model dump`` emits the node/measure tables of a model as CSV.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .bessel import BesselSpec, bessel_eval, envelope_check
from .end_kernels import EndGeometry, KernelPoint, check_bounds
from .experiments import ConfigError, reverse_check, run_suite, witness_sweep
from .highenergy import h_sup_bound
from .radial_model import EndProfile, build_model
from .schur import INTEGRAL_IDS, family_envelope, threshold_scan
from .sqfn import (SpectralGrid, SqfnEngine, horizontal_sqfn, lp_norm,
                   vertical_sqfn)

_FAMILY_ALIASES = {
    "h1": "KC1", "h2": "KC2", "h3": "KC3", "h4": "KC4-I1",
    "w1": "J1", "w2": "J2",
}


def _emit(obj) -> None:
    def default(o):
        if dataclasses.is_dataclass(o) and not isinstance(o, type):
            return dataclasses.asdict(o)
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"not JSON serializable: {type(o)}")

    json.dump(obj, sys.stdout, indent=2, default=default)
    sys.stdout.write("\n")


def _parse_range(text: str, *, log: bool = False) -> np.ndarray:
    """'a:b' -> unit steps (or 8 points), 'a:b:step' -> that step."""
    parts = [float(t) for t in text.split(":")]
    if len(parts) == 2:
        a, b = parts
        if float(a).is_integer() and float(b).is_integer() and not log:
            return np.arange(a, b + 0.5)
        return np.geomspace(a, b, 8) if log else np.linspace(a, b, 8)
    if len(parts) == 3:
        a, b, step = parts
        return np.arange(a, b + step / 2, step)
    raise argparse.ArgumentTypeError(f"bad range {text!r}, expected a:b[:step]")


def _default_model(args):
    dims = [int(s) for s in args.ends.split(",")]
    return build_model(
        [EndProfile(n, 1.0, args.rmax, args.points_per_decade) for n in dims]
    )


def _add_model_args(sub):
    sub.add_argument("--ends", default="3,4", help="end dimensions, e.g. 3,4")
    sub.add_argument("--rmax", type=float, default=1e9)
    sub.add_argument("--points-per-decade", type=int, default=48)
    sub.add_argument("--k-points-per-decade", type=int, default=24)


def _engine_and_grid(args):
    model = _default_model(args)
    return model, SqfnEngine(model), SpectralGrid.for_model(
        model, points_per_decade_k=args.k_points_per_decade)


def cmd_bessel(args) -> int:
    spec = BesselSpec(a=args.a, d=args.d)
    if args.envelope:
        _emit(envelope_check(spec))
    else:
        _emit({"a": args.a, "d": args.d, "s": args.s,
               "value": bessel_eval(spec, args.s)})
    return 0


def cmd_kernels(args) -> int:
    parts = [float(t) for t in args.end.split(",")]
    if len(parts) < 2:
        raise SystemExit("--end needs at least n,m")
    n, m = int(parts[0]), int(parts[1])
    circs = tuple(parts[2:])
    if len(circs) != n - m:
        raise SystemExit(f"--end {args.end!r}: need n - m = {n - m} circumferences")
    geom = EndGeometry(n=n, torus_circumferences=circs)
    k_grid = _parse_range(args.kgrid, log=True)
    pts = [KernelPoint(float(r), tuple(0.0 for _ in circs))
           for r in _parse_range(args.ptgrid, log=True)]
    _emit(check_bounds(geom, args.j, args.bound, k_grid, pts))
    return 0


def cmd_schur(args) -> int:
    fam = _FAMILY_ALIASES.get(args.family, args.family)
    if fam not in INTEGRAL_IDS:
        raise SystemExit(f"unknown family {args.family!r}")
    env = family_envelope(fam, args.ni, args.nj)
    p_grid = [p for p in _parse_range(args.pgrid) if p > 1]
    _emit(threshold_scan(env, (args.ni, args.nj), p_grid, args.router, fam))
    return 0


def cmd_highenergy(args) -> int:
    fit = h_sup_bound(args.M, _parse_range(args.rgrid), _parse_range(args.kgrid))
    _emit(fit)
    return 0


def cmd_l2const(args) -> int:
    model, engine, grid = _engine_and_grid(args)
    rng = np.random.default_rng(args.seed)
    f = rng.standard_normal(model.num_nodes)
    for i in range(len(model.ends)):
        sl = model.end_slice(i)
        f[sl] *= model.node_radius(i) <= 1e3
    apply_fn = vertical_sqfn if args.kind == "vertical" else horizontal_sqfn
    sf = apply_fn(engine, grid, args.M, f, "full")
    measured = (lp_norm(model, sf, 2) / lp_norm(model, f, 2)) ** 2
    analytic = (1.0 / (2 * (2 * args.M - 1)) if args.kind == "vertical"
                else 1.0 / (2 * (2 * args.M - 1) * (2 * args.M - 2)))
    _emit({"M": args.M, "kind": args.kind, "measured": measured,
           "analytic": analytic,
           "relative_error": abs(measured - analytic) / analytic})
    return 0


def cmd_witness(args) -> int:
    model, engine, grid = _engine_and_grid(args)
    eps_grid = [float(e) for e in args.eps.split(",")]
    res = witness_sweep(model, args.M, args.p, eps_grid, args.kind, engine, grid)
    _emit(res)
    return 0


def cmd_reverse(args) -> int:
    model, engine, grid = _engine_and_grid(args)
    ratio = reverse_check(model, args.M, args.p, None, engine, grid)
    _emit({"M": args.M, "p": args.p, "max_ratio": ratio})
    return 0


def cmd_run(args) -> int:
    try:
        return run_suite(args.config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def cmd_report(args) -> int:
    manifest = Path(args.results) / "manifest.json"
    if not manifest.is_file():
        print(f"no manifest in {args.results}", file=sys.stderr)
        return 2
    data = json.loads(manifest.read_text())
    print(f"config {data['config_file']} ({data['config_hash'][:12]})")
    for rec in data["records"]:
        slope = rec.get("slope")
        extra = f" slope={slope:.4f}" if slope is not None else ""
        print(f"  {rec['experiment_id']}: ratio={rec['ratio']:.6g}{extra}"
              f" ({rec['wall_time']:.2f}s)")
    if data["failures"]:
        for f in data["failures"]:
            print(f"FAIL {f['experiment']}: {f['contract']} "
                  f"expected {f['expected']:.6g}, observed {f['observed']:.6g}")
        return 1
    print("all contracts passed")
    return 0


def cmd_model(args) -> int:
    if args.action != "dump":
        raise SystemExit(f"unknown model action {args.action!r}")
    model = _default_model(args)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        out.write("node,end,radius,measure\n")
        out.write(f"0,hub,0,{model.measure[0]:.12g}\n")
        for i in range(len(model.ends)):
            sl = model.end_slice(i)
            r = model.node_radius(i)
            for q, idx in enumerate(range(sl.start, sl.stop)):
                out.write(f"{idx},{i},{r[q]:.12g},{model.measure[idx]:.12g}\n")
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ends-sqfn",
        description="Square functions on manifolds with ends: numerical laboratory",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("bessel", help="evaluate or envelope-check K_a(d, s)")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--envelope", action="store_true")
    p.set_defaults(func=cmd_bessel)

    p = subs.add_parser("kernels", help="check a resolvent kernel bound on one end")
    p.add_argument("--end", required=True, help="n,m[,L...] for R^m x T^(n-m)")
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--bound", required=True)
    p.add_argument("--kgrid", default="0.01:1", help="k range a:b[:step]")
    p.add_argument("--ptgrid", default="0.1:50", help="separation range a:b[:step]")
    p.set_defaults(func=cmd_kernels)

    p = subs.add_parser("schur", help="scan L^p finiteness of a Schur integral")
    p.add_argument("--family", required=True,
                   help=f"one of {INTEGRAL_IDS} or aliases h1-h4, w1, w2")
    p.add_argument("--ni", type=int, required=True)
    p.add_argument("--nj", type=int, required=True)
    p.add_argument("--pgrid", default="1.5:6:0.25")
    p.add_argument("--router", type=float, default=1e8)
    p.set_defaults(func=cmd_schur)

    p = subs.add_parser("highenergy", help="fit sup |H| <= C exp(-c k r)")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--rgrid", default="1:8")
    p.add_argument("--kgrid", default="1:10")
    p.set_defaults(func=cmd_highenergy)

    p = subs.add_parser("l2const", help="measured vs analytic L^2 constant")
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--kind", choices=("vertical", "horizontal"), required=True)
    p.add_argument("--seed", type=int, default=7)
    _add_model_args(p)
    p.set_defaults(func=cmd_l2const)

    p = subs.add_parser("witness", help="blow-up witness sweep")
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--kind", choices=("vertical", "horizontal"), default="vertical")
    p.add_argument("--eps", default="0.4,0.2,0.1,0.05")
    _add_model_args(p)
    p.set_defaults(func=cmd_witness)

    p = subs.add_parser("reverse", help="reverse inequality sample maximum")
    p.add_argument("--M", type=int, default=1)
    p.add_argument("--p", type=float, default=2.0)
    _add_model_args(p)
    p.set_defaults(func=cmd_reverse)

    p = subs.add_parser("run", help="execute a configured experiment suite")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_run)

    p = subs.add_parser("report", help="summarize a results directory")
    p.add_argument("--results", default="results")
    p.set_defaults(func=cmd_report)

    p = subs.add_parser("model", help="model utilities")
    p.add_argument("action", choices=("dump",))
    p.add_argument("--out", default=None)
    _add_model_args(p)
    p.set_defaults(func=cmd_model)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
