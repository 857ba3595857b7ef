"""Command-line entry point: ``tdeim generate|approx|sweep|verify``.

CSV goes to stdout.  Exit status is 0 on success, 2 for usage errors and
1 when a computation fails or a bound check does not hold.  Set
``TDEIM_NUM_THREADS`` to cap the BLAS/LAPACK thread pool.
"""
from __future__ import annotations

import argparse
import contextlib
import os
import sys

from . import datasets, experiments
from .errors import RankError, TdeimError
from .samplers import METHODS


def _dims(text):
    try:
        dims = tuple(int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 100x100x100, got {text!r}")
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"dims must be three positive integers, got {text!r}")
    return dims


def _methods(text):
    names = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in names if m not in METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown method(s) {', '.join(bad)}")
    return names


def build_parser():
    parser = argparse.ArgumentParser(prog="tdeim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a test tensor as a T3D1 file")
    gen_sub = gen.add_subparsers(dest="kind", required=True)
    syn = gen_sub.add_parser("synthetic", help="entries (i^p + j^p + k^p)^(-1/p)")
    syn.add_argument("--p", type=float, required=True)
    syn.add_argument("--dims", type=_dims, default=(300, 400, 300))
    syn.add_argument("-o", "--out")
    fun = gen_sub.add_parser("function", help="optimization test function on a 1000x1000 grid")
    fun.add_argument("--name", choices=sorted(datasets.FUNCTIONS), required=True)
    fun.add_argument("--booth-literal", action="store_true",
                     help="leave the second Booth term unsquared")
    fun.add_argument("--grid", choices=datasets.GRID_MODES, default="integer",
                     help="integer: x = 1..1000; linspace: 1000 points over [0, 1000]")
    fun.add_argument("-o", "--out")

    def add_common(p):
        p.add_argument("input", help="T3D1 tensor file")
        p.add_argument("--middle", choices=("optimal", "intersection"), default="optimal")
        p.add_argument("--total-time", action="store_true",
                       help="append wall_seconds_total (includes the t-SVD basis)")
        p.add_argument("--no-header", action="store_true")

    app = sub.add_parser("approx", help="one CUR approximation, one CSV row")
    add_common(app)
    app.add_argument("--method", choices=METHODS, default="tdeim")
    app.add_argument("--rank", type=int, required=True)
    app.add_argument("--extended-rank", type=int, help="total slices for htdeim")
    app.add_argument("--seed", type=int, default=0)

    sw = sub.add_parser("sweep", help="errors over a range of ranks")
    add_common(sw)
    sw.add_argument("--methods", type=_methods, required=True,
                    help="comma separated, from " + ",".join(METHODS))
    sw.add_argument("--rank-min", type=int, default=1)
    sw.add_argument("--rank-max", type=int, required=True)
    sw.add_argument("--trials", type=int, default=1)
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--htdeim-basis-rank", type=int)

    ver = sub.add_parser("verify", help="check the CUR error bound for a TDEIM selection")
    ver.add_argument("input")
    ver.add_argument("--rank", type=int, required=True)
    return parser


def _thread_limit():
    n = os.environ.get("TDEIM_NUM_THREADS")
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(n))


def cmd_generate(args):
    if args.kind == "synthetic":
        if not args.p > 0:
            raise RankError("--p must be positive")
        x = datasets.gen_synthetic(args.p, args.dims)
        out = args.out or "synthetic_p{:g}_{}.t3d".format(args.p, "x".join(map(str, args.dims)))
    else:
        spec = datasets.FunctionSpec(args.name, booth_literal=args.booth_literal, grid_mode=args.grid)
        x = datasets.gen_function_tensor(spec)
        out = args.out or f"{args.name}.t3d"
    datasets.write_tensor(out, x)
    print(out)


def cmd_approx(args):
    x = datasets.read_tensor(args.input)
    if args.method == "htdeim" and args.extended_rank is None:
        raise RankError("--extended-rank is required for htdeim")
    rec = experiments.run_approx(
        x, args.method, args.rank, args.extended_rank, args.middle, seed=args.seed
    )
    experiments.write_records([rec], sys.stdout, args.total_time, not args.no_header)


def cmd_sweep(args):
    x = datasets.read_tensor(args.input)
    if args.trials < 1:
        raise RankError("--trials must be at least 1")
    records = experiments.sweep(
        x, args.methods, args.rank_min, args.rank_max, args.trials, args.seed,
        args.middle, args.htdeim_basis_rank,
    )
    experiments.write_records(records, sys.stdout, args.total_time, not args.no_header)


def cmd_verify(args):
    x = datasets.read_tensor(args.input)
    p, q, rep = experiments.run_verify(x, args.rank)
    print(f"rank: {args.rank}")
    print("p: " + " ".join(map(str, p.one_based)))
    print("q: " + " ".join(map(str, q.one_based)))
    print(f"eta_p: {rep.eta_p!r}")
    print(f"eta_q: {rep.eta_q!r}")
    print(f"lhs: {rep.lhs!r}")
    print(f"rhs: {rep.rhs!r}")
    print(f"projector_lhs: {rep.projector_lhs!r}")
    print(f"projector_rhs: {rep.projector_rhs!r}")
    print("bound: " + ("pass" if rep.passed else "fail"))
    print("projector_bound: " + ("pass" if rep.projector_passed else "fail"))
    return 0 if rep.passed and rep.projector_passed else 1


COMMANDS = {"generate": cmd_generate, "approx": cmd_approx, "sweep": cmd_sweep, "verify": cmd_verify}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep" and not args.methods:
        parser.error("--methods is empty")
    try:
        with _thread_limit():
            return COMMANDS[args.command](args) or 0
    except RankError as exc:
        parser.error(str(exc))
    except (TdeimError, OSError) as exc:
        print(f"tdeim: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        parser.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
