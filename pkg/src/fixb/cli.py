"""Command-line interface.

Verbs: ``gen`` (instance batches), ``solve`` (one algorithm on one
instance), ``bench`` (grids), ``gantt`` (SVG), ``verify`` (re-check a
solution file).  Exit codes: 0 success, 1 invalid input, 2 backend missing,
3 internal verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .backends import BackendError
from .bench import ALGORITHM_IDS, BenchConfig, VerificationError, run_algorithm, run_bench
from .core import validate_instance, verify_solution, evaluate, DimensionError
from .fileio import FileFormatError, load_instance, load_solution, save_solution
from .instgen import GenSpec, write_batch
from .milp import DecodeError

EXIT_OK = 0
EXIT_INVALID_INPUT = 1
EXIT_BACKEND_MISSING = 2
EXIT_VERIFICATION = 3


def _parse_int_list(text: str) -> list[int]:
    return [int(v) - 1 for v in text.replace(" ", "").split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fixb", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate seeded benchmark instances")
    gen.add_argument("--set", type=int, choices=(1, 2), required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--count", type=int, default=1)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output directory")

    solve = sub.add_parser("solve", help="run one algorithm on one instance")
    solve.add_argument("--algo", required=True, choices=sorted(ALGORITHM_IDS))
    solve.add_argument("--instance", required=True)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--time-limit", type=float, default=None, dest="time_limit")
    solve.add_argument("--budget", type=int, default=None, help="oracle evaluation budget")
    solve.add_argument("--sequence", help="fixed job order, e.g. '3,1,2' (1-based)")
    solve.add_argument("--order", help="insertion processing order (1-based)")
    solve.add_argument("--sft-r", type=int, default=1, dest="sft_r")
    solve.add_argument("--sft-phi", type=float, default=0.66, dest="sft_phi")
    solve.add_argument("--backend", default=None, help="MILP backend name")
    solve.add_argument("--max-modes", type=int, default=1000, dest="max_modes")
    solve.add_argument("--dump-lp", dest="dump_lp", help="write the model in LP format")
    solve.add_argument("--out", help="write the solution JSON here")

    bench = sub.add_parser("bench", help="run an algorithm x instance grid")
    bench.add_argument("--config", required=True)
    bench.add_argument("--out", required=True)
    bench.add_argument("--workers", type=int, default=None)

    gantt = sub.add_parser("gantt", help="render a solution file as SVG")
    gantt.add_argument("--solution", required=True)
    gantt.add_argument("--instance", required=True)
    gantt.add_argument("--out", required=True)

    verify = sub.add_parser("verify", help="re-check a solution against its instance")
    verify.add_argument("--solution", required=True)
    verify.add_argument("--instance", required=True)
    return parser


def _load_checked_instance(path: str):
    inst = load_instance(path)
    report = validate_instance(inst)
    if not report.ok:
        raise FileFormatError(
            f"{path}: invalid instance: " + "; ".join(report.problems)
        )
    return inst


def cmd_gen(args: argparse.Namespace) -> int:
    spec = GenSpec(experiment_set=args.set, n=args.n, seed=args.seed, count=args.count)
    paths = write_batch(spec, args.out)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    inst = _load_checked_instance(args.instance)
    options = {
        "seed": args.seed,
        "time_limit": args.time_limit,
        "sft_r": args.sft_r,
        "sft_phi": args.sft_phi,
        "backend": args.backend,
        "max_modes": args.max_modes,
    }
    if args.budget is not None:
        options["budget"] = args.budget
    if args.sequence:
        options["sequence"] = _parse_int_list(args.sequence)
    if args.order:
        options["order"] = _parse_int_list(args.order)
    if args.dump_lp:
        options["dump_lp"] = args.dump_lp
    result = run_algorithm(inst, args.algo, **options)
    if result.solution is None:
        print(f"{args.algo} on {inst.name}: {result.status} ({result.error})", file=sys.stderr)
        return EXIT_INVALID_INPUT if result.status == "budget_exceeded" else EXIT_VERIFICATION
    problems = verify_solution(inst, result.solution)
    if problems:
        print("internal verification failure: " + "; ".join(problems), file=sys.stderr)
        return EXIT_VERIFICATION
    sol = result.solution
    print(
        f"instance={inst.name} algorithm={args.algo} makespan={sol.makespan} "
        f"status={result.status} optimal={result.optimal} time_ms={result.time_ms}"
    )
    print("sequence=" + ",".join(str(j + 1) for j in sol.sequence))
    print("splits=" + ";".join(",".join(map(str, sol.modes[j])) for j in sol.sequence))
    if args.out:
        params = {
            k: v
            for k, v in (
                ("seed", args.seed),
                ("time_limit", args.time_limit),
                ("sft_r", args.sft_r if args.algo == "sft" else None),
                ("sft_phi", args.sft_phi if args.algo == "sft" else None),
            )
            if v is not None
        }
        save_solution(
            sol,
            args.out,
            instance_name=inst.name,
            algorithm=args.algo,
            params=params,
            time_ms=result.time_ms,
        )
        print(f"solution written to {args.out}")
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    config = BenchConfig.from_file(args.config, out_dir=args.out)
    if args.workers:
        config = BenchConfig(
            instances=config.instances,
            algorithms=config.algorithms,
            seeds=config.seeds,
            time_limit=config.time_limit,
            workers=args.workers,
        )
    records = run_bench(config, args.out)
    print(f"{len(records)} runs -> {Path(args.out) / 'records.csv'}")
    return EXIT_OK


def _rebind_solution(args: argparse.Namespace):
    inst = _load_checked_instance(args.instance)
    record = load_solution(args.solution)
    if record.instance and record.instance != inst.name:
        print(
            f"warning: solution was produced for {record.instance!r}, "
            f"instance file is {inst.name!r}",
            file=sys.stderr,
        )
    return inst, record


def cmd_gantt(args: argparse.Namespace) -> int:
    from .gantt import GanttError, render_gantt

    inst, record = _rebind_solution(args)
    try:
        sol = evaluate(inst, record.sequence, record.modes)
    except DimensionError as exc:
        print(f"solution does not fit the instance: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    if tuple(map(tuple, record.starts)) != sol.starts or record.makespan != sol.makespan:
        print("solution file disagrees with re-evaluation; refusing to draw", file=sys.stderr)
        return EXIT_VERIFICATION
    try:
        svg = render_gantt(inst, sol)
    except GanttError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID_INPUT
    Path(args.out).write_text(svg)
    print(f"gantt written to {args.out}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    inst, record = _rebind_solution(args)
    try:
        sol = evaluate(inst, record.sequence, record.modes)
    except DimensionError as exc:
        print(f"solution does not fit the instance: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    problems = []
    if tuple(map(tuple, record.starts)) != sol.starts:
        problems.append("start times are not the earliest-start schedule of (sequence, splits)")
    if record.makespan != sol.makespan:
        problems.append(f"makespan {record.makespan} != evaluated {sol.makespan}")
    if problems:
        for p in problems:
            print("FAIL: " + p, file=sys.stderr)
        return EXIT_VERIFICATION
    print(f"OK: {args.solution} is a valid schedule of {inst.name} (makespan {sol.makespan})")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "gen": cmd_gen,
        "solve": cmd_solve,
        "bench": cmd_bench,
        "gantt": cmd_gantt,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND_MISSING
    except (FileFormatError, FileNotFoundError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except (VerificationError, DecodeError, RuntimeError) as exc:
        print(f"internal verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION


if __name__ == "__main__":
    sys.exit(main())
