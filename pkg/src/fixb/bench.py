"""Benchmark harness: algorithm x instance grids, CSV records, aggregates.

The CSV schema is fixed and versioned::

    instance,set,n,algorithm,params,seed,backend,status,optimal,makespan,time_ms

Every produced schedule is re-verified against the evaluator before its row
is written; a mismatch aborts the whole run.  Per-run algorithm failures do
not: they become status rows.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from . import oracle
from .backends import BackendError, get_backend
from .core import Instance, Solution, evaluate, verify_solution
from .exact import solve_two_jobs, solve_two_machine_fixed_sequence
from .fileio import FileFormatError, load_instance
from .insertion import insertion_heuristic
from .matheuristics import (
    ALGORITHMS as MATHEURISTIC_IDS,
    MatheuristicError,
    MatheuristicParams,
    run_matheuristic,
)
from .milp import DecodeError, build_mip1, build_mip2, decode_solution, solve

CSV_COLUMNS = (
    "instance", "set", "n", "algorithm", "params", "seed",
    "backend", "status", "optimal", "makespan", "time_ms",
)

ALGORITHM_IDS = (
    "oracle", "two-job", "two-machine-dp", "insertion", "mip1", "mip2",
) + MATHEURISTIC_IDS


class VerificationError(RuntimeError):
    """A produced schedule failed re-evaluation; the harness must stop."""


@dataclass
class RunResult:
    solution: Solution | None
    status: str
    optimal: bool
    time_ms: int
    backend: str = ""
    error: str = ""


@dataclass(frozen=True)
class BenchConfig:
    """One benchmark grid: instances x algorithm specs x seeds."""

    instances: tuple[str, ...]
    algorithms: tuple[dict, ...]
    seeds: tuple[int, ...] = (0,)
    time_limit: float | None = None
    workers: int = 1

    @staticmethod
    def from_file(path: str | Path, out_dir: str | Path | None = None) -> "BenchConfig":
        data = json.loads(Path(path).read_text())
        raw_instances = data.get("instances")
        if isinstance(raw_instances, dict):  # generation spec instead of paths
            from .instgen import GenSpec, write_batch

            spec = GenSpec(
                experiment_set=int(raw_instances["set"]),
                n=int(raw_instances["n"]),
                seed=int(raw_instances.get("seed", 0)),
                count=int(raw_instances.get("count", 1)),
            )
            target = Path(out_dir or Path(path).parent) / "instances"
            paths = [str(p) for p in write_batch(spec, target)]
        elif raw_instances:
            base = Path(path).parent
            paths = [
                str(p if Path(p).is_absolute() else base / p) for p in raw_instances
            ]
        else:
            raise FileFormatError("config needs a non-empty 'instances' entry")
        algorithms = tuple(dict(a) for a in data.get("algorithms", ()))
        if not algorithms:
            raise FileFormatError("config needs a non-empty 'algorithms' entry")
        return BenchConfig(
            instances=tuple(paths),
            algorithms=algorithms,
            seeds=tuple(int(s) for s in data.get("seeds", [0])),
            time_limit=data.get("time_limit"),
            workers=int(data.get("workers", 1)),
        )


def run_algorithm(inst: Instance, algo: str, **options: Any) -> RunResult:
    """Run one solver on one instance, timing the algorithm call only."""
    seed = int(options.get("seed", 0))
    time_limit = options.get("time_limit")
    backend_name = options.get("backend")
    t0 = time.perf_counter()

    def done(sol: Solution, status: str, optimal: bool, backend: str = "") -> RunResult:
        return RunResult(
            solution=sol,
            status=status,
            optimal=optimal,
            time_ms=int((time.perf_counter() - t0) * 1000),
            backend=backend,
        )

    try:
        if algo == "oracle":
            budget = int(options.get("budget", oracle.DEFAULT_BUDGET))
            sol, _cert = oracle.brute_force(inst, budget=budget)
            return done(sol, "optimal", True)
        if algo == "two-job":
            return done(solve_two_jobs(inst), "optimal", True)
        if algo == "two-machine-dp":
            sequence = options.get("sequence") or tuple(range(inst.n))
            sol = solve_two_machine_fixed_sequence(inst, sequence)
            return done(sol, "ok", False)
        if algo == "insertion":
            sol = insertion_heuristic(inst, order=options.get("order"), seed=seed)
            return done(sol, "ok", False)
        if algo in ("mip1", "mip2"):
            backend = get_backend(backend_name)
            if algo == "mip1":
                model = build_mip1(inst)
            else:
                model = build_mip2(inst, max_modes=int(options.get("max_modes", 1000)))
            if options.get("dump_lp"):
                from .milp import write_lp

                write_lp(model, options["dump_lp"])
            outcome = solve(model, time_limit=time_limit, backend=backend)
            if not outcome.has_values:
                return RunResult(
                    solution=None,
                    status=outcome.status,
                    optimal=False,
                    time_ms=int((time.perf_counter() - t0) * 1000),
                    backend=backend.name,
                    error=outcome.message,
                )
            sol = decode_solution(inst, model, outcome)
            return done(sol, outcome.status, outcome.status == "optimal", backend.name)
        if algo in MATHEURISTIC_IDS:
            backend = get_backend(backend_name)
            params = MatheuristicParams(
                algorithm=algo,
                seed=seed,
                time_limit=time_limit,
                sft_r=int(options.get("sft_r", 1)),
                sft_phi=float(options.get("sft_phi", 0.66)),
            )
            result = run_matheuristic(
                inst, params, backend, max_modes=int(options.get("max_modes", 1000))
            )
            return done(result.solution, "ok", False, backend.name)
    except oracle.BudgetExceeded as exc:
        return RunResult(None, "budget_exceeded", False,
                         int((time.perf_counter() - t0) * 1000), error=str(exc))
    except (MatheuristicError, DecodeError) as exc:
        return RunResult(None, "error", False,
                         int((time.perf_counter() - t0) * 1000), error=str(exc))
    raise ValueError(f"unknown algorithm {algo!r}")


def _params_string(spec: dict) -> str:
    skip = {"algo"}
    parts = [f"{k}={spec[k]}" for k in sorted(spec) if k not in skip]
    return ";".join(parts)


def _bench_cell(args: tuple[str, dict, int, float | None]) -> dict:
    """One grid cell; module-level so worker pools can pickle it."""
    inst_path, spec, seed, time_limit = args
    inst = load_instance(inst_path)
    options = {k: v for k, v in spec.items() if k != "algo"}
    options.setdefault("seed", seed)
    options["seed"] = seed
    options.setdefault("time_limit", time_limit)
    result = run_algorithm(inst, spec["algo"], **options)
    if result.solution is not None:
        problems = verify_solution(inst, result.solution)
        if problems:
            raise VerificationError(
                f"{inst.name} / {spec['algo']}: " + "; ".join(problems)
            )
    return {
        "instance": inst.name,
        "set": inst.meta.get("experiment_set", ""),
        "n": inst.n,
        "algorithm": spec["algo"],
        "params": _params_string(spec),
        "seed": seed,
        "backend": result.backend,
        "status": result.status,
        "optimal": int(result.optimal),
        "makespan": result.solution.makespan if result.solution else "",
        "time_ms": result.time_ms,
    }


def run_bench(config: BenchConfig, out_dir: str | Path) -> list[dict]:
    """Execute the grid; stream records to records.csv, then aggregate.

    Rows are written in deterministic grid order (instances outermost, then
    algorithms, then seeds), so identical configs produce identical CSVs up
    to the time column.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = [
        (path, spec, seed, config.time_limit)
        for path in config.instances
        for spec in config.algorithms
        for seed in config.seeds
    ]
    records: list[dict] = []
    records_path = out / "records.csv"
    with records_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        if config.workers > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                for record in pool.map(_bench_cell, cells):
                    writer.writerow(record)
                    fh.flush()
                    records.append(record)
        else:
            for cell in cells:
                record = _bench_cell(cell)
                writer.writerow(record)
                fh.flush()
                records.append(record)
    write_aggregate(records, out)
    return records


def aggregate(records: Sequence[dict]) -> list[dict]:
    """Group by (set, n, algorithm, params): mean makespan/time and opt share."""
    groups: dict[tuple, list[dict]] = {}
    for rec in records:
        key = (rec["set"], rec["n"], rec["algorithm"], rec["params"])
        groups.setdefault(key, []).append(rec)
    rows = []
    for key in sorted(groups, key=lambda k: tuple(str(p) for p in k)):
        group = groups[key]
        solved = [r for r in group if r["makespan"] != ""]
        rows.append(
            {
                "set": key[0],
                "n": key[1],
                "algorithm": key[2],
                "params": key[3],
                "runs": len(group),
                "solved": len(solved),
                "mean_makespan": (
                    round(sum(r["makespan"] for r in solved) / len(solved), 2)
                    if solved
                    else ""
                ),
                "mean_time_ms": round(sum(r["time_ms"] for r in group) / len(group), 1),
                "opt_pct": round(100.0 * sum(r["optimal"] for r in group) / len(group), 1),
            }
        )
    return rows


def write_aggregate(records: Sequence[dict], out_dir: Path) -> None:
    rows = aggregate(records)
    columns = (
        "set", "n", "algorithm", "params", "runs", "solved",
        "mean_makespan", "mean_time_ms", "opt_pct",
    )
    with (out_dir / "summary.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)
    lines = [
        "| " + " | ".join(columns) + " |",
        "|" + "|".join("---" for _ in columns) + "|",
    ]
    for row in rows:
        lines.append("| " + " | ".join(str(row[c]) for c in columns) + " |")
    (out_dir / "summary.md").write_text("\n".join(lines) + "\n")
