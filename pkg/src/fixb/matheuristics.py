"""MIP-guided heuristics.

Seven algorithms in three families:

* assignment first (``ra-os``, ``la-os``, ``ia-os``, ``ma-os``): pick one
  assignment mode per job (randomly, by LP rounding, by iterated LP fixing,
  or by per-job workload minimization), then solve the explicit positional
  model restricted to sequencing.
* sequence first (``rs-oa``, ``ms-oa``): pick a job order (randomly, or from
  a full ``ma-os`` run), then solve the restricted model for the optimal
  assignment.
* ``sft``: iteratively solve the LP relaxation of the implicit positional
  model, permanently fixing high-valued position/mode binaries until none
  clears the threshold, then solve the residual MIP.

Every run returns the decoded schedule plus a trace of its phases.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .backends import SolverBackend, get_backend
from .core import Instance, Solution, Splits, evaluate
from .exact import job_tables
from .milp import (
    MilpModel,
    build_mip1,
    build_mip2,
    decode_solution,
    fix_assignment,
    fix_sequence,
    solve,
    solve_lp_relaxation,
)

ALGORITHMS = ("ra-os", "la-os", "ia-os", "ma-os", "rs-oa", "ms-oa", "sft")


class MatheuristicError(RuntimeError):
    """A phase failed; the trace so far is attached."""

    def __init__(self, message: str, trace: list[dict] | None = None):
        super().__init__(message)
        self.trace = trace or []


@dataclass(frozen=True)
class MatheuristicParams:
    algorithm: str
    seed: int = 0
    time_limit: float | None = None  # per MIP phase
    sft_r: int = 1
    sft_phi: float = 0.66

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.sft_r < 1:
            raise ValueError("sft_r must be >= 1")
        if not 0 < self.sft_phi <= 1:
            raise ValueError("sft_phi must be in (0, 1]")


@dataclass
class MatheuristicResult:
    solution: Solution
    trace: list[dict] = field(default_factory=list)
    algorithm: str = ""


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _phase(trace: list[dict], name: str, t0: float, **extra: Any) -> None:
    trace.append({"phase": name, "time_ms": int((time.perf_counter() - t0) * 1000), **extra})


def min_workload_modes(inst: Instance) -> list[Splits]:
    """Per job, the mode minimizing its total processing time.

    Boundary contributions are independent, so each split is chosen on its
    own; ties go to the larger split.
    """
    modes = []
    for j in range(inst.n):
        tables = job_tables(inst, j)
        splits = []
        for k in range(inst.layout.m - 1):
            costs = [u + d for u, d in zip(tables.up[k], tables.down[k])]
            best = max(range(len(costs)), key=lambda l: (-costs[l], l))
            splits.append(best)
        modes.append(tuple(splits))
    return modes


def monotone_split_from_lp(up_vals: Sequence[float], down_vals: Sequence[float]) -> int:
    """Best split of one block against fractional machine indicators.

    Maximizes agreement with the LP mass (upstream values before the split,
    downstream after); ties go to the larger split, so a block of exact-0.5
    values lands entirely upstream.
    """
    best_l, best_score = 0, None
    for l in range(len(up_vals) + 1):
        score = sum(up_vals[:l]) + sum(down_vals[l:])
        if best_score is None or score >= best_score:  # ascending l: ties go up
            best_l, best_score = l, score
    return best_l


def _lp_rounding_modes(
    inst: Instance, backend: SolverBackend, time_limit: float | None, trace: list[dict]
) -> list[Splits]:
    model = build_mip1(inst)
    t0 = time.perf_counter()
    lp = solve_lp_relaxation(model, time_limit=time_limit, backend=backend)
    _phase(trace, "lp-relaxation", t0, status=lp.status, objective=lp.objective)
    if not lp.has_values:
        raise MatheuristicError(f"LP relaxation failed: {lp.status}", trace)
    modes = []
    for j in range(inst.n):
        splits = []
        for k, block in enumerate(inst.layout.block_slots):
            up = [lp.values[model.var_id(("opm", j, i, k))] for i in block]
            down = [lp.values[model.var_id(("opm", j, i, k + 1))] for i in block]
            splits.append(monotone_split_from_lp(up, down))
        modes.append(tuple(splits))
    return modes


def _iterative_lp_modes(
    inst: Instance, backend: SolverBackend, time_limit: float | None, trace: list[dict]
) -> list[Splits]:
    """Fix the largest fractional machine indicator, propagate, re-solve."""
    lay = inst.layout
    model = build_mip1(inst)
    for j in range(inst.n):  # dedicated operations carry no decision
        for k, i in enumerate(lay.single_slots):
            model.fix(("opm", j, i, k), 1.0)
    block_of = {}
    for k, block in enumerate(lay.block_slots):
        for t, i in enumerate(block):
            block_of[i] = (k, t)
    iterations = 0
    while True:
        free = [
            v.key
            for v in model.variables
            if v.key[0] == "opm" and v.idx not in model.fixings
        ]
        if not free:
            break
        t0 = time.perf_counter()
        lp = solve_lp_relaxation(model, time_limit=time_limit, backend=backend)
        if not lp.has_values:
            raise MatheuristicError(f"LP relaxation failed: {lp.status}", trace)
        iterations += 1
        _, j, i, k = max(
            free,
            key=lambda key: (
                lp.values[model.var_id(key)],
                -key[1],
                -key[2],
                -key[3],
            ),
        )
        kb, t = block_of[i]
        block = lay.block_slots[kb]
        if k == kb:  # upstream: this and all earlier block slots stay on k
            targets = [(block[t2], True) for t2 in range(t + 1)]
        else:  # downstream: this and all later block slots move to k+1
            targets = [(block[t2], False) for t2 in range(t, len(block))]
        for slot, upstream in targets:
            for mach, value in ((kb, upstream), (kb + 1, not upstream)):
                idx = model.var_id(("opm", j, slot, mach))
                if idx not in model.fixings:
                    model.fix(idx, 1.0 if value else 0.0)
        _phase(
            trace,
            "iterative-fix",
            t0,
            status=lp.status,
            fixed=("opm", j, i, k),
            value=float(lp.values[model.var_id(("opm", j, i, k))]),
        )
    modes = []
    for j in range(inst.n):
        splits = []
        for k, block in enumerate(lay.block_slots):
            splits.append(
                sum(
                    1
                    for i in block
                    if model.fixings[model.var_id(("opm", j, i, k))] == 1.0
                )
            )
        modes.append(tuple(splits))
    trace.append({"phase": "iterative-fix-summary", "iterations": iterations})
    return modes


def assignment_first(
    inst: Instance,
    strategy: str,
    params: MatheuristicParams,
    backend: SolverBackend | None = None,
) -> MatheuristicResult:
    """Fix one mode per job by the given strategy, then sequence optimally."""
    be = backend or get_backend()
    trace: list[dict] = []
    if strategy == "ra":
        rng = _rng(params.seed)
        modes = [
            tuple(int(rng.integers(0, nk, endpoint=True)) for nk in inst.layout.block_sizes)
            for _ in range(inst.n)
        ]
        trace.append({"phase": "random-assignment", "seed": params.seed})
    elif strategy == "ma":
        modes = min_workload_modes(inst)
        trace.append({"phase": "min-workload-assignment"})
    elif strategy == "la":
        modes = _lp_rounding_modes(inst, be, params.time_limit, trace)
    elif strategy == "ia":
        modes = _iterative_lp_modes(inst, be, params.time_limit, trace)
    else:
        raise ValueError(f"unknown assignment strategy {strategy!r}")
    trace.append({"phase": "modes", "modes": [list(s) for s in modes]})
    model = build_mip1(inst)
    fix_assignment(model, inst, modes)
    t0 = time.perf_counter()
    outcome = solve(model, time_limit=params.time_limit, backend=be)
    _phase(trace, "sequencing-mip", t0, status=outcome.status, objective=outcome.objective)
    if not outcome.has_values:
        raise MatheuristicError(f"sequencing phase yielded no schedule: {outcome.status}", trace)
    solution = decode_solution(inst, model, outcome)
    return MatheuristicResult(solution=solution, trace=trace, algorithm=f"{strategy}-os")


def sequence_first(
    inst: Instance,
    strategy: str,
    params: MatheuristicParams,
    backend: SolverBackend | None = None,
) -> MatheuristicResult:
    """Fix the job order by the given strategy, then assign optimally."""
    be = backend or get_backend()
    trace: list[dict] = []
    if strategy == "rs":
        rng = _rng(params.seed)
        sequence = [int(v) for v in rng.permutation(inst.n)]
        trace.append({"phase": "random-sequence", "seed": params.seed, "sequence": sequence})
    elif strategy == "ms":
        inner = assignment_first(inst, "ma", params, be)
        sequence = list(inner.solution.sequence)
        trace.extend(inner.trace)
        trace.append({"phase": "min-workload-sequence", "sequence": sequence})
    else:
        raise ValueError(f"unknown sequence strategy {strategy!r}")
    model = build_mip1(inst)
    fix_sequence(model, sequence)
    t0 = time.perf_counter()
    outcome = solve(model, time_limit=params.time_limit, backend=be)
    _phase(trace, "assignment-mip", t0, status=outcome.status, objective=outcome.objective)
    if not outcome.has_values:
        raise MatheuristicError(f"assignment phase yielded no schedule: {outcome.status}", trace)
    solution = decode_solution(inst, model, outcome)
    return MatheuristicResult(solution=solution, trace=trace, algorithm=f"{strategy}-oa")


def _fix_one_with_exclusions(model: MilpModel, j: int, h: int, l: int) -> None:
    """Pin job j to (position h, mode l); conflicting binaries drop to zero."""
    n = model.info["n"]
    n_modes = len(model.info["modes"])
    model.fix(("posmode", j, h, l), 1.0)
    for h2 in range(n):
        for l2 in range(n_modes):
            if (h2, l2) != (h, l):
                idx = model.var_id(("posmode", j, h2, l2))
                if idx not in model.fixings:
                    model.fix(idx, 0.0)
    for j2 in range(n):
        if j2 != j:
            for l2 in range(n_modes):
                idx = model.var_id(("posmode", j2, h, l2))
                if idx not in model.fixings:
                    model.fix(idx, 0.0)


def sft(
    inst: Instance,
    params: MatheuristicParams,
    backend: SolverBackend | None = None,
    max_modes: int = 1000,
) -> MatheuristicResult:
    """Sequential fixing with threshold over the implicit positional model.

    Each round solves the current LP relaxation, sorts the free binaries by
    value, and permanently fixes to 1 every one of the top ``sft_r`` whose
    value reaches ``sft_phi``, excluding its row conflicts.  When no variable
    qualifies (or the LP is already integral) the residual MIP is solved.
    """
    be = backend or get_backend()
    trace: list[dict] = []
    model = build_mip2(inst, max_modes=max_modes)
    n = inst.n
    rounds_with_fixes = 0
    while True:
        t0 = time.perf_counter()
        lp = solve_lp_relaxation(model, time_limit=params.time_limit, backend=be)
        if lp.status == "infeasible":
            raise MatheuristicError("LP infeasible after fixings (internal error)", trace)
        if not lp.has_values:
            raise MatheuristicError(f"LP relaxation failed: {lp.status}", trace)
        free = [
            v.key for v in model.variables
            if v.key[0] == "posmode" and v.idx not in model.fixings
        ]
        integral = all(
            min(lp.values[model.var_id(k)], 1.0 - lp.values[model.var_id(k)]) < 1e-6
            for k in free
        )
        if integral:
            _phase(trace, "lp-relaxation", t0, status=lp.status, objective=lp.objective,
                   integral=True, fixed=0)
            break
        ranked = sorted(
            free,
            key=lambda key: (-lp.values[model.var_id(key)], key[1], key[2], key[3]),
        )
        fixed_now = 0
        for key in ranked[: params.sft_r]:
            if lp.values[model.var_id(key)] < params.sft_phi:
                break  # sorted descending: nothing further qualifies
            if model.var_id(key) in model.fixings:
                continue  # excluded by an earlier fixing in this round
            _, j, h, l = key
            _fix_one_with_exclusions(model, j, h, l)
            fixed_now += 1
        _phase(trace, "lp-relaxation", t0, status=lp.status, objective=lp.objective,
               integral=False, fixed=fixed_now)
        if fixed_now == 0:
            break
        rounds_with_fixes += 1
        if rounds_with_fixes > n:
            raise MatheuristicError("fixing did not terminate (internal error)", trace)
    t0 = time.perf_counter()
    outcome = solve(model, time_limit=params.time_limit, backend=be)
    _phase(trace, "residual-mip", t0, status=outcome.status, objective=outcome.objective)
    if not outcome.has_values:
        raise MatheuristicError(f"residual MIP yielded no schedule: {outcome.status}", trace)
    solution = decode_solution(inst, model, outcome)
    return MatheuristicResult(solution=solution, trace=trace, algorithm="sft")


def run_matheuristic(
    inst: Instance,
    params: MatheuristicParams,
    backend: SolverBackend | None = None,
    max_modes: int = 1000,
) -> MatheuristicResult:
    """Dispatch on the algorithm id."""
    algo = params.algorithm
    if algo.endswith("-os"):
        return assignment_first(inst, algo[:2], params, backend)
    if algo.endswith("-oa"):
        return sequence_first(inst, algo[:2], params, backend)
    if algo == "sft":
        return sft(inst, params, backend, max_modes=max_modes)
    raise ValueError(f"unknown algorithm {algo!r}")
