"""Backend-neutral MILP models of the scheduling problem.

Two formulations are provided:

* ``mip1`` (explicit assignment): position binaries per (job, position),
  one binary per (job, slot, eligible machine), continuous start and
  per-position workload variables tied together by big-M rows.
* ``mip2`` (implicit assignment): one binary per (job, position, mode) with
  modes precomputed by :func:`fixb.core.enumerate_modes`; workloads are
  folded into the start-time rows.

Models carry their own variable directory so heuristics can fix variables by
structured key and solutions can be decoded back into schedules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .backends import BackendError, SolveOutcome, SolverBackend, get_backend
from .core import (
    Instance,
    Solution,
    Splits,
    count_modes,
    enumerate_modes,
    evaluate,
    mode_workloads,
)

VarKey = tuple
INT_TOL = 1e-6


class DecodeError(ValueError):
    """Solver values cannot be unambiguously turned into a schedule."""


class ModeCountExceeded(ValueError):
    """The implicit model would need more modes than the configured guard."""


@dataclass(frozen=True)
class Variable:
    idx: int
    key: VarKey
    kind: str  # 'B' or 'C'
    lb: float
    ub: float

    @property
    def name(self) -> str:
        return f"{self.key[0]}[{','.join(str(p) for p in self.key[1:])}]"


@dataclass(frozen=True)
class Row:
    coeffs: tuple[tuple[int, float], ...]
    sense: str  # '<=', '>=', '=='
    rhs: float
    name: str = ""


@dataclass
class MilpModel:
    """Variables, linear rows, a minimization objective, and fixings."""

    kind: str
    variables: list[Variable] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    fixings: dict[int, float] = field(default_factory=dict)
    info: dict[str, Any] = field(default_factory=dict)
    _index: dict[VarKey, int] = field(default_factory=dict)

    def add_var(self, key: VarKey, kind: str, lb: float, ub: float) -> int:
        if key in self._index:
            raise ValueError(f"variable {key} declared twice")
        idx = len(self.variables)
        self.variables.append(Variable(idx=idx, key=key, kind=kind, lb=lb, ub=ub))
        self._index[key] = idx
        return idx

    def add_row(
        self, coeffs: Iterable[tuple[int, float]], sense: str, rhs: float, name: str = ""
    ) -> None:
        self.rows.append(Row(coeffs=tuple(coeffs), sense=sense, rhs=rhs, name=name))

    def var_id(self, key: VarKey) -> int:
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"no variable {key} in this model") from None

    def keys_with_prefix(self, prefix: str) -> list[VarKey]:
        return [v.key for v in self.variables if v.key[0] == prefix]

    def fix(self, selector: VarKey | str | int, value: float) -> None:
        """Pin a variable; binary fixings must be 0 or 1.

        Re-fixing to a different value is rejected: a fixing is permanent.
        """
        if isinstance(selector, int):
            idx = selector
        elif isinstance(selector, str):
            matches = [v.idx for v in self.variables if v.name == selector]
            if not matches:
                raise KeyError(f"no variable named {selector!r}")
            idx = matches[0]
        else:
            idx = self.var_id(selector)
        var = self.variables[idx]
        if var.kind == "B" and value not in (0, 1, 0.0, 1.0):
            raise ValueError(f"binary {var.name} can only be fixed to 0 or 1")
        prev = self.fixings.get(idx)
        if prev is not None and prev != value:
            raise ValueError(f"{var.name} already fixed to {prev}, cannot refix to {value}")
        self.fixings[idx] = float(value)

    def is_fixed(self, key: VarKey) -> bool:
        return self._index[key] in self.fixings

    def effective_bounds(self, idx: int) -> tuple[float, float]:
        fixed = self.fixings.get(idx)
        if fixed is not None:
            return fixed, fixed
        var = self.variables[idx]
        return var.lb, var.ub

    def binary_count(self) -> int:
        return sum(1 for v in self.variables if v.kind == "B")

    def clone(self) -> "MilpModel":
        copy = MilpModel(
            kind=self.kind,
            variables=list(self.variables),
            rows=list(self.rows),
            objective=dict(self.objective),
            fixings=dict(self.fixings),
            info=dict(self.info),
        )
        copy._index = dict(self._index)
        return copy


def _total_duration(inst: Instance) -> int:
    return sum(sum(sum(row) for row in per_job) for per_job in inst.durations)


def build_mip1(inst: Instance) -> MilpModel:
    """Positional model with explicit operation-to-machine binaries."""
    lay = inst.layout
    n, m, q = inst.n, lay.m, lay.q
    model = MilpModel(kind="mip1", info={"n": n, "m": m})
    horizon = float(_total_duration(inst))
    for j in range(n):
        for h in range(n):
            model.add_var(("pos", j, h), "B", 0, 1)
    for j in range(n):
        for i in range(q):
            for k in lay.slots[i]:
                model.add_var(("opm", j, i, k), "B", 0, 1)
    for h in range(n):
        for k in range(m):
            model.add_var(("start", h, k), "C", 0, horizon)
    for h in range(n):
        for k in range(m):
            model.add_var(("load", h, k), "C", 0, horizon)

    for j in range(n):  # one position per job
        model.add_row(
            [(model.var_id(("pos", j, h)), 1.0) for h in range(n)], "==", 1.0, f"job_pos[{j}]"
        )
    for h in range(n):  # one job per position
        model.add_row(
            [(model.var_id(("pos", j, h)), 1.0) for j in range(n)], "==", 1.0, f"pos_job[{h}]"
        )
    for j in range(n):  # one machine per operation
        for i in range(q):
            model.add_row(
                [(model.var_id(("opm", j, i, k)), 1.0) for k in lay.slots[i]],
                "==",
                1.0,
                f"op_machine[{j},{i}]",
            )
    for j in range(n):  # operations never move back upstream
        for i in range(q - 1):
            for k in lay.slots[i + 1]:
                for k2 in lay.slots[i]:
                    if k < k2:
                        model.add_row(
                            [
                                (model.var_id(("opm", j, i + 1, k)), 1.0),
                                (model.var_id(("opm", j, i, k2)), 1.0),
                            ],
                            "<=",
                            1.0,
                            f"order[{j},{i},{k},{k2}]",
                        )
    for h in range(n):  # machine precedence within a job
        for k in range(m - 1):
            model.add_row(
                [
                    (model.var_id(("start", h, k + 1)), 1.0),
                    (model.var_id(("start", h, k)), -1.0),
                    (model.var_id(("load", h, k)), -1.0),
                ],
                ">=",
                0.0,
                f"machine_prec[{h},{k}]",
            )
    for h in range(n - 1):  # job precedence on each machine
        for k in range(m):
            model.add_row(
                [
                    (model.var_id(("start", h + 1, k)), 1.0),
                    (model.var_id(("start", h, k)), -1.0),
                    (model.var_id(("load", h, k)), -1.0),
                ],
                ">=",
                0.0,
                f"job_prec[{h},{k}]",
            )
    for h in range(1, n):  # blocking: predecessor must have moved on
        for k in range(m - 1):
            model.add_row(
                [
                    (model.var_id(("start", h, k)), 1.0),
                    (model.var_id(("start", h - 1, k + 1)), -1.0),
                ],
                ">=",
                0.0,
                f"blocking[{h},{k}]",
            )
    for h in range(n):  # workload of the job placed at position h
        for k in range(m):
            for j in range(n):
                coeffs = [(model.var_id(("load", h, k)), 1.0)]
                big_m = 0.0
                for i in range(q):
                    if k in lay.slots[i]:
                        p = inst.duration(j, i, k)
                        coeffs.append((model.var_id(("opm", j, i, k)), -float(p)))
                        big_m += p
                coeffs.append((model.var_id(("pos", j, h)), -big_m))
                model.add_row(coeffs, ">=", -big_m, f"workload[{h},{k},{j}]")

    model.objective = {
        model.var_id(("start", n - 1, m - 1)): 1.0,
        model.var_id(("load", n - 1, m - 1)): 1.0,
    }
    return model


def build_mip2(inst: Instance, max_modes: int = 1000) -> MilpModel:
    """Positional model over precomputed assignment modes.

    Raises:
        ModeCountExceeded: if the layout has more modes than ``max_modes``.
    """
    lay = inst.layout
    n, m = inst.n, lay.m
    n_modes = count_modes(lay)
    if n_modes > max_modes:
        raise ModeCountExceeded(
            f"layout has {n_modes} assignment modes, guard is {max_modes}"
        )
    modes = enumerate_modes(lay)
    loads = [[mode_workloads(inst, j, s) for s in modes] for j in range(n)]
    model = MilpModel(kind="mip2", info={"n": n, "m": m, "modes": modes})
    horizon = float(_total_duration(inst))
    for j in range(n):
        for h in range(n):
            for l in range(n_modes):
                model.add_var(("posmode", j, h, l), "B", 0, 1)
    for h in range(n):
        for k in range(m):
            model.add_var(("start", h, k), "C", 0, horizon)

    for j in range(n):  # one position and one mode per job
        model.add_row(
            [
                (model.var_id(("posmode", j, h, l)), 1.0)
                for h in range(n)
                for l in range(n_modes)
            ],
            "==",
            1.0,
            f"job_pos[{j}]",
        )
    for h in range(n):  # one job (with one mode) per position
        model.add_row(
            [
                (model.var_id(("posmode", j, h, l)), 1.0)
                for j in range(n)
                for l in range(n_modes)
            ],
            "==",
            1.0,
            f"pos_job[{h}]",
        )
    for h in range(n):  # machine precedence with folded workloads
        for k in range(m - 1):
            coeffs = [
                (model.var_id(("start", h, k + 1)), 1.0),
                (model.var_id(("start", h, k)), -1.0),
            ]
            coeffs += [
                (model.var_id(("posmode", j, h, l)), -float(loads[j][l][k]))
                for j in range(n)
                for l in range(n_modes)
            ]
            model.add_row(coeffs, ">=", 0.0, f"machine_prec[{h},{k}]")
    for h in range(n - 1):  # job precedence on each machine
        for k in range(m):
            coeffs = [
                (model.var_id(("start", h + 1, k)), 1.0),
                (model.var_id(("start", h, k)), -1.0),
            ]
            coeffs += [
                (model.var_id(("posmode", j, h, l)), -float(loads[j][l][k]))
                for j in range(n)
                for l in range(n_modes)
            ]
            model.add_row(coeffs, ">=", 0.0, f"job_prec[{h},{k}]")
    for h in range(1, n):  # blocking
        for k in range(m - 1):
            model.add_row(
                [
                    (model.var_id(("start", h, k)), 1.0),
                    (model.var_id(("start", h - 1, k + 1)), -1.0),
                ],
                ">=",
                0.0,
                f"blocking[{h},{k}]",
            )

    objective = {model.var_id(("start", n - 1, m - 1)): 1.0}
    for j in range(n):
        for l in range(n_modes):
            objective[model.var_id(("posmode", j, n - 1, l))] = float(loads[j][l][m - 1])
    model.objective = objective
    return model


def solve(
    model: MilpModel,
    time_limit: float | None = None,
    backend: SolverBackend | str | None = None,
) -> SolveOutcome:
    """Run the configured backend on the model as a MIP.

    On proven optimality the objective is snapped to the nearest integer
    (all model data is integral, so the optimum is too).
    """
    be = backend if not isinstance(backend, (str, type(None))) else get_backend(backend)
    outcome = be.solve(model, time_limit=time_limit, relax=False)
    if (
        outcome.status == "optimal"
        and outcome.objective is not None
        and abs(outcome.objective - round(outcome.objective)) < 1e-5
    ):
        outcome = SolveOutcome(
            status=outcome.status,
            objective=float(round(outcome.objective)),
            values=outcome.values,
            wall_time=outcome.wall_time,
            bound=outcome.bound,
            backend=outcome.backend,
            message=outcome.message,
        )
    return outcome


def solve_lp_relaxation(
    model: MilpModel,
    time_limit: float | None = None,
    backend: SolverBackend | str | None = None,
) -> SolveOutcome:
    """Solve with binaries relaxed to [0, 1]; fixings stay in force."""
    be = backend if not isinstance(backend, (str, type(None))) else get_backend(backend)
    return be.solve(model, time_limit=time_limit, relax=True)


def _rounded_one(values: Sequence[float], candidates: list[tuple], what: str) -> tuple:
    hits = [key for key, idx in candidates if values[idx] >= 0.5]
    if len(hits) != 1:
        raise DecodeError(
            f"{what}: expected exactly one value >= 0.5, found {len(hits)}"
        )
    return hits[0]


def decode_solution(inst: Instance, model: MilpModel, outcome: SolveOutcome) -> Solution:
    """Turn solver values into a schedule and re-derive its start times.

    The decoded makespan must not exceed the reported objective (rounded);
    any excess signals a decoding bug and raises :class:`DecodeError`.
    """
    if not outcome.has_values:
        raise DecodeError(f"outcome has no variable values (status={outcome.status})")
    values = outcome.values
    n = model.info["n"]
    lay = inst.layout
    if model.kind == "mip1":
        position_of: dict[int, int] = {}
        for j in range(n):
            cands = [((h,), model.var_id(("pos", j, h))) for h in range(n)]
            (h,) = _rounded_one(values, cands, f"position row of job {j}")
            position_of[j] = h
        if sorted(position_of.values()) != list(range(n)):
            raise DecodeError("decoded positions are not a permutation")
        sequence = [0] * n
        for j, h in position_of.items():
            sequence[h] = j
        modes = []
        for j in range(n):
            splits = []
            for k, block in enumerate(lay.block_slots):
                ups = []
                for i in block:
                    cands = [((kk,), model.var_id(("opm", j, i, kk))) for kk in lay.slots[i]]
                    (kk,) = _rounded_one(values, cands, f"machine row of op {i}, job {j}")
                    ups.append(kk == k)
                if not all(a or not b for a, b in zip(ups, ups[1:])):
                    raise DecodeError(
                        f"job {j} boundary {k}: assignment moves back upstream"
                    )
                splits.append(sum(ups))
            modes.append(tuple(splits))
    elif model.kind == "mip2":
        mode_list: list[Splits] = model.info["modes"]
        chosen: dict[int, tuple[int, int]] = {}
        for j in range(n):
            cands = [
                ((h, l), model.var_id(("posmode", j, h, l)))
                for h in range(n)
                for l in range(len(mode_list))
            ]
            h, l = _rounded_one(values, cands, f"position/mode row of job {j}")
            chosen[j] = (h, l)
        if sorted(h for h, _ in chosen.values()) != list(range(n)):
            raise DecodeError("decoded positions are not a permutation")
        sequence = [0] * n
        modes = [()] * n
        for j, (h, l) in chosen.items():
            sequence[h] = j
            modes[j] = mode_list[l]
    else:
        raise DecodeError(f"cannot decode model kind {model.kind!r}")
    solution = evaluate(inst, sequence, modes)
    if outcome.objective is not None and solution.makespan > outcome.objective + INT_TOL:
        raise DecodeError(
            f"decoded makespan {solution.makespan} exceeds model objective {outcome.objective}"
        )
    return solution


def fix_sequence(model: MilpModel, sequence: Sequence[int]) -> None:
    """Pin the job order: position binaries become constants (mip1 only)."""
    n = model.info["n"]
    for h, j in enumerate(sequence):
        for jj in range(n):
            model.fix(("pos", jj, h), 1.0 if jj == j else 0.0)


def fix_assignment(model: MilpModel, inst: Instance, modes: Sequence[Splits]) -> None:
    """Pin every operation-to-machine binary from per-job splits (mip1 only)."""
    lay = inst.layout
    for j, splits in enumerate(modes):
        for k, block in enumerate(lay.block_slots):
            for t, i in enumerate(block):
                up = t < splits[k]
                model.fix(("opm", j, i, k), 1.0 if up else 0.0)
                model.fix(("opm", j, i, k + 1), 0.0 if up else 1.0)
        for k, i in enumerate(lay.single_slots):
            model.fix(("opm", j, i, k), 1.0)


def fix_from_solution(model: MilpModel, inst: Instance, sol: Solution) -> None:
    """Inject a full schedule's discrete choices as fixings."""
    if model.kind == "mip1":
        fix_sequence(model, sol.sequence)
        fix_assignment(model, inst, sol.modes)
    elif model.kind == "mip2":
        mode_list: list[Splits] = model.info["modes"]
        index = {s: l for l, s in enumerate(mode_list)}
        n = model.info["n"]
        chosen = {
            j: (h, index[sol.modes[j]]) for h, j in enumerate(sol.sequence)
        }
        for j in range(n):
            for h in range(n):
                for l in range(len(mode_list)):
                    want = chosen[j] == (h, l)
                    model.fix(("posmode", j, h, l), 1.0 if want else 0.0)
    else:
        raise ValueError(f"cannot fix kind {model.kind!r}")


def write_lp(model: MilpModel, path: str | Path) -> None:
    """Dump the model in LP text format for debugging."""
    lines = [f"\\ fixb model kind={model.kind}", "Minimize", " obj:"]
    terms = []
    for idx, coef in sorted(model.objective.items()):
        terms.append(f" {'+' if coef >= 0 else '-'} {abs(coef):g} {model.variables[idx].name}")
    lines[-1] += "".join(terms)
    lines.append("Subject To")
    for r, row in enumerate(model.rows):
        expr = "".join(
            f" {'+' if coef >= 0 else '-'} {abs(coef):g} {model.variables[idx].name}"
            for idx, coef in row.coeffs
        )
        op = {"<=": "<=", ">=": ">=", "==": "="}[row.sense]
        name = row.name or f"c{r}"
        lines.append(f" {name}:{expr} {op} {row.rhs:g}")
    lines.append("Bounds")
    for v in model.variables:
        lo, hi = model.effective_bounds(v.idx)
        lines.append(f" {lo:g} <= {v.name} <= {hi:g}")
    binaries = [v.name for v in model.variables if v.kind == "B"]
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(binaries))
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n")
