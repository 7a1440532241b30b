"""Problem model and schedule evaluator for FIXB instances.

FIXB (flow shop with inter-stage flexibility and blocking): machines form a
line with no intermediate buffers, every job passes through the same ordered
list of operation slots, and each slot is either tied to one machine or
shiftable between two consecutive machines.  A job's operation-to-machine
assignment is encoded as one split count per machine boundary; the evaluator
in this module is the single source of truth for makespans used by every
solver in the package.

All indices are 0-based internally (machines, slots, jobs, positions); the
JSON file format in :mod:`fixb.fileio` is 1-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

Splits = tuple[int, ...]
"""Assignment mode: splits[k] = number of boundary-k shiftable operations
placed on the upstream machine k.  Monotone (non-backtracking) assignments
are the only ones representable."""


class DimensionError(ValueError):
    """Sequence or mode data does not match the instance shape."""


@dataclass(frozen=True)
class Layout:
    """Slot/machine eligibility structure shared by all jobs of an instance.

    ``slots[i]`` is the tuple of machines eligible for operation slot ``i``:
    either ``(k,)`` for a dedicated operation or ``(k, k+1)`` for a shiftable
    one.  A well-formed layout reads ``single(0), block(0), single(1),
    block(1), ..., single(m-1)`` where ``block(k)`` is the (possibly empty)
    run of slots shiftable between machines ``k`` and ``k+1``.
    """

    m: int
    slots: tuple[tuple[int, ...], ...]

    @property
    def q(self) -> int:
        return len(self.slots)

    @cached_property
    def _structure(self) -> tuple[tuple[int, ...], tuple[tuple[int, ...], ...]]:
        problems = layout_problems(self)
        if problems:
            raise ValueError("malformed layout: " + "; ".join(problems))
        singles = [-1] * self.m
        blocks: list[list[int]] = [[] for _ in range(self.m - 1)]
        for i, elig in enumerate(self.slots):
            if len(elig) == 1:
                singles[elig[0]] = i
            else:
                blocks[elig[0]].append(i)
        return tuple(singles), tuple(tuple(b) for b in blocks)

    @property
    def single_slots(self) -> tuple[int, ...]:
        """Slot index of each machine's dedicated operation."""
        return self._structure[0]

    @property
    def block_slots(self) -> tuple[tuple[int, ...], ...]:
        """Per boundary k, the slot indices shiftable between k and k+1."""
        return self._structure[1]

    @property
    def block_sizes(self) -> tuple[int, ...]:
        """Number of shiftable slots at each boundary (n_k)."""
        return tuple(len(b) for b in self.block_slots)


@dataclass(frozen=True)
class Instance:
    """A layout plus positive integer processing times for every job.

    ``durations[j][i]`` is aligned with ``layout.slots[i]``: one duration per
    eligible machine of slot ``i``.
    """

    layout: Layout
    durations: tuple[tuple[tuple[int, ...], ...], ...]
    name: str = "unnamed"
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.durations)

    def duration(self, job: int, slot: int, machine: int) -> int:
        elig = self.layout.slots[slot]
        return self.durations[job][slot][elig.index(machine)]


@dataclass(frozen=True)
class Solution:
    """A fully evaluated schedule.

    ``modes[j]`` are the splits of job ``j``; ``starts`` and ``workloads``
    are position-major ``n x m`` matrices; ``makespan`` is the completion
    time of the last position on the last machine.
    """

    sequence: tuple[int, ...]
    modes: tuple[Splits, ...]
    starts: tuple[tuple[int, ...], ...]
    workloads: tuple[tuple[int, ...], ...]
    makespan: int


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    problems: tuple[str, ...]


def layout_problems(layout: Layout) -> list[str]:
    """Scan a layout for structural violations; empty list means well formed."""
    problems: list[str] = []
    m = layout.m
    if m < 1:
        return [f"machine count must be >= 1, got {m}"]
    seen_singles: dict[int, int] = {}
    for i, elig in enumerate(layout.slots):
        if len(elig) == 1:
            k = elig[0]
            if not 0 <= k < m:
                problems.append(f"slot {i}: machine {k} out of range")
            elif k in seen_singles:
                problems.append(
                    f"slot {i}: duplicate single-machine slot for machine {k}"
                    f" (first at slot {seen_singles[k]})"
                )
            else:
                seen_singles[k] = i
        elif len(elig) == 2:
            k, k2 = elig
            if k2 != k + 1 or not 0 <= k < m - 1:
                problems.append(f"slot {i}: shiftable pair must be consecutive machines, got {elig}")
        else:
            problems.append(f"slot {i}: eligible set must have 1 or 2 machines, got {elig}")
    for k in range(m):
        if k not in seen_singles:
            problems.append(f"machine {k} has no single-machine slot")
    if problems:
        return problems
    # Canonical order: single(0), block(0), single(1), ..., single(m-1).
    expect = []
    for k in range(m):
        expect.append((k,))
        if k < m - 1:
            expect.append((k, k + 1))
    pos = 0
    for i, elig in enumerate(layout.slots):
        while pos < len(expect) and elig != expect[pos] and len(expect[pos]) == 2:
            pos += 1  # empty or finished block
        if pos >= len(expect) or (len(elig) == 1 and elig != expect[pos]):
            problems.append(f"slot {i}: eligibility {elig} out of canonical order")
            return problems
        if len(elig) == 1:
            pos += 1
    return problems


def validate_instance(inst: Instance) -> ValidationReport:
    """Check layout structure and duration positivity/coverage.

    Diagnostics are returned, never raised; each problem carries slot/job
    coordinates.
    """
    problems = layout_problems(inst.layout)
    if not problems:
        q = inst.layout.q
        for j, per_job in enumerate(inst.durations):
            if len(per_job) != q:
                problems.append(f"job {j}: expected {q} slots, got {len(per_job)}")
                continue
            for i, ps in enumerate(per_job):
                elig = inst.layout.slots[i]
                if len(ps) != len(elig):
                    problems.append(
                        f"job {j} slot {i}: expected {len(elig)} durations, got {len(ps)}"
                    )
                    continue
                for k, p in zip(elig, ps):
                    if not isinstance(p, int) or p <= 0:
                        problems.append(
                            f"job {j} slot {i} machine {k}: non-positive duration {p}"
                        )
    return ValidationReport(ok=not problems, problems=tuple(problems))


def count_modes(layout: Layout) -> int:
    """Number of feasible assignment modes: prod over boundaries of (n_k + 1)."""
    total = 1
    for nk in layout.block_sizes:
        total *= nk + 1
    return total


def enumerate_modes(layout: Layout) -> list[Splits]:
    """All split vectors in lexicographic order; length equals count_modes."""
    ranges = [range(nk + 1) for nk in layout.block_sizes]
    return [tuple(t) for t in itertools.product(*ranges)]


def mode_workloads(inst: Instance, job: int, splits: Splits) -> tuple[int, ...]:
    """Per-machine total processing time of ``job`` under the given splits."""
    lay = inst.layout
    if len(splits) != lay.m - 1:
        raise DimensionError(f"expected {lay.m - 1} splits, got {len(splits)}")
    per_job = inst.durations[job]
    singles = lay.single_slots
    blocks = lay.block_slots
    loads = []
    for k in range(lay.m):
        w = per_job[singles[k]][0]
        if k > 0:  # tail of the upstream boundary block runs on this machine
            for t in range(splits[k - 1], len(blocks[k - 1])):
                w += per_job[blocks[k - 1][t]][1]
        if k < lay.m - 1:  # head of this boundary's block stays upstream
            if not 0 <= splits[k] <= len(blocks[k]):
                raise DimensionError(f"split {splits[k]} out of range for boundary {k}")
            for t in range(splits[k]):
                w += per_job[blocks[k][t]][0]
        loads.append(w)
    return tuple(loads)


def job_mode_table(inst: Instance, job: int) -> list[tuple[int, ...]]:
    """Workload vectors of one job for every mode, in enumerate_modes order."""
    return [mode_workloads(inst, job, s) for s in enumerate_modes(inst.layout)]


def schedule_workloads(rows: Sequence[Sequence[int]]) -> tuple[list[list[int]], int]:
    """Earliest-start times for position-major workload rows.

    Start of position h on machine k is the smallest value satisfying the
    machine-precedence, job-precedence and blocking inequalities; the system
    is monotone, so the forward recurrence below yields its least solution.
    """
    n = len(rows)
    m = len(rows[0]) if n else 0
    starts: list[list[int]] = []
    prev: Sequence[int] | None = None
    for h in range(n):
        row = rows[h]
        cur = [0] * m
        for k in range(m):
            s = 0
            if k > 0:
                s = cur[k - 1] + row[k - 1]
            if prev is not None:
                s = max(s, starts[h - 1][k] + prev[k])
                if k < m - 1:
                    s = max(s, starts[h - 1][k + 1])
            cur[k] = s
        starts.append(cur)
        prev = row
    makespan = starts[-1][m - 1] + rows[-1][m - 1] if n else 0
    return starts, makespan


def makespan_from_workloads(rows: Sequence[Sequence[int]]) -> int:
    """Makespan of the earliest-start schedule, without building the matrix."""
    m = len(rows[0])
    prev_s = [0] * m
    prev_p: Sequence[int] | None = None
    for row in rows:
        cur = [0] * m
        for k in range(m):
            s = cur[k - 1] + row[k - 1] if k else 0
            if prev_p is not None:
                t = prev_s[k] + prev_p[k]
                if t > s:
                    s = t
                if k < m - 1 and prev_s[k + 1] > s:
                    s = prev_s[k + 1]
            cur[k] = s
        prev_s, prev_p = cur, row
    return prev_s[m - 1] + rows[-1][m - 1]


def evaluate(inst: Instance, sequence: Sequence[int], modes: Sequence[Splits]) -> Solution:
    """Earliest-start schedule for a fixed job sequence and per-job modes.

    Because the start-time constraint system only bounds starts from below,
    the earliest-start closure is the minimum makespan for this fixed choice
    of discrete decisions.

    Raises:
        DimensionError: sequence is not a permutation of the jobs, or the
            number/shape of modes does not match the instance.
    """
    n = inst.n
    if sorted(sequence) != list(range(n)):
        raise DimensionError(f"sequence must be a permutation of 0..{n - 1}")
    if len(modes) != n:
        raise DimensionError(f"expected {n} modes, got {len(modes)}")
    rows = [mode_workloads(inst, j, modes[j]) for j in sequence]
    starts, makespan = schedule_workloads(rows)
    return Solution(
        sequence=tuple(sequence),
        modes=tuple(tuple(s) for s in modes),
        starts=tuple(tuple(r) for r in starts),
        workloads=tuple(tuple(r) for r in rows),
        makespan=makespan,
    )


def two_machine_closed_form(workloads: Sequence[tuple[int, int]]) -> int:
    """Makespan of a two-machine blocking line from per-position workloads.

    For workload pairs (w1, w2) listed in sequence order the makespan equals
    ``w1[0] + sum_j max(w1[j], w2[j-1]) + w2[-1]``: consecutive positions
    overlap on the two machines and the longer side of each handover wins.
    """
    if not workloads:
        raise ValueError("workloads must be non-empty")
    total = workloads[0][0]
    for j in range(1, len(workloads)):
        total += max(workloads[j][0], workloads[j - 1][1])
    return total + workloads[-1][1]


def verify_solution(inst: Instance, sol: Solution) -> list[str]:
    """Re-derive the schedule and list any disagreement with ``sol``."""
    problems: list[str] = []
    try:
        fresh = evaluate(inst, sol.sequence, sol.modes)
    except DimensionError as exc:
        return [str(exc)]
    if fresh.workloads != sol.workloads:
        problems.append("stored workloads do not match the modes")
    if fresh.starts != sol.starts:
        problems.append("stored start times are not the earliest-start schedule")
    if fresh.makespan != sol.makespan:
        problems.append(
            f"stored makespan {sol.makespan} != evaluated {fresh.makespan}"
        )
    return problems


def serialized_bound(inst: Instance, modes: Sequence[Splits]) -> int:
    """Sum of all workloads: the fully serialized schedule upper bound."""
    return sum(
        sum(mode_workloads(inst, j, modes[j])) for j in range(inst.n)
    )
