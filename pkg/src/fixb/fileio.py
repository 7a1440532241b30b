"""Instance and solution JSON file formats.

Instance files::

    {"name": str, "m": int,
     "layout": [{"index": i, "machines": [k] or [k, k+1]}, ...],   # 1-based
     "jobs": [{"id": j, "ptimes": [{"slot": i, "machine": k, "p": int}, ...]}],
     "meta": {...}}

Solution files::

    {"instance": str, "sequence": [job ids in processing order],
     "splits": [[...], ...],        # aligned with "sequence"
     "starts": [[...], ...],        # position-major n x m
     "makespan": int, "algorithm": str, "params": {...}, "time_ms": int}

Both formats use 1-based slot, machine and job indices on disk; everything in
memory is 0-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .core import Instance, Layout, Solution


class FileFormatError(ValueError):
    """A file does not conform to the documented schema."""


def instance_to_dict(inst: Instance) -> dict[str, Any]:
    layout = [
        {"index": i + 1, "machines": [k + 1 for k in elig]}
        for i, elig in enumerate(inst.layout.slots)
    ]
    jobs = []
    for j in range(inst.n):
        ptimes = []
        for i, elig in enumerate(inst.layout.slots):
            for idx, k in enumerate(elig):
                ptimes.append(
                    {"slot": i + 1, "machine": k + 1, "p": inst.durations[j][i][idx]}
                )
        jobs.append({"id": j + 1, "ptimes": ptimes})
    return {
        "name": inst.name,
        "m": inst.layout.m,
        "layout": layout,
        "jobs": jobs,
        "meta": dict(inst.meta),
    }


def instance_from_dict(data: dict[str, Any]) -> Instance:
    try:
        m = int(data["m"])
        raw_layout = data["layout"]
        raw_jobs = data["jobs"]
    except (KeyError, TypeError) as exc:
        raise FileFormatError(f"missing instance field: {exc}") from exc
    entries = sorted(raw_layout, key=lambda e: e["index"])
    if [e["index"] for e in entries] != list(range(1, len(entries) + 1)):
        raise FileFormatError("layout slot indices must be contiguous from 1")
    slots = tuple(tuple(k - 1 for k in e["machines"]) for e in entries)
    layout = Layout(m=m, slots=slots)
    q = layout.q
    durations = []
    for job in sorted(raw_jobs, key=lambda e: e["id"]):
        table: list[list[int | None]] = [[None] * len(elig) for elig in slots]
        for entry in job["ptimes"]:
            i = entry["slot"] - 1
            k = entry["machine"] - 1
            if not 0 <= i < q or k not in slots[i]:
                raise FileFormatError(
                    f"job {job['id']}: duration given for ineligible pair "
                    f"(slot {entry['slot']}, machine {entry['machine']})"
                )
            table[i][slots[i].index(k)] = int(entry["p"])
        for i, row in enumerate(table):
            if any(p is None for p in row):
                raise FileFormatError(
                    f"job {job['id']}: missing duration(s) for slot {i + 1}"
                )
        durations.append(tuple(tuple(row) for row in table))
    return Instance(
        layout=layout,
        durations=tuple(durations),
        name=str(data.get("name", "unnamed")),
        meta=dict(data.get("meta", {})),
    )


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(inst))


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1, sort_keys=True) + "\n"


def load_instance(path: str | Path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON ({exc})") from exc
    return instance_from_dict(data)


def solution_to_dict(
    sol: Solution,
    instance_name: str,
    algorithm: str,
    params: dict[str, Any] | None = None,
    time_ms: int = 0,
) -> dict[str, Any]:
    return {
        "instance": instance_name,
        "sequence": [j + 1 for j in sol.sequence],
        "splits": [list(sol.modes[j]) for j in sol.sequence],
        "starts": [list(row) for row in sol.starts],
        "makespan": sol.makespan,
        "algorithm": algorithm,
        "params": dict(params or {}),
        "time_ms": int(time_ms),
    }


@dataclass(frozen=True)
class SolutionRecord:
    """A solution file's contents, not yet bound to an instance.

    ``modes`` is indexed by job id (0-based); ``starts`` is position-major.
    """

    sequence: tuple[int, ...]
    modes: tuple[tuple[int, ...], ...]
    starts: tuple[tuple[int, ...], ...]
    makespan: int
    instance: str = ""
    algorithm: str = ""
    params: dict[str, Any] = field(default_factory=dict)
    time_ms: int = 0


def solution_from_dict(data: dict[str, Any]) -> SolutionRecord:
    try:
        sequence = tuple(int(j) - 1 for j in data["sequence"])
        seq_splits = [tuple(int(v) for v in s) for s in data["splits"]]
        starts = tuple(tuple(int(v) for v in row) for row in data["starts"])
        makespan = int(data["makespan"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"malformed solution file: {exc}") from exc
    if len(seq_splits) != len(sequence):
        raise FileFormatError("'splits' must be aligned with 'sequence'")
    if sorted(sequence) != list(range(len(sequence))):
        raise FileFormatError("'sequence' must be a permutation of the job ids")
    modes: list[tuple[int, ...]] = [()] * len(sequence)
    for pos, job in enumerate(sequence):
        modes[job] = seq_splits[pos]
    return SolutionRecord(
        sequence=sequence,
        modes=tuple(modes),
        starts=starts,
        makespan=makespan,
        instance=str(data.get("instance", "")),
        algorithm=str(data.get("algorithm", "")),
        params=dict(data.get("params", {})),
        time_ms=int(data.get("time_ms", 0)),
    )


def save_solution(
    sol: Solution,
    path: str | Path,
    *,
    instance_name: str,
    algorithm: str,
    params: dict[str, Any] | None = None,
    time_ms: int = 0,
) -> None:
    data = solution_to_dict(sol, instance_name, algorithm, params, time_ms)
    Path(path).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")


def load_solution(path: str | Path) -> SolutionRecord:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON ({exc})") from exc
    return solution_from_dict(data)
