"""Seeded generation of the two benchmark instance families.

Reproducibility contract (part of the instance file format):

* generator: NumPy PCG64;
* stream per instance: ``PCG64(SeedSequence(seed, spawn_key=(index,)))``
  where ``index`` is the instance's position in its batch;
* draws: ``Generator.integers(lo, hi, endpoint=True)``, i.e. uniform on the
  inclusive integer interval;
* draw order: slots ascending, eligible machines ascending within a slot,
  interval low then high per (slot, machine) pair, then one duration per job
  in ascending job order before moving to the next pair.

Identical ``GenSpec`` values therefore produce byte-identical instance files
on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Instance, Layout

SHIFTABLE_LOW = (2, 12)
SHIFTABLE_HIGH_MAX = 14
SINGLE_LOW = (10, 25)
SINGLE_HIGH_MAX = 28


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one generation batch."""

    experiment_set: int
    n: int
    seed: int
    count: int = 1

    def __post_init__(self) -> None:
        if self.experiment_set not in (1, 2):
            raise ValueError(f"unknown experiment set {self.experiment_set}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.count < 1:
            raise ValueError("count must be >= 1")


def layout_for(experiment_set: int) -> Layout:
    """The 5-machine, 16-slot layout of the given benchmark family.

    Set 1 mirrors the original production line (shiftable runs around the
    robot station M3); set 2 extends flexibility to a third boundary.
    """
    if experiment_set == 1:
        singles = {1: 0, 2: 1, 3: 9, 4: 14, 5: 15}  # machine -> slot, 1-based machines
        blocks = {(2, 3): range(2, 9), (3, 4): range(10, 14)}
    elif experiment_set == 2:
        singles = {1: 0, 2: 1, 3: 6, 4: 11, 5: 15}
        blocks = {(2, 3): range(2, 6), (3, 4): range(7, 11), (4, 5): range(12, 15)}
    else:
        raise ValueError(f"unknown experiment set {experiment_set}")
    slots: list[tuple[int, ...]] = [()] * 16
    for mach, slot in singles.items():
        slots[slot] = (mach - 1,)
    for (a, b), rng in blocks.items():
        for slot in rng:
            slots[slot] = (a - 1, b - 1)
    return Layout(m=5, slots=tuple(slots))


def _instance_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _draw(
    spec: GenSpec, index: int
) -> tuple[Layout, list[list[list[int]]], dict[tuple[int, int], tuple[int, int]]]:
    layout = layout_for(spec.experiment_set)
    rng = _instance_stream(spec.seed, index)
    durations: list[list[list[int]]] = [
        [[0] * len(elig) for elig in layout.slots] for _ in range(spec.n)
    ]
    windows: dict[tuple[int, int], tuple[int, int]] = {}
    for i, elig in enumerate(layout.slots):
        shiftable = len(elig) == 2
        for idx, k in enumerate(elig):
            if shiftable:
                low = int(rng.integers(*SHIFTABLE_LOW, endpoint=True))
                high = int(rng.integers(low, SHIFTABLE_HIGH_MAX, endpoint=True))
            else:
                low = int(rng.integers(*SINGLE_LOW, endpoint=True))
                high = int(rng.integers(low, SINGLE_HIGH_MAX, endpoint=True))
            windows[(i, k)] = (low, high)
            for j in range(spec.n):
                durations[j][i][idx] = int(rng.integers(low, high, endpoint=True))
    return layout, durations, windows


def generate_one(spec: GenSpec, index: int) -> Instance:
    """Generate instance ``index`` of the batch described by ``spec``."""
    layout, durations, _ = _draw(spec, index)
    name = f"set{spec.experiment_set}_n{spec.n}_i{index}"
    meta = {
        "experiment_set": spec.experiment_set,
        "seed": spec.seed,
        "index": index,
        "generator": "pcg64-seedseq-spawn",
    }
    return Instance(
        layout=layout,
        durations=tuple(tuple(tuple(row) for row in per_job) for per_job in durations),
        name=name,
        meta=meta,
    )


def generate(spec: GenSpec) -> list[Instance]:
    """All ``spec.count`` instances of the batch, in index order."""
    return [generate_one(spec, i) for i in range(spec.count)]


def drawn_intervals(spec: GenSpec, index: int) -> dict[tuple[int, int], tuple[int, int]]:
    """Replay the stream and return the (L, H) window per (slot, machine).

    Useful for checking that all durations of an instance stay inside the
    windows their generator drew.
    """
    _, _, windows = _draw(spec, index)
    return windows


def write_batch(spec: GenSpec, out_dir: str | Path) -> list[Path]:
    """Generate the batch and write one JSON file per instance."""
    from .fileio import save_instance

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, inst in enumerate(generate(spec)):
        path = out / f"{inst.name}.json"
        save_instance(inst, path)
        paths.append(path)
    return paths
