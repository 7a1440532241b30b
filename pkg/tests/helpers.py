"""Shared test utilities: random instance builders and independent oracles.

The simulator here is deliberately written as an event-driven machine
occupancy model, not as the start-time recurrence, so it can serve as an
independent check of the evaluator.
"""

from __future__ import annotations

import random

from fixb.core import Instance, Layout, count_modes


def random_layout(rng: random.Random, m: int | None = None, max_block: int = 2) -> Layout:
    m = m or rng.choice([1, 2, 3, 4])
    slots: list[tuple[int, ...]] = []
    for k in range(m):
        slots.append((k,))
        if k < m - 1:
            for _ in range(rng.randint(0, max_block)):
                slots.append((k, k + 1))
    return Layout(m=m, slots=tuple(slots))


def random_instance(
    rng: random.Random,
    n: int | None = None,
    m: int | None = None,
    max_block: int = 2,
    max_p: int = 9,
) -> Instance:
    layout = random_layout(rng, m=m, max_block=max_block)
    n = n or rng.randint(1, 4)
    durations = tuple(
        tuple(tuple(rng.randint(1, max_p) for _ in elig) for elig in layout.slots)
        for _ in range(n)
    )
    return Instance(layout=layout, durations=durations, name=f"rand_n{n}_m{layout.m}")


def toy_instance(rng: random.Random, n_max: int = 4, m_max: int = 3, mode_cap: int = 4) -> Instance:
    """Small instance with a capped mode count, cheap enough to enumerate."""
    while True:
        layout = random_layout(rng, m=rng.randint(2, m_max), max_block=2)
        if count_modes(layout) <= mode_cap:
            break
    n = rng.randint(2, n_max)
    durations = tuple(
        tuple(tuple(rng.randint(1, 9) for _ in elig) for elig in layout.slots)
        for _ in range(n)
    )
    return Instance(layout=layout, durations=durations, name=f"toy_n{n}_m{layout.m}")


def two_machine_instance(rng: random.Random, n: int, max_block: int = 3) -> Instance:
    slots = [(0,)] + [(0, 1)] * rng.randint(0, max_block) + [(1,)]
    layout = Layout(m=2, slots=tuple(slots))
    durations = tuple(
        tuple(tuple(rng.randint(1, 9) for _ in elig) for elig in layout.slots)
        for _ in range(n)
    )
    return Instance(layout=layout, durations=durations, name=f"m2_n{n}")


def simulate_blocking_line(rows: list[tuple[int, ...]]) -> tuple[list[list[int]], int]:
    """Event-driven simulation of a buffer-free line.

    Jobs enter machine 0 in order; a job that finishes processing keeps its
    machine until the next one is vacated; a vacated machine is immediately
    taken by the waiting neighbor.  Returns start times and the makespan.
    """
    n, m = len(rows), len(rows[0])
    starts = [[-1] * m for _ in range(n)]
    PROC, HOLD, DONE = "proc", "hold", "done"
    state: list[tuple[str, int, int]] = [("queued", -1, 0)] * n  # (kind, machine, finish)
    occupant: list[int | None] = [None] * m
    next_entry = 0
    clock = 0
    finished = 0

    def try_moves() -> None:
        nonlocal next_entry
        moved = True
        while moved:
            moved = False
            for h in range(n):
                kind, k, _ = state[h]
                if kind != HOLD:
                    continue
                if k == m - 1:  # leaves the line
                    state[h] = (DONE, -1, 0)
                    occupant[k] = None
                    moved = True
                elif occupant[k + 1] is None:
                    occupant[k + 1] = h
                    occupant[k] = None
                    starts[h][k + 1] = clock
                    state[h] = (PROC, k + 1, clock + rows[h][k + 1])
                    moved = True
            if next_entry < n and occupant[0] is None:
                h = next_entry
                occupant[0] = h
                starts[h][0] = clock
                state[h] = (PROC, 0, clock + rows[h][0])
                next_entry += 1
                moved = True

    makespan = 0
    try_moves()
    while finished < n:
        pending = [f for kind, _, f in state if kind == PROC]
        assert pending, "simulation deadlocked"
        clock = min(pending)
        for h in range(n):
            kind, k, f = state[h]
            if kind == PROC and f == clock:
                state[h] = (HOLD, k, 0)
                if k == m - 1:
                    makespan = max(makespan, clock)
        finished = sum(1 for kind, _, _ in state if kind == DONE)
        try_moves()
        finished = sum(1 for kind, _, _ in state if kind == DONE)
    return starts, makespan
