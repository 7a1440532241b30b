"""Exhaustive enumeration oracle.

Deliberately naive so it stays obviously correct: every (sequence, mode
vector) pair is evaluated with the core recurrence and the minimum kept.
Used to certify every other solver on small instances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .core import Instance, Solution, Splits, enumerate_modes, evaluate, makespan_from_workloads, mode_workloads

DEFAULT_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    """The enumeration would exceed the allowed number of evaluations."""


@dataclass(frozen=True)
class Certificate:
    """Record of what the oracle enumerated."""

    evaluations: int
    sequences: int
    mode_vectors: int


def _mode_tables(inst: Instance) -> tuple[list[Splits], list[list[tuple[int, ...]]]]:
    modes = enumerate_modes(inst.layout)
    tables = [
        [mode_workloads(inst, j, s) for s in modes] for j in range(inst.n)
    ]
    return modes, tables


def brute_force(inst: Instance, budget: int = DEFAULT_BUDGET) -> tuple[Solution, Certificate]:
    """Global optimum by full enumeration.

    Ties are broken by lexicographic (sequence, mode vector) order, so the
    returned argmin is deterministic.

    Raises:
        BudgetExceeded: if n! * count_modes**n > budget; no partial answer
            is ever returned.
    """
    n = inst.n
    modes, tables = _mode_tables(inst)
    a = len(modes)
    total = math.factorial(n) * a**n
    if total > budget:
        raise BudgetExceeded(
            f"{total} evaluations needed ({n}! sequences x {a}^{n} mode vectors), budget {budget}"
        )
    best = None
    best_key: tuple | None = None
    evals = 0
    for seq in itertools.permutations(range(n)):
        for choice in itertools.product(range(a), repeat=n):
            rows = [tables[j][choice[j]] for j in seq]
            value = makespan_from_workloads(rows)
            evals += 1
            if best is None or value < best:
                best = value
                best_key = (seq, choice)
    assert best_key is not None
    seq, choice = best_key
    solution = evaluate(inst, seq, [modes[c] for c in choice])
    cert = Certificate(evaluations=evals, sequences=math.factorial(n), mode_vectors=a**n)
    return solution, cert


def brute_force_fixed_sequence(
    inst: Instance, sequence: tuple[int, ...] | list[int], budget: int = DEFAULT_BUDGET
) -> tuple[Solution, Certificate]:
    """Optimal mode vector for a fixed job sequence, by full enumeration."""
    n = inst.n
    modes, tables = _mode_tables(inst)
    a = len(modes)
    total = a**n
    if total > budget:
        raise BudgetExceeded(
            f"{total} evaluations needed ({a}^{n} mode vectors), budget {budget}"
        )
    seq = tuple(sequence)
    best = None
    best_choice: tuple[int, ...] | None = None
    evals = 0
    for choice in itertools.product(range(a), repeat=n):
        rows = [tables[j][choice[j]] for j in seq]
        value = makespan_from_workloads(rows)
        evals += 1
        if best is None or value < best:
            best = value
            best_choice = choice
    assert best_choice is not None
    solution = evaluate(inst, seq, [modes[c] for c in best_choice])
    cert = Certificate(evaluations=evals, sequences=1, mode_vectors=total)
    return solution, cert
