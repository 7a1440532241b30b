"""Polynomial exact solvers for the two tractable special cases.

Two jobs, any number of machines
    With two jobs the sequencing decision is a coin flip and the earliest
    start schedule has the closed form

        makespan = max_r ( X_r(first) + Y_r(second) )

    over machines r, where X_r is the first job's cumulative work through
    machine r and Y_r the second job's remaining work from machine r on.
    Minimizing this over the two split vectors is done as a label-setting
    pass over a layered graph with one layer per machine and one node per
    (first-job split at this boundary, second-job split at the previous
    boundary) pair.  Labels carry the pair (P, Q) with Q the first job's
    accumulated work and P the best achievable critical term so far; both
    evolve monotonically along arcs, so dominated labels can be dropped.

Two machines, fixed sequence
    Per-position dynamic program over modes: with blocking, a job's handover
    from machine 1 to machine 2 is seamless, which collapses the makespan to
    a sum of pairwise max terms between consecutive positions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    Instance,
    Layout,
    Solution,
    Splits,
    enumerate_modes,
    evaluate,
    mode_workloads,
)


@dataclass(frozen=True)
class _JobTables:
    """Per-boundary prefix/suffix duration sums of one job.

    ``up[k][l]``: total upstream duration of the first ``l`` slots of
    boundary ``k``'s block; ``down[k][l]``: downstream duration of the rest.
    """

    mand: tuple[int, ...]
    up: tuple[tuple[int, ...], ...]
    down: tuple[tuple[int, ...], ...]

    def machine_load(self, k: int, l_prev: int, l_cur: int) -> int:
        """Workload on machine k given the splits at its two boundaries."""
        w = self.mand[k]
        if k > 0:
            w += self.down[k - 1][l_prev]
        if k < len(self.mand) - 1:
            w += self.up[k][l_cur]
        return w


def job_tables(inst: Instance, job: int) -> _JobTables:
    lay = inst.layout
    per_job = inst.durations[job]
    mand = tuple(per_job[s][0] for s in lay.single_slots)
    up = []
    down = []
    for block in lay.block_slots:
        u = [0]
        for slot in block:
            u.append(u[-1] + per_job[slot][0])
        d = [0]
        for slot in reversed(block):
            d.append(d[-1] + per_job[slot][1])
        d.reverse()
        up.append(tuple(u))
        down.append(tuple(d))
    return _JobTables(mand=mand, up=tuple(up), down=tuple(down))


def two_job_graph_size(layout: Layout) -> tuple[int, int]:
    """(node, arc) counts of the layered two-job graph, incl. source/sink."""
    sizes = layout.block_sizes
    m = layout.m

    def width(k: int) -> int:
        a = sizes[k] + 1 if k < m - 1 else 1
        b = sizes[k - 1] + 1 if k > 0 else 1
        return a * b

    nodes = 2 + sum(width(k) for k in range(m))
    arcs = width(0) + width(m - 1)
    for k in range(m - 1):
        arcs += width(k) * width(k + 1)
    return nodes, arcs


def _best_two_job_assignment(
    first: _JobTables, second: _JobTables, m: int, sizes: tuple[int, ...]
) -> tuple[int, Splits, Splits]:
    """Minimum makespan and argmin split vectors for a fixed job order."""

    def a_range(k: int) -> range:
        return range(sizes[k] + 1) if k < m - 1 else range(1)

    def b_range(k: int) -> range:
        return range(sizes[k - 1] + 1) if k > 0 else range(1)

    # layers[k][(a, b)] = list of (P, Q, parent), parent = (prev_a, prev_b, idx)
    Label = tuple[int, int, tuple | None]
    layers: list[dict[tuple[int, int], list[Label]]] = [{}]
    for a in a_range(0):
        q = first.machine_load(0, 0, a)
        layers[0][(a, 0)] = [(q, q, None)]
    for k in range(m - 1):
        nxt: dict[tuple[int, int], list[Label]] = {}
        for (a, b) in sorted(layers[k]):
            for idx, (p, q, _) in enumerate(layers[k][(a, b)]):
                for a2 in a_range(k + 1):
                    alpha = first.machine_load(k + 1, a, a2)
                    for b2 in b_range(k + 1):
                        beta = second.machine_load(k, b, b2)
                        q2 = q + alpha
                        p2 = max(p + beta, q2)
                        _insert_label(nxt, (a2, b2), p2, q2, (a, b, idx))
        layers.append(nxt)
    best_val: int | None = None
    best_tail: tuple[tuple[int, int], int] | None = None
    for (a, b) in sorted(layers[m - 1]):
        beta = second.machine_load(m - 1, b, 0)
        for idx, (p, q, _) in enumerate(layers[m - 1][(a, b)]):
            val = p + beta
            if best_val is None or val < best_val:
                best_val = val
                best_tail = ((a, b), idx)
    assert best_val is not None and best_tail is not None
    # decode split vectors by walking parents back through the layers
    a_splits = [0] * (m - 1)
    b_splits = [0] * (m - 1)
    node, idx = best_tail
    for k in range(m - 1, -1, -1):
        a, b = node
        if k < m - 1:
            a_splits[k] = a
        if k > 0:
            b_splits[k - 1] = b
        parent = layers[k][node][idx][2]
        if parent is None:
            break
        node, idx = (parent[0], parent[1]), parent[2]
    return best_val, tuple(a_splits), tuple(b_splits)


def _insert_label(store, key, p, q, parent) -> None:
    lst = store.setdefault(key, [])
    for (pe, qe, _) in lst:
        if pe <= p and qe <= q:
            return
    lst[:] = [(pe, qe, par) for (pe, qe, par) in lst if not (p <= pe and q <= qe)]
    lst.append((p, q, parent))


def solve_two_jobs(inst: Instance) -> Solution:
    """Exact optimum for a two-job instance over both orders and all modes."""
    if inst.n != 2:
        raise ValueError(f"two-job solver requires n=2, got n={inst.n}")
    m = inst.layout.m
    sizes = inst.layout.block_sizes
    tables = [job_tables(inst, 0), job_tables(inst, 1)]
    best: tuple[int, tuple[int, ...], Splits, Splits] | None = None
    for seq in ((0, 1), (1, 0)):
        val, a_splits, b_splits = _best_two_job_assignment(
            tables[seq[0]], tables[seq[1]], m, sizes
        )
        if best is None or val < best[0]:
            best = (val, seq, a_splits, b_splits)
    assert best is not None
    val, seq, a_splits, b_splits = best
    modes: list[Splits] = [(), ()]
    modes[seq[0]] = a_splits
    modes[seq[1]] = b_splits
    solution = evaluate(inst, seq, modes)
    if solution.makespan != val:
        raise RuntimeError(
            f"two-job path value {val} disagrees with evaluator {solution.makespan}"
        )
    return solution


def solve_two_machine_fixed_sequence(
    inst: Instance, sequence: tuple[int, ...] | list[int]
) -> Solution:
    """Optimal modes for a fixed sequence on a two-machine line."""
    if inst.layout.m != 2:
        raise ValueError(f"two-machine solver requires m=2, got m={inst.layout.m}")
    seq = tuple(sequence)
    modes = enumerate_modes(inst.layout)
    pairs = [
        [mode_workloads(inst, j, s) for s in modes] for j in range(inst.n)
    ]
    n = inst.n
    a = len(modes)
    dp = [pairs[seq[0]][mi][0] for mi in range(a)]
    parents: list[list[int]] = []
    for pos in range(1, n):
        cur_job, prev_job = seq[pos], seq[pos - 1]
        nxt = [0] * a
        par = [0] * a
        for mi in range(a):
            w1 = pairs[cur_job][mi][0]
            best_v = None
            best_p = 0
            for pm in range(a):
                v = dp[pm] + max(w1, pairs[prev_job][pm][1])
                if best_v is None or v < best_v:
                    best_v, best_p = v, pm
            nxt[mi] = best_v
            par[mi] = best_p
        dp = nxt
        parents.append(par)
    best_mi = 0
    best_val = None
    for mi in range(a):
        v = dp[mi] + pairs[seq[-1]][mi][1]
        if best_val is None or v < best_val:
            best_val, best_mi = v, mi
    choice = [0] * n
    choice[n - 1] = best_mi
    for pos in range(n - 1, 0, -1):
        choice[pos - 1] = parents[pos - 1][choice[pos]]
    job_modes: list[Splits] = [()] * n
    for pos, job in enumerate(seq):
        job_modes[job] = modes[choice[pos]]
    solution = evaluate(inst, seq, job_modes)
    if solution.makespan != best_val:
        raise RuntimeError(
            f"two-machine path value {best_val} disagrees with evaluator {solution.makespan}"
        )
    return solution
