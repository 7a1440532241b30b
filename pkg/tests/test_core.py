"""Core model: validation, modes, workloads, and the evaluator."""

import random

import pytest

from fixb.core import (
    DimensionError,
    Instance,
    Layout,
    count_modes,
    enumerate_modes,
    evaluate,
    mode_workloads,
    serialized_bound,
    two_machine_closed_form,
    validate_instance,
    verify_solution,
)
from fixb.instgen import GenSpec, generate_one, layout_for

from helpers import random_instance, simulate_blocking_line


def test_validate_experiment_layout_all_ones():
    layout = layout_for(1)
    durations = tuple(
        tuple(tuple(1 for _ in elig) for elig in layout.slots) for _ in range(3)
    )
    report = validate_instance(Instance(layout=layout, durations=durations))
    assert report.ok and report.problems == ()


def test_validate_duplicate_single_machine_slot():
    layout = Layout(m=2, slots=((0,), (1,), (1,)))
    inst = Instance(layout=layout, durations=(((1,), (1,), (1,)),))
    report = validate_instance(inst)
    assert not report.ok
    assert any("duplicate single-machine slot" in p for p in report.problems)


def test_validate_rejects_zero_duration():
    layout = Layout(m=2, slots=((0,), (0, 1), (1,)))
    inst = Instance(layout=layout, durations=(((1,), (2, 0), (3,)),))
    report = validate_instance(inst)
    assert not report.ok
    assert any("non-positive duration" in p for p in report.problems)


def test_validate_rejects_out_of_order_slots():
    layout = Layout(m=2, slots=((1,), (0,)))
    inst = Instance(layout=layout, durations=(((1,), (1,)),))
    assert not validate_instance(inst).ok


def test_count_modes_experiment_layouts():
    assert count_modes(layout_for(1)) == 40
    assert count_modes(layout_for(2)) == 100


def test_count_modes_no_shiftables():
    assert count_modes(Layout(m=3, slots=((0,), (1,), (2,)))) == 1


def test_enumerate_modes_single_boundary():
    layout = Layout(m=2, slots=((0,), (0, 1), (0, 1), (1,)))
    assert enumerate_modes(layout) == [(0,), (1,), (2,)]


def test_enumerate_modes_cartesian():
    layout = Layout(m=3, slots=((0,), (0, 1), (1,), (1, 2), (2,)))
    assert enumerate_modes(layout) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_enumerate_modes_matches_count_and_unique():
    rng = random.Random(1)
    for _ in range(20):
        inst = random_instance(rng)
        modes = enumerate_modes(inst.layout)
        assert len(modes) == count_modes(inst.layout)
        assert len(set(modes)) == len(modes)


def test_mode_workloads_hand_example():
    layout = Layout(m=2, slots=((0,), (0, 1), (1,)))
    inst = Instance(layout=layout, durations=(((3,), (2, 5), (4,)),))
    assert mode_workloads(inst, 0, (1,)) == (5, 4)
    assert mode_workloads(inst, 0, (0,)) == (3, 9)


def test_mode_workloads_against_direct_summation():
    # independent oracle: walk slots, pick the machine implied by the split
    rng = random.Random(2)
    inst = generate_one(GenSpec(experiment_set=1, n=4, seed=3), 0)
    lay = inst.layout
    for splits in enumerate_modes(lay):
        for j in range(inst.n):
            expected = [0] * lay.m
            block_seen = {k: 0 for k in range(lay.m - 1)}
            for i, elig in enumerate(lay.slots):
                if len(elig) == 1:
                    machine = elig[0]
                else:
                    k = elig[0]
                    block_seen[k] += 1
                    machine = k if block_seen[k] <= splits[k] else k + 1
                expected[machine] += inst.duration(j, i, machine)
            assert tuple(expected) == mode_workloads(inst, j, splits)
            total = mode_workloads(inst, j, splits)
            assert all(w > 0 for w in total)


def test_evaluate_single_job_flows_through():
    rng = random.Random(3)
    for _ in range(20):
        inst = random_instance(rng, n=1)
        splits = tuple(0 for _ in range(inst.layout.m - 1))
        sol = evaluate(inst, (0,), [splits])
        assert sol.makespan == sum(mode_workloads(inst, 0, splits))


def test_evaluate_two_identical_jobs_two_machines():
    # equal workloads (p, p) per machine: hand recurrence gives 3p
    layout = Layout(m=2, slots=((0,), (1,)))
    inst = Instance(layout=layout, durations=(((4,), (4,)), ((4,), (4,))))
    sol = evaluate(inst, (0, 1), [(0,), (0,)])
    assert sol.makespan == 12
    assert sol.starts == ((0, 4), (4, 8))


def test_evaluate_against_event_simulation():
    rng = random.Random(4)
    for _ in range(150):
        inst = random_instance(rng, n=rng.randint(1, 5))
        modes = [
            tuple(rng.randint(0, nk) for nk in inst.layout.block_sizes)
            for _ in range(inst.n)
        ]
        seq = list(range(inst.n))
        rng.shuffle(seq)
        sol = evaluate(inst, seq, modes)
        sim_starts, sim_makespan = simulate_blocking_line([list(r) for r in sol.workloads])
        assert sol.makespan == sim_makespan
        assert [list(r) for r in sol.starts] == sim_starts


def test_evaluate_satisfies_inequality_system():
    rng = random.Random(5)
    for _ in range(50):
        inst = random_instance(rng, n=rng.randint(2, 5))
        modes = [
            tuple(rng.randint(0, nk) for nk in inst.layout.block_sizes)
            for _ in range(inst.n)
        ]
        sol = evaluate(inst, tuple(range(inst.n)), modes)
        s, P = sol.starts, sol.workloads
        n, m = inst.n, inst.layout.m
        for h in range(n):
            for k in range(m):
                if k < m - 1:
                    assert s[h][k + 1] >= s[h][k] + P[h][k]
                if h < n - 1:
                    assert s[h + 1][k] >= s[h][k] + P[h][k]
                if h > 0 and k < m - 1:
                    assert s[h][k] >= s[h - 1][k + 1]
        assert sol.makespan == s[n - 1][m - 1] + P[n - 1][m - 1]


def test_makespan_bounds():
    rng = random.Random(6)
    for _ in range(50):
        inst = random_instance(rng, n=rng.randint(1, 5))
        modes = [
            tuple(rng.randint(0, nk) for nk in inst.layout.block_sizes)
            for _ in range(inst.n)
        ]
        sol = evaluate(inst, tuple(range(inst.n)), modes)
        machine_bound = max(
            sum(sol.workloads[h][k] for h in range(inst.n))
            for k in range(inst.layout.m)
        )
        job_bound = max(sum(row) for row in sol.workloads)
        assert sol.makespan >= max(machine_bound, job_bound)
        assert sol.makespan <= serialized_bound(inst, modes)


def test_evaluate_permutation_consistency():
    rng = random.Random(7)
    for _ in range(30):
        inst = random_instance(rng, n=4)
        modes = [
            tuple(rng.randint(0, nk) for nk in inst.layout.block_sizes)
            for _ in range(4)
        ]
        seq = [2, 0, 3, 1]
        base = evaluate(inst, seq, modes)
        relabel = [3, 1, 0, 2]  # new id of old job j
        durations = [None] * 4
        new_modes = [None] * 4
        for j in range(4):
            durations[relabel[j]] = inst.durations[j]
            new_modes[relabel[j]] = modes[j]
        inst2 = Instance(layout=inst.layout, durations=tuple(durations))
        seq2 = [relabel[j] for j in seq]
        assert evaluate(inst2, seq2, new_modes).makespan == base.makespan


def test_evaluate_dimension_errors():
    layout = Layout(m=2, slots=((0,), (1,)))
    inst = Instance(layout=layout, durations=(((1,), (2,)), ((3,), (4,))))
    with pytest.raises(DimensionError):
        evaluate(inst, (0,), [(0,), (0,)])
    with pytest.raises(DimensionError):
        evaluate(inst, (0, 1), [(0,)])
    with pytest.raises(DimensionError):
        evaluate(inst, (0, 0), [(0,), (0,)])
    with pytest.raises(DimensionError):
        evaluate(inst, (0, 1), [(), ()])


def test_two_machine_closed_form_examples():
    assert two_machine_closed_form([(3, 4)]) == 7
    assert two_machine_closed_form([(2, 5), (3, 1)]) == 8
    with pytest.raises(ValueError):
        two_machine_closed_form([])


def test_two_machine_closed_form_matches_evaluate():
    rng = random.Random(8)
    for _ in range(50):
        inst = random_instance(rng, n=rng.randint(1, 8), m=2, max_block=3)
        modes = [
            tuple(rng.randint(0, nk) for nk in inst.layout.block_sizes)
            for _ in range(inst.n)
        ]
        seq = list(range(inst.n))
        rng.shuffle(seq)
        sol = evaluate(inst, seq, modes)
        pairs = [(row[0], row[1]) for row in sol.workloads]
        assert two_machine_closed_form(pairs) == sol.makespan


def test_verify_solution_detects_tampering():
    layout = Layout(m=2, slots=((0,), (1,)))
    inst = Instance(layout=layout, durations=(((1,), (2,)), ((3,), (4,))))
    sol = evaluate(inst, (0, 1), [(0,), (0,)])
    assert verify_solution(inst, sol) == []
    import dataclasses

    bad = dataclasses.replace(sol, makespan=sol.makespan + 1)
    assert any("makespan" in p for p in verify_solution(inst, bad))
