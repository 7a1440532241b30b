"""MILP builders, backend behavior, fixing and decoding."""

import random

import pytest

from fixb.backends import BackendError, get_backend
from fixb.core import enumerate_modes, evaluate, mode_workloads
from fixb.instgen import GenSpec, generate_one
from fixb.milp import (
    DecodeError,
    MilpModel,
    ModeCountExceeded,
    build_mip1,
    build_mip2,
    decode_solution,
    fix_from_solution,
    fix_sequence,
    solve,
    solve_lp_relaxation,
    write_lp,
)
from fixb.oracle import brute_force

from helpers import random_instance, toy_instance


def test_mip1_binary_count():
    rng = random.Random(1)
    inst = random_instance(rng, n=3)
    model = build_mip1(inst)
    eligible = sum(len(e) for e in inst.layout.slots)
    assert model.binary_count() == inst.n**2 + inst.n * eligible


def test_mip2_binary_count_experiment_set1():
    inst = generate_one(GenSpec(experiment_set=1, n=5, seed=1), 0)
    model = build_mip2(inst)
    assert model.binary_count() == 5 * 5 * 40


def test_mip2_mode_guard():
    inst = generate_one(GenSpec(experiment_set=2, n=2, seed=1), 0)
    with pytest.raises(ModeCountExceeded, match="100"):
        build_mip2(inst, max_modes=99)


def test_single_job_optimum_is_min_workload():
    rng = random.Random(2)
    inst = random_instance(rng, n=1)
    best = min(sum(mode_workloads(inst, 0, s)) for s in enumerate_modes(inst.layout))
    for build in (build_mip1, build_mip2):
        outcome = solve(build(inst))
        assert outcome.status == "optimal"
        assert outcome.objective == best


def test_exactness_triangle_small():
    rng = random.Random(3)
    for _ in range(8):
        inst = toy_instance(rng)
        ref, _ = brute_force(inst)
        o1 = solve(build_mip1(inst))
        o2 = solve(build_mip2(inst))
        assert o1.status == o2.status == "optimal"
        assert o1.objective == o2.objective == ref.makespan
        for model, outcome in ((build_mip1(inst), o1), (build_mip2(inst), o2)):
            decoded = decode_solution(inst, model, outcome)
            assert decoded.makespan == ref.makespan


def test_lp_relaxation_bounds_mip():
    rng = random.Random(4)
    for _ in range(5):
        inst = toy_instance(rng)
        for build in (build_mip1, build_mip2):
            model = build(inst)
            lp = solve_lp_relaxation(model)
            mip = solve(model)
            assert lp.status == "optimal"
            assert lp.objective <= mip.objective + 1e-6


def test_lp_relaxation_deterministic():
    rng = random.Random(5)
    inst = toy_instance(rng)
    model = build_mip2(inst)
    values = [solve_lp_relaxation(model).objective for _ in range(3)]
    assert max(values) - min(values) < 1e-6


def test_fixing_pins_position_and_mode():
    rng = random.Random(6)
    inst = toy_instance(rng, n_max=3)
    modes = enumerate_modes(inst.layout)
    model = build_mip2(inst)
    model.fix(("posmode", 1, 0, len(modes) - 1), 1.0)
    outcome = solve(model)
    sol = decode_solution(inst, model, outcome)
    assert sol.sequence[0] == 1
    assert sol.modes[1] == modes[-1]


def test_conflicting_fixes_infeasible():
    rng = random.Random(7)
    inst = toy_instance(rng, n_max=3)
    model = build_mip2(inst)
    model.fix(("posmode", 0, 0, 0), 1.0)
    model.fix(("posmode", 1, 0, 0), 1.0)  # same position row
    outcome = solve(model)
    assert outcome.status == "infeasible"
    assert not outcome.has_values


def test_refixing_to_other_value_rejected():
    rng = random.Random(8)
    inst = toy_instance(rng, n_max=2)
    model = build_mip2(inst)
    model.fix(("posmode", 0, 0, 0), 1.0)
    with pytest.raises(ValueError, match="already fixed"):
        model.fix(("posmode", 0, 0, 0), 0.0)


def test_fix_unknown_variable():
    rng = random.Random(9)
    inst = toy_instance(rng, n_max=2)
    model = build_mip2(inst)
    with pytest.raises(KeyError):
        model.fix(("posmode", 99, 0, 0), 1.0)


def test_infeasible_toy_model():
    model = MilpModel(kind="custom")
    x = model.add_var(("x",), "B", 0, 1)
    model.add_row([(x, 1.0)], "<=", 0.0)
    model.add_row([(x, 1.0)], ">=", 1.0)
    model.objective = {x: 1.0}
    outcome = get_backend().solve(model)
    assert outcome.status == "infeasible"


def test_tiny_time_limit_never_errors():
    inst = generate_one(GenSpec(experiment_set=1, n=6, seed=10), 0)
    model = build_mip2(inst)
    outcome = solve(model, time_limit=0.01)
    assert outcome.status in ("time_limit", "optimal")


def test_heuristic_solution_injects_feasibly():
    rng = random.Random(11)
    for _ in range(5):
        inst = toy_instance(rng)
        seq = list(range(inst.n))
        rng.shuffle(seq)
        modes = [
            tuple(rng.randint(0, nk) for nk in inst.layout.block_sizes)
            for _ in range(inst.n)
        ]
        sol = evaluate(inst, seq, modes)
        for build in (build_mip1, build_mip2):
            model = build(inst)
            fix_from_solution(model, inst, sol)
            outcome = solve(model)
            assert outcome.status == "optimal"
            assert outcome.objective == sol.makespan


def test_decode_rejects_ambiguous_values():
    rng = random.Random(12)
    inst = toy_instance(rng, n_max=2)
    model = build_mip2(inst)
    outcome = solve(model)
    from dataclasses import replace

    # plant a second >= 0.5 value in job 0's assignment row
    doctored = list(outcome.values)
    row = [model.var_id(("posmode", 0, h, l))
           for h in range(inst.n) for l in range(len(model.info["modes"]))]
    chosen = [idx for idx in row if doctored[idx] >= 0.5]
    other = next(idx for idx in row if idx not in chosen)
    doctored[other] = 0.5
    with pytest.raises(DecodeError, match="exactly one"):
        decode_solution(inst, model, replace(outcome, values=tuple(doctored)))

    # and a no-candidate row must fail too
    starved = list(outcome.values)
    for idx in row:
        starved[idx] = 0.4
    with pytest.raises(DecodeError, match="exactly one"):
        decode_solution(inst, model, replace(outcome, values=tuple(starved)))


def test_unknown_backend():
    with pytest.raises(BackendError, match="not configured"):
        get_backend("definitely-not-a-solver")


def test_write_lp(tmp_path):
    rng = random.Random(13)
    inst = toy_instance(rng, n_max=2)
    model = build_mip1(inst)
    fix_sequence(model, list(range(inst.n)))
    path = tmp_path / "model.lp"
    write_lp(model, path)
    text = path.read_text()
    for section in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
        assert section in text
    assert "pos[0,0]" in text
    assert "1 <= pos[0,0] <= 1" in text  # fixing shows up in bounds
