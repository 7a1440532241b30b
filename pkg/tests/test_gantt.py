"""SVG rendering: rectangle counts and coordinates from the evaluator."""

import dataclasses
import re

import pytest

from fixb.core import evaluate
from fixb.gantt import GanttError, render_gantt
from fixb.instgen import GenSpec, generate_one

from helpers import random_instance
import random


def _occupancy_rects(svg: str) -> list[tuple[str, str]]:
    # occupancy bars carry a <title>; band/hatch rects do not
    out = []
    for line in svg.splitlines():
        if "<title>" in line:
            match = re.match(r'<rect x="([0-9.]+)" y="\d+" width="([0-9.]+)"', line)
            assert match, line
            out.append((match.group(1), match.group(2)))
    return out


def test_single_job_has_m_bars():
    inst = generate_one(GenSpec(experiment_set=1, n=1, seed=1), 0)
    sol = evaluate(inst, (0,), [(0, 3, 2, 0)])
    svg = render_gantt(inst, sol)
    assert svg.count("<title>") == inst.layout.m
    assert svg.startswith("<svg") and svg.endswith("</svg>")


def test_bar_edges_match_evaluator():
    rng = random.Random(2)
    inst = random_instance(rng, n=2, m=2)
    modes = [tuple(0 for _ in inst.layout.block_sizes)] * 2
    sol = evaluate(inst, (0, 1), modes)
    svg = render_gantt(inst, sol)
    scale = 900.0 / sol.makespan
    rects = _occupancy_rects(svg)
    assert len(rects) == 4
    for h in range(2):
        for k in range(2):
            x0 = 64 + sol.starts[h][k] * scale
            w = sol.workloads[h][k] * scale
            assert (f"{x0:.1f}", f"{w:.1f}") in rects


def test_blocking_interval_is_drawn():
    # second machine busy long enough that job 2 finishes on M1 and waits
    from fixb.core import Instance, Layout

    layout = Layout(m=2, slots=((0,), (1,)))
    inst = Instance(layout=layout, durations=(((2,), (9,)), ((2,), (2,))))
    sol = evaluate(inst, (0, 1), [(0,), (0,)])
    # job 1 done on M1 at t=4, cannot move to M2 until t=11
    assert sol.starts[1][1] > sol.starts[1][0] + sol.workloads[1][0]
    svg = render_gantt(inst, sol)
    assert 'fill="url(#blocked)"' in svg


def test_empty_solution_rejected():
    inst = generate_one(GenSpec(experiment_set=1, n=1, seed=1), 0)
    sol = evaluate(inst, (0,), [(0, 0, 0, 0)])
    empty = dataclasses.replace(sol, sequence=(), modes=(), starts=(), workloads=())
    with pytest.raises(GanttError, match="empty"):
        render_gantt(inst, empty)


def test_mismatched_solution_rejected():
    inst = generate_one(GenSpec(experiment_set=1, n=2, seed=1), 0)
    other = generate_one(GenSpec(experiment_set=1, n=2, seed=2), 0)
    sol = evaluate(other, (0, 1), [(0, 0, 0, 0)] * 2)
    with pytest.raises(GanttError, match="does not match"):
        render_gantt(inst, sol)
