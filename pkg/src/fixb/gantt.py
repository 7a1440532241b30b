"""SVG Gantt rendering of evaluated schedules.

One horizontal band per machine, one rectangle per (position, machine)
occupancy, and hatched rectangles for blocking intervals: windows where a
job is done processing on a machine but still holds it because the next
machine is busy.  Pure string building; no drawing dependencies.
"""

from __future__ import annotations

from .core import Instance, Solution, verify_solution

_PALETTE = (
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)

BAND_H = 34
BAR_H = 24
LEFT = 64
TOP = 44
RIGHT_PAD = 24
BOTTOM_PAD = 28


class GanttError(ValueError):
    """Solution cannot be drawn (empty or inconsistent with the instance)."""


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def render_gantt(inst: Instance, sol: Solution, title: str | None = None) -> str:
    """Render a verified schedule as an SVG document string."""
    if not sol.sequence:
        raise GanttError("cannot render an empty solution")
    problems = verify_solution(inst, sol)
    if problems:
        raise GanttError("solution does not match instance: " + "; ".join(problems))
    n, m = len(sol.sequence), inst.layout.m
    span = max(sol.makespan, 1)
    scale = 900.0 / span
    width = LEFT + int(span * scale) + RIGHT_PAD
    height = TOP + m * BAND_H + BOTTOM_PAD
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        "<defs>",
        '<pattern id="blocked" width="6" height="6" patternUnits="userSpaceOnUse" '
        'patternTransform="rotate(45)">'
        '<rect width="6" height="6" fill="#d8d8d8"/>'
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#666" stroke-width="2"/>'
        "</pattern>",
        "</defs>",
        f'<text x="{LEFT}" y="18" font-size="13">{_esc(title or inst.name)} '
        f"(makespan {sol.makespan})</text>",
    ]

    def x(t: int) -> float:
        return LEFT + t * scale

    def y(k: int) -> int:
        return TOP + k * BAND_H

    for k in range(m):
        out.append(
            f'<rect x="{LEFT}" y="{y(k)}" width="{span * scale:.1f}" height="{BAND_H}" '
            f'fill="{"#f7f7f7" if k % 2 else "#ffffff"}" stroke="#ddd"/>'
        )
        out.append(
            f'<text x="8" y="{y(k) + BAND_H // 2 + 4}">M{k + 1}</text>'
        )
    # hatched blocking windows first so occupancy bars draw over their edges
    for h in range(n):
        for k in range(m - 1):
            done = sol.starts[h][k] + sol.workloads[h][k]
            leave = sol.starts[h][k + 1]
            if leave > done:
                out.append(
                    f'<rect x="{x(done):.1f}" y="{y(k) + (BAND_H - BAR_H) // 2}" '
                    f'width="{(leave - done) * scale:.1f}" height="{BAR_H}" '
                    f'fill="url(#blocked)" stroke="#999"/>'
                )
    for h in range(n):
        job = sol.sequence[h]
        color = _PALETTE[job % len(_PALETTE)]
        for k in range(m):
            x0 = x(sol.starts[h][k])
            w = sol.workloads[h][k] * scale
            out.append(
                f'<rect x="{x0:.1f}" y="{y(k) + (BAND_H - BAR_H) // 2}" '
                f'width="{w:.1f}" height="{BAR_H}" fill="{color}" stroke="#333">'
                f"<title>job {job + 1}, machine {k + 1}: "
                f"[{sol.starts[h][k]}, {sol.starts[h][k] + sol.workloads[h][k]})</title></rect>"
            )
            if w > 14:
                out.append(
                    f'<text x="{x0 + 3:.1f}" y="{y(k) + BAND_H // 2 + 4}" '
                    f'fill="#fff">J{job + 1}</text>'
                )
    # time axis ticks
    step = max(1, span // 10)
    t = 0
    axis_y = TOP + m * BAND_H
    while t <= span:
        out.append(
            f'<line x1="{x(t):.1f}" y1="{axis_y}" x2="{x(t):.1f}" y2="{axis_y + 5}" stroke="#333"/>'
        )
        out.append(f'<text x="{x(t):.1f}" y="{axis_y + 18}" text-anchor="middle">{t}</text>')
        t += step
    out.append("</svg>")
    return "\n".join(out)
