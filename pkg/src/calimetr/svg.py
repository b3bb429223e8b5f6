"""Deterministic SVG figures on a fixed 800x600 canvas.

Every figure takes the same JSON-ready dicts the reports carry, so a report
can be re-plotted later without recomputing anything.
"""

from __future__ import annotations

from html import escape
from pathlib import Path
from typing import Sequence

from .io import write_text

WIDTH, HEIGHT = 800, 600
LEFT, RIGHT, TOP, BOTTOM = 80, 160, 50, 70
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
FIGURES = ("reliability", "sparsification", "loss_surface", "ause_over_runs")


def _f(x: float) -> str:
    s = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Axes:
    def __init__(self, x0: float, x1: float, y0: float, y1: float):
        if x1 <= x0:
            x1 = x0 + 1.0
        if y1 <= y0:
            y1 = y0 + 1.0
        self.x0, self.x1, self.y0, self.y1 = x0, x1, y0, y1
        self.w = WIDTH - LEFT - RIGHT
        self.h = HEIGHT - TOP - BOTTOM

    def px(self, x: float) -> float:
        return LEFT + (x - self.x0) / (self.x1 - self.x0) * self.w

    def py(self, y: float) -> float:
        return TOP + (1.0 - (y - self.y0) / (self.y1 - self.y0)) * self.h

    def pts(self, xs, ys) -> str:
        return " ".join(f"{_f(self.px(x))},{_f(self.py(y))}" for x, y in zip(xs, ys))


def _frame(ax: _Axes, title: str, xlabel: str, ylabel: str, ticks: int = 5) -> list[str]:
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="28" text-anchor="middle" font-family="sans-serif" font-size="18">{escape(title)}</text>',
        f'<rect class="frame" x="{LEFT}" y="{TOP}" width="{ax.w}" height="{ax.h}" fill="none" stroke="black"/>',
    ]
    for i in range(ticks + 1):
        xv = ax.x0 + (ax.x1 - ax.x0) * i / ticks
        yv = ax.y0 + (ax.y1 - ax.y0) * i / ticks
        x, y = _f(ax.px(xv)), _f(ax.py(yv))
        out.append(f'<line x1="{x}" y1="{TOP + ax.h}" x2="{x}" y2="{TOP + ax.h + 5}" stroke="black"/>')
        out.append(
            f'<text x="{x}" y="{TOP + ax.h + 20}" text-anchor="middle" font-family="sans-serif" font-size="12">{xv:.3g}</text>'
        )
        out.append(f'<line x1="{LEFT - 5}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        out.append(
            f'<text x="{LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="12">{yv:.3g}</text>'
        )
    out.append(
        f'<text x="{LEFT + ax.w // 2}" y="{HEIGHT - 20}" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(xlabel)}</text>'
    )
    out.append(
        f'<text x="20" y="{TOP + ax.h // 2}" text-anchor="middle" font-family="sans-serif" font-size="14" '
        f'transform="rotate(-90 20 {TOP + ax.h // 2})">{escape(ylabel)}</text>'
    )
    return out


def _legend(entries: Sequence[tuple[str, str]]) -> list[str]:
    out = []
    for i, (name, color) in enumerate(entries):
        y = TOP + 10 + 20 * i
        x = WIDTH - RIGHT + 15
        out.append(f'<line x1="{x}" y1="{y}" x2="{x + 20}" y2="{y}" stroke="{color}" stroke-width="2"/>')
        out.append(
            f'<text x="{x + 26}" y="{y}" dominant-baseline="middle" font-family="sans-serif" font-size="12">{escape(name)}</text>'
        )
    return out


def reliability_svg(data: dict) -> str:
    """One bar per populated bin (height = accuracy or error) plus the diagonal."""
    mode = data["mode"]
    ax = _Axes(0.0, 1.0, 0.0, 1.0)
    outcome = "accuracy" if mode == "confidence" else "error rate"
    measure = "confidence" if mode == "confidence" else "normalized entropy"
    out = _frame(ax, f"Reliability diagram ({mode})", f"mean {measure}", outcome)
    for b in data["bins"]:
        if b["empty"]:
            continue
        x, w = ax.px(b["lo"]), ax.px(b["hi"]) - ax.px(b["lo"])
        y = ax.py(b["outcome_rate"])
        out.append(
            f'<rect class="bar" x="{_f(x)}" y="{_f(y)}" width="{_f(w)}" height="{_f(ax.py(0) - y)}" '
            f'fill="{PALETTE[0]}" fill-opacity="0.6" stroke="{PALETTE[0]}"/>'
        )
        out.append(
            f'<circle class="bin-mean" cx="{_f(ax.px(b["mean_measure"]))}" cy="{_f(y)}" r="3" fill="{PALETTE[1]}"/>'
        )
    out.append(
        f'<line class="diagonal" x1="{_f(ax.px(0))}" y1="{_f(ax.py(0))}" x2="{_f(ax.px(1))}" y2="{_f(ax.py(1))}" '
        'stroke="gray" stroke-dasharray="6,4"/>'
    )
    if data.get("skewness") is not None:
        out.append(
            f'<text x="{LEFT + 10}" y="{TOP + 20}" font-family="sans-serif" font-size="12">skewness {data["skewness"]:.3g}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def sparsification_svg(data: dict) -> str:
    """Oracle and method curves with the area between them shaded."""
    fr, oracle, method = data["fractions"], data["oracle"], data["method"]
    lo, hi = min(min(oracle), min(method)), max(max(oracle), max(method))
    pad = 0.05 * (hi - lo) if hi > lo else 0.05
    ax = _Axes(0.0, max(fr), lo - pad, hi + pad)
    title = f"Sparsification ({data.get('sorter', 'method')}, AUSE {data.get('ause', 0.0):.4g})"
    out = _frame(ax, title, "fraction removed", data.get("merit", "merit"))
    poly = ax.pts(fr, oracle) + " " + ax.pts(fr[::-1], method[::-1])
    out.append(f'<polygon class="error-area" points="{poly}" fill="{PALETTE[1]}" fill-opacity="0.25" stroke="none"/>')
    out.append(f'<polyline class="oracle" points="{ax.pts(fr, oracle)}" fill="none" stroke="black" stroke-width="2"/>')
    out.append(f'<polyline class="method" points="{ax.pts(fr, method)}" fill="none" stroke="{PALETTE[0]}" stroke-width="2"/>')
    out += _legend([("oracle", "black"), (data.get("sorter", "method"), PALETTE[0])])
    out.append("</svg>")
    return "\n".join(out) + "\n"


def loss_surface_svg(data: dict) -> str:
    """Min-max normalized metric curves over temperature, argmin marked."""
    grid = data["grid"]
    ax = _Axes(min(grid), max(grid), 0.0, 1.0)
    out = _frame(ax, "Normalized calibration loss surface", "temperature", "normalized value")
    legend = []
    for i, name in enumerate(sorted(data["normalized"])):
        color = PALETTE[i % len(PALETTE)]
        vals = data["normalized"][name]
        out.append(
            f'<polyline class="curve" data-metric="{escape(name)}" points="{ax.pts(grid, vals)}" '
            f'fill="none" stroke="{color}" stroke-width="2"/>'
        )
        t = data["argmin_t"][name]
        j = min(range(len(grid)), key=lambda g: abs(grid[g] - t))
        out.append(
            f'<circle class="argmin" data-metric="{escape(name)}" cx="{_f(ax.px(grid[j]))}" cy="{_f(ax.py(vals[j]))}" '
            f'r="5" fill="{color}" stroke="black"/>'
        )
        legend.append((f"{name} (T={t:.3g})", color))
    out += _legend(legend)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def ause_over_runs_svg(data: dict) -> str:
    """AUSE per series (e.g. per class) across an ordered list of runs."""
    runs = list(data["runs"])
    series = data["series"]
    allv = [v for vals in series.values() for v in vals]
    lo, hi = min(allv), max(allv)
    pad = 0.05 * (hi - lo) if hi > lo else 0.05
    xs = list(range(len(runs)))
    ax = _Axes(0.0, max(len(runs) - 1, 1), lo - pad, hi + pad)
    out = _frame(ax, "AUSE over runs", "run", "AUSE", ticks=max(1, min(len(runs) - 1, 10)))
    legend = []
    for i, name in enumerate(sorted(series)):
        color = PALETTE[i % len(PALETTE)]
        vals = series[name]
        out.append(
            f'<polyline class="curve" data-series="{escape(name)}" points="{ax.pts(xs, vals)}" '
            f'fill="none" stroke="{color}" stroke-width="2"/>'
        )
        for x, v in zip(xs, vals):
            out.append(f'<circle class="point" cx="{_f(ax.px(x))}" cy="{_f(ax.py(v))}" r="3" fill="{color}"/>')
        legend.append((name, color))
    for x, r in zip(xs, runs):
        out.append(
            f'<text x="{_f(ax.px(x))}" y="{TOP + ax.h + 36}" text-anchor="middle" font-family="sans-serif" font-size="11">{escape(str(r))}</text>'
        )
    out += _legend(legend)
    out.append("</svg>")
    return "\n".join(out) + "\n"


_RENDERERS = {
    "reliability": reliability_svg,
    "sparsification": sparsification_svg,
    "loss_surface": loss_surface_svg,
    "ause_over_runs": ause_over_runs_svg,
}


def render_svg(figure_kind: str, data: dict, path=None) -> str:
    if figure_kind not in _RENDERERS:
        raise ValueError(f"unknown figure {figure_kind!r}; expected one of {FIGURES}")
    text = _RENDERERS[figure_kind](data)
    if path is not None:
        write_text(Path(path), text)
    return text
