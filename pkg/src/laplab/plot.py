"""Log-log SVG chart of the median relative error against n."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from .bounds import floor_for

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 30, 40, 60


def _median_by_n(records):
    by_n: dict = {}
    for rec in records:
        if rec.usable:
            by_n.setdefault(rec.n, []).append(rec.rel_error_abs)
    grid = sorted(by_n)
    return grid, [float(np.median(by_n[n])) for n in grid]


def _decades(lo: float, hi: float):
    return range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)


def render_svg(records: Sequence, lambda_star: Optional[float] = None) -> str:
    models = {rec.model for rec in records}
    if len(models) != 1:
        raise ValueError(f"plot needs records from exactly one model, got {sorted(models)}")
    model = models.pop()
    if model == "poisson" and lambda_star is None:
        lambda_star = next((r.lambda_star for r in records if r.lambda_star is not None), None)
    if model == "poisson" and lambda_star is None:
        raise ValueError("the Poisson floor line needs lambda_star (CSV records do not store it)")
    grid, medians = _median_by_n(records)
    if len(grid) < 2:
        raise ValueError("plot needs usable records at two or more sample sizes")

    ns = np.asarray(grid, dtype=float)
    med = np.asarray(medians)
    ref = med[0] * ns[0] / ns
    floor = np.array([floor_for(model, n, lambda_star) for n in ns])

    x_lo, x_hi = math.log(ns[0]), math.log(ns[-1])
    all_y = np.concatenate([med, ref, floor])
    y_lo, y_hi = math.log(all_y.min()) - 0.2, math.log(all_y.max()) + 0.2
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(n):
        return LEFT + pw * (math.log(n) - x_lo) / (x_hi - x_lo)

    def py(v):
        return TOP + ph * (1.0 - (math.log(v) - y_lo) / (y_hi - y_lo))

    def pts(xs, ys):
        return " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, ys))

    floor_label = {
        "bernoulli": "1/(26n)",
        "multinomial": "1/(5n)",
        "poisson": f"1/(26n·{lambda_star:g})" if lambda_star else "",
    }[model]

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">{model}: median |p/p_LA - 1| vs n</text>',
        f'<path class="axes" d="M{LEFT},{TOP} V{TOP + ph} H{LEFT + pw}" stroke="black" fill="none"/>',
    ]
    ticks = []
    for e in _decades(ns[0], ns[-1]):
        v = 10.0 ** e
        if ns[0] * 0.999 <= v <= ns[-1] * 1.001:
            x = px(v)
            ticks.append(f"M{x:.2f},{TOP + ph} v5")
            out.append(f'<text x="{x:.2f}" y="{TOP + ph + 20}" text-anchor="middle" '
                       f'font-family="sans-serif" font-size="11">1e{e}</text>')
    for e in _decades(math.exp(y_lo), math.exp(y_hi)):
        v = 10.0 ** e
        if y_lo <= math.log(v) <= y_hi:
            y = py(v)
            ticks.append(f"M{LEFT},{y:.2f} h-5")
            out.append(f'<text x="{LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" '
                       f'font-family="sans-serif" font-size="11">1e{e}</text>')
    if ticks:
        out.append(f'<path class="ticks" d="{" ".join(ticks)}" stroke="black" fill="none"/>')
    out += [
        f'<text x="{LEFT + pw / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">n</text>',
        f'<polyline class="data" points="{pts(ns, med)}" stroke="#1f77b4" stroke-width="2" fill="none"/>',
        f'<line class="reference" x1="{px(ns[0]):.2f}" y1="{py(ref[0]):.2f}" x2="{px(ns[-1]):.2f}" '
        f'y2="{py(ref[-1]):.2f}" stroke="gray" stroke-dasharray="6,4"/>',
        f'<line class="floor" x1="{px(ns[0]):.2f}" y1="{py(floor[0]):.2f}" x2="{px(ns[-1]):.2f}" '
        f'y2="{py(floor[-1]):.2f}" stroke="#d62728" stroke-dasharray="2,3"/>',
        f'<text x="{LEFT + pw - 5}" y="{TOP + 15}" text-anchor="end" font-family="sans-serif" '
        f'font-size="11">solid: median, dashed: slope -1, dotted: floor {floor_label}</text>',
        "</svg>",
    ]
    return "\n".join(out) + "\n"


def emit_plot(records: Sequence, path: str, lambda_star: Optional[float] = None) -> None:
    text = render_svg(records, lambda_star)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
