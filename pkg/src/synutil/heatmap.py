"""Lower-triangular SVG heatmaps of two-way sweep scores.

Colors come from a fixed nine-step yellow-orange-red ramp.  A score ``v`` on
scale ``max_scale`` lands in step ``floor(9 * v / max_scale)``, clamped to
``[0, 8]``, so everything at or above the scale shares the top color.  The
output depends only on the inputs, which makes it safe for golden-file tests.
"""
from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

from .sweep import DEFAULT_KEY, SweepResult, fixed_slice, pick_fixed_var

RAMP = (
    "#ffffcc", "#ffeda0", "#fed976", "#feb24c", "#fd8d3c",
    "#fc4e2a", "#e31a1c", "#bd0026", "#800026",
)
EMPTY = "#eeeeee"
CELL = 36
CHAR_W = 7
FONT = 11


def color_for(value: float | None, max_scale: float) -> str:
    if value is None or math.isnan(value):
        return EMPTY
    if max_scale <= 0:
        return RAMP[0]
    step = math.floor(len(RAMP) * value / max_scale)
    return RAMP[min(max(step, 0), len(RAMP) - 1)]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _scale_label(x: float) -> str:
    return f"{x:g}"


def default_scale(result: SweepResult, key: str = DEFAULT_KEY) -> float:
    vals = [v for v in result.values(key).values() if v is not None and not math.isnan(v)]
    top = max(vals, default=0.0)
    return top if top > 0 else 1.0


def render_heatmap(
    result: SweepResult,
    max_scale: float | None = None,
    title: str = "",
    key: str = DEFAULT_KEY,
) -> str:
    """SVG 1.1 document: rows are variables 2..v, columns 1..v-1, one cell per pair."""
    if result.arity != 2:
        raise ValueError(f"heatmap needs a two-way sweep, got arity {result.arity}")
    if max_scale is not None and not max_scale > 0:
        raise ValueError("max_scale must be positive")
    scale = default_scale(result, key) if max_scale is None else float(max_scale)
    names = list(result.variables)
    vals = result.values(key)
    v = len(names)
    label_w = CHAR_W * max((len(nm) for nm in names), default=1) + 10
    top = 30 if title else 10
    grid_n = max(v - 1, 1)
    grid_x, grid_y = label_w, top
    grid_w = grid_h = grid_n * CELL
    legend_x = grid_x + grid_w + 30
    legend_step = 16
    legend_h = legend_step * len(RAMP)
    width = legend_x + 70
    height = max(grid_y + grid_h + label_w, top + legend_h + 30)

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, sans-serif" font-size="{FONT}">',
    ]
    if title:
        out.append(f'<text x="{width // 2}" y="18" text-anchor="middle" font-size="{FONT + 3}">{escape(title)}</text>')
    for i in range(1, v):
        y = grid_y + (i - 1) * CELL
        out.append(f'<text x="{grid_x - 5}" y="{y + CELL // 2 + 4}" text-anchor="end">{escape(names[i])}</text>')
        for j in range(i):
            x = grid_x + j * CELL
            val = vals.get((names[j], names[i]))
            if val is None:
                val = vals.get((names[i], names[j]))
            fill = color_for(val, scale)
            tip = f"{names[j]}:{names[i]} " + ("NA" if val is None else _fmt(val))
            out.append(
                f'<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#ffffff">'
                f"<title>{escape(tip)}</title></rect>"
            )
    base = grid_y + grid_h + 5
    for j in range(v - 1):
        x = grid_x + j * CELL + CELL // 2 + 4
        out.append(
            f'<text x="{x}" y="{base}" text-anchor="end" transform="rotate(-90 {x} {base})">{escape(names[j])}</text>'
        )
    # legend: top color first, labelled with the scale maximum
    out.append(f'<text x="{legend_x}" y="{top - 2 if title else top + 2}">{escape(key)}</text>')
    ly = top + 8
    for s, colour in enumerate(reversed(RAMP)):
        out.append(f'<rect x="{legend_x}" y="{ly + s * legend_step}" width="14" height="{legend_step}" fill="{colour}"/>')
    out.append(f'<text x="{legend_x + 20}" y="{ly + 10}">{_scale_label(scale)}</text>')
    out.append(f'<text x="{legend_x + 20}" y="{ly + legend_h}">0</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_threeway(
    result: SweepResult,
    fixed: str | None = None,
    max_scale: float | None = None,
    title: str = "",
    key: str = DEFAULT_KEY,
) -> str:
    """Heatmap of the triples containing ``fixed`` (default: the worst variable)."""
    var = fixed if fixed is not None else pick_fixed_var(result, key)
    sl = fixed_slice(result, var)
    return render_heatmap(sl, max_scale, title or f"three-way tables with {var}", key)
