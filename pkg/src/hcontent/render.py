"""SVG 1.1 heatmaps of grid functions (n = 1 strips, n = 2 images)."""

from __future__ import annotations

import math

import numpy as np

from .geometry import GridFunction

SCALES = ("linear", "log")

# viridis anchors, interpolated linearly
_STOPS = np.array([
    [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
], dtype=float)


class RenderError(ValueError):
    pass


def _color(t: float) -> str:
    t = min(max(t, 0.0), 1.0) * (len(_STOPS) - 1)
    i = min(int(t), len(_STOPS) - 2)
    c = _STOPS[i] + (t - i) * (_STOPS[i + 1] - _STOPS[i])
    r, g, b = (int(round(v)) for v in c)
    return f"#{r:02x}{g:02x}{b:02x}"


def normalize(values: np.ndarray, scale: str = "linear") -> np.ndarray:
    """Map values to [0, 1]; infinite cells map to 1, zeros to 0 on the log scale."""
    if scale not in SCALES:
        raise RenderError(f"unknown color scale {scale!r}; expected one of {SCALES}")
    v = np.asarray(values, dtype=float)
    fin = np.isfinite(v)
    out = np.ones_like(v)
    if scale == "log":
        pos = fin & (v > 0)
        out[fin & (v <= 0)] = 0.0
        if pos.any():
            lv = np.log10(v[pos])
            lo, hi = lv.min(), lv.max()
            out[pos] = (lv - lo) / (hi - lo) if hi > lo else 1.0
        return out
    if fin.any():
        lo, hi = v[fin].min(), v[fin].max()
        out[fin] = (v[fin] - lo) / (hi - lo) if hi > lo else 0.0
    return out


def heatmap_svg(f: GridFunction, scale: str = "linear", size: int = 512, title: str = "") -> str:
    if f.n not in (1, 2):
        raise RenderError(f"heatmaps support n = 1 or 2, got n={f.n}")
    side = 1 << f.L
    t = normalize(f.values, scale)
    rows = 1 if f.n == 1 else side
    cell = size / side
    height = cell * rows if f.n == 2 else max(cell, size / 16)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{height:.6g}" '
        f'viewBox="0 0 {size} {height:.6g}" shape-rendering="crispEdges">',
    ]
    if title:
        parts.append(f"<title>{_escape(title)}</title>")
    fin = f.values[np.isfinite(f.values)]
    lo = float(fin.min()) if fin.size else math.nan
    hi = float(fin.max()) if fin.size else math.nan
    parts.append(f"<desc>scale={scale} min={lo:.6g} max={hi:.6g} n={f.n} L={f.L}</desc>")
    h = height if f.n == 1 else cell
    for k, v in enumerate(t):
        if f.n == 1:
            x, y = k * cell, 0.0
        else:
            # first coordinate runs left to right, second bottom to top
            i, j = divmod(k, side)
            x, y = i * cell, (side - 1 - j) * cell
        parts.append(f'<rect x="{x:.6g}" y="{y:.6g}" width="{cell:.6g}" height="{h:.6g}" fill="{_color(v)}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
