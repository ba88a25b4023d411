"""Hand-written SVG and CSV output for distribution curves."""

import math

import numpy as np

from .errors import ParameterError
from .io import save_curve_csv

__all__ = ["emit_curve", "render_svg", "tangent_point"]

WIDTH, HEIGHT = 640, 480
MARGIN = 60
LN10 = math.log(10.0)


def tangent_point(curve, target=-1.0):
    """Index of the first interior point whose centered log-log slope is at or below ``target``.

    Returns ``None`` when no interior point qualifies. A tolerance of ``1e-9``
    lets exact power laws register at their first interior point.
    """
    x, y = curve.log_rank, curve.mean_log_value
    if x.size < 3:
        return None
    slope = (y[2:] - y[:-2]) / (x[2:] - x[:-2])
    hits = np.flatnonzero(slope <= target + 1e-9)
    return int(hits[0]) + 1 if hits.size else None


def _ticks(lo, hi):
    # positions at natural logs of powers of ten inside [lo, hi]
    return [m for m in range(math.ceil(lo / LN10 - 1e-12), math.floor(hi / LN10 + 1e-12) + 1)]


def render_svg(curve, overlay=None, title=""):
    """Log-log plot of ``curve`` (and optionally a predicted ``overlay``) as an SVG string."""
    curves = [c for c in (curve, overlay) if c is not None]
    xs = np.concatenate([c.log_rank for c in curves])
    ys = np.concatenate([c.mean_log_value for c in curves])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def px(x):
        return MARGIN + (x - x0) / (x1 - x0) * pw

    def py(y):
        return HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="24" text-anchor="middle" font-size="16">'
                   f'{_escape(title)}</text>')
    bx, by = MARGIN, HEIGHT - MARGIN
    out.append(f'<g class="axes" stroke="black" fill="none">'
               f'<line x1="{bx}" y1="{by}" x2="{WIDTH - MARGIN}" y2="{by}"/>'
               f'<line x1="{bx}" y1="{by}" x2="{bx}" y2="{MARGIN}"/></g>')
    out.append('<g class="ticks" font-size="11">')
    for m in _ticks(x0, x1):
        x = px(m * LN10)
        out.append(f'<line x1="{x:.2f}" y1="{by}" x2="{x:.2f}" y2="{by + 5}" stroke="black"/>'
                   f'<text x="{x:.2f}" y="{by + 18}" text-anchor="middle">1e{m}</text>')
    for m in _ticks(y0, y1):
        y = py(m * LN10)
        out.append(f'<line x1="{bx - 5}" y1="{y:.2f}" x2="{bx}" y2="{y:.2f}" stroke="black"/>'
                   f'<text x="{bx - 8}" y="{y + 4:.2f}" text-anchor="end">1e{m}</text>')
    out.append('</g>')
    out.append(f'<text x="{WIDTH / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle" '
               f'font-size="12">rank</text>')
    out.append(f'<text x="15" y="{HEIGHT / 2:.2f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 15 {HEIGHT / 2:.2f})">size</text>')
    styles = [("observed", "black", ""), ("predicted", "red", ' stroke-dasharray="6 3"')]
    for c, (cls, color, dash) in zip(curves, styles):
        pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(c.log_rank, c.mean_log_value))
        out.append(f'<polyline class="{cls}" fill="none" stroke="{color}" stroke-width="1.5"'
                   f'{dash} points="{pts}"/>')
    k = tangent_point(curve)
    if k is not None:
        out.append(f'<circle class="tangent-marker" cx="{px(curve.log_rank[k]):.2f}" '
                   f'cy="{py(curve.mean_log_value[k]):.2f}" r="4" fill="black">'
                   f'<title>rank {k + 1}</title></circle>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def _escape(text):
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_curve(curve, path, format="svg", overlay=None, title=""):
    """Write ``curve`` to ``path`` as ``csv`` or ``svg``."""
    if curve is None or len(curve) == 0:
        raise ParameterError("cannot emit an empty curve")
    if format == "csv":
        save_curve_csv(curve, path)
    elif format == "svg":
        with open(path, "w") as fh:
            fh.write(render_svg(curve, overlay, title))
    else:
        raise ParameterError(f"unknown curve format {format!r}")
