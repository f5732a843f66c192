"""Tiny deterministic SVG line plotter for study outputs.

No styling dependencies, no timestamps: identical data produces identical
bytes.  Supports a log-x option for sweep-rate axes.
"""

from __future__ import annotations

import math

_WIDTH, _HEIGHT = 640, 420
_MARGIN = 56


def _fmt(value):
    return f"{value:.6g}"


def _ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def line_plot(path, xs, ys, xlabel, ylabel, title, logx=False):
    xs = [math.log10(x) for x in xs] if logx else list(xs)
    ys = list(ys)
    if not xs:
        raise ValueError("empty plot data")
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    span_x = x_hi - x_lo
    span_y = y_hi - y_lo
    x_lo -= 0.02 * span_x
    x_hi += 0.02 * span_x
    y_lo -= 0.05 * span_y
    y_hi += 0.05 * span_y

    def px(x):
        return _MARGIN + (x - x_lo) / (x_hi - x_lo) * (_WIDTH - 2 * _MARGIN)

    def py(y):
        return _HEIGHT - _MARGIN - (y - y_lo) / (y_hi - y_lo) * (_HEIGHT - 2 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH // 2}" y="24" text-anchor="middle" font-size="14">{title}</text>',
    ]
    axis = (
        f'<line x1="{_MARGIN}" y1="{_HEIGHT - _MARGIN}" x2="{_WIDTH - _MARGIN}" '
        f'y2="{_HEIGHT - _MARGIN}" stroke="black"/>'
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" y2="{_HEIGHT - _MARGIN}" '
        f'stroke="black"/>'
    )
    parts.append(axis)
    for tx in _ticks(x_lo, x_hi):
        label = f"1e{_fmt(tx)}" if logx else _fmt(tx)
        parts.append(
            f'<text x="{_fmt(px(tx))}" y="{_HEIGHT - _MARGIN + 18}" text-anchor="middle" '
            f'font-size="10">{label}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        parts.append(
            f'<text x="{_MARGIN - 6}" y="{_fmt(py(ty) + 3)}" text-anchor="end" '
            f'font-size="10">{_fmt(ty)}</text>'
        )
    parts.append(
        f'<text x="{_WIDTH // 2}" y="{_HEIGHT - 12}" text-anchor="middle" '
        f'font-size="12">{xlabel}</text>'
    )
    parts.append(
        f'<text x="16" y="{_HEIGHT // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {_HEIGHT // 2})">{ylabel}</text>'
    )
    points = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{points}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
