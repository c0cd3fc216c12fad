"""Dependency-free SVG charts: tornado, one-parameter sweep, histogram."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape, quoteattr

from .analysis import SA1Table, TornadoData
from .values import is_number

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
FONT = 'font-family="Helvetica, Arial, sans-serif"'


def label_number(x: float) -> str:
    """Six significant digits for on-chart labels."""
    s = f"{x:.6g}"
    return "0" if s == "-0" else s


def _c(x: float) -> str:
    # coordinates: fixed two decimals keeps output byte-stable
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    k = 0
    while first + k * step <= hi + step * 1e-9:
        ticks.append(round(first + k * step, 12))
        k += 1
    return ticks


def _domain(values: list[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        pad = abs(lo) * 0.1 or 1.0
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


class _Scale:
    def __init__(self, d0: float, d1: float, r0: float, r1: float):
        self.d0, self.d1, self.r0, self.r1 = d0, d1, r0, r1

    def __call__(self, x: float) -> float:
        return self.r0 + (x - self.d0) / (self.d1 - self.d0) * (self.r1 - self.r0)


def _svg(width: int, height: int, body: list[str], title: str) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" {FONT} font-size="12">'
    )
    return "\n".join(
        [
            '<?xml version="1.0" encoding="UTF-8"?>',
            head,
            f"<title>{escape(title)}</title>",
            f'<rect width="{width}" height="{height}" fill="white"/>',
            f'<text x="{width / 2:.2f}" y="22" text-anchor="middle" font-size="15" font-weight="bold">{escape(title)}</text>',
            *body,
            "</svg>",
            "",
        ]
    )


def _x_axis(sx: _Scale, y: float, lo: float, hi: float, title: str) -> list[str]:
    out = [f'<line x1="{_c(sx(lo))}" y1="{_c(y)}" x2="{_c(sx(hi))}" y2="{_c(y)}" stroke="black"/>']
    for t in nice_ticks(lo, hi):
        x = sx(t)
        out.append(f'<line x1="{_c(x)}" y1="{_c(y)}" x2="{_c(x)}" y2="{_c(y + 5)}" stroke="black"/>')
        out.append(f'<text x="{_c(x)}" y="{_c(y + 18)}" text-anchor="middle">{label_number(t)}</text>')
    mid = (sx(lo) + sx(hi)) / 2
    out.append(f'<text x="{_c(mid)}" y="{_c(y + 36)}" text-anchor="middle">{escape(title)}</text>')
    return out


def _y_axis(sy: _Scale, x: float, lo: float, hi: float, title: str) -> list[str]:
    out = [f'<line x1="{_c(x)}" y1="{_c(sy(lo))}" x2="{_c(x)}" y2="{_c(sy(hi))}" stroke="black"/>']
    for t in nice_ticks(lo, hi):
        y = sy(t)
        out.append(f'<line x1="{_c(x - 5)}" y1="{_c(y)}" x2="{_c(x)}" y2="{_c(y)}" stroke="black"/>')
        out.append(f'<text x="{_c(x - 8)}" y="{_c(y + 4)}" text-anchor="end">{label_number(t)}</text>')
    mid = (sy(lo) + sy(hi)) / 2
    out.append(
        f'<text x="{_c(x - 58)}" y="{_c(mid)}" text-anchor="middle" '
        f'transform="rotate(-90 {_c(x - 58)} {_c(mid)})">{escape(title)}</text>'
    )
    return out


def render_tornado_svg(data: TornadoData, width: int = 760) -> str:
    """Horizontal bars from the lower to the higher output, widest on top,
    with a vertical line at the base output."""
    if not data.rows:
        raise ValueError("tornado chart needs at least one row")
    row_h, left, right, top = 34, 230, 60, 50
    height = top + row_h * len(data.rows) + 60
    lo, hi = _domain([v for r in data.rows for v in (r.out_low, r.out_high)] + [data.base_output])
    sx = _Scale(lo, hi, left, width - right)
    body = []
    for i, r in enumerate(data.rows):
        y = top + i * row_h + 6
        a, b = min(r.out_low, r.out_high), max(r.out_low, r.out_high)
        body.append(
            f'<rect class="bar" x="{_c(sx(a))}" y="{_c(y)}" width="{_c(sx(b) - sx(a))}" '
            f'height="{row_h - 12}" fill="{PALETTE[0]}" data-swing={quoteattr(repr(r.swing))}/>'
        )
        body.append(
            f'<text x="{left - 8}" y="{_c(y + (row_h - 12) / 2 + 4)}" text-anchor="end">{escape(r.label)}</text>'
        )
        # input value annotations at the output end each one produces
        for out, inp in ((r.out_low, r.low), (r.out_high, r.high)):
            anchor = "end" if out == a and a != b else "start"
            dx = -4 if anchor == "end" else 4
            body.append(
                f'<text class="annotation" x="{_c(sx(out) + dx)}" y="{_c(y - 2)}" text-anchor="{anchor}" '
                f'font-size="10">{label_number(inp)}</text>'
            )
    axis_y = top + row_h * len(data.rows)
    bx = sx(data.base_output)
    body.append(
        f'<line class="base-line" x1="{_c(bx)}" y1="{top - 6}" x2="{_c(bx)}" y2="{_c(axis_y)}" '
        f'stroke="black" stroke-width="2" data-value={quoteattr(repr(data.base_output))}/>'
    )
    body.append(
        f'<text x="{_c(bx)}" y="{top - 10}" text-anchor="middle" font-size="11">base {label_number(data.base_output)}</text>'
    )
    body.extend(_x_axis(sx, axis_y, lo, hi, data.output_label))
    return _svg(width, height, body, f"Tornado: {data.output_label}")


def render_sweep_svg(table: SA1Table, width: int = 720, height: int = 440) -> str:
    """Scatter-with-lines chart, one series per output. Error entries break
    the line."""
    left, right, top, bottom = 90, 170, 50, 70
    xs = [r.parameter_value for r in table.rows]
    ys = [v for r in table.rows for v in r.values if is_number(v)]
    xlo, xhi = _domain(xs)
    ylo, yhi = _domain(ys or [0.0])
    sx = _Scale(xlo, xhi, left, width - right)
    sy = _Scale(ylo, yhi, height - bottom, top)
    body = []
    for k, label in enumerate(table.output_labels):
        color = PALETTE[k % len(PALETTE)]
        segment: list[str] = []
        segments = []
        points = []
        for r in table.rows:
            v = r.values[k]
            if is_number(v):
                p = f"{_c(sx(r.parameter_value))},{_c(sy(v))}"
                segment.append(p)
                points.append(p)
            elif segment:
                segments.append(segment)
                segment = []
        if segment:
            segments.append(segment)
        body.append(f'<g class="series" data-output={quoteattr(str(table.outputs[k]))}>')
        for seg in segments:
            if len(seg) > 1:
                body.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{" ".join(seg)}"/>')
        for p in points:
            cx, cy = p.split(",")
            body.append(f'<circle cx="{cx}" cy="{cy}" r="3.5" fill="{color}"/>')
        body.append("</g>")
        ly = top + 10 + 20 * k
        lx = width - right + 15
        body.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        body.append(f'<text class="legend" x="{lx + 26}" y="{ly + 4}">{escape(label)}</text>')
    body.extend(_x_axis(sx, height - bottom, xlo, xhi, table.parameter_label))
    ytitle = table.output_labels[0] if len(table.output_labels) == 1 else "Output"
    body.extend(_y_axis(sy, left, ylo, yhi, ytitle))
    return _svg(width, height, body, f"Sensitivity of outputs to {table.parameter_label}")


def render_histogram_svg(label: str, lower: float, upper: float, counts: list[int],
                         width: int = 720, height: int = 400) -> str:
    left, right, top, bottom = 70, 30, 50, 70
    lo, hi = (lower, upper) if upper > lower else (lower - 0.5, upper + 0.5)
    sx = _Scale(lo, hi, left, width - right)
    peak = max(counts) or 1
    sy = _Scale(0, peak * 1.05, height - bottom, top)
    bw = (hi - lo) / len(counts)
    body = []
    for i, n in enumerate(counts):
        x0, x1 = sx(lo + i * bw), sx(lo + (i + 1) * bw)
        body.append(
            f'<rect class="bin" x="{_c(x0)}" y="{_c(sy(n))}" width="{_c(x1 - x0)}" '
            f'height="{_c(sy(0) - sy(n))}" fill="{PALETTE[0]}" stroke="white"/>'
        )
    body.extend(_x_axis(sx, height - bottom, lo, hi, label))
    body.extend(_y_axis(sy, left, 0, peak * 1.05, "Trials"))
    return _svg(width, height, body, f"Distribution of {label}")
