"""Minimal deterministic SVG line charts.

Plotting stacks pull in heavy dependencies and produce output that
varies across versions; these couple of hundred lines emit the same
bytes for the same data on any machine, which keeps rendered artifacts
reproducible and diffable.  Only line charts are supported, with an
optional log-scaled y axis.
"""

import math

PALETTE = ("#1b6ca8", "#c23b22", "#2e8540", "#8e6bbf", "#c98a1b",
           "#3e4f5e")

_MARGIN_LEFT = 72.0
_MARGIN_RIGHT = 24.0
_MARGIN_TOP = 40.0
_MARGIN_BOTTOM = 52.0


def _fmt(x):
    return f"{x:.2f}"


def _nice_ticks(lo, hi, target=6):
    """Round tick positions covering [lo, hi], 1-2-5 spaced."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(target - 1, 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        step = mult * mag
        if raw <= step:
            break
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _decade_ticks(lo, hi):
    """Powers of ten covering [lo, hi] (log10 coordinates in, values out)."""
    ticks = []
    k = math.floor(lo + 1e-9)
    while k <= math.ceil(hi - 1e-9):
        if lo - 1e-9 <= k <= hi + 1e-9:
            ticks.append(k)
        k += 1
    if not ticks:
        ticks = [math.floor(lo), math.ceil(hi)]
    return ticks


def _tick_label(value):
    if value == 0:
        return "0"
    if abs(value) >= 1e5 or abs(value) < 1e-4:
        return f"{value:.0e}"
    return f"{value:g}"


def _escape(text):
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def render_line_chart(series, title="", xlabel="", ylabel="", log_y=False,
                      width=720, height=480):
    """Render named (xs, ys) series to an SVG string.

    series is a sequence of (label, xs, ys) triples, drawn in order with
    a fixed palette.  With log_y, points with y <= 0 are dropped from the
    plot (a fully nonpositive series is an error).
    """
    if not series:
        raise ValueError("no series to plot")
    cleaned = []
    for label, xs, ys in series:
        if len(xs) != len(ys):
            raise ValueError(f"series {label!r}: x/y length mismatch")
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)
               if not log_y or y > 0]
        if not pts:
            raise ValueError(f"series {label!r}: no plottable points")
        cleaned.append((str(label), pts))

    all_x = [p[0] for _, pts in cleaned for p in pts]
    all_y = [p[1] for _, pts in cleaned for p in pts]
    x_lo, x_hi = min(all_x), max(all_x)
    if x_hi <= x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if log_y:
        y_lo = math.log10(min(all_y))
        y_hi = math.log10(max(all_y))
    else:
        y_lo, y_hi = min(all_y), max(all_y)
    if y_hi <= y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    plot_w = width - _MARGIN_LEFT - _MARGIN_RIGHT
    plot_h = height - _MARGIN_TOP - _MARGIN_BOTTOM

    def px(x):
        return _MARGIN_LEFT + plot_w * (x - x_lo) / (x_hi - x_lo)

    def py(y):
        yy = math.log10(y) if log_y else y
        return _MARGIN_TOP + plot_h * (1.0 - (yy - y_lo) / (y_hi - y_lo))

    out = []
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
               f'height="{height}" viewBox="0 0 {width} {height}">')
    out.append(f'<rect width="{width}" height="{height}" fill="#ffffff"/>')
    out.append('<g font-family="sans-serif" font-size="12" '
               'fill="#222222">')
    if title:
        out.append(f'<text x="{_fmt(width / 2)}" y="22" '
                   f'text-anchor="middle" font-size="15">'
                   f'{_escape(title)}</text>')

    # Axes frame.
    x0, x1 = _fmt(_MARGIN_LEFT), _fmt(width - _MARGIN_RIGHT)
    y0, y1 = _fmt(_MARGIN_TOP), _fmt(height - _MARGIN_BOTTOM)
    out.append(f'<rect x="{x0}" y="{y0}" width="{_fmt(plot_w)}" '
               f'height="{_fmt(plot_h)}" fill="none" stroke="#888888"/>')

    for t in _nice_ticks(x_lo, x_hi):
        gx = _fmt(px(t))
        out.append(f'<line x1="{gx}" y1="{y0}" x2="{gx}" y2="{y1}" '
                   f'stroke="#dddddd"/>')
        out.append(f'<text x="{gx}" y="{_fmt(height - _MARGIN_BOTTOM + 18)}" '
                   f'text-anchor="middle">{_escape(_tick_label(t))}</text>')
    if log_y:
        ticks = [(k, 10.0 ** k) for k in _decade_ticks(y_lo, y_hi)]
    else:
        ticks = [(t, t) for t in _nice_ticks(y_lo, y_hi)]
    for coord, value in ticks:
        gy = _fmt(_MARGIN_TOP + plot_h * (1.0 - (coord - y_lo)
                                          / (y_hi - y_lo)))
        out.append(f'<line x1="{x0}" y1="{gy}" x2="{x1}" y2="{gy}" '
                   f'stroke="#dddddd"/>')
        label = _tick_label(value)
        out.append(f'<text x="{_fmt(_MARGIN_LEFT - 8)}" y="{gy}" '
                   f'text-anchor="end" dominant-baseline="middle">'
                   f'{_escape(label)}</text>')

    if xlabel:
        out.append(f'<text x="{_fmt(_MARGIN_LEFT + plot_w / 2)}" '
                   f'y="{_fmt(height - 12)}" text-anchor="middle">'
                   f'{_escape(xlabel)}</text>')
    if ylabel:
        cy = _MARGIN_TOP + plot_h / 2
        out.append(f'<text x="18" y="{_fmt(cy)}" text-anchor="middle" '
                   f'transform="rotate(-90 18 {_fmt(cy)})">'
                   f'{_escape(ylabel)}</text>')

    for i, (label, pts) in enumerate(cleaned):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
        out.append(f'<polyline points="{coords}" fill="none" '
                   f'stroke="{color}" stroke-width="1.5"/>')

    # Legend, top-right inside the frame.
    lx = width - _MARGIN_RIGHT - 150
    ly = _MARGIN_TOP + 14
    for i, (label, _) in enumerate(cleaned):
        color = PALETTE[i % len(PALETTE)]
        yy = ly + 16 * i
        out.append(f'<line x1="{_fmt(lx)}" y1="{_fmt(yy - 4)}" '
                   f'x2="{_fmt(lx + 22)}" y2="{_fmt(yy - 4)}" '
                   f'stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{_fmt(lx + 28)}" y="{_fmt(yy)}">'
                   f'{_escape(label)}</text>')

    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_chart(path, series, **kwargs):
    """Render a chart and write it to path."""
    svg = render_line_chart(series, **kwargs)
    with open(path, "w") as fh:
        fh.write(svg)
