"""Minimal hand-written SVG line plots (no rendering dependencies).

One plot = axes with ticks, an optional shaded band polygon per series
(mean +/- half-width), one polyline per series, and a text legend.
"""

from __future__ import annotations

WIDTH, HEIGHT = 860, 520
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 30, 46, 56

PALETTE = ["#c0392b", "#1a1a1a", "#2e6da4", "#2c8a4b", "#8e44ad", "#b8860b"]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _ticks(lo: float, hi: float, n: int = 6) -> list:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / n
    mag = 10.0 ** int(f"{raw:e}".split("e")[1])
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    start = step * (int(lo / step) if lo >= 0 else int(lo / step) - 1)
    out = []
    t = start
    while t <= hi + step * 1e-9:
        if t >= lo - step * 1e-9:
            out.append(t)
        t += step
    return out


def write_line_plot(path, title: str, xlabel: str, ylabel: str, series) -> None:
    """``series``: list of (label, xs, ys, half_widths-or-None)."""
    xs_all = [x for _, xs, _, _ in series for x in xs]
    ys_lo, ys_hi = [], []
    for _, _, ys, hw in series:
        for i, y in enumerate(ys):
            d = hw[i] if hw is not None else 0.0
            ys_lo.append(y - d)
            ys_hi.append(y + d)
    x_min, x_max = min(xs_all), max(xs_all)
    y_min, y_max = min(ys_lo), max(ys_hi)
    if y_max == y_min:
        y_max = y_min + 1.0
    pad = 0.05 * (y_max - y_min)
    y_min -= pad
    y_max += pad

    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + plot_w * (x - x_min) / max(x_max - x_min, 1e-12)

    def sy(y):
        return MARGIN_T + plot_h * (1.0 - (y - y_min) / (y_max - y_min))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]
    # axes
    x0, y0 = MARGIN_L, MARGIN_T + plot_h
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + plot_w}" y2="{y0}" '
                 f'stroke="black" stroke-width="1"/>')
    parts.append(f'<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" '
                 f'stroke="black" stroke-width="1"/>')
    for t in _ticks(x_min, x_max):
        px = sx(t)
        parts.append(f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y0 + 5}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{y0 + 20}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')
    for t in _ticks(y_min, y_max):
        py = sy(t)
        parts.append(f'<line x1="{x0 - 5}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" '
                     f'stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{x0 - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>')
    parts.append(f'<text x="{MARGIN_L + plot_w // 2}" y="{HEIGHT - 14}" '
                 f'text-anchor="middle" font-family="sans-serif" font-size="13">{xlabel}</text>')
    parts.append(f'<text x="18" y="{MARGIN_T + plot_h // 2}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13" '
                 f'transform="rotate(-90 18 {MARGIN_T + plot_h // 2})">{ylabel}</text>')

    for si, (label, xs, ys, hw) in enumerate(series):
        color = PALETTE[si % len(PALETTE)]
        if hw is not None:
            upper = [(sx(x), sy(y + d)) for x, y, d in zip(xs, ys, hw)]
            lower = [(sx(x), sy(y - d)) for x, y, d in zip(xs, ys, hw)]
            pts = upper + lower[::-1]
            poly = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in pts)
            parts.append(f'<polygon points="{poly}" fill="{color}" opacity="0.15"/>')
        line = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{line}" fill="none" stroke="{color}" '
                     f'stroke-width="1.6"/>')
        ly = MARGIN_T + 16 + 18 * si
        lx = MARGIN_L + plot_w - 180
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 26}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 32}" y="{ly}" font-family="sans-serif" '
                     f'font-size="12">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fobj:
        fobj.write("\n".join(parts) + "\n")
