"""Static SVG plots of corr2 against a swept parameter.

Each algorithm gets a shaded band between the 25th and 75th percentiles
(nearest-rank rule) and a line through the mean of the values inside the
band.
"""

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from ..errors import InputError

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


@dataclass(frozen=True)
class PlotSpec:
    x: str
    title: str = ""
    y_label: str = "corr2"
    width: int = 640
    height: int = 400


@dataclass(frozen=True)
class BandPoint:
    x: float
    lower: float
    mid: float
    upper: float
    mean: float
    count: int


def nearest_rank(sorted_vals, p):
    """Nearest-rank percentile: the value at rank ``ceil(p * n)`` (1-based)."""
    n = len(sorted_vals)
    if n == 0:
        raise InputError("percentile of an empty sample")
    rank = max(1, math.ceil(round(p * n, 12)))
    return sorted_vals[rank - 1]


def band(values):
    vals = sorted(v for v in values if not math.isnan(v))
    if not vals:
        return math.nan, math.nan, math.nan, math.nan
    lo = nearest_rank(vals, 0.25)
    hi = nearest_rank(vals, 0.75)
    inside = [v for v in vals if lo <= v <= hi]
    mid = math.fsum(inside) / len(inside)
    return lo, min(max(mid, lo), hi), hi, math.fsum(vals) / len(vals)


def series(records, x):
    """Per-algorithm list of :class:`BandPoint`, in first-seen algorithm order."""
    groups = {}
    for r in records:
        groups.setdefault(r.algo, {}).setdefault(float(r.value(x)), []).append(float(r.corr2))
    out = {}
    for algo, by_x in groups.items():
        pts = []
        for xv in sorted(by_x):
            lo, mid, hi, mean = band(by_x[xv])
            pts.append(BandPoint(xv, lo, mid, hi, mean, len(by_x[xv])))
        out[algo] = pts
    return out


def _fmt(v):
    return f"{v:.2f}"


def render_svg(records, spec):
    data = series(records, spec.x)
    xs = sorted({p.x for pts in data.values() for p in pts})
    if len(xs) < 2:
        raise InputError(f"need at least 2 distinct values of {spec.x!r} to plot")
    W, H = spec.width, spec.height
    left, right, top, bottom = 60, 150, 30, 50
    pw, ph = W - left - right, H - top - bottom
    x0, x1 = xs[0], xs[-1]

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + (1.0 - v) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{_fmt(left + pw / 2)}" y="18" text-anchor="middle" font-size="14">{escape(spec.title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = py(t)
        parts.append(f'<line x1="{left - 4}" y1="{_fmt(y)}" x2="{left}" y2="{_fmt(y)}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{_fmt(y + 4)}" text-anchor="end" font-size="11">{t:g}</text>')
    for v in xs:
        x = px(v)
        parts.append(f'<line x1="{_fmt(x)}" y1="{top + ph}" x2="{_fmt(x)}" y2="{top + ph + 4}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(x)}" y="{top + ph + 18}" text-anchor="middle" font-size="11">{v:.3g}</text>')
    parts.append(f'<text x="{_fmt(left + pw / 2)}" y="{H - 10}" text-anchor="middle" font-size="12">{escape(spec.x)}</text>')
    parts.append(
        f'<text x="15" y="{_fmt(top + ph / 2)}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {_fmt(top + ph / 2)})">{escape(spec.y_label)}</text>'
    )
    for idx, (algo, pts) in enumerate(data.items()):
        color = PALETTE[idx % len(PALETTE)]
        pts = [p for p in pts if not math.isnan(p.mid)]
        if pts:
            upper = " ".join(f"{_fmt(px(p.x))},{_fmt(py(p.upper))}" for p in pts)
            lower = " ".join(f"{_fmt(px(p.x))},{_fmt(py(p.lower))}" for p in reversed(pts))
            parts.append(f'<path d="M {upper} L {lower} Z" fill="{color}" fill-opacity="0.25" stroke="none"/>')
            line = " ".join(f"{_fmt(px(p.x))},{_fmt(py(p.mid))}" for p in pts)
            parts.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="2"/>')
        ly = top + 14 + 18 * idx
        lx = left + pw + 12
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 26}" y="{ly + 4}" font-size="12">{escape(algo)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_svg(records, spec, path):
    text = render_svg(records, spec)
    with open(path, "w") as fh:
        fh.write(text)
    return text
