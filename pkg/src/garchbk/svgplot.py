"""Minimal deterministic SVG figures.

A tiny plotter (axes, log scales, circle markers, lines, text) kept inside
the package so figures are self-contained vector files whose bytes depend
only on the input data.  Classes on the elements ("data", "fit", "ref",
"series0", ...) make the output machine-checkable.
"""

import math

_W, _H = 640.0, 480.0
_ML, _MR, _MT, _MB = 70.0, 20.0, 40.0, 55.0
_PW, _PH = _W - _ML - _MR, _H - _MT - _MB


def _fmt(v: float) -> str:
    return format(float(v), ".6g")


class _Axes:
    """Maps data coordinates to pixel coordinates, optionally log10."""

    def __init__(self, xs, ys, logx=False, logy=False):
        tx = [math.log10(v) for v in xs] if logx else list(xs)
        ty = [math.log10(v) for v in ys] if logy else list(ys)
        self.logx, self.logy = logx, logy
        self.x0, self.x1 = min(tx), max(tx)
        self.y0, self.y1 = min(ty), max(ty)
        if self.x1 == self.x0:
            self.x0, self.x1 = self.x0 - 0.5, self.x1 + 0.5
        if self.y1 == self.y0:
            self.y0, self.y1 = self.y0 - 0.5, self.y1 + 0.5
        padx = 0.06 * (self.x1 - self.x0)
        pady = 0.08 * (self.y1 - self.y0)
        self.x0 -= padx
        self.x1 += padx
        self.y0 -= pady
        self.y1 += pady

    def px(self, x: float) -> float:
        t = math.log10(x) if self.logx else x
        return _ML + (t - self.x0) / (self.x1 - self.x0) * _PW

    def py(self, y: float) -> float:
        t = math.log10(y) if self.logy else y
        return _MT + (self.y1 - t) / (self.y1 - self.y0) * _PH


def _nice_ticks(lo: float, hi: float, count: int = 4) -> list[float]:
    span = hi - lo
    if span <= 0.0:
        return [lo]
    raw = span / count
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((s for s in (1.0, 2.0, 5.0, 10.0) if s * mag >= raw),
               default=10.0) * mag
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * abs(span):
        ticks.append(t)
        t += step
    return ticks


def _svg_header(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(_W)}" '
        f'height="{_fmt(_H)}" viewBox="0 0 {_fmt(_W)} {_fmt(_H)}">',
        f'<rect width="{_fmt(_W)}" height="{_fmt(_H)}" fill="white"/>',
        f'<text x="{_fmt(_W / 2)}" y="22" font-family="monospace" '
        f'font-size="14" text-anchor="middle">{title}</text>',
    ]


def _frame_and_ticks(ax: _Axes, xlabel: str, ylabel: str,
                     xticks: list[float], yticks: list[float]) -> list[str]:
    out = [
        f'<rect x="{_fmt(_ML)}" y="{_fmt(_MT)}" width="{_fmt(_PW)}" '
        f'height="{_fmt(_PH)}" fill="none" stroke="black"/>'
    ]
    for tx in xticks:
        px = ax.px(tx)
        if px < _ML - 0.5 or px > _ML + _PW + 0.5:
            continue
        out.append(
            f'<line x1="{_fmt(px)}" y1="{_fmt(_MT + _PH)}" x2="{_fmt(px)}" '
            f'y2="{_fmt(_MT + _PH + 5)}" stroke="black"/>'
        )
        out.append(
            f'<text x="{_fmt(px)}" y="{_fmt(_MT + _PH + 18)}" '
            f'font-family="monospace" font-size="11" '
            f'text-anchor="middle">{_fmt(tx)}</text>'
        )
    for ty in yticks:
        py = ax.py(ty)
        if py < _MT - 0.5 or py > _MT + _PH + 0.5:
            continue
        out.append(
            f'<line x1="{_fmt(_ML - 5)}" y1="{_fmt(py)}" x2="{_fmt(_ML)}" '
            f'y2="{_fmt(py)}" stroke="black"/>'
        )
        out.append(
            f'<text x="{_fmt(_ML - 8)}" y="{_fmt(py + 4)}" '
            f'font-family="monospace" font-size="11" '
            f'text-anchor="end">{_fmt(ty)}</text>'
        )
    out.append(
        f'<text x="{_fmt(_ML + _PW / 2)}" y="{_fmt(_H - 12)}" '
        f'font-family="monospace" font-size="12" '
        f'text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="16" y="{_fmt(_MT + _PH / 2)}" font-family="monospace" '
        f'font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 16 {_fmt(_MT + _PH / 2)})">{ylabel}</text>'
    )
    return out


def _markers(ax: _Axes, xs, ys, cls: str = "data", r: float = 4.0,
             fill: str = "black") -> list[str]:
    return [
        f'<circle class="{cls}" cx="{_fmt(ax.px(x))}" cy="{_fmt(ax.py(y))}" '
        f'r="{_fmt(r)}" fill="{fill}"/>'
        for x, y in zip(xs, ys)
    ]


def _polyline(ax: _Axes, xs, ys, cls: str, color: str,
              dash: str | None = None) -> str:
    pts = " ".join(f"{_fmt(ax.px(x))},{_fmt(ax.py(y))}" for x, y in zip(xs, ys))
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<polyline class="{cls}" points="{pts}" fill="none" '
            f'stroke="{color}"{extra}/>')


def _line_from_loglog_fit(ax: _Axes, ns, slope: float, intercept: float,
                          cls: str, color: str,
                          dash: str | None = None) -> str:
    # fit is ln(y) = slope * ln(n) + intercept
    n0, n1 = min(ns), max(ns)
    y0 = math.exp(slope * math.log(n0) + intercept)
    y1 = math.exp(slope * math.log(n1) + intercept)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return (f'<line class="{cls}" x1="{_fmt(ax.px(n0))}" y1="{_fmt(ax.py(y0))}" '
            f'x2="{_fmt(ax.px(n1))}" y2="{_fmt(ax.py(y1))}" '
            f'stroke="{color}"{extra}/>')


def rate_figure(ns, medians, slope: float, intercept: float,
                reference: bool = True, stat: str = "r_general",
                title: str | None = None) -> str:
    """Log-log scatter of per-n medians with the fitted line.

    ``slope``/``intercept`` are the natural-log least-squares fit.  With
    ``reference`` a dashed slope -1/4 guide is drawn through the first
    point.
    """
    ax = _Axes(ns, medians, logx=True, logy=True)
    parts = _svg_header(title or f"median {stat} vs n (log-log)")
    ylo = 10.0 ** ax.y0
    yhi = 10.0 ** ax.y1
    parts += _frame_and_ticks(ax, "n", f"median {stat}", list(ns),
                              _nice_ticks(ylo, yhi))
    parts.append(_line_from_loglog_fit(ax, ns, slope, intercept, "fit", "blue"))
    if reference:
        ref_int = math.log(medians[0] * 1.3) + 0.25 * math.log(ns[0])
        parts.append(_line_from_loglog_fit(ax, ns, -0.25, ref_int, "ref",
                                           "gray", dash="6,4"))
        parts.append(
            f'<text class="ref-label" x="{_fmt(_ML + _PW - 8)}" '
            f'y="{_fmt(_MT + 34)}" font-family="monospace" font-size="12" '
            f'text-anchor="end" fill="gray">reference slope -0.25</text>'
        )
    parts += _markers(ax, ns, medians)
    parts.append(
        f'<text class="slope" x="{_fmt(_ML + _PW - 8)}" y="{_fmt(_MT + 18)}" '
        f'font-family="monospace" font-size="12" text-anchor="end" '
        f'fill="blue">slope={slope:.6f}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def ratio_figure(ns, ratios, stat: str = "r_general",
                 title: str | None = None) -> str:
    """Per-n ratio of the median statistic to its rate constant."""
    ax = _Axes(ns, ratios, logx=True, logy=False)
    parts = _svg_header(title or f"median {stat} / r_n vs n")
    parts += _frame_and_ticks(ax, "n", f"median {stat} / r_n", list(ns),
                              _nice_ticks(ax.y0, ax.y1))
    parts.append(_polyline(ax, ns, ratios, "series0", "blue"))
    parts += _markers(ax, ns, ratios)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def diagnostics_figure(ns, osc_over_bstar, lil, title: str | None = None) -> str:
    """Oscillation / b_n* and the LIL statistic across the n grid."""
    ys = list(osc_over_bstar) + list(lil)
    ax = _Axes(list(ns) + list(ns), ys, logx=True, logy=True)
    parts = _svg_header(title or "oscillation and LIL diagnostics")
    ylo = 10.0 ** ax.y0
    yhi = 10.0 ** ax.y1
    parts += _frame_and_ticks(ax, "n", "statistic", list(ns),
                              _nice_ticks(ylo, yhi))
    parts.append(_polyline(ax, ns, osc_over_bstar, "series0", "blue"))
    parts.append(_polyline(ax, ns, lil, "series1", "red"))
    parts += _markers(ax, ns, osc_over_bstar, cls="data", fill="blue")
    parts += _markers(ax, ns, lil, cls="data", fill="red")
    parts.append(
        f'<text x="{_fmt(_ML + _PW - 8)}" y="{_fmt(_MT + 18)}" '
        f'font-family="monospace" font-size="12" text-anchor="end" '
        f'fill="blue">oscillation / b_n*</text>'
    )
    parts.append(
        f'<text x="{_fmt(_ML + _PW - 8)}" y="{_fmt(_MT + 34)}" '
        f'font-family="monospace" font-size="12" text-anchor="end" '
        f'fill="red">lil</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
