"""Wachter-law model check: density, eigenvalue histogram, CSV/SVG output.

If the test's assumptions hold, the histogram of all squared canonical
correlations should follow the Wachter density with the parameters from
``scaling_constants`` (a few outliers beyond lambda_plus are expected under
cointegration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np
from scipy import integrate

from .coint import WachterParams
from .errors import ValidationError

CURVE_POINTS = 512


@dataclass(frozen=True)
class HistogramData:
    bin_edges: np.ndarray
    densities: np.ndarray

    @property
    def bins(self) -> int:
        return self.densities.size

    def area(self) -> float:
        return float(np.sum(self.densities * np.diff(self.bin_edges)))


def wachter_density(x, params: WachterParams):
    """Wachter density at x (scalar or array); zero outside [lambda_minus, lambda_plus]."""
    lm, lp = params.lambda_minus, params.lambda_plus
    x = np.asarray(x, dtype=np.float64)
    inside = (x > lm) & (x < lp)
    xs = np.where(inside, x, 0.5 * (lm + lp))
    dens = (params.p + params.q) / (2 * math.pi) * np.sqrt((xs - lm) * (lp - xs)) / (xs * (1 - xs))
    out = np.where(inside, dens, 0.0)
    return float(out) if out.ndim == 0 else out


def wachter_cdf(x, params: WachterParams):
    """Wachter distribution function, by adaptive quadrature of the density.

    Points are sorted and the density is integrated between neighbours, so
    each quadrature covers a short interval.
    """
    lm, lp = params.lambda_minus, params.lambda_plus
    x = np.asarray(x, dtype=np.float64)
    flat = x.ravel()
    order = np.argsort(flat)
    out = np.empty(flat.size)
    acc, prev = 0.0, lm
    for i in order:
        v = flat[i]
        if v <= lm:
            out[i] = 0.0
            continue
        v = min(v, lp)
        if v > prev:
            piece, _ = integrate.quad(wachter_density, prev, v, args=(params,), limit=200, epsabs=1e-13)
            acc += piece
            prev = v
        out[i] = 1.0 if v >= lp else min(max(acc, 0.0), 1.0)
    out = out.reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def kolmogorov_distance(eigs, params: WachterParams) -> float:
    """sup |F_empirical - F_Wachter| over the sample."""
    x = np.sort(np.asarray(eigs, dtype=np.float64))
    n = x.size
    F = wachter_cdf(x, params)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(n) / n
    return float(max(upper.max(), lower.max()))


def default_bins(n: int) -> int:
    return max(10, round(math.sqrt(n)))


def eigen_histogram(eigs, bins: int | None = None, params: WachterParams | None = None) -> HistogramData:
    """Area-normalized equal-width histogram of eigenvalues.

    The range spans the data and, when ``params`` is given, the Wachter
    support as well.  ``bins`` defaults to max(10, round(sqrt(N))).
    """
    eigs = np.asarray(eigs, dtype=np.float64)
    if eigs.ndim != 1 or eigs.size == 0:
        raise ValidationError("need a non-empty vector of eigenvalues")
    bins = default_bins(eigs.size) if bins is None else int(bins)
    if bins < 2:
        raise ValidationError(f"bins must be >= 2, got {bins}")
    lo, hi = float(eigs.min()), float(eigs.max())
    if params is not None:
        lo, hi = min(lo, params.lambda_minus), max(hi, params.lambda_plus)
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(eigs, bins=bins, range=(lo, hi))
    dens = counts / (eigs.size * np.diff(edges))
    return HistogramData(edges, dens)


def density_curve(params: WachterParams, points: int = CURVE_POINTS) -> tuple[np.ndarray, np.ndarray]:
    x = np.linspace(params.lambda_minus, params.lambda_plus, points)
    return x, wachter_density(x, params)


def render_diagnostic(hist: HistogramData, params: WachterParams, path, fmt: str | None = None) -> Path:
    """Write the histogram plus a 512-point Wachter density trace as CSV or SVG.

    ``fmt`` defaults to the file suffix.
    """
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt == "csv":
        text = _diagnostic_csv(hist, params)
    elif fmt == "svg":
        text = _diagnostic_svg(hist, params)
    else:
        raise ValidationError(f"unsupported plot format {fmt!r} (use .svg or .csv)")
    path.write_text(text, encoding="utf-8")
    return path


def _diagnostic_csv(hist, params):
    lines = [f"# wachter p={params.p!r} q={params.q!r} lminus={params.lambda_minus!r} lplus={params.lambda_plus!r}"]
    edges = hist.bin_edges
    for left, right, d in zip(edges[:-1], edges[1:], hist.densities):
        lines.append(f"bin,{float(left)!r},{float(right)!r},{float(d)!r}")
    for x, y in zip(*density_curve(params)):
        lines.append(f"curve,{float(x)!r},{float(y)!r}")
    return "\n".join(lines) + "\n"


def _diagnostic_svg(hist, params, width=640, height=400, margin=50):
    xs, ys = density_curve(params)
    x0, x1 = float(hist.bin_edges[0]), float(hist.bin_edges[-1])
    ymax = max(float(hist.densities.max()), float(ys.max())) * 1.05 or 1.0
    pw, ph = width - 2 * margin, height - 2 * margin

    def sx(v):
        return margin + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return height - margin - v / ymax * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f"<title>{escape('Eigenvalue histogram and Wachter density')}</title>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        '<g fill="#9ecae1" stroke="#3182bd" stroke-width="0.5">',
    ]
    for left, right, d in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.densities):
        if d <= 0:
            continue
        parts.append(
            f'<rect x="{sx(left):.2f}" y="{sy(d):.2f}" width="{sx(right) - sx(left):.2f}" height="{sy(0) - sy(d):.2f}"/>'
        )
    parts.append("</g>")
    pts = " L ".join(f"{sx(x):.2f} {sy(y):.2f}" for x, y in zip(xs, ys))
    parts.append(f'<path d="M {pts}" fill="none" stroke="#d62728" stroke-width="2"/>')
    # axes
    parts.append(
        f'<g stroke="black" stroke-width="1"><line x1="{margin}" y1="{sy(0):.2f}" x2="{width - margin}" y2="{sy(0):.2f}"/>'
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{sy(0):.2f}"/></g>'
    )
    parts.append('<g font-family="sans-serif" font-size="11" text-anchor="middle">')
    for v in np.linspace(x0, x1, 6):
        parts.append(f'<text x="{sx(v):.2f}" y="{height - margin + 16}">{v:.2f}</text>')
    parts.append(
        f'<text x="{width / 2}" y="{margin / 2}" font-size="13">'
        f"{escape(f'Wachter p={params.p:g} q={params.q:.3f}, support [{params.lambda_minus:.3f}, {params.lambda_plus:.3f}]')}</text>"
    )
    parts.append("</g></svg>")
    return "\n".join(parts) + "\n"
