"""Standalone SVG figures: data with fitted curve, curves by region,
resample "spaghetti" plots and confidence bands.

Every figure comes with a CSV of the plotted series so the numbers can be
checked without parsing SVG geometry. Rendering is a pure function of the
inputs.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .bootstrap import Band, BootstrapRun, resample_curves
from .dataset import Dataset, ModelSpec
from .errors import DomainError
from .ols import FitResult

REGION_COLOURS = {1: "#1b6ca8", 2: "#d1495b", 3: "#2e8b57"}
PAD = 0.05


@dataclass(frozen=True)
class FigureSpec:
    width: int = 640
    height: int = 420
    title: str = ""
    x_label: str = "Annual % staff turnover"
    y_label: str = "Performance"
    margin_left: int = 80
    margin_right: int = 24
    margin_top: int = 40
    margin_bottom: int = 56

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DomainError("figure dimensions must be positive")
        if self.margin_left + self.margin_right >= self.width or self.margin_top + self.margin_bottom >= self.height:
            raise DomainError("margins leave no room for the plot area")


@dataclass(frozen=True)
class Figure:
    svg: str
    csv: str

    def save(self, stem) -> tuple[Path, Path]:
        stem = Path(stem)
        svg_path, csv_path = stem.with_suffix(".svg"), stem.with_suffix(".csv")
        svg_path.write_text(self.svg, encoding="utf-8")
        csv_path.write_text(self.csv, encoding="utf-8")
        return svg_path, csv_path


def _fmt(v: float) -> str:
    text = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def _padded(lo, hi):
    if hi < lo:
        lo, hi = hi, lo
    span = hi - lo
    if span == 0:
        span = abs(lo) if lo != 0 else 1.0
        return lo - PAD * span, hi + PAD * span
    return lo - PAD * span, hi + PAD * span


def _nice_step(span, target=6):
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag


def _tick_label(v, step):
    if abs(v) < step * 1e-9:
        v = 0.0
    if step >= 1:
        return f"{v:,.0f}"
    decimals = max(0, -int(math.floor(math.log10(step))))
    return f"{v:,.{decimals}f}"


class Axes:
    """Affine data-to-pixel map over the padded data range."""

    def __init__(self, spec: FigureSpec, xs, ys):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        self.spec = spec
        self.x0, self.x1 = _padded(float(xs.min()), float(xs.max()))
        self.y0, self.y1 = _padded(float(ys.min()), float(ys.max()))
        self.left = spec.margin_left
        self.right = spec.width - spec.margin_right
        self.top = spec.margin_top
        self.bottom = spec.height - spec.margin_bottom

    def px(self, x):
        return self.left + (np.asarray(x, float) - self.x0) * (self.right - self.left) / (self.x1 - self.x0)

    def py(self, y):
        return self.bottom - (np.asarray(y, float) - self.y0) * (self.bottom - self.top) / (self.y1 - self.y0)

    def data_x(self, px):
        return self.x0 + (np.asarray(px, float) - self.left) * (self.x1 - self.x0) / (self.right - self.left)

    def data_y(self, py):
        return self.y0 + (self.bottom - np.asarray(py, float)) * (self.y1 - self.y0) / (self.bottom - self.top)

    def points(self, xs, ys) -> str:
        return " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(self.px(xs), self.py(ys)))

    def frame(self) -> list[str]:
        s = self.spec
        out = [
            f'<rect class="plot-area" x="{self.left}" y="{self.top}" width="{self.right - self.left}" '
            f'height="{self.bottom - self.top}" fill="white" stroke="#444"/>'
        ]
        out += self._ticks("x")
        out += self._ticks("y")
        cx = (self.left + self.right) / 2
        cy = (self.top + self.bottom) / 2
        out.append(
            f'<text class="axis-label" x="{_fmt(cx)}" y="{s.height - 14}" text-anchor="middle">{escape(s.x_label)}</text>'
        )
        out.append(
            f'<text class="axis-label" x="18" y="{_fmt(cy)}" text-anchor="middle" '
            f'transform="rotate(-90 18 {_fmt(cy)})">{escape(s.y_label)}</text>'
        )
        if s.title:
            out.append(f'<text class="title" x="{_fmt(cx)}" y="24" text-anchor="middle">{escape(s.title)}</text>')
        return out

    def _ticks(self, axis):
        lo, hi = (self.x0, self.x1) if axis == "x" else (self.y0, self.y1)
        step = _nice_step(hi - lo)
        first = math.ceil(lo / step) * step
        out = []
        v = first
        while v <= hi + step * 1e-9:
            label = _tick_label(v, step)
            if axis == "x":
                p = float(self.px(v))
                out.append(f'<line class="tick" x1="{_fmt(p)}" y1="{self.bottom}" x2="{_fmt(p)}" y2="{self.bottom + 5}" stroke="#444"/>')
                out.append(f'<text class="tick-label" x="{_fmt(p)}" y="{self.bottom + 18}" text-anchor="middle">{label}</text>')
            else:
                p = float(self.py(v))
                out.append(f'<line class="tick" x1="{self.left - 5}" y1="{_fmt(p)}" x2="{self.left}" y2="{_fmt(p)}" stroke="#444"/>')
                out.append(f'<text class="tick-label" x="{self.left - 8}" y="{_fmt(p + 4)}" text-anchor="end">{label}</text>')
            v += step
        return out


def _document(spec: FigureSpec, body: list[str]) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}" font-family="sans-serif" font-size="12">\n'
    )
    return head + "\n".join("  " + line for line in body) + "\n</svg>\n"


def _series_csv(series: Sequence[tuple[str, Sequence[float], Sequence[float]]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["series", "x", "y"])
    for name, xs, ys in series:
        for x, y in zip(xs, ys):
            writer.writerow([name, repr(float(x)), repr(float(y))])
    return buf.getvalue()


def _markers(axes, xs, ys, colours=None, r=3):
    out = []
    for i, (cx, cy) in enumerate(zip(axes.px(xs), axes.py(ys))):
        fill = colours[i] if colours is not None else "#555"
        out.append(f'<circle class="marker" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{r}" fill="{fill}" fill-opacity="0.6"/>')
    return out


def _polyline(axes, xs, ys, cls="curve", colour="#111", width=2.0, opacity=1.0):
    return (
        f'<polyline class="{cls}" points="{axes.points(xs, ys)}" fill="none" stroke="{colour}" '
        f'stroke-width="{_fmt(width)}" stroke-opacity="{_fmt(opacity)}"/>'
    )


def _legend(spec, entries):
    out = []
    x = spec.width - spec.margin_right - 110
    y = spec.margin_top + 10
    for i, (label, colour) in enumerate(entries):
        yy = y + 16 * i
        out.append(f'<rect class="legend-key" x="{x}" y="{yy}" width="14" height="4" fill="{colour}"/>')
        out.append(f'<text class="legend" x="{x + 20}" y="{yy + 6}">{escape(label)}</text>')
    return out


def _grid_for(ds: Dataset, spec: ModelSpec, points: int):
    focal = ds.column(spec.focal)
    return np.linspace(focal.min(), focal.max(), points)


def _curve(fit: FitResult, spec: ModelSpec, grid, reference):
    G = spec.grid_regressors(grid, reference)
    return G @ fit.coefficients


def scatter_with_curve(
    ds: Dataset,
    fit: FitResult,
    spec: ModelSpec,
    reference=None,
    figspec: FigureSpec | None = None,
    points: int = 100,
) -> Figure:
    """One marker per office and the fitted curve at ``reference`` covariates."""
    figspec = figspec or FigureSpec(title="Data and curvilinear prediction")
    reference = spec.reference if reference is None else reference
    grid = _grid_for(ds, spec, points)
    curve = _curve(fit, spec, grid, reference)
    x, y = ds.column(spec.focal), ds.column(spec.response)
    axes = Axes(figspec, np.concatenate([x, grid]), np.concatenate([y, curve]))
    body = axes.frame() + _markers(axes, x, y) + [_polyline(axes, grid, curve, "curve bold", width=2.5)]
    return Figure(_document(figspec, body), _series_csv([("data", x, y), ("prediction", grid, curve)]))


def region_curves(
    ds: Dataset,
    fit: FitResult,
    spec: ModelSpec,
    figspec: FigureSpec | None = None,
    points: int = 100,
) -> Figure:
    """Fitted curves for regions 1, 2 and 3, other controls at reference."""
    if "region" not in spec.controls:
        raise DomainError("region_curves needs 'region' among the model controls")
    figspec = figspec or FigureSpec(title="Curvilinear predictions for three regions")
    grid = _grid_for(ds, spec, points)
    curves = {}
    for region in (1, 2, 3):
        ref = {**spec.reference, "region": float(region)}
        curves[region] = _curve(fit, spec, grid, ref)
    x, y = ds.column(spec.focal), ds.column(spec.response)
    regions = [r.region for r in ds.records]
    allys = np.concatenate([y] + list(curves.values()))
    axes = Axes(figspec, np.concatenate([x, grid]), allys)
    body = axes.frame() + _markers(axes, x, y, [REGION_COLOURS[r] for r in regions])
    for region, c in curves.items():
        body.append(_polyline(axes, grid, c, f"curve region-{region}", REGION_COLOURS[region]))
    body += _legend(figspec, [(f"Region {r}", REGION_COLOURS[r]) for r in (1, 2, 3)])
    series = [("data", x, y)] + [(f"region_{r}", grid, c) for r, c in curves.items()]
    return Figure(_document(figspec, body), _series_csv(series))


def spaghetti(
    run: BootstrapRun,
    k: int,
    fit: FitResult,
    spec: ModelSpec,
    figspec: FigureSpec | None = None,
    points: int = 100,
) -> Figure:
    """Full-data curve (bold) over the first ``k`` resample curves."""
    if not 0 <= k <= run.B:
        raise DomainError(f"k must lie in [0, {run.B}], got {k}")
    figspec = figspec or FigureSpec(title=f"Predictions from data (bold) and {k} resamples")
    grid = np.linspace(run.focal_range[0], run.focal_range[1], points)
    main = _curve(fit, spec, grid, spec.reference)
    others = resample_curves(run, grid)[:k] if k else np.empty((0, len(grid)))
    axes = Axes(figspec, grid, np.concatenate([main, others.ravel()]))
    body = axes.frame()
    for i, c in enumerate(others):
        body.append(_polyline(axes, grid, c, f"curve resample r{i}", "#7a7a7a", width=1.2, opacity=0.8))
    body.append(_polyline(axes, grid, main, "curve bold", width=3.0))
    series = [("data_fit", grid, main)] + [(f"resample_{i}", grid, c) for i, c in enumerate(others)]
    return Figure(_document(figspec, body), _series_csv(series))


def band_polygon_points(axes: Axes, band: Band) -> str:
    xs = np.concatenate([band.grid, band.grid[::-1]])
    ys = np.concatenate([band.upper, band.lower[::-1]])
    return axes.points(xs, ys)


def band_figure(
    band: Band | Sequence[Band],
    ds: Dataset | None = None,
    spec: ModelSpec | None = None,
    figspec: FigureSpec | None = None,
) -> Figure:
    """Shaded confidence band(s) with the full-data curve overlaid.

    Several bands (e.g. 95% and 99% from the same run) share one set of
    axes, widest drawn first. Data markers are drawn when ``ds`` is given.
    """
    bands = [band] if isinstance(band, Band) else list(band)
    if not bands:
        raise DomainError("no band to draw")
    bands.sort(key=lambda b: -b.level)
    levels = ", ".join(f"{100 * b.level:g}%" for b in bands)
    figspec = figspec or FigureSpec(title=f"Confidence band ({levels})")
    xs = [b.grid for b in bands]
    ys = [np.concatenate([b.lower, b.upper, b.center]) for b in bands]
    if ds is not None:
        spec = spec or ModelSpec()
        xs.append(ds.column(spec.focal))
        ys.append(ds.column(spec.response))
    axes = Axes(figspec, np.concatenate(xs), np.concatenate(ys))
    body = axes.frame()
    shades = ["#c6dbef", "#6baed6", "#3182bd"]
    for i, b in enumerate(bands):
        body.append(
            f'<polygon class="band level-{_fmt(100 * b.level)}" points="{band_polygon_points(axes, b)}" '
            f'fill="{shades[i % len(shades)]}" fill-opacity="0.7" stroke="none"/>'
        )
    if ds is not None:
        body += _markers(axes, ds.column(spec.focal), ds.column(spec.response), r=2)
    body.append(_polyline(axes, bands[0].grid, bands[0].center, "curve bold", width=2.5))

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["level", "grid", "lower", "center", "upper"])
    for b in bands:
        for row in zip(b.grid, b.lower, b.center, b.upper):
            writer.writerow([repr(float(b.level))] + [repr(float(v)) for v in row])
    return Figure(_document(figspec, body), buf.getvalue())
