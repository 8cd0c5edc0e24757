"""Friendly parameters for curvilinear fits.

Converts raw coefficients into quantities a manager can read directly, such
as the location of the optimum and the predicted impact of one-unit changes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .dataset import ColumnSummary, ModelSpec
from .errors import DomainError, NoTurningPoint
from .ols import FitResult, Interval


class Shape(str, Enum):
    INVERTED_U = "InvertedU"
    UPRIGHT_U = "UprightU"
    DECLINING_ONLY = "DecliningOnly"
    NO_CURVATURE = "NoCurvature"


def turning_point(a: float, b: float) -> float:
    """Focal value where a + b*x + a*x**2 is flat: -b / 2a."""
    if a == 0:
        raise NoTurningPoint("curvature is zero; the fitted curve has no turning point")
    return -b / (2.0 * a)


def delta_from_optimum(a: float, d: float) -> float:
    """Change in prediction after moving ``d`` units away from the turning point."""
    return a * d * d


def predict_at(fit: FitResult, spec: ModelSpec, covariates: Mapping[str, float]) -> float:
    if len(fit.labels) == 1:
        return float(fit.coefficients[0])
    return float(spec.regressors(covariates) @ fit.coefficients)


def p_to_confidence(p: float) -> float:
    """Confidence that an effect has the sign of its estimate, from a two-tailed p."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    return 1.0 - p / 2.0


def sign_statement(estimate: float, p: float) -> tuple[str, float]:
    """Direction ('negative', 'positive' or 'indeterminate') and its confidence."""
    if estimate == 0:
        return "indeterminate", 0.5
    return ("negative" if estimate < 0 else "positive"), p_to_confidence(p)


def shape_of(curvature: float | None, location: float | None) -> Shape:
    if curvature is None or curvature == 0:
        return Shape.NO_CURVATURE
    if curvature > 0:
        return Shape.UPRIGHT_U
    if location is not None and location > 0:
        return Shape.INVERTED_U
    return Shape.DECLINING_ONLY


@dataclass(frozen=True)
class CurveSummary:
    location: float | None
    curvature: float | None
    optimum_prediction: float | None
    impacts: dict[str, float]
    adj_r2: float
    shape: Shape
    focal: str = "turnover"
    reference: dict[str, float] = field(default_factory=dict)
    share_below: float | None = None

    def to_dict(self) -> dict:
        return {
            "shape": self.shape.value,
            "location": self.location,
            "curvature": self.curvature,
            "optimum_prediction": self.optimum_prediction,
            "impacts": dict(self.impacts),
            "adj_r2": self.adj_r2,
            "focal": self.focal,
            "reference": dict(self.reference),
            "share_below": self.share_below,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def classify_shape(curve: CurveSummary) -> Shape:
    return shape_of(curve.curvature, curve.location)


def reference_covariates(spec: ModelSpec, summaries: ColumnSummary | None = None) -> dict[str, float]:
    """Reference values for controls: the model's, else the column mean."""
    ref = {}
    for name in spec.controls:
        if name in spec.reference:
            ref[name] = spec.reference[name]
        elif summaries is not None and name in summaries:
            ref[name] = summaries[name].mean
    return ref


def summarize_curve(
    fit: FitResult,
    spec: ModelSpec,
    summaries: ColumnSummary | None = None,
    focal_values=None,
) -> CurveSummary:
    """Assemble the friendly parameters for a fitted model.

    ``focal_values`` (the observed focal column) is optional; when given, the
    share of observations lying below the turning point is recorded so that
    reports can flag a poorly supported optimum.
    """
    ref = reference_covariates(spec, summaries)
    impacts = {}
    if not spec.quadratic:
        impacts[spec.focal] = fit.coef(spec.focal)
    for name in spec.controls:
        impacts[name] = fit.coef(name)

    location = curvature = optimum = None
    share_below = None
    if spec.quadratic:
        curvature = fit.coef(spec.squared_label)
        b = fit.coef(spec.focal)
        try:
            location = turning_point(curvature, b)
        except NoTurningPoint:
            curvature = 0.0
        else:
            optimum = predict_at(fit, spec, {**ref, spec.focal: location})
            if focal_values is not None:
                x = np.asarray(focal_values, dtype=float)
                share_below = float(np.mean(x < location))
    return CurveSummary(
        location=location,
        curvature=curvature,
        optimum_prediction=optimum,
        impacts=impacts,
        adj_r2=fit.adj_r2,
        shape=shape_of(curvature, location),
        focal=spec.focal,
        reference=ref,
        share_below=share_below,
    )


# --- friendly tables ---------------------------------------------------------

_IMPACT_PHRASES = {
    "turnover": "Predicted impact of 1% increase in staff turnover",
    "absenteeism": "Predicted impact of 1% increase in absenteeism",
    "mean_age": "Predicted impact of 1 year increase in average age",
}


def impact_description(name: str, estimate: float | None = None) -> str:
    if name == "region":
        if estimate is not None and estimate < 0:
            return "Predicted difference between neighbouring regions (with Region 1 having the highest performance)"
        return "Predicted difference between neighbouring regions (with Region 1 having the lowest performance)"
    return _IMPACT_PHRASES.get(name, f"Predicted impact of 1 unit increase in {name}")


def fmt_int(x: float) -> str:
    """Integer with thousands separators, e.g. -1,778."""
    v = int(round(x))
    return f"{v:,}"


def fmt_location(x: float) -> str:
    return f"{x:.1f}"


def fmt_percent(x: float, decimals: int = 0) -> str:
    return f"{100 * x:.{decimals}f}%"


def _fmt_number(x: float) -> str:
    # trims noise such as 3.8000000000000003 when echoing reference values
    return f"{x:g}" if abs(x) < 1e6 else fmt_int(x)


@dataclass(frozen=True)
class FriendlyRow:
    description: str
    estimate: float
    text: str
    interval: Interval | None = None
    interval_text: tuple[str, str] | None = None


@dataclass(frozen=True)
class FriendlyTable:
    rows: tuple[FriendlyRow, ...]
    has_intervals: bool
    level: float | None = None
    footnotes: tuple[str, ...] = ()

    def header(self) -> list[str]:
        cols = ["", "Best estimate"]
        if self.has_intervals:
            pct = fmt_percent(self.level) if self.level is not None else "CI"
            cols += [f"Lower limit of {pct} CI", f"Upper limit of {pct} CI"]
        return cols

    def cells(self) -> list[list[str]]:
        out = []
        for row in self.rows:
            line = [row.description, row.text]
            if self.has_intervals:
                line += list(row.interval_text) if row.interval_text else ["", ""]
            out.append(line)
        return out

    def row(self, description_prefix: str) -> FriendlyRow:
        for r in self.rows:
            if r.description.startswith(description_prefix):
                return r
        raise KeyError(description_prefix)

    def to_markdown(self) -> str:
        head = self.header()
        lines = ["| " + " | ".join(head) + " |", "|" + "|".join(["---"] * len(head)) + "|"]
        for cells in self.cells():
            lines.append("| " + " | ".join(cells) + " |")
        text = "\n".join(lines) + "\n"
        if self.footnotes:
            text += "\n" + "\n".join(self.footnotes) + "\n"
        return text

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        head = self.header()
        head[0] = "description"
        writer.writerow(head)
        for cells in self.cells():
            writer.writerow(cells)
        return buf.getvalue()


def _row(description, estimate, formatter, interval=None):
    itext = None
    if interval is not None:
        itext = (formatter(interval.lower), formatter(interval.upper))
    return FriendlyRow(description, float(estimate), formatter(estimate), interval, itext)


def _optimum_description(curve: CurveSummary) -> str:
    ref = curve.reference
    parts = []
    if "region" in ref:
        parts.append(f"Region {int(ref['region'])}")
    if "absenteeism" in ref:
        parts.append(f"mean absenteeism ({_fmt_number(ref['absenteeism'])}%)")
    if "mean_age" in ref:
        parts.append(f"mean age ({_fmt_number(ref['mean_age'])})")
    others = [k for k in ref if k not in ("region", "absenteeism", "mean_age")]
    parts += [f"{k} = {_fmt_number(ref[k])}" for k in others]
    if not parts:
        return "Predicted optimum performance"
    if len(parts) == 1:
        return f"Predicted optimum performance for {parts[0]}"
    return f"Predicted optimum performance for {parts[0]}, and " + " and ".join(parts[1:])


def render_friendly_table(
    curve: CurveSummary,
    intervals: Mapping[str, Interval] | None = None,
) -> FriendlyTable:
    """Rows in the fixed order: location, curvature, impacts, adjusted R²,
    predicted optimum. Rows that do not apply to the model are left out.

    ``intervals`` maps term names (and optionally ``"location"``,
    ``"curvature"``) to intervals; when empty or None the table has only the
    best-estimate column.
    """
    intervals = dict(intervals or {})
    has_iv = bool(intervals)
    level = next(iter(intervals.values())).level if has_iv else None
    rows = []
    footnotes = []
    if curve.shape is not Shape.NO_CURVATURE and curve.location is not None:
        rows.append(
            _row(
                f"Location of optimum (annual % staff {curve.focal})" if curve.focal == "turnover"
                else f"Location of optimum ({curve.focal})",
                curve.location,
                fmt_location,
                intervals.get("location"),
            )
        )
        rows.append(
            _row(
                "Curvature (negative values correspond to an inverted U shape)",
                curve.curvature,
                fmt_int,
                intervals.get("curvature"),
            )
        )
    for name, value in curve.impacts.items():
        rows.append(_row(impact_description(name, value), value, fmt_int, intervals.get(name)))
    rows.append(
        FriendlyRow(
            "Proportion of variation explained (Adjusted R²)",
            float(curve.adj_r2),
            fmt_percent(curve.adj_r2),
        )
    )
    if curve.optimum_prediction is not None:
        rows.append(_row(_optimum_description(curve), curve.optimum_prediction, fmt_int))
    if curve.share_below is not None and (curve.share_below < 0.1 or curve.share_below > 0.9):
        side = "below" if curve.share_below < 0.1 else "above"
        footnotes.append(
            f"Note: only {fmt_percent(min(curve.share_below, 1 - curve.share_below))} of observations lie "
            f"{side} the estimated optimum, so that side of the curve is largely extrapolated."
        )
    return FriendlyTable(tuple(rows), has_iv, level, tuple(footnotes))


def confidence_sentence(description: str, estimate: float, p: float) -> str:
    """E.g. '99.65% confidence the impact is negative'."""
    direction, conf = sign_statement(estimate, p)
    if direction == "indeterminate":
        return f"{description}: estimate is exactly zero, direction indeterminate (confidence 50%)"
    return f"{description}: {_confidence_pct(conf)} confidence the impact is {direction}"


def _confidence_pct(conf: float) -> str:
    text = f"{100 * conf:.2f}"
    if math.isclose(100 * conf, round(100 * conf), abs_tol=1e-9):
        text = f"{100 * conf:.0f}"
    return text + "%"
