"""Markdown report and bootstrap summaries."""

from __future__ import annotations

import numpy as np

from .bootstrap import BootstrapRun, percentile_interval, shape_confidence, sign_confidence
from .dataset import ModelSpec
from .interpret import (
    CurveSummary,
    FriendlyTable,
    Shape,
    confidence_sentence,
    fmt_percent,
    impact_description,
    render_friendly_table,
)
from .ols import FitResult, Interval, confidence_interval


def analytic_intervals(fit: FitResult, spec: ModelSpec, level: float) -> dict[str, Interval]:
    out = {label: confidence_interval(fit, label, level) for label in fit.labels[1:]}
    if spec.quadratic:
        out["curvature"] = out[spec.squared_label]
    return out


def bootstrap_intervals(run: BootstrapRun, level: float) -> dict[str, Interval]:
    out = {}
    for label in run.labels[1:]:
        out[label] = percentile_interval(run.column(label), level)
    if run.spec.quadratic:
        out["curvature"] = out[run.spec.squared_label]
        locs = run.derived_locations
        locs = locs[np.isfinite(locs)]
        if len(locs) >= 2:
            out["location"] = percentile_interval(locs, level)
    return out


def bootstrap_summary(run: BootstrapRun, level: float) -> dict:
    """JSON-ready summary of a run: percentile intervals, sign confidences
    and, for quadratic models, the inverted-U shape confidence."""
    terms = []
    for j, label in enumerate(run.labels):
        iv = percentile_interval(run.coefficient_matrix[:, j], level) if run.B >= 2 else None
        terms.append(
            {
                "term": label,
                "estimate": float(run.estimate[j]),
                "lower": iv.lower if iv else None,
                "upper": iv.upper if iv else None,
                "confidence_negative": sign_confidence(run, j, "negative"),
                "confidence_positive": sign_confidence(run, j, "positive"),
            }
        )
    out = {
        "plan": run.plan.to_dict(),
        "spec": run.spec.to_dict(),
        "level": level,
        "skipped": run.skipped,
        "singular_policy": "redraw",
        "terms": terms,
    }
    if run.spec.quadratic:
        out["shape_confidence"] = shape_confidence(run)
        ivs = bootstrap_intervals(run, level) if run.B >= 2 else {}
        a = run.estimate[run.spec.squared_index]
        b = run.estimate[run.spec.focal_index]
        loc = ivs.get("location")
        out["location"] = {
            "estimate": float(-b / (2 * a)) if a != 0 else None,
            "lower": loc.lower if loc else None,
            "upper": loc.upper if loc else None,
        }
    return out


def shape_sentence(confidence: float, adj_r2: float, B: int) -> str:
    return (
        f"Confidence level for the inverted U shape hypothesis: {fmt_percent(confidence)} "
        f"(share of {B:,} resamples with a negative curvature and a positive optimum location). "
        f"The model explains {fmt_percent(adj_r2)} of the variation in performance (adjusted R²), "
        "so any shape claim rests on that share of the variation only."
    )


def side_by_side(analytic: FriendlyTable, boot: FriendlyTable, level: float) -> str:
    pct = fmt_percent(level)
    head = ["", "Best estimate", f"Analytic {pct} CI", f"Bootstrap {pct} CI"]
    lines = ["| " + " | ".join(head) + " |", "|" + "|".join(["---"] * len(head)) + "|"]
    for ra, rb in zip(analytic.rows, boot.rows):
        a = f"{ra.interval_text[0]} to {ra.interval_text[1]}" if ra.interval_text else ""
        b = f"{rb.interval_text[0]} to {rb.interval_text[1]}" if rb.interval_text else ""
        lines.append(f"| {ra.description} | {ra.text} | {a} | {b} |")
    text = "\n".join(lines) + "\n"
    if analytic.footnotes:
        text += "\n" + "\n".join(analytic.footnotes) + "\n"
    return text


def render_report(
    *,
    data_label: str,
    n: int,
    spec: ModelSpec,
    fit: FitResult,
    curve: CurveSummary,
    run: BootstrapRun,
    level: float,
    figures: list[tuple[str, str]] = (),
) -> str:
    analytic = render_friendly_table(curve, analytic_intervals(fit, spec, level))
    boot = render_friendly_table(curve, bootstrap_intervals(run, level))
    terms = " + ".join(fit.labels[1:])
    out = [
        "# Curvilinear regression report",
        "",
        f"Data: `{data_label}` ({n} offices). Model: {spec.response} ~ {terms}.",
        f"Bootstrap: {run.B:,} case resamples, seed {run.plan.seed}; "
        f"{run.skipped} singular resamples redrawn.",
        "",
        "## Parameters",
        "",
        side_by_side(analytic, boot, level),
        "## Confidence levels",
        "",
    ]
    if spec.quadratic:
        out.append("- " + shape_sentence(shape_confidence(run), fit.adj_r2, run.B))
        out.append(f"- Fitted shape: {_shape_words(curve.shape)} (adjusted R² {fmt_percent(fit.adj_r2)}).")
    for j, label in enumerate(fit.labels[1:], start=1):
        if spec.quadratic and label in (spec.focal, spec.squared_label):
            continue
        desc = impact_description(label, float(fit.coefficients[j]))
        est = float(fit.coefficients[j])
        p = float(fit.p_values[j])
        line = confidence_sentence(desc, est, p) + f" (from two-tailed p = {p:.3g}"
        if est != 0:
            direction = "negative" if est < 0 else "positive"
            line += f"; bootstrap: {100 * sign_confidence(run, j, direction):.2f}%"
        out.append("- " + line + ")")
    out.append("")
    if figures:
        out += ["## Figures", ""]
        for caption, path in figures:
            out.append(f"![{caption}]({path})")
            out.append("")
    out += [
        "## Notes",
        "",
        "- Confidence bands are pointwise percentile bands for the mean prediction, "
        "not prediction intervals for individual offices.",
        "- Confidence levels are read as the confidence that an effect has the sign of its estimate (1 - p/2).",
        "",
    ]
    return "\n".join(out)


def _shape_words(shape: Shape) -> str:
    return {
        Shape.INVERTED_U: "inverted U",
        Shape.UPRIGHT_U: "upright U",
        Shape.DECLINING_ONLY: "declining only (optimum at or below zero)",
        Shape.NO_CURVATURE: "no curvature",
    }[shape]
