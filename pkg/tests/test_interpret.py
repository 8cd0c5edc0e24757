import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from curveconf.dataset import ModelSpec, build_design
from curveconf.errors import DomainError, MissingCovariate, NoTurningPoint
from curveconf.interpret import (
    CurveSummary,
    Shape,
    classify_shape,
    confidence_sentence,
    delta_from_optimum,
    fmt_int,
    p_to_confidence,
    predict_at,
    render_friendly_table,
    sign_statement,
    summarize_curve,
    turning_point,
)
from curveconf.ols import FitResult, Interval, fit
from curveconf.synth import CURVATURE, LINEAR, OPTIMUM_PERFORMANCE, DgpParams, generate

A, B = -86.743836, 1097.49998


def fit_with(labels, coefficients, adj_r2=0.13):
    k = len(labels)
    return FitResult(
        labels=tuple(labels),
        coefficients=np.asarray(coefficients, float),
        std_errors=np.ones(k),
        t_stats=np.asarray(coefficients, float),
        p_values=np.full(k, 0.5),
        residuals=np.zeros(110),
        df_resid=110 - k,
        r2=adj_r2,
        adj_r2=adj_r2,
        sigma2=1.0,
    )


def optimum_fit():
    spec = ModelSpec()
    # intercept chosen so the optimum prediction is 69,575
    coefs = [0.0, B, A, -3330.0, -831.0, 15465.0]
    base = fit_with(spec.labels, coefs)
    at_opt = predict_at(base, spec, {**spec.reference, "turnover": turning_point(A, B)})
    coefs[0] = 69575.0 - at_opt
    return spec, fit_with(spec.labels, coefs)


def test_turning_point_examples():
    assert turning_point(A, B) == pytest.approx(6.326, abs=5e-4)
    assert round(turning_point(A, B), 1) == 6.3
    assert turning_point(-1.0, 2.0) == 1.0
    with pytest.raises(NoTurningPoint):
        turning_point(0.0, 3.0)


def test_synth_constants_match_reference_curve():
    assert (CURVATURE, LINEAR) == (A, B)


def test_delta_from_optimum_examples():
    assert delta_from_optimum(A, 2) == 4 * A
    assert delta_from_optimum(A, 8.7) == pytest.approx(-6565.64, abs=0.01)
    assert round(delta_from_optimum(A, 8.7)) == -6566
    assert delta_from_optimum(A, 0.0) == 0.0


def test_optimum_minus_delta_composition():
    assert OPTIMUM_PERFORMANCE + delta_from_optimum(A, 8.7) == pytest.approx(63009, abs=1)


@given(st.floats(-1e4, 1e4), st.floats(-1e3, 1e3))
def test_delta_is_even(a, d):
    assert delta_from_optimum(a, d) == delta_from_optimum(a, -d)


def test_predict_at_examples():
    intercept_only = fit_with(["intercept"], [42.5])
    assert predict_at(intercept_only, ModelSpec(quadratic=False, controls=()), {"turnover": 99.0}) == 42.5
    spec, f = optimum_fit()
    zeros = {"turnover": 0.0, "absenteeism": 0.0, "mean_age": 0.0, "region": 0.0}
    assert predict_at(f, spec, zeros) == f.coefficients[0]
    with pytest.raises(MissingCovariate):
        predict_at(f, spec, {"turnover": 5.0})


def test_intercept_only_fit_predicts_mean(default_data):
    spec = ModelSpec(quadratic=False, controls=())
    design, y = build_design(default_data, spec)
    design = type(design)(design.values[:, :1], design.labels[:1])
    f = fit(design, y)
    assert predict_at(f, spec, {"turnover": 3.0}) == pytest.approx(y.mean(), rel=1e-12)


def test_parabola_identity():
    spec, f = optimum_fit()
    loc = turning_point(A, B)
    ref = dict(spec.reference)
    top = predict_at(f, spec, {**ref, "turnover": loc})
    assert top == pytest.approx(69575, abs=1e-6)
    for d in (0.5, 3.0, 8.7, 20.0):
        for x in (loc - d, loc + d):
            moved = predict_at(f, spec, {**ref, "turnover": x}) - top
            assert moved == pytest.approx(delta_from_optimum(A, d), rel=1e-8)


@pytest.mark.parametrize("p, conf", [(0.007, 0.9965), (1.0, 0.5), (0.05, 0.975), (0.0, 1.0)])
def test_p_to_confidence(p, conf):
    assert p_to_confidence(p) == pytest.approx(conf, abs=1e-15)


@pytest.mark.parametrize("p", [-0.01, 1.01, math.nan])
def test_p_to_confidence_domain(p):
    with pytest.raises(DomainError):
        p_to_confidence(p)


@given(st.floats(0, 1), st.floats(0, 1))
def test_p_to_confidence_monotone(p, q):
    lo, hi = sorted((p, q))
    assert 0.5 <= p_to_confidence(hi) <= p_to_confidence(lo) <= 1.0


def test_sign_statement_zero_estimate():
    assert sign_statement(0.0, 0.3) == ("indeterminate", 0.5)
    assert sign_statement(-2.0, 0.007) == ("negative", pytest.approx(0.9965))


def _curve(curvature, location):
    return CurveSummary(location, curvature, None, {}, 0.1, Shape.NO_CURVATURE)


@pytest.mark.parametrize(
    "curvature, location, shape",
    [
        (-87, 6.3, Shape.INVERTED_U),
        (5, 1.0, Shape.UPRIGHT_U),
        (5, -3.0, Shape.UPRIGHT_U),
        (-5, turning_point(-5, -10), Shape.DECLINING_ONLY),
        (-5, 0.0, Shape.DECLINING_ONLY),
        (None, None, Shape.NO_CURVATURE),
        (0.0, None, Shape.NO_CURVATURE),
    ],
)
def test_classify_shape(curvature, location, shape):
    assert classify_shape(_curve(curvature, location)) is shape


def test_summarize_rounding():
    spec, f = optimum_fit()
    curve = summarize_curve(f, spec)
    assert round(curve.location, 1) == 6.3
    assert round(curve.curvature) == -87
    assert curve.shape is Shape.INVERTED_U
    assert list(curve.impacts) == ["absenteeism", "mean_age", "region"]
    assert round(curve.optimum_prediction) == 69575
    table = render_friendly_table(curve)
    assert [r.text for r in table.rows] == ["6.3", "-87", "-3,330", "-831", "15,465", "13%", "69,575"]
    assert table.rows[-1].description == (
        "Predicted optimum performance for Region 1, and mean absenteeism (3.8%) and mean age (28)"
    )


def test_summarize_linear_spec():
    spec = ModelSpec(quadratic=False)
    f = fit_with(spec.labels, [1.0, -1778, -3389, -731, 15066], adj_r2=0.12)
    curve = summarize_curve(f, spec)
    assert curve.shape is Shape.NO_CURVATURE
    assert curve.location is None and curve.optimum_prediction is None
    assert list(curve.impacts) == ["turnover", "absenteeism", "mean_age", "region"]


def test_summarize_recovers_known_optimum():
    params = DgpParams(a_true=-400.0, b_true=8000.0, noise_sd=2000.0, seed=5)
    assert params.optimum == 10.0
    ds = generate(params)
    f = fit(*build_design(ds, ModelSpec()))
    curve = summarize_curve(f, ModelSpec())
    assert curve.location == pytest.approx(10.0, abs=0.5)


def interval_table():
    spec = ModelSpec(quadratic=False)
    f = fit_with(spec.labels, [0.0, -1778, -3389, -731, 15066], adj_r2=0.12)
    ivs = {
        "turnover": Interval(-3060, -495, 0.95),
        "absenteeism": Interval(-6767, -10, 0.95),
        "mean_age": Interval(-3716, 2254, 0.95),
        "region": Interval(5607, 24525, 0.95),
    }
    return render_friendly_table(summarize_curve(f, spec), ivs)


def test_interval_table_rows():
    table = interval_table()
    assert table.header() == ["", "Best estimate", "Lower limit of 95% CI", "Upper limit of 95% CI"]
    cells = table.cells()
    assert cells[0] == ["Predicted impact of 1% increase in staff turnover", "-1,778", "-3,060", "-495"]
    assert cells[-1] == ["Proportion of variation explained (Adjusted R²)", "12%", "", ""]
    assert (
        "| Predicted impact of 1% increase in staff turnover | -1,778 | -3,060 | -495 |" in table.to_markdown()
    )
    assert cells[3][0].endswith("(with Region 1 having the lowest performance)")


def test_adj_r2_row_and_two_columns():
    spec, f = optimum_fit()
    table = render_friendly_table(summarize_curve(f, spec), {})
    assert table.header() == ["", "Best estimate"]
    assert table.row("Proportion of variation explained").text == "13%"
    assert "| Proportion of variation explained (Adjusted R²) | 13% |" in table.to_markdown()
    assert all(len(c) == 2 for c in table.cells())


def test_descriptions_never_bare_labels():
    for row in interval_table().rows:
        assert row.description not in {"turnover", "absenteeism", "mean_age", "region"}


def test_negative_region_flips_wording():
    spec = ModelSpec(quadratic=False)
    f = fit_with(spec.labels, [0.0, -1.0, -1.0, -1.0, -500.0])
    table = render_friendly_table(summarize_curve(f, spec))
    assert "Region 1 having the highest performance" in table.cells()[3][0]


def test_extrapolation_footnote():
    spec, f = optimum_fit()
    few_below = [1.0] * 5 + [20.0] * 95
    curve = summarize_curve(f, spec, focal_values=few_below)
    assert curve.share_below == 0.05
    assert "extrapolated" in render_friendly_table(curve).to_markdown()
    balanced = summarize_curve(f, spec, focal_values=[1.0] * 50 + [20.0] * 50)
    assert not render_friendly_table(balanced).footnotes


def test_csv_and_json():
    text = interval_table().to_csv().splitlines()
    assert text[0] == "description,Best estimate,Lower limit of 95% CI,Upper limit of 95% CI"
    assert text[1] == 'Predicted impact of 1% increase in staff turnover,"-1,778","-3,060",-495'
    spec, f = optimum_fit()
    data = json.loads(summarize_curve(f, spec).to_json())
    assert data["shape"] == "InvertedU"
    assert data["location"] == turning_point(A, B)


def test_confidence_sentence():
    assert confidence_sentence("Turnover", -1778.0, 0.007) == "Turnover: 99.65% confidence the impact is negative"
    assert "indeterminate" in confidence_sentence("Age", 0.0, 1.0)


def test_fmt_int():
    assert fmt_int(-1778.4) == "-1,778"
    assert fmt_int(69575.2) == "69,575"


@pytest.mark.parametrize("c", [0.001, 3.0, 1e6])
def test_location_scale_invariant(default_data, c):
    spec = ModelSpec()
    design, y = build_design(default_data, spec)
    a = summarize_curve(fit(design, y), spec).location
    b = summarize_curve(fit(design, c * y), spec).location
    assert b == pytest.approx(a, rel=1e-10)
