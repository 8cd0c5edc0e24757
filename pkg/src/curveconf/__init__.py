"""Curvilinear regression with friendly parameters, analytic and bootstrap
confidence intervals, confidence levels for shape hypotheses and SVG
confidence-band figures."""

from .bootstrap import (
    Band,
    BootstrapRun,
    ResamplePlan,
    confidence_band,
    draw_resample,
    percentile_interval,
    run_bootstrap,
    shape_confidence,
    sign_confidence,
)
from .dataset import (
    ColumnSummary,
    Dataset,
    DesignMatrix,
    ModelSpec,
    OfficeRecord,
    build_design,
    parse_csv,
    read_csv,
    summarize,
    to_csv,
)
from .interpret import (
    CurveSummary,
    FriendlyTable,
    Shape,
    classify_shape,
    delta_from_optimum,
    p_to_confidence,
    predict_at,
    render_friendly_table,
    summarize_curve,
    turning_point,
)
from .ols import FitResult, Interval, confidence_interval, fit, p_value_of, standardize
from .synth import DgpParams, coverage_sim, exact_bootstrap, generate, normal_equations_oracle
from .tdist import t_cdf, t_quantile

__version__ = "0.1.0"
