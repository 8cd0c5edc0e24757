"""Case-resampling bootstrap: percentile intervals, sign and shape confidence,
and pointwise confidence bands for prediction curves.

Resample ``r`` always draws from the stream keyed by ``(seed, r)``, so a run
is a pure function of (dataset, spec, plan) whatever the number of workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, ModelSpec, build_design
from .errors import DomainError, ExtrapolationError, NotQuadratic, SingularDesign, TooManySingular
from .ols import FitResult, Interval, fit, solve_coefficients
from .streams import RESAMPLE, stream


@dataclass(frozen=True)
class ResamplePlan:
    B: int = 10_000
    seed: int = 0
    skip_budget: float = 0.01

    def __post_init__(self):
        if self.B < 1:
            raise DomainError(f"B must be >= 1, got {self.B}")
        if not 0.0 <= self.skip_budget < 1.0:
            raise DomainError(f"skip_budget must lie in [0, 1), got {self.skip_budget}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def max_redraws(self) -> int:
        return int(math.floor(self.skip_budget * self.B + 1e-9))

    def to_dict(self) -> dict:
        return {"B": self.B, "seed": self.seed, "skip_budget": self.skip_budget}


@dataclass(frozen=True, eq=False)
class BootstrapRun:
    coefficient_matrix: np.ndarray
    labels: tuple[str, ...]
    estimate: np.ndarray
    skipped: int
    plan: ResamplePlan
    spec: ModelSpec
    focal_range: tuple[float, float]

    @property
    def B(self) -> int:
        return self.coefficient_matrix.shape[0]

    @property
    def derived_locations(self) -> np.ndarray | None:
        """Turning point -b/2a of every resample fit (quadratic specs only)."""
        if not self.spec.quadratic:
            return None
        a = self.coefficient_matrix[:, self.spec.squared_index]
        b = self.coefficient_matrix[:, self.spec.focal_index]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(a != 0, -b / (2.0 * a), np.nan)

    def column(self, term) -> np.ndarray:
        return self.coefficient_matrix[:, self.spec.term_index(term)]

    def to_dict(self) -> dict:
        return {
            "plan": self.plan.to_dict(),
            "spec": self.spec.to_dict(),
            "skipped": self.skipped,
            "labels": list(self.labels),
            "estimate": [float(v) for v in self.estimate],
            "coefficients": [[float(v) for v in row] for row in self.coefficient_matrix],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["resample"] + list(self.labels))
        for r, row in enumerate(self.coefficient_matrix):
            writer.writerow([r] + [repr(float(v)) for v in row])
        return buf.getvalue()


@dataclass(frozen=True)
class Band:
    grid: np.ndarray
    lower: np.ndarray
    center: np.ndarray
    upper: np.ndarray
    level: float

    def __post_init__(self):
        sizes = {len(self.grid), len(self.lower), len(self.center), len(self.upper)}
        if len(sizes) != 1:
            raise ValueError("band arrays must have equal length")
        if np.any(self.lower > self.upper):
            raise ValueError("band lower exceeds upper")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["grid", "lower", "center", "upper"])
        for row in zip(self.grid, self.lower, self.center, self.upper):
            writer.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def draw_resample(n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` indices drawn uniformly from 0..n-1 with replacement."""
    if n < 1:
        raise DomainError("cannot resample an empty dataset")
    return rng.integers(0, n, size=n)


def _resample_fit(X, y, labels, seed, r, max_redraws):
    rng = stream(seed, r, RESAMPLE)
    n = len(y)
    skipped = 0
    while True:
        idx = draw_resample(n, rng)
        try:
            return solve_coefficients(X[idx], y[idx], labels), skipped
        except SingularDesign:
            skipped += 1
            if skipped > max_redraws:
                return None, skipped


def run_bootstrap(
    ds: Dataset,
    spec: ModelSpec,
    plan: ResamplePlan = ResamplePlan(),
    workers: int = 1,
    full_fit: FitResult | None = None,
) -> BootstrapRun:
    """Refit the model on ``plan.B`` case resamples of ``ds``.

    Singular resamples are redrawn from the same stream; the run fails with
    :class:`TooManySingular` once redraws exceed ``skip_budget * B``.
    """
    design, y = build_design(ds, spec)
    if full_fit is None:
        full_fit = fit(design, y)
    X = np.ascontiguousarray(design.values)
    labels = design.labels
    budget = plan.max_redraws

    def chunk(rs):
        return [_resample_fit(X, y, labels, plan.seed, r, budget) for r in rs]

    indices = range(plan.B)
    if workers <= 1:
        results = chunk(indices)
    else:
        size = max(1, -(-plan.B // (workers * 4)))
        pieces = [indices[i : i + size] for i in range(0, plan.B, size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = [res for part in pool.map(chunk, pieces) for res in part]

    skipped = sum(s for _, s in results)
    if skipped > budget or any(c is None for c, _ in results):
        raise TooManySingular(
            f"{skipped} singular resamples exceeded the redraw budget of {budget} "
            f"({plan.skip_budget:.2%} of B={plan.B})"
        )
    matrix = np.array([c for c, _ in results])
    focal = ds.column(spec.focal)
    return BootstrapRun(
        coefficient_matrix=matrix,
        labels=labels,
        estimate=np.array(full_fit.coefficients),
        skipped=skipped,
        plan=plan,
        spec=spec,
        focal_range=(float(focal.min()), float(focal.max())),
    )


def quantile(values, q: float) -> float:
    """Order-statistic quantile with rank r = q(B+1), linearly interpolated
    between neighbours and clamped to the sample extremes."""
    x = np.sort(np.asarray(values, dtype=float))
    return float(_sorted_quantile(x, q))


def _sorted_quantile(x, q):
    # x sorted along axis 0
    B = x.shape[0]
    r = q * (B + 1)
    if r <= 1:
        return x[0]
    if r >= B:
        return x[B - 1]
    lo = int(math.floor(r))
    frac = r - lo
    return x[lo - 1] + frac * (x[lo] - x[lo - 1])


def percentile_interval(values, level: float = 0.95) -> Interval:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) < 2:
        raise DomainError("percentile interval needs at least 2 values")
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    x = np.sort(values)
    tail = (1.0 - level) / 2.0
    return Interval(float(_sorted_quantile(x, tail)), float(_sorted_quantile(x, 1.0 - tail)), level)


def sign_confidence(run: BootstrapRun, term, direction: str = "negative") -> float:
    """Fraction of resample coefficients strictly on the given side of zero."""
    values = run.column(term)
    if direction == "negative":
        return float(np.mean(values < 0))
    if direction == "positive":
        return float(np.mean(values > 0))
    raise DomainError(f"direction must be 'negative' or 'positive', got {direction!r}")


def shape_confidence(run: BootstrapRun) -> float:
    """Fraction of resamples giving an inverted U: curvature < 0 and a
    turning point at a positive focal value."""
    if not run.spec.quadratic:
        raise NotQuadratic("shape confidence needs a model with a squared term")
    a = run.coefficient_matrix[:, run.spec.squared_index]
    loc = run.derived_locations
    return float(np.mean((a < 0) & (loc > 0)))


def default_grid(run_or_range, points: int = 100) -> np.ndarray:
    lo, hi = run_or_range.focal_range if isinstance(run_or_range, BootstrapRun) else run_or_range
    return np.linspace(lo, hi, points)


def check_grid(grid, focal_range, allow_extrapolation=False) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("grid must be a non-empty 1-d sequence")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly ascending")
    lo, hi = focal_range
    if not allow_extrapolation and (grid[0] < lo or grid[-1] > hi):
        raise ExtrapolationError(
            f"grid [{grid[0]:g}, {grid[-1]:g}] extends beyond the observed range "
            f"[{lo:g}, {hi:g}]; set allow_extrapolation (--allow-extrapolation) to override"
        )
    return grid


def resample_curves(run: BootstrapRun, grid, reference=None) -> np.ndarray:
    """Predictions of every resample fit on ``grid``: shape (B, len(grid))."""
    G = run.spec.grid_regressors(grid, _reference(run, reference))
    return run.coefficient_matrix @ G.T


def _reference(run, reference):
    if reference is None:
        return dict(run.spec.reference)
    return dict(reference)


def confidence_band(
    run: BootstrapRun,
    grid=None,
    reference=None,
    level: float = 0.95,
    allow_extrapolation: bool = False,
) -> Band:
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    grid = default_grid(run) if grid is None else check_grid(grid, run.focal_range, allow_extrapolation)
    ref = _reference(run, reference)
    G = run.spec.grid_regressors(grid, ref)
    preds = np.sort(run.coefficient_matrix @ G.T, axis=0)
    tail = (1.0 - level) / 2.0
    lower = np.asarray(_sorted_quantile(preds, tail))
    upper = np.asarray(_sorted_quantile(preds, 1.0 - tail))
    center = G @ run.estimate
    return Band(grid=np.asarray(grid, float), lower=lower, center=center, upper=upper, level=level)
