"""Ordinary least squares with standard errors, t statistics, p-values and
analytic confidence intervals.

Coefficients come from a Householder QR factorisation of the design; the
normal equations are never formed here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .dataset import DesignMatrix
from .errors import DomainError, SingularDesign, Underdetermined, ZeroVariance
from .tdist import t_quantile, t_tail

# a column is collinear when |R_jj| < RANK_TOL * max_i |R_ii|
RANK_TOL = 1e-10


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float
    level: float

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"interval lower {self.lower} exceeds upper {self.upper}")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def excludes_zero(self) -> bool:
        return self.lower > 0 or self.upper < 0

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True, eq=False)
class FitResult:
    labels: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray
    df_resid: int
    r2: float
    adj_r2: float
    sigma2: float

    @property
    def n(self) -> int:
        return len(self.residuals)

    def index(self, term) -> int:
        if isinstance(term, str):
            try:
                return self.labels.index(term)
            except ValueError:
                raise DomainError(f"unknown term {term!r}") from None
        if not 0 <= term < len(self.labels):
            raise DomainError(f"term index {term} out of range")
        return int(term)

    def coef(self, term) -> float:
        return float(self.coefficients[self.index(term)])

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "coef": [float(v) for v in self.coefficients],
            "se": [float(v) for v in self.std_errors],
            "t": [_json_float(v) for v in self.t_stats],
            "p": [float(v) for v in self.p_values],
            "r2": float(self.r2),
            "adj_r2": float(self.adj_r2),
            "df": int(self.df_resid),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _json_float(v):
    v = float(v)
    if np.isfinite(v):
        return v
    return "inf" if v > 0 else "-inf" if v < 0 else None


def _factor(X, labels):
    q, r = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(r))
    biggest = diag.max() if diag.size else 0.0
    for j, d in enumerate(diag):
        if not d > RANK_TOL * biggest:
            raise SingularDesign(labels[j] if labels else j, j)
    return q, r


def _upper_solve(r, b):
    # back substitution on the upper-triangular factor
    k = r.shape[0]
    x = np.zeros(k)
    for i in range(k - 1, -1, -1):
        x[i] = (b[i] - r[i, i + 1 :] @ x[i + 1 :]) / r[i, i]
    return x


def solve_coefficients(X: np.ndarray, y: np.ndarray, labels=None) -> np.ndarray:
    """Least-squares coefficients only; the fast path used per resample."""
    q, r = _factor(X, labels)
    return _upper_solve(r, q.T @ y)


def fit(design: DesignMatrix, y) -> FitResult:
    X = design.values
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if len(y) != n:
        raise DomainError(f"response has {len(y)} rows, design has {n}")
    if n <= p:
        raise Underdetermined(f"need more observations than parameters (n={n}, parameters={p})")
    q, r = _factor(X, design.labels)
    coef = _upper_solve(r, q.T @ y)
    resid = y - X @ coef
    df = n - p
    rss = float(resid @ resid)
    sigma2 = rss / df
    r_inv = np.linalg.solve(r, np.eye(p))
    se = np.sqrt(sigma2 * np.sum(r_inv * r_inv, axis=1))

    centered = y - y.mean()
    tss = float(centered @ centered)
    has_intercept = bool(np.all(X[:, 0] == 1.0))
    if tss > 0:
        r2 = 1.0 - rss / tss
    else:
        r2 = 0.0
    r2 = min(max(r2, 0.0), 1.0)
    k = p - 1 if has_intercept else p
    adj = 1.0 - (1.0 - r2) * (n - 1) / (n - k - 1) if tss > 0 else 0.0

    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, coef / np.where(se > 0, se, 1.0), np.sign(coef) * np.inf)
    t = np.where((se == 0) & (coef == 0), 0.0, t)
    pvals = np.array([_two_tailed(tj, df) for tj in t])
    return FitResult(
        labels=design.labels,
        coefficients=coef,
        std_errors=se,
        t_stats=t,
        p_values=pvals,
        residuals=resid,
        df_resid=df,
        r2=float(r2),
        adj_r2=float(adj),
        sigma2=float(sigma2),
    )


def _two_tailed(t, df):
    return min(1.0, 2.0 * t_tail(abs(float(t)), df))


def confidence_interval(fit: FitResult, j, level: float = 0.95) -> Interval:
    if not 0.0 < level < 1.0:
        raise DomainError(f"confidence level must lie in (0, 1), got {level!r}")
    j = fit.index(j)
    half = t_quantile(1.0 - (1.0 - level) / 2.0, fit.df_resid) * fit.std_errors[j]
    est = float(fit.coefficients[j])
    return Interval(est - half, est + half, level)


def p_value_of(fit: FitResult, j) -> float:
    """Two-tailed p-value for term ``j``."""
    return _two_tailed(fit.t_stats[fit.index(j)], fit.df_resid)


def _sd(x):
    return float(np.sqrt(np.sum((x - x.mean()) ** 2) / (len(x) - 1)))


def standardize(fit: FitResult, design: DesignMatrix, y) -> dict[str, float]:
    """Standardised coefficients b_j * sd(x_j) / sd(y), intercept excluded."""
    y = np.asarray(y, dtype=float)
    sd_y = _sd(y)
    if not sd_y > 0:
        raise ZeroVariance("response")
    out = {}
    for j, label in enumerate(design.labels[1:], start=1):
        sd_x = _sd(design.values[:, j])
        if not sd_x > 0:
            raise ZeroVariance(label)
        out[label] = float(fit.coefficients[j]) * sd_x / sd_y
    return out
