"""Office-level data: parsing, validation, design matrices and column summaries."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import BadValue, DomainError, EmptyData, MissingColumn, MissingCovariate

log = logging.getLogger(__name__)

NUMERIC_COLUMNS = ("performance", "turnover", "absenteeism", "mean_age", "region")
COLUMNS = ("office_id",) + NUMERIC_COLUMNS
REGIONS = (1, 2, 3)

INTERCEPT = "intercept"


@dataclass(frozen=True)
class OfficeRecord:
    office_id: str
    performance: float
    turnover: float
    absenteeism: float
    mean_age: float
    region: int

    def __post_init__(self):
        for name in NUMERIC_COLUMNS:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.turnover < 0:
            raise ValueError(f"turnover must be >= 0, got {self.turnover!r}")
        if self.absenteeism < 0:
            raise ValueError(f"absenteeism must be >= 0, got {self.absenteeism!r}")
        if self.mean_age <= 0:
            raise ValueError(f"mean_age must be > 0, got {self.mean_age!r}")
        if self.region not in REGIONS:
            raise ValueError(f"region must be one of {REGIONS}, got {self.region!r}")


@dataclass(frozen=True)
class Dataset:
    records: tuple[OfficeRecord, ...]

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        if not self.records:
            raise EmptyData("dataset has no records")

    @property
    def n(self) -> int:
        return len(self.records)

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        if name not in NUMERIC_COLUMNS:
            raise MissingColumn(name)
        return np.array([float(getattr(r, name)) for r in self.records])

    def subset(self, indices: Sequence[int]) -> "Dataset":
        return Dataset(tuple(self.records[i] for i in indices))


@dataclass(frozen=True)
class ModelSpec:
    """Declarative regression model: response ~ focal [+ focal^2] + controls.

    ``reference`` holds the covariate values used when drawing prediction
    curves (the focal variable is swept, everything else is held here).
    """

    response: str = "performance"
    focal: str = "turnover"
    quadratic: bool = True
    controls: tuple[str, ...] = ("absenteeism", "mean_age", "region")
    reference: Mapping[str, float] = field(
        default_factory=lambda: {"region": 1.0, "absenteeism": 3.8, "mean_age": 28.0}
    )

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(self.controls))
        object.__setattr__(self, "reference", {k: float(v) for k, v in dict(self.reference).items()})
        if self.focal in self.controls:
            raise DomainError(f"focal variable {self.focal!r} also listed as a control")
        if len(set(self.controls)) != len(self.controls):
            raise DomainError(f"duplicate control terms in {self.controls!r}")
        if self.response == self.focal or self.response in self.controls:
            raise DomainError(f"response {self.response!r} also used as a predictor")

    @property
    def labels(self) -> tuple[str, ...]:
        focal_terms = (self.focal, self.squared_label) if self.quadratic else (self.focal,)
        return (INTERCEPT,) + focal_terms + self.controls

    @property
    def squared_label(self) -> str:
        return f"{self.focal}^2"

    @property
    def focal_index(self) -> int:
        return 1

    @property
    def squared_index(self) -> int | None:
        return 2 if self.quadratic else None

    def term_index(self, term: str | int) -> int:
        if isinstance(term, (int, np.integer)):
            if not 0 <= term < len(self.labels):
                raise DomainError(f"term index {term} out of range")
            return int(term)
        try:
            return self.labels.index(term)
        except ValueError:
            raise DomainError(f"unknown term {term!r}; model terms are {self.labels}") from None

    def regressors(self, covariates: Mapping[str, float]) -> np.ndarray:
        """One design row for the given covariate values (focal included)."""
        row = [1.0]
        for name in (self.focal,) + self.controls:
            if name not in covariates:
                raise MissingCovariate(name)
        x = float(covariates[self.focal])
        row.append(x)
        if self.quadratic:
            row.append(x * x)
        row.extend(float(covariates[c]) for c in self.controls)
        return np.array(row)

    def grid_regressors(self, grid, covariates: Mapping[str, float] | None = None) -> np.ndarray:
        """Design rows sweeping the focal variable over ``grid``."""
        cov = dict(self.reference if covariates is None else covariates)
        rows = []
        for x in np.asarray(grid, dtype=float):
            cov[self.focal] = x
            rows.append(self.regressors(cov))
        return np.array(rows).reshape(len(rows), len(self.labels))

    def to_dict(self) -> dict:
        return {
            "response": self.response,
            "focal": self.focal,
            "quadratic": self.quadratic,
            "controls": list(self.controls),
            "reference": {k: self.reference[k] for k in sorted(self.reference)},
        }


@dataclass(frozen=True)
class DesignMatrix:
    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))
        if values.ndim != 2 or values.shape[1] != len(self.labels):
            raise ValueError("design shape does not match labels")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.labels.index(label)]


@dataclass(frozen=True)
class ColumnStats:
    mean: float
    sd: float
    min: float
    max: float


class ColumnSummary(dict):
    """Mapping of column name to :class:`ColumnStats`."""

    def means(self) -> dict[str, float]:
        return {k: v.mean for k, v in self.items()}


def _to_float(text, row, column):
    if text is None or text.strip() == "":
        raise BadValue(row, column, text, "missing value")
    try:
        value = float(text)
    except ValueError:
        raise BadValue(row, column, text, "not a number") from None
    if not math.isfinite(value):
        raise BadValue(row, column, text, "not finite")
    return value


_CELL_RULES = {
    "turnover": (lambda v: v >= 0, "must be >= 0"),
    "absenteeism": (lambda v: v >= 0, "must be >= 0"),
    "mean_age": (lambda v: v > 0, "must be > 0"),
    "region": (lambda v: v in REGIONS, "must be 1, 2 or 3"),
}


def _check_cell(value: float, row: int, column: str) -> float:
    rule = _CELL_RULES.get(column)
    if rule is not None and not rule[0](value):
        raise BadValue(row, column, value, rule[1])
    return value


def parse_csv(text) -> Dataset:
    """Parse office records from CSV text (or a text stream).

    Lines starting with ``#`` and blank lines are skipped. The header must
    name every column in :data:`COLUMNS`; unknown columns are ignored with a
    warning. Rows are numbered from 1 (first data row) in error messages.
    """
    if not isinstance(text, str):
        text = text.read()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise EmptyData("no header row")
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    for col in COLUMNS:
        if col not in header:
            raise MissingColumn(col, "CSV header")
    extra = [h for h in header if h not in COLUMNS]
    if extra:
        log.warning("ignoring extra columns: %s", ", ".join(extra))
    pos = {col: header.index(col) for col in COLUMNS}

    records = []
    for row_no, cells in enumerate(reader, start=1):
        cells = cells + [""] * (len(header) - len(cells))
        office_id = cells[pos["office_id"]].strip()
        if not office_id:
            raise BadValue(row_no, "office_id", office_id, "missing value")
        values = {"office_id": office_id}
        for col in NUMERIC_COLUMNS:
            values[col] = _check_cell(_to_float(cells[pos[col]], row_no, col), row_no, col)
        values["region"] = int(values["region"])
        records.append(OfficeRecord(**values))
    if not records:
        raise EmptyData("CSV has a header but no data rows")
    return Dataset(tuple(records))


def read_csv(path) -> Dataset:
    with open(path, encoding="utf-8") as fh:
        return parse_csv(fh.read())


def to_csv(ds: Dataset) -> str:
    """Serialize in the fixed column order; floats use shortest round-trip repr."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in ds.records:
        writer.writerow(
            [r.office_id, repr(r.performance), repr(r.turnover), repr(r.absenteeism), repr(r.mean_age), r.region]
        )
    return buf.getvalue()


def build_design(ds: Dataset, spec: ModelSpec) -> tuple[DesignMatrix, np.ndarray]:
    """Design matrix ``[intercept, focal, focal^2?, controls...]`` and response.

    No centering or scaling is applied; region enters as its ordinal code.
    """
    for name in (spec.response, spec.focal) + spec.controls:
        if name not in NUMERIC_COLUMNS:
            raise MissingColumn(name)
    focal = ds.column(spec.focal)
    cols = [np.ones(ds.n), focal]
    if spec.quadratic:
        cols.append(focal * focal)
    cols.extend(ds.column(c) for c in spec.controls)
    design = DesignMatrix(np.column_stack(cols), spec.labels)
    return design, ds.column(spec.response)


def summarize(ds: Dataset) -> ColumnSummary:
    summary = ColumnSummary()
    for name in NUMERIC_COLUMNS:
        x = ds.column(name)
        mean = float(np.mean(x))
        # clamp guards against rounding pushing the mean outside [min, max]
        mean = min(max(mean, float(x.min())), float(x.max()))
        sd = float(np.sqrt(np.sum((x - mean) ** 2) / (len(x) - 1))) if len(x) > 1 else 0.0
        summary[name] = ColumnStats(mean=mean, sd=sd, min=float(x.min()), max=float(x.max()))
    return summary
