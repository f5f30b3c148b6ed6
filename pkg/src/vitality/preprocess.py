"""Scaling, cost-indicator inversion and KNN imputation.

Stage order is fixed: scale, then invert, then impute. Imputation runs on
scaled values so donor distances are comparable across indicators.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import IndicatorCatalog, Panel, _format_cell
from .errors import (
    DisjointRowsError,
    DomainError,
    EmptyColumnError,
    InsufficientDonorsError,
    ValidationError,
)
from .kernels import knn_impute_fill

STAGES = ("scale", "invert", "impute")


@dataclass(frozen=True)
class ProcessedPanel:
    """Fully preprocessed matrix for one year: every cell finite in [0, 1]."""

    year: int
    da_ids: tuple[str, ...]
    matrix: np.ndarray
    provenance: np.ndarray  # bool, True where the cell was imputed
    scaler_params: tuple[tuple[float, float], ...]  # raw (min, max) per column
    catalog: IndicatorCatalog
    stages: tuple[str, ...] = STAGES

    def __post_init__(self):
        shape = (len(self.da_ids), len(self.catalog.indicators))
        if self.matrix.shape != shape or self.provenance.shape != shape:
            raise ValidationError(f"processed panel {self.year}: shape mismatch")
        if self.stages != STAGES:
            raise ValidationError(
                f"processed panel {self.year}: stage order {self.stages} != {STAGES}"
            )
        if not np.isfinite(self.matrix).all():
            raise ValidationError(f"processed panel {self.year}: non-finite cells remain")
        if self.matrix.min() < 0.0 or self.matrix.max() > 1.0:
            raise ValidationError(f"processed panel {self.year}: cells outside [0, 1]")
        for lo, hi in self.scaler_params:
            if lo > hi:
                raise ValidationError(f"processed panel {self.year}: min > max in scaler params")
        self.matrix.setflags(write=False)
        self.provenance.setflags(write=False)

    def column(self, indicator_id: str) -> np.ndarray:
        return self.matrix[:, self.catalog.column(indicator_id)]


def minmax_scale(column) -> tuple[np.ndarray, tuple[float, float]]:
    """Scale observed values to [0, 1]; a constant column maps to 0.5.

    Missing (NaN) cells pass through untouched. Returns the scaled column
    and the observed (min, max).
    """
    col = np.asarray(column, dtype=np.float64)
    observed = ~np.isnan(col)
    if not observed.any():
        raise EmptyColumnError("column has no observed values")
    lo = float(col[observed].min())
    hi = float(col[observed].max())
    out = col.copy()
    if lo == hi:
        out[observed] = 0.5
    else:
        out[observed] = (col[observed] - lo) / (hi - lo)
    return out, (lo, hi)


def invert(column) -> np.ndarray:
    """Map x to 1 - x so larger always means more vital; NaN passes through."""
    col = np.asarray(column, dtype=np.float64)
    observed = ~np.isnan(col)
    if ((col[observed] < 0.0) | (col[observed] > 1.0)).any():
        raise DomainError("invert expects values in [0, 1]")
    out = col.copy()
    out[observed] = 1.0 - col[observed]
    return out


def _check_donors(observed: np.ndarray, k: int) -> None:
    n = observed.shape[0]
    for r, c in zip(*np.where(~observed)):
        candidates = [q for q in range(n) if q != r and observed[q, c]]
        if len(candidates) < k:
            raise InsufficientDonorsError(
                f"cell ({r}, {c}): {len(candidates)} donor rows, need {k}"
            )
        usable = [q for q in candidates if (observed[r] & observed[q]).any()]
        if not usable:
            raise DisjointRowsError(
                f"cell ({r}, {c}): no donor shares an observed column with row {r}"
            )
        if len(usable) < k:
            raise InsufficientDonorsError(
                f"cell ({r}, {c}): {len(usable)} usable donor rows, need {k}"
            )


def knn_impute(matrix: np.ndarray, k: int) -> np.ndarray:
    """Fill NaN cells from the unweighted mean of the k nearest donor rows.

    Distance between rows is the root mean squared difference over their
    mutually observed columns; donors need the target column observed; ties
    at the k-th distance keep the lower row index. Only original observed
    values feed distances and means (no chaining).
    """
    if k < 1:
        raise ValidationError(f"k must be positive, got {k}")
    mat = np.ascontiguousarray(matrix, dtype=np.float64)
    observed = ~np.isnan(mat)
    if observed.all():
        return mat.copy()
    _check_donors(observed, k)
    return knn_impute_fill(mat, observed, k)


def preprocess_panel(panel: Panel, k: int = 5) -> ProcessedPanel:
    """Run the full scale/invert/impute pipeline on one census-year panel."""
    raw = panel.values
    n, p = raw.shape
    matrix = np.empty_like(raw)
    params = []
    for j in range(p):
        scaled, mm = minmax_scale(raw[:, j])
        if panel.catalog.indicators[j].polarity == "cost":
            scaled = invert(scaled)
        matrix[:, j] = scaled
        params.append(mm)
    provenance = np.isnan(matrix)
    matrix = knn_impute(matrix, k)
    return ProcessedPanel(
        year=panel.year,
        da_ids=panel.da_ids,
        matrix=matrix,
        provenance=provenance,
        scaler_params=tuple(params),
        catalog=panel.catalog,
    )


def write_processed(pp: ProcessedPanel, path: str | Path) -> None:
    """Write the processed CSV plus a parallel .provenance.csv flag file."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["da_id"] + pp.catalog.ids)
        for i, da in enumerate(pp.da_ids):
            writer.writerow([da] + [_format_cell(v) for v in pp.matrix[i]])
    prov_path = path.with_suffix(".provenance.csv")
    with prov_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["da_id"] + pp.catalog.ids)
        for i, da in enumerate(pp.da_ids):
            writer.writerow(
                [da] + ["imputed" if f else "observed" for f in pp.provenance[i]]
            )
