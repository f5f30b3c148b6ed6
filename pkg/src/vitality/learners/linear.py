"""Simple ordinary least squares and the mean squared error metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, ShapeMismatchError


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    slope: float

    def predict(self, t) -> float | np.ndarray:
        arr = np.asarray(t, dtype=np.float64)
        out = self.intercept + self.slope * arr
        if arr.ndim == 0:
            return float(out)
        return out


def fit_linear(t, y) -> LinearModel:
    """Closed-form simple OLS of y on t."""
    t = np.asarray(t, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if t.ndim != 1 or y.ndim != 1 or t.shape != y.shape:
        raise ShapeMismatchError(f"t {t.shape} incompatible with y {y.shape}")
    if t.shape[0] < 2:
        raise ShapeMismatchError("need at least 2 points")
    tm = t.mean()
    ym = y.mean()
    stt = float(((t - tm) ** 2).sum())
    if stt == 0.0:
        raise DegenerateInputError("all abscissae equal; slope undefined")
    slope = float(((t - tm) * (y - ym)).sum()) / stt
    return LinearModel(intercept=float(ym - slope * tm), slope=slope)


def mse(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.shape[0] < 1:
        raise ShapeMismatchError(
            f"y_true {y_true.shape} incompatible with y_pred {y_pred.shape}"
        )
    return float(np.mean((y_true - y_pred) ** 2))
