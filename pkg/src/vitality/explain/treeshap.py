"""Exact per-sample attributions for the engine's tree ensembles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import LocalAccuracyError, ShapeMismatchError, ValidationError
from ..learners.cart import TreeEnsemble

LOCAL_ACCURACY_TOL = 1e-9


@dataclass(frozen=True)
class ShapMatrix:
    """Per-sample, per-feature attributions around a shared base value.

    base_value plus the row sum of phi reassembles the model prediction
    for that row; construction fails if any row misses by more than 1e-9.
    """

    base_value: float
    phi: np.ndarray
    feature_ids: tuple[str, ...]

    def __post_init__(self):
        if self.phi.ndim != 2:
            raise ValidationError("phi must be a 2-D matrix")
        if len(self.feature_ids) != self.phi.shape[1]:
            raise ValidationError("one feature id per phi column required")
        self.phi.setflags(write=False)

    def reassembled(self) -> np.ndarray:
        return self.base_value + self.phi.sum(axis=1)

    def mean_abs(self) -> np.ndarray:
        return np.abs(self.phi).mean(axis=0)


def tree_shap(ensemble: TreeEnsemble, X, feature_ids=None) -> ShapMatrix:
    """Exact conditional-expectation Shapley values for every row of X.

    Forest attributions average the per-tree values; boosted attributions
    scale their sum by the learning rate, with the ensemble base folded
    into base_value. Local accuracy is checked on every call.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeMismatchError("X must be 2-D")
    if X.shape[1] != ensemble.n_features:
        raise ShapeMismatchError(
            f"ensemble expects {ensemble.n_features} features, X has {X.shape[1]}"
        )
    if feature_ids is None:
        feature_ids = tuple(f"x{j}" for j in range(X.shape[1]))
    feature_ids = tuple(feature_ids)
    if len(feature_ids) != X.shape[1]:
        raise ShapeMismatchError("one feature id per column required")

    n, p = X.shape
    total = np.zeros((n, p), dtype=np.float64)
    root_total = 0.0
    for tree in ensemble.trees:
        nsamp = tree.n_samples.astype(np.float64)
        root_total += float(tree.value[0])
        for i in range(n):
            kernels.tree_shap_single(
                tree.left, tree.right, tree.feature, tree.threshold,
                tree.value, nsamp, X[i], total[i], tree.max_depth,
            )
    if ensemble.kind == "forest_mean":
        phi = total / len(ensemble.trees)
        base = root_total / len(ensemble.trees)
    else:
        phi = ensemble.rate * total
        base = ensemble.base_score + ensemble.rate * root_total

    predicted = ensemble.predict(X)
    gap = np.abs(base + phi.sum(axis=1) - predicted)
    worst = int(np.argmax(gap)) if n else 0
    if n and gap[worst] >= LOCAL_ACCURACY_TOL:
        raise LocalAccuracyError(
            f"row {worst}: attributions miss the prediction by {gap[worst]:.3e}"
        )
    return ShapMatrix(base_value=float(base), phi=phi, feature_ids=feature_ids)


def violin_payload(shap: ShapMatrix, feature_values: np.ndarray) -> dict:
    """Chart payload pairing signed attributions with the feature values
    that color them. feature_values must align with shap.phi."""
    values = np.asarray(feature_values, dtype=np.float64)
    if values.shape != shap.phi.shape:
        raise ShapeMismatchError("feature values must align with phi")
    order = np.argsort(-shap.mean_abs(), kind="stable")
    return {
        "base_value": shap.base_value,
        "features": [
            {
                "id": shap.feature_ids[j],
                "mean_abs": float(shap.mean_abs()[j]),
                "shap": [float(v) for v in shap.phi[:, j]],
                "values": [float(v) for v in values[:, j]],
            }
            for j in order
        ],
    }
