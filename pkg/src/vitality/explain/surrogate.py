"""Forest surrogates that explain the vitality index and the sector
assignments, with a boosted cross-check on the importance ranking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cluster import ClusterModel
from ..cvi import CviResult
from ..errors import ShapeMismatchError, ValidationError
from ..learners.cart import TreeEnsemble, fit_boosted, fit_forest, importance
from ..preprocess import ProcessedPanel
from .treeshap import ShapMatrix, tree_shap, violin_payload


@dataclass(frozen=True)
class CviExplanation:
    feature_ids: tuple[str, ...]
    forest: TreeEnsemble
    forest_importance: np.ndarray
    boosted_importance: np.ndarray
    rank_correlation: float
    shap: ShapMatrix
    feature_values: np.ndarray

    def __post_init__(self):
        for arr in (self.forest_importance, self.boosted_importance,
                    self.feature_values):
            arr.setflags(write=False)

    def ranking(self, which="forest") -> list[str]:
        vec = (self.forest_importance if which == "forest"
               else self.boosted_importance)
        order = np.argsort(-vec, kind="stable")
        return [self.feature_ids[j] for j in order]

    def payload(self) -> dict:
        return {
            "features": list(self.feature_ids),
            "forest": [float(v) for v in self.forest_importance],
            "boosted": [float(v) for v in self.boosted_importance],
            "forest_ranking": self.ranking("forest"),
            "boosted_ranking": self.ranking("boosted"),
            "rank_correlation": self.rank_correlation,
        }

    def violin(self) -> dict:
        return violin_payload(self.shap, self.feature_values)


@dataclass(frozen=True)
class SectorExplanation:
    sector: str
    feature_order: tuple[str, ...]  # descending mean |SHAP|
    mean_abs: tuple[float, ...]  # aligned with feature_order
    shap: ShapMatrix
    degenerate: bool

    def __post_init__(self):
        if len(self.feature_order) != len(self.mean_abs):
            raise ValidationError("one mean value per ordered feature required")
        if any(v < 0 for v in self.mean_abs):
            raise ValidationError("mean |SHAP| cannot be negative")
        if any(b > a for a, b in zip(self.mean_abs, self.mean_abs[1:])):
            raise ValidationError("mean |SHAP| must be ordered descending")


@dataclass(frozen=True)
class ClusterExplanation:
    sectors: tuple[SectorExplanation, ...]

    def sector(self, name: str) -> SectorExplanation:
        for s in self.sectors:
            if s.sector == name:
                return s
        raise KeyError(name)

    def payload(self, feature_values=None) -> dict:
        blocks = []
        for s in self.sectors:
            block = {
                "sector": s.sector,
                "features": list(s.feature_order),
                "mean_abs": [float(v) for v in s.mean_abs],
                "degenerate": s.degenerate,
            }
            if feature_values is not None:
                block["violin"] = violin_payload(s.shap, feature_values)
            blocks.append(block)
        return {"sectors": blocks}


def spearman(a, b) -> float:
    """Rank correlation with average ranks on ties."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeMismatchError("inputs must be equal-length vectors")
    if a.size < 2:
        raise ValidationError("rank correlation needs at least two values")
    ra = _average_ranks(a)
    rb = _average_ranks(b)
    da = ra - ra.mean()
    db = rb - rb.mean()
    denom = np.sqrt((da ** 2).sum() * (db ** 2).sum())
    if denom == 0.0:
        raise ValidationError("rank correlation undefined for constant ranks")
    return float((da * db).sum() / denom)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def explain_cvi(panel: ProcessedPanel, cvi: CviResult, n_trees=500,
                seed=0) -> CviExplanation:
    """Fit a forest from the index-member indicators to the index itself,
    cross-check its importance ranking with boosted trees, and attach
    per-sample attributions."""
    if panel.catalog.fingerprint() != cvi.catalog.fingerprint():
        raise ValidationError("panel and index use different catalogs")
    cols = [j for j, ind in enumerate(panel.catalog.indicators)
            if ind.index_member]
    ids = tuple(panel.catalog.indicators[j].id for j in cols)
    X = np.ascontiguousarray(panel.matrix[:, cols])
    y = np.asarray(cvi.cvis, dtype=np.float64)

    forest = fit_forest(X, y, n_trees=n_trees, seed=seed)
    boosted = fit_boosted(X, y, seed=seed)
    shap = tree_shap(forest, X, feature_ids=ids)
    return CviExplanation(
        feature_ids=ids,
        forest=forest,
        forest_importance=importance(forest),
        boosted_importance=importance(boosted),
        rank_correlation=spearman(importance(forest), importance(boosted)),
        shap=shap,
        feature_values=X.copy(),
    )


def explain_clusters(points, model: ClusterModel, n_trees=200, seed=0,
                     min_gain_fraction=0.3, max_depth=3,
                     min_leaf=5) -> ClusterExplanation:
    """One-vs-rest surrogate forest per sector over the clustering features.

    Each surrogate regresses the sector's membership indicator on the
    points. Splits must recover at least min_gain_fraction of the
    indicator's variance, so a sector indistinguishable from the rest
    yields attributions near zero instead of fitted noise; a sector whose
    surrogate finds nothing to split on (or whose indicator is constant)
    is flagged degenerate with a zero explanation.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != len(model.feature_ids):
        raise ShapeMismatchError(
            f"points must be n x {len(model.feature_ids)}"
        )
    if points.shape[0] != len(model.da_ids):
        raise ShapeMismatchError("one point per DA required")

    sectors = []
    for c, name in enumerate(model.sector_names):
        target = (model.assignments == c).astype(np.float64)
        if target.min() == target.max():
            shap = ShapMatrix(
                base_value=float(target[0]),
                phi=np.zeros_like(points),
                feature_ids=model.feature_ids,
            )
            sectors.append(_sector_block(name, shap, degenerate=True))
            continue
        surrogate = fit_forest(points, target, n_trees=n_trees,
                               max_depth=max_depth, min_leaf=min_leaf,
                               min_gain=min_gain_fraction * float(target.var()),
                               seed=seed + c * n_trees)
        shap = tree_shap(surrogate, points, feature_ids=model.feature_ids)
        split_free = all(int(t.feature[0]) < 0 for t in surrogate.trees)
        sectors.append(_sector_block(name, shap, degenerate=split_free))
    return ClusterExplanation(sectors=tuple(sectors))


def _sector_block(name, shap: ShapMatrix, degenerate: bool) -> SectorExplanation:
    mean_abs = shap.mean_abs()
    order = np.argsort(-mean_abs, kind="stable")
    return SectorExplanation(
        sector=name,
        feature_order=tuple(shap.feature_ids[j] for j in order),
        mean_abs=tuple(float(mean_abs[j]) for j in order),
        shap=shap,
        degenerate=degenerate,
    )
