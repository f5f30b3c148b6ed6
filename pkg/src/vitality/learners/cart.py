"""CART regression trees, random forests, and a minimal boosted cross-check.

Trees are stored as flat parallel arrays (node 0 = root, left == -1 marks a
leaf) so prediction and Shapley attribution run in compiled kernels. Every
node, internal ones included, carries the mean target of its samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatchError, ValidationError
from ..kernels import best_split, predict_tree

KINDS = ("forest_mean", "boosted_sum")


@dataclass(frozen=True)
class Leaf:
    value: float
    n_samples: int


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "Leaf | Split"
    right: "Leaf | Split"
    n_samples: int
    impurity_decrease: float


@dataclass(frozen=True)
class Tree:
    """Flat-array regression tree; left branch takes x[feature] <= threshold."""

    left: np.ndarray
    right: np.ndarray
    feature: np.ndarray
    threshold: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    decrease: np.ndarray
    max_depth: int = field(init=False)

    def __post_init__(self):
        depth = np.zeros(self.left.shape[0], dtype=np.int64)
        deepest = 0
        for i in range(self.left.shape[0]):
            if self.left[i] != -1:
                depth[self.left[i]] = depth[i] + 1
                depth[self.right[i]] = depth[i] + 1
        if depth.size:
            deepest = int(depth.max())
        object.__setattr__(self, "max_depth", deepest)

    @property
    def n_nodes(self) -> int:
        return self.left.shape[0]

    @property
    def root(self) -> Leaf | Split:
        return self._view(0)

    def _view(self, i: int) -> Leaf | Split:
        if self.left[i] == -1:
            return Leaf(value=float(self.value[i]), n_samples=int(self.n_samples[i]))
        return Split(
            feature=int(self.feature[i]),
            threshold=float(self.threshold[i]),
            left=self._view(int(self.left[i])),
            right=self._view(int(self.right[i])),
            n_samples=int(self.n_samples[i]),
            impurity_decrease=float(self.decrease[i]),
        )

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        out = np.empty(X.shape[0], dtype=np.float64)
        predict_tree(
            self.left, self.right, self.feature, self.threshold, self.value, X, out
        )
        return out


@dataclass(frozen=True)
class TreeEnsemble:
    trees: tuple[Tree, ...]
    kind: str
    n_features: int
    base_score: float = 0.0
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"ensemble kind must be one of {KINDS}, got {self.kind!r}")
        if not self.trees:
            raise ValidationError("ensemble needs at least one tree")

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        acc = np.zeros(X.shape[0], dtype=np.float64)
        for tree in self.trees:
            acc += tree.predict(X)
        if self.kind == "forest_mean":
            return acc / len(self.trees)
        return self.base_score + self.rate * acc


class _Builder:
    """Accumulates flat node arrays during a preorder recursive build."""

    def __init__(self, X, y, max_depth, min_leaf, subset_size, rng,
                 min_gain=0.0):
        self.X = X
        self.y = y
        self.max_depth = math.inf if max_depth is None else max_depth
        self.min_leaf = min_leaf
        self.min_gain = min_gain
        self.p = X.shape[1]
        self.subset = min(subset_size, self.p)
        self.rng = rng
        self.left: list[int] = []
        self.right: list[int] = []
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.value: list[float] = []
        self.n_samples: list[int] = []
        self.decrease: list[float] = []

    def _alloc(self, rows) -> int:
        idx = len(self.left)
        self.left.append(-1)
        self.right.append(-1)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.value.append(float(np.mean(self.y[rows])))
        self.n_samples.append(rows.shape[0])
        self.decrease.append(0.0)
        return idx

    def build(self, rows, depth=0) -> int:
        idx = self._alloc(rows)
        if depth >= self.max_depth or rows.shape[0] < 2 * self.min_leaf:
            return idx
        if self.subset >= self.p:
            feats = np.arange(self.p, dtype=np.int64)
        else:
            feats = np.sort(self.rng.permutation(self.p)[: self.subset]).astype(np.int64)
        feat, thresh, gain = best_split(self.X, self.y, rows, feats, self.min_leaf)
        if feat < 0 or gain <= self.min_gain:
            return idx
        mask = self.X[rows, feat] <= thresh
        self.feature[idx] = int(feat)
        self.threshold[idx] = float(thresh)
        self.decrease[idx] = float(gain)
        left_idx = self.build(rows[mask], depth + 1)
        right_idx = self.build(rows[~mask], depth + 1)
        self.left[idx] = left_idx
        self.right[idx] = right_idx
        return idx

    def tree(self) -> Tree:
        return Tree(
            left=np.asarray(self.left, dtype=np.int64),
            right=np.asarray(self.right, dtype=np.int64),
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            value=np.asarray(self.value, dtype=np.float64),
            n_samples=np.asarray(self.n_samples, dtype=np.int64),
            decrease=np.asarray(self.decrease, dtype=np.float64),
        )


def _check_xy(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ShapeMismatchError(f"X {X.shape} incompatible with y {y.shape}")
    if X.shape[0] == 0:
        raise ShapeMismatchError("need at least one sample")
    return X, y


def fit_tree(X, y, max_depth=None, min_leaf=2, feature_subset_size=None,
             rng_seed=None, min_gain=0.0) -> Tree:
    """Greedy variance-reduction CART.

    Candidate features at each split attempt are a seeded random subset of
    feature_subset_size columns (all columns when the size covers them, in
    which case no randomness is consumed). A node splits only when the best
    split strictly decreases weighted variance by more than min_gain and
    leaves both children with at least min_leaf samples.
    """
    X, y = _check_xy(X, y)
    if min_leaf < 1:
        raise ValidationError(f"min_leaf must be >= 1, got {min_leaf}")
    if min_gain < 0.0:
        raise ValidationError(f"min_gain must be >= 0, got {min_gain}")
    p = X.shape[1]
    subset = p if feature_subset_size is None else feature_subset_size
    if subset < 1:
        raise ValidationError(f"feature_subset_size must be >= 1, got {subset}")
    if subset < p and rng_seed is None:
        raise ValidationError("rng_seed is required when subsampling features")
    rng = np.random.default_rng(rng_seed)
    builder = _Builder(X, y, max_depth, min_leaf, subset, rng, min_gain)
    builder.build(np.arange(X.shape[0], dtype=np.int64))
    return builder.tree()


def _build_with_rng(X, y, rows, max_depth, min_leaf, subset, rng,
                    min_gain=0.0) -> Tree:
    builder = _Builder(X, y, max_depth, min_leaf, subset, rng, min_gain)
    builder.build(rows)
    return builder.tree()


def fit_forest(X, y, n_trees=500, bootstrap=True, max_depth=None, min_leaf=2,
               feature_subset_size=None, seed=0, min_gain=0.0) -> TreeEnsemble:
    """Random forest: tree i uses rng seed+i for its resample and subsets."""
    X, y = _check_xy(X, y)
    if n_trees < 1:
        raise ValidationError(f"n_trees must be >= 1, got {n_trees}")
    if min_gain < 0.0:
        raise ValidationError(f"min_gain must be >= 0, got {min_gain}")
    n, p = X.shape
    subset = math.ceil(p / 3) if feature_subset_size is None else feature_subset_size
    trees = []
    for i in range(n_trees):
        rng = np.random.default_rng(seed + i)
        if bootstrap:
            rows = rng.integers(0, n, n)
        else:
            rows = np.arange(n, dtype=np.int64)
        trees.append(
            _build_with_rng(X, y, rows, max_depth, min_leaf, subset, rng, min_gain)
        )
    return TreeEnsemble(trees=tuple(trees), kind="forest_mean", n_features=p)


def fit_boosted(X, y, n_rounds=200, depth=3, rate=0.1, seed=0) -> TreeEnsemble:
    """Stagewise least-squares boosting; each round fits the residuals."""
    X, y = _check_xy(X, y)
    if n_rounds < 1:
        raise ValidationError(f"n_rounds must be >= 1, got {n_rounds}")
    n, p = X.shape
    base = float(np.mean(y))
    pred = np.full(n, base, dtype=np.float64)
    trees = []
    rows = np.arange(n, dtype=np.int64)
    for i in range(n_rounds):
        rng = np.random.default_rng(seed + i)
        tree = _build_with_rng(X, y - pred, rows, depth, 1, p, rng)
        pred += rate * tree.predict(X)
        trees.append(tree)
    return TreeEnsemble(
        trees=tuple(trees), kind="boosted_sum", n_features=p,
        base_score=base, rate=rate,
    )


def importance(ensemble: TreeEnsemble) -> np.ndarray:
    """Per-feature impurity-decrease importances, normalized to sum 1.

    Each split contributes its decrease weighted by the fraction of root
    samples reaching it; contributions are averaged over trees. All zeros
    when no tree contains a split.
    """
    total = np.zeros(ensemble.n_features, dtype=np.float64)
    for tree in ensemble.trees:
        root_n = tree.n_samples[0]
        for i in range(tree.n_nodes):
            if tree.left[i] != -1:
                total[tree.feature[i]] += tree.decrease[i] * tree.n_samples[i] / root_n
    total /= len(ensemble.trees)
    s = total.sum()
    if s <= 0.0:
        return np.zeros(ensemble.n_features, dtype=np.float64)
    return total / s


def ensemble_to_json(ensemble: TreeEnsemble) -> dict:
    """Serializable tree dump used for report reproducibility."""
    return {
        "kind": ensemble.kind,
        "n_features": ensemble.n_features,
        "base_score": ensemble.base_score,
        "rate": ensemble.rate,
        "trees": [
            {
                "left": t.left.tolist(),
                "right": t.right.tolist(),
                "feature": t.feature.tolist(),
                "threshold": t.threshold.tolist(),
                "value": t.value.tolist(),
                "n_samples": t.n_samples.tolist(),
                "decrease": t.decrease.tolist(),
            }
            for t in ensemble.trees
        ],
    }


def ensemble_from_json(doc: dict) -> TreeEnsemble:
    trees = tuple(
        Tree(
            left=np.asarray(t["left"], dtype=np.int64),
            right=np.asarray(t["right"], dtype=np.int64),
            feature=np.asarray(t["feature"], dtype=np.int64),
            threshold=np.asarray(t["threshold"], dtype=np.float64),
            value=np.asarray(t["value"], dtype=np.float64),
            n_samples=np.asarray(t["n_samples"], dtype=np.int64),
            decrease=np.asarray(t["decrease"], dtype=np.float64),
        )
        for t in doc["trees"]
    )
    return TreeEnsemble(
        trees=trees,
        kind=doc["kind"],
        n_features=int(doc["n_features"]),
        base_score=float(doc["base_score"]),
        rate=float(doc["rate"]),
    )
