"""Brute-force Shapley values by feature-subset enumeration.

Exponential in the feature count, so only usable on tiny models; the fast
path in treeshap must agree with this on everything small enough to check.
"""

from __future__ import annotations

from itertools import combinations
from math import factorial

import numpy as np

from ..learners.cart import Tree, TreeEnsemble


def conditional_expectation(tree: Tree, x, known) -> float:
    """E[tree | features in `known` pinned to x], by weighted descent.

    Unknown features average both children by their training populations.
    """
    return _descend(tree, 0, np.asarray(x, dtype=np.float64), frozenset(known))


def _descend(tree: Tree, node: int, x, known) -> float:
    f = int(tree.feature[node])
    if f < 0:
        return float(tree.value[node])
    if f in known:
        if x[f] <= tree.threshold[node]:
            return _descend(tree, int(tree.left[node]), x, known)
        return _descend(tree, int(tree.right[node]), x, known)
    left = int(tree.left[node])
    right = int(tree.right[node])
    nl = float(tree.n_samples[left])
    nr = float(tree.n_samples[right])
    return (
        nl * _descend(tree, left, x, known) + nr * _descend(tree, right, x, known)
    ) / (nl + nr)


def ensemble_expectation(ensemble: TreeEnsemble, x, known) -> float:
    parts = [conditional_expectation(t, x, known) for t in ensemble.trees]
    if ensemble.kind == "forest_mean":
        return float(np.mean(parts))
    return float(ensemble.base_score + ensemble.rate * np.sum(parts))


def shapley_brute(ensemble: TreeEnsemble, x):
    """Exact Shapley values over all 2^p feature subsets.

    Returns (base_value, phi). The subset value function is the ensemble's
    conditional expectation with the subset's features pinned to x.
    """
    x = np.asarray(x, dtype=np.float64)
    p = int(ensemble.n_features)
    cache: dict[frozenset, float] = {}

    def value(subset) -> float:
        key = frozenset(subset)
        if key not in cache:
            cache[key] = ensemble_expectation(ensemble, x, key)
        return cache[key]

    phi = np.zeros(p, dtype=np.float64)
    for j in range(p):
        others = [k for k in range(p) if k != j]
        for r in range(len(others) + 1):
            weight = factorial(r) * factorial(p - r - 1) / factorial(p)
            for subset in combinations(others, r):
                phi[j] += weight * (value(subset + (j,)) - value(subset))
    return value(()), phi
