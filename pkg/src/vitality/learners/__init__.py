"""From-scratch learners: CART/forest/boosted trees, OLS, and a small MLP."""

from .cart import (
    KINDS,
    Leaf,
    Split,
    Tree,
    TreeEnsemble,
    ensemble_from_json,
    ensemble_to_json,
    fit_boosted,
    fit_forest,
    fit_tree,
    importance,
)
from .linear import LinearModel, fit_linear, mse
from .mlp import MLPModel, fit_mlp, loss_and_grad, predict_mlp

__all__ = [
    "KINDS",
    "Leaf",
    "Split",
    "Tree",
    "TreeEnsemble",
    "ensemble_from_json",
    "ensemble_to_json",
    "fit_boosted",
    "fit_forest",
    "fit_tree",
    "importance",
    "LinearModel",
    "fit_linear",
    "mse",
    "MLPModel",
    "fit_mlp",
    "loss_and_grad",
    "predict_mlp",
]
