"""From-scratch binary classifiers used as defenders (and as the linear surrogate).

Every trained model exposes ``predict(X)`` (0 = Legitimate, 1 = Malicious; a 1-D
input returns a plain int) and ``describe()``. Prediction is deterministic.
"""
from functools import partial

from ..errors import ConfigError
from .neighbors import KNNModel, train_knn
from .svm import LinearModel, RBFModel, smo, train_linear, train_rbf
from .tree import ForestModel, TreeModel, train_forest, train_tree
from .validation import cross_val_accuracy

MODEL_KINDS = ("linear", "knn", "dtree", "rforest", "rbf")

DEFAULT_PARAMS = {
    "linear": {"c": 1.0},
    "knn": {"k": 3},
    "dtree": {"max_depth": None, "min_leaf": 1},
    "rforest": {"n_trees": 50},
    "rbf": {"gamma": 0.1, "c": 1.0},
}


def make_trainer(kind: str, seed=0, **overrides):
    """A ``Dataset -> model`` callable for the given model kind identifier."""
    if kind not in MODEL_KINDS:
        raise ConfigError(f"unknown defender {kind!r}; choose from {MODEL_KINDS}")
    params = {**DEFAULT_PARAMS[kind], **overrides}
    if kind == "linear":
        return partial(train_linear, **params)
    if kind == "knn":
        return partial(train_knn, **params)
    if kind == "dtree":
        return partial(train_tree, **params)
    if kind == "rforest":
        return partial(train_forest, seed=seed, **params)
    return partial(train_rbf, **params)


__all__ = [
    "MODEL_KINDS", "DEFAULT_PARAMS", "make_trainer", "cross_val_accuracy", "smo",
    "LinearModel", "RBFModel", "KNNModel", "TreeModel", "ForestModel",
    "train_linear", "train_rbf", "train_knn", "train_tree", "train_forest",
]
