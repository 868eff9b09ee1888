"""Information-gain decision trees and bagged forests of them.

Simplified C4.5: binary threshold splits, no pruning, depth/leaf-size limits instead.
Ties: equal gain goes to the lowest feature index, then the lowest threshold;
majority ties in a leaf and even forest votes resolve to Malicious.
"""
from __future__ import annotations

import math

import numpy as np

from ..dataspace import Dataset
from ..errors import ContractError

LEAF = -1


def _entropy(pos, total):
    p = np.divide(pos, total, out=np.zeros_like(pos, dtype=float), where=total > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -(np.where(p > 0, p * np.log2(p), 0.0) + np.where(p < 1, (1 - p) * np.log2(1 - p), 0.0))
    return h


def best_split(X, y, features, min_leaf=1):
    """Exhaustive threshold scan. Returns (gain, feature, threshold) or None.

    Thresholds sit midway between consecutive distinct values; ``x <= t`` goes left.
    """
    n = len(y)
    total_pos = y.sum()
    parent = _entropy(np.array([total_pos], dtype=float), np.array([n], dtype=float))[0]
    best = None
    for f in sorted(features):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        cum_pos = np.cumsum(y[order])[:-1].astype(float)
        n_left = np.arange(1, n, dtype=float)
        valid = xs[1:] > xs[:-1]
        valid &= (n_left >= min_leaf) & (n - n_left >= min_leaf)
        if not valid.any():
            continue
        h_left = _entropy(cum_pos, n_left)
        h_right = _entropy(total_pos - cum_pos, n - n_left)
        gain = parent - (n_left * h_left + (n - n_left) * h_right) / n
        gain = np.where(valid, gain, -np.inf)
        k = int(np.argmax(gain))  # first max -> lowest threshold
        g = float(gain[k])
        if best is None or g > best[0] + 1e-12:
            best = (g, f, (xs[k] + xs[k + 1]) / 2.0)
    if best is None or best[0] <= 1e-12:
        return None
    return best


class TreeModel:
    kind = "dtree"

    def __init__(self, feature, threshold, left, right, value, params):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=np.int64)
        self.params = params
        # plain lists for the per-probe path; numpy indexing dominates there
        self._nodes = list(zip(self.feature.tolist(), self.threshold.tolist(),
                               self.left.tolist(), self.right.tolist(), self.value.tolist()))

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def depth(self):
        def walk(node):
            if self.feature[node] == LEAF:
                return 0
            return 1 + max(walk(self.left[node]), walk(self.right[node]))
        return walk(0)

    def predict_one(self, x) -> int:
        nodes = self._nodes
        f, t, l, r, v = nodes[0]
        while f != LEAF:
            f, t, l, r, v = nodes[l if x[f] <= t else r]
        return v

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return self.predict_one(X.tolist())
        node = np.zeros(len(X), dtype=np.int64)
        active = self.feature[node] != LEAF
        while active.any():
            idx = np.flatnonzero(active)
            cur = node[idx]
            go_left = X[idx, self.feature[cur]] <= self.threshold[cur]
            node[idx] = np.where(go_left, self.left[cur], self.right[cur])
            active[idx] = self.feature[node[idx]] != LEAF
        return self.value[node]

    def describe(self):
        return "dtree(" + ", ".join(f"{k}={v}" for k, v in self.params.items()) + ")"


def _grow(X, y, max_depth, min_leaf, n_features, rng):
    feature, threshold, left, right, value = [], [], [], [], []
    d = X.shape[1]

    def new_node(idx):
        pos = int(y[idx].sum())
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(int(2 * pos >= len(idx)))
        return len(feature) - 1

    root = new_node(np.arange(len(y)))
    stack = [(root, np.arange(len(y)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        pos = int(y[idx].sum())
        if pos in (0, len(idx)) or (max_depth is not None and depth >= max_depth):
            continue
        if len(idx) < 2 * min_leaf:
            continue
        if n_features is None or n_features >= d:
            feats = range(d)
        else:
            feats = rng.choice(d, size=n_features, replace=False)
        split = best_split(X[idx], y[idx], feats, min_leaf)
        if split is None:
            continue
        _, f, t = split
        mask = X[idx, f] <= t
        li = new_node(idx[mask])
        ri = new_node(idx[~mask])
        feature[node], threshold[node] = int(f), float(t)
        left[node], right[node] = li, ri
        stack.append((ri, idx[~mask], depth + 1))
        stack.append((li, idx[mask], depth + 1))
    return feature, threshold, left, right, value


def train_tree(ds: Dataset, max_depth: int | None = None, min_leaf: int = 1,
               n_features: int | None = None, rng=None) -> TreeModel:
    if len(ds) == 0:
        raise ContractError("cannot grow a tree on an empty dataset")
    if min_leaf < 1:
        raise ContractError("min_leaf must be >= 1")
    if rng is None:
        rng = np.random.default_rng(0)
    arrays = _grow(ds.X, ds.y, max_depth, min_leaf, n_features, rng)
    return TreeModel(*arrays, params={"max_depth": max_depth, "min_leaf": min_leaf})


class ForestModel:
    kind = "rforest"

    def __init__(self, trees, seed, bootstrap):
        self.trees = trees
        self.seed = seed
        self.bootstrap = bootstrap

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            x = X.tolist()
            votes = sum(t.predict_one(x) for t in self.trees)
            return int(2 * votes >= len(self.trees))
        votes = sum(t.predict(X) for t in self.trees)
        return (2 * votes >= len(self.trees)).astype(np.int64)

    def describe(self):
        return f"rforest(n_trees={len(self.trees)}, bootstrap={self.bootstrap}, seed={self.seed})"


def train_forest(ds: Dataset, n_trees: int = 50, seed=0, bootstrap: bool = True,
                 max_features: int | str | None = "sqrt", max_depth=None, min_leaf=1) -> ForestModel:
    """Bagged trees, each split drawing ``ceil(sqrt(d))`` candidate features by default."""
    if n_trees < 1:
        raise ContractError("n_trees must be >= 1")
    if len(ds) == 0:
        raise ContractError("cannot grow a forest on an empty dataset")
    d = ds.d
    if max_features == "sqrt":
        n_features = math.ceil(math.sqrt(d))
    elif max_features is None:
        n_features = d
    else:
        n_features = int(max_features)
    rng = np.random.default_rng(seed)
    trees = []
    n = len(ds)
    for _ in range(n_trees):
        idx = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
        X, y = ds.X[idx], ds.y[idx]
        arrays = _grow(X, y, max_depth, min_leaf, n_features, rng)
        trees.append(TreeModel(*arrays, params={"max_depth": max_depth, "min_leaf": min_leaf}))
    return ForestModel(trees, seed, bootstrap)
