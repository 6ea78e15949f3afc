"""Random forest classifier built from scratch (CART trees, Gini impurity).

Small and deterministic on purpose: trees are grown with a seeded generator
each, so the same (data, seed) pair always yields the same predictions. Scope
is what the feature-selection cost function needs, nothing more.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import mix_seed


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 50
    max_depth: int = 12
    min_samples_split: int = 2
    feature_rule: str = "sqrt"  # features considered per split
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.feature_rule not in ("sqrt", "all"):
            raise ValueError(f"unknown feature_rule {self.feature_rule!r}")


class _Node:
    __slots__ = ("feature", "threshold", "left", "right", "prediction")

    def __init__(self):
        self.feature = None
        self.threshold = None
        self.left = None
        self.right = None
        self.prediction = None


def _gini_best_split(column, y, n_classes):
    """Best threshold of one feature column by weighted Gini of the two sides.

    Scans midpoints between consecutive distinct sorted values using prefix
    class counts, so the whole column costs one sort plus O(n * classes).
    """
    order = np.argsort(column, kind="stable")
    values = column[order]
    labels = y[order]
    n = len(values)
    one_hot = np.zeros((n, n_classes))
    one_hot[np.arange(n), labels] = 1.0
    left_counts = np.cumsum(one_hot, axis=0)  # counts for splits after row i
    total = left_counts[-1]

    # candidate boundaries: positions where the value actually changes
    change = np.nonzero(values[1:] > values[:-1])[0]
    if len(change) == 0:
        return None, None
    n_left = (change + 1).astype(float)
    n_right = n - n_left
    lc = left_counts[change]
    rc = total - lc
    gini_left = 1.0 - ((lc / n_left[:, None]) ** 2).sum(axis=1)
    gini_right = 1.0 - ((rc / n_right[:, None]) ** 2).sum(axis=1)
    weighted = (n_left * gini_left + n_right * gini_right) / n
    best = int(np.argmin(weighted))
    threshold = 0.5 * (values[change[best]] + values[change[best] + 1])
    return float(weighted[best]), float(threshold)


def _majority(y, n_classes) -> int:
    counts = np.bincount(y, minlength=n_classes)
    return int(np.argmax(counts))  # ties resolve to the lowest class index


class DecisionTree:
    """CART classifier with random feature subsets per split."""

    def __init__(self, params: ForestParams, n_classes: int, seed: int):
        self.params = params
        self.n_classes = n_classes
        self.rng = np.random.default_rng(seed)
        self.root = None

    def fit(self, X, y):
        self.root = self._build(X, y, depth=0)
        return self

    def _n_candidates(self, n_features: int) -> int:
        if self.params.feature_rule == "all":
            return n_features
        return max(1, int(math.sqrt(n_features) + 0.5))

    def _build(self, X, y, depth):
        node = _Node()
        node.prediction = _majority(y, self.n_classes)
        if (depth >= self.params.max_depth
                or len(y) < self.params.min_samples_split
                or len(np.unique(y)) == 1):
            return node

        n_features = X.shape[1]
        k = self._n_candidates(n_features)
        candidates = self.rng.permutation(n_features)[:k]
        best_gini, best_feature, best_threshold = None, None, None
        for f in candidates:
            gini, threshold = _gini_best_split(X[:, f], y, self.n_classes)
            if gini is None:
                continue
            if best_gini is None or gini < best_gini:
                best_gini, best_feature, best_threshold = gini, int(f), threshold
        if best_feature is None:
            return node

        mask = X[:, best_feature] <= best_threshold
        node.feature = best_feature
        node.threshold = best_threshold
        node.left = self._build(X[mask], y[mask], depth + 1)
        node.right = self._build(X[~mask], y[~mask], depth + 1)
        return node

    def predict(self, X):
        out = np.empty(len(X), dtype=np.int64)
        for i, row in enumerate(X):
            node = self.root
            while node.feature is not None:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.prediction
        return out


class RandomForest:
    """Bootstrap ensemble of CART trees with majority voting."""

    def __init__(self, params: ForestParams | None = None, seed: int = 0):
        self.params = params or ForestParams()
        self.seed = int(seed)
        self.trees: list[DecisionTree] = []
        self.n_classes = 0

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if len(X) != len(y):
            raise ValueError("features and labels disagree in length")
        if len(X) == 0:
            raise ValueError("cannot fit on an empty dataset")
        self.n_classes = int(y.max()) + 1
        self.trees = []
        for t in range(self.params.n_trees):
            tree_seed = mix_seed(self.seed, "tree", t)
            rng = np.random.default_rng(mix_seed(self.seed, "bootstrap", t))
            if self.params.bootstrap:
                idx = rng.integers(0, len(X), size=len(X))
                Xt, yt = X[idx], y[idx]
            else:
                Xt, yt = X, y
            self.trees.append(DecisionTree(self.params, self.n_classes, tree_seed).fit(Xt, yt))
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        votes = np.zeros((len(X), self.n_classes), dtype=np.int64)
        for tree in self.trees:
            pred = tree.predict(X)
            votes[np.arange(len(X)), pred] += 1
        return np.argmax(votes, axis=1)  # ties resolve to the lowest class index

    def accuracy(self, X, y) -> float:
        y = np.asarray(y, dtype=np.int64)
        return float(np.mean(self.predict(X) == y))
