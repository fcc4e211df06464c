"""Bagged Gini decision trees with sqrt(d) features per split and balanced class weights."""

from __future__ import annotations

import math

import numpy as np

from .. import _kernels
from .._kernels._common import bootstrap_indices, tree_seed
from .base import ModelError, TrainedModel, balanced_class_weights, check_training_data

MAX_SUPPORTED_DEPTH = 62


class Tree:
    __slots__ = ("feature", "threshold", "left", "right", "depth", "proba")

    def __init__(self, feature, threshold, left, right, depth, counts, class_weight):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.depth = depth
        w = counts * class_weight
        self.proba = w / w.sum(axis=1, keepdims=True)

    @property
    def node_count(self):
        return self.feature.shape[0]

    def apply(self, X, max_depth):
        return _kernels.apply_tree(X, self.feature, self.threshold, self.left, self.right,
                                   self.depth, max_depth)


def grow_trees(X, y, class_count, n_estimators, min_samples_leaf, max_depth, seed):
    """Grow ``n_estimators`` trees; tree ``i`` depends only on ``(seed, i)``."""
    cw = balanced_class_weights(y, class_count)
    max_features = max(1, int(math.sqrt(X.shape[1])))
    trees = []
    for i in range(n_estimators):
        ts = tree_seed(seed, i)
        samples = bootstrap_indices(ts, X.shape[0])
        arrays = _kernels.build_tree(X, y, cw, samples, class_count, max_depth,
                                     min_samples_leaf, max_features, ts)
        trees.append(Tree(*arrays, cw))
    return trees


class ForestModel(TrainedModel):
    """Averaged leaf class distributions of the first ``n_estimators`` trees.

    Trees are evaluated with a depth cap, so a model over trees grown deeper
    than ``max_depth`` predicts exactly like one grown to ``max_depth``.
    """

    kind = "random_forest"

    def __init__(self, trees, class_count, n_features, seen, params):
        self.trees = trees
        self.class_count = class_count
        self.n_features = n_features
        self.seen = seen
        self.params = params

    def decision_scores(self, features):
        X = np.ascontiguousarray(self._check(features))
        cap = self.params["max_depth"]
        trees = self.trees[: self.params["n_estimators"]]
        out = np.zeros((X.shape[0], self.class_count))
        for tree in trees:
            out = out + tree.proba[tree.apply(X, cap)]
        return out / len(trees)

    def native_proba(self, scores):
        return scores

    def votes(self, features):
        """Per-tree predicted class, shape ``(n_estimators, n_rows)``."""
        X = np.ascontiguousarray(self._check(features))
        cap = self.params["max_depth"]
        return np.stack([np.argmax(t.proba[t.apply(X, cap)], axis=1)
                         for t in self.trees[: self.params["n_estimators"]]])


def _check_forest_params(min_samples_leaf, n_estimators, max_depth):
    if min_samples_leaf < 1 or n_estimators < 1 or max_depth < 1:
        raise ModelError("forest parameters must be positive")
    if max_depth > MAX_SUPPORTED_DEPTH:
        raise ModelError(f"max_depth above {MAX_SUPPORTED_DEPTH} is not supported")


def fit_forest(features, labels, min_samples_leaf, n_estimators, max_depth, seed, class_count=None):
    """Train a random forest; deterministic given ``seed`` (an int)."""
    X, y, class_count = check_training_data(features, labels, class_count)
    _check_forest_params(min_samples_leaf, n_estimators, max_depth)
    trees = grow_trees(X, y, class_count, n_estimators, min_samples_leaf, max_depth, seed)
    seen = np.bincount(y, minlength=class_count) > 0
    params = {"min_samples_leaf": min_samples_leaf, "n_estimators": n_estimators,
              "max_depth": max_depth}
    return ForestModel(trees, class_count, X.shape[1], seen, params)
