"""Pipelines, hyperparameter grids and grid-search model selection."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..dataset import split_validation
from .base import ModelError, check_training_data
from .forest import ForestModel, _check_forest_params, grow_trees
from .linear import fit_linear
from .metrics import METRICS

LINEAR_GRID = {"C": (0.001, 0.01, 0.1, 1, 10, 100, 1000)}
FOREST_GRID = {
    "min_samples_leaf": (1, 5, 9),
    "n_estimators": (5, 10, 20, 30, 40, 50),
    "max_depth": (5, 10, 15, 20, 25, 30),
}
KINDS = ("linear_margin", "random_forest")


@dataclass(frozen=True)
class PipelineSpec:
    id: str
    kind: str
    grid: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ModelError(f"unknown pipeline kind {self.kind!r}")
        if not self.grid or not all(self.grid.values()):
            raise ModelError("empty grid")
        for values in self.grid.values():
            for v in values:
                if not (np.isfinite(v) and v > 0):
                    raise ModelError("grid values must be finite and positive")

    def points(self):
        """Grid points in enumeration (tie-break) order, first key outermost."""
        keys = list(self.grid)
        return [dict(zip(keys, combo)) for combo in itertools.product(*(self.grid[k] for k in keys))]


def default_pipeline(name):
    """``linear`` or ``forest`` with the full hyperparameter grids."""
    if name == "linear":
        return PipelineSpec("linear", "linear_margin", dict(LINEAR_GRID))
    if name == "forest":
        return PipelineSpec("forest", "random_forest", dict(FOREST_GRID))
    raise ModelError(f"unknown pipeline {name!r}")


def _linear_candidates(spec, X, y, class_count, X_val):
    for p in spec.points():
        model = fit_linear(X, y, class_count=class_count, **p)
        yield p, model, model.predict(X_val)


def _forest_candidates(spec, X, y, class_count, seed, X_val):
    # One deep set of trees per min_samples_leaf value serves every
    # (n_estimators, max_depth) pair: tree i depends only on (seed, i) and
    # node randomness on the node path, so prefixes/truncations are exact.
    # Validation predictions reuse running sums over trees per depth cap,
    # which matches ForestModel.decision_scores operation for operation.
    points = spec.points()
    for p in points:
        _check_forest_params(p["min_samples_leaf"], p["n_estimators"], p["max_depth"])
    n_max = max(p["n_estimators"] for p in points)
    d_max = max(p["max_depth"] for p in points)
    seen = np.bincount(y, minlength=class_count) > 0
    X_val = np.ascontiguousarray(X_val)
    grown, sums = {}, {}
    for p in points:
        msl, depth, n_est = p["min_samples_leaf"], p["max_depth"], p["n_estimators"]
        if msl not in grown:
            grown[msl] = grow_trees(X, y, class_count, n_max, msl, d_max, seed)
        if (msl, depth) not in sums:
            acc = np.zeros((X_val.shape[0], class_count))
            running = []
            for tree in grown[msl]:
                acc = acc + tree.proba[tree.apply(X_val, depth)]
                running.append(acc)
            sums[msl, depth] = running
        model = ForestModel(grown[msl], class_count, X.shape[1], seen, dict(p))
        scores = sums[msl, depth][n_est - 1] / n_est
        yield p, model, np.argmax(np.where(seen, scores, -np.inf), axis=1)


def grid_search(spec, features, labels, metric="f1_macro", rng=None, class_count=None,
                validation_fraction=0.2):
    """Select hyperparameters on a stratified hold-out split.

    Every grid point is trained on the train part and scored on the
    validation part; the first best point in grid order wins. The returned
    model carries ``validation`` = (train positions, validation positions)
    into ``features`` and ``scores`` = validation metric per grid point.
    """
    X, y, class_count = check_training_data(features, labels, class_count)
    score_fn = METRICS[metric] if isinstance(metric, str) else metric
    if rng is None:
        rng = np.random.default_rng(0)
    train, val = split_validation(np.arange(y.size), y, validation_fraction, rng)
    if np.unique(y[train]).size < 2:
        raise ModelError("train split contains fewer than 2 classes")
    seed = int(rng.integers(0, 2**63 - 1))

    Xv, yv = X[val], y[val]
    if spec.kind == "linear_margin":
        candidates = _linear_candidates(spec, X[train], y[train], class_count, Xv)
    else:
        candidates = _forest_candidates(spec, X[train], y[train], class_count, seed, Xv)

    best, best_score, scores = None, -np.inf, []
    for params, model, predicted in candidates:
        score = score_fn(predicted, yv, class_count) if val.size else 0.0
        scores.append((params, score))
        if score > best_score:
            best, best_score = model, score
    best.validation = (train, val)
    best.scores = scores
    best.seed = seed
    return best
