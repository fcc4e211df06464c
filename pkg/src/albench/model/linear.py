"""One-vs-rest linear margin classifier trained by full-batch hinge subgradient descent."""

from __future__ import annotations

import numpy as np

from .base import ModelError, TrainedModel, balanced_weights, check_training_data

DEFAULT_EPOCHS = 20


class LinearModel(TrainedModel):
    kind = "linear_margin"

    def __init__(self, coef, intercept_scale, class_count, seen, params):
        self.coef = coef                      # (class_count, dim + 1); last column is the bias weight
        self.intercept_scale = intercept_scale
        self.class_count = class_count
        self.seen = seen
        self.params = params
        self.n_features = coef.shape[1] - 1

    def decision_scores(self, features):
        X = self._check(features)
        return X @ self.coef[:, :-1].T + self.intercept_scale * self.coef[:, -1]

    def native_proba(self, scores):
        return 1.0 / (1.0 + np.exp(-scores))


def _pegasos(X, target, weights, lam, epochs):
    # Full-batch Pegasos on lam/2 |w|^2 + mean_i weights_i * hinge(target_i * w.x_i);
    # each epoch is one pass computing the exact subgradient over every row.
    n = X.shape[0]
    w = np.zeros(X.shape[1])
    radius = np.sqrt(2.0 / lam)
    for t in range(1, epochs + 1):
        eta = 1.0 / (lam * t)
        margin = target * (X @ w)
        active = margin < 1.0
        g = X[active].T @ (weights[active] * target[active]) / n
        w = (1.0 - eta * lam) * w + eta * g
        norm = np.sqrt(w @ w)
        if norm > radius:
            w = w * (radius / norm)
    return w


def fit_linear(features, labels, C, class_weight="balanced", class_count=None, epochs=DEFAULT_EPOCHS):
    """Train one linear scorer per class against the rest.

    The objective per class is ``|w|^2 / 2 + C * mean_i s_i * hinge(.)`` with
    balanced sample weights ``s_i = n / (k * n_{y_i})``. The bias is a weight
    on a constant column equal to the mean row norm, so the fit is
    equivariant under rescaling the features (with ``C`` rescaled by the
    inverse square) and invariant under duplicating every row.
    """
    X, y, class_count = check_training_data(features, labels, class_count)
    if not C > 0:
        raise ModelError("C must be positive")
    if class_weight != "balanced":
        raise ModelError("only class_weight='balanced' is supported")
    scale = float(np.sqrt((X * X).sum(axis=1)).mean()) or 1.0
    Xa = np.hstack([X, np.full((X.shape[0], 1), scale)])
    weights = balanced_weights(y, class_count)
    seen = np.bincount(y, minlength=class_count) > 0
    coef = np.zeros((class_count, Xa.shape[1]))
    for c in range(class_count):
        if seen[c]:
            target = np.where(y == c, 1.0, -1.0)
            coef[c] = _pegasos(Xa, target, weights, 1.0 / C, epochs)
    return LinearModel(coef, scale, class_count, seen, {"C": C})
