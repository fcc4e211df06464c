from __future__ import annotations

import numpy as np


class ModelError(ValueError):
    pass


class TrainedModel:
    """Common surface of fitted base classifiers.

    Subclasses provide ``decision_scores`` (one raw score per class) and
    ``native_proba``, the uncalibrated score-to-probability map used when a
    class cannot be calibrated. ``seen[c]`` is False for classes absent from
    the training data; those always get probability 0.
    """

    kind = "base"
    class_count: int
    n_features: int
    seen: np.ndarray
    params: dict

    def decision_scores(self, features):
        raise NotImplementedError

    def native_proba(self, scores):
        raise NotImplementedError

    def predict(self, features):
        scores = self.decision_scores(features)
        scores = np.where(self.seen, scores, -np.inf)
        return np.argmax(scores, axis=1)

    def _check(self, features):
        X = np.asarray(features, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ModelError(f"expected {self.n_features} features, got shape {X.shape}")
        return X


def check_training_data(features, labels, class_count=None):
    X = np.ascontiguousarray(features, dtype=np.float64)
    y = np.ascontiguousarray(labels, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ModelError("dimension mismatch between features and labels")
    if class_count is None:
        class_count = int(y.max()) + 1 if y.size else 0
    if y.size and (y.min() < 0 or y.max() >= class_count):
        raise ModelError(f"labels must lie in 0..{class_count - 1}")
    if np.unique(y).size < 2:
        raise ModelError("training data must contain at least 2 classes")
    return X, y, class_count


def balanced_class_weights(labels, class_count):
    """``n / (k * n_c)`` for each of the k classes present, 0 for absent ones."""
    counts = np.bincount(labels, minlength=class_count).astype(np.float64)
    k = np.count_nonzero(counts)
    cw = np.zeros(class_count)
    cw[counts > 0] = labels.size / (k * counts[counts > 0])
    return cw


def balanced_weights(labels, class_count):
    return balanced_class_weights(labels, class_count)[labels]
