"""Per-class Platt scaling with one-vs-rest renormalisation."""

from __future__ import annotations

import warnings

import numpy as np

from .base import ModelError


class CalibrationWarning(UserWarning):
    pass


def _sigmoid_nll(scores, targets, A, B):
    f = scores * A + B
    # log(1 + exp(-|f|)) form keeps large |f| finite
    return float(np.sum(np.where(f >= 0, targets * f + np.log1p(np.exp(-f)),
                                 (targets - 1.0) * f + np.log1p(np.exp(f)))))


def fit_sigmoid(scores, positive, max_iter=100, min_step=1e-10, sigma=1e-12, eps=1e-5):
    """Fit ``p(s) = 1 / (1 + exp(A*s + B))`` to binary outcomes.

    Newton's method with backtracking line search on the likelihood with
    Platt's smoothed targets ``(N+ + 1)/(N+ + 2)`` and ``1/(N- + 2)``
    (Lin, Lin and Weng's numerically stable formulation).

    Returns
    -------
    (A, B) : tuple of float
    """
    scores = np.asarray(scores, dtype=np.float64)
    positive = np.asarray(positive, dtype=bool)
    if not np.all(np.isfinite(scores)):
        raise ModelError("non-finite scores")
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    t = np.where(positive, hi, lo)

    A = 0.0
    B = float(np.log((n_neg + 1.0) / (n_pos + 1.0)))
    fval = _sigmoid_nll(scores, t, A, B)
    for _ in range(max_iter):
        f = scores * A + B
        ef = np.exp(-np.abs(f))
        p = np.where(f >= 0, ef / (1.0 + ef), 1.0 / (1.0 + ef))
        q = 1.0 - p
        d2 = p * q
        h11 = sigma + float(np.sum(scores * scores * d2))
        h22 = sigma + float(np.sum(d2))
        h21 = float(np.sum(scores * d2))
        d1 = t - p
        g1 = float(np.sum(scores * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < eps and abs(g2) < eps:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= min_step:
            nA = A + step * dA
            nB = B + step * dB
            nf = _sigmoid_nll(scores, t, nA, nB)
            if nf < fval + 1e-4 * step * gd:
                A, B, fval = nA, nB, nf
                break
            step /= 2.0
        if step < min_step:
            break
    return A, B


def apply_sigmoid(scores, A, B):
    f = scores * A + B
    ef = np.exp(-np.abs(f))
    return np.where(f >= 0, ef / (1.0 + ef), 1.0 / (1.0 + ef))


class CalibratedModel:
    """A trained model plus one sigmoid per class.

    ``params[c]`` is ``(A_c, B_c)`` or ``None`` when class ``c`` fell back to
    the base model's native probability map.
    """

    def __init__(self, base, params):
        self.base = base
        self.params = params
        self.fallback = any(p is None for p in params)

    @property
    def class_count(self):
        return self.base.class_count

    def predict_proba(self, features):
        scores = self.base.decision_scores(features)
        return self.proba_from_scores(scores)

    def proba_from_scores(self, scores):
        scores = np.asarray(scores, dtype=np.float64)
        native = None
        cols = []
        for c, p in enumerate(self.params):
            if not self.base.seen[c]:
                cols.append(np.zeros(scores.shape[0]))
            elif p is None:
                if native is None:
                    native = self.base.native_proba(scores)
                cols.append(native[:, c])
            else:
                cols.append(apply_sigmoid(scores[:, c], *p))
        P = np.column_stack(cols)
        total = P.sum(axis=1, keepdims=True)
        uniform = np.where(self.base.seen, 1.0, 0.0) / max(int(self.base.seen.sum()), 1)
        return np.where(total > 0, P / np.where(total > 0, total, 1.0), uniform)

    def predict(self, features):
        return np.argmax(self.predict_proba(features), axis=1)


def platt_calibrate(model, val_features, val_labels):
    """Fit one sigmoid per class on validation scores (class-vs-rest).

    A class whose validation slice lacks positives or negatives keeps the
    base model's native probabilities; ``CalibratedModel.fallback`` is then
    set and a :class:`CalibrationWarning` is emitted.
    """
    val_labels = np.asarray(val_labels, dtype=np.int64)
    scores = model.decision_scores(val_features)
    if not np.all(np.isfinite(scores)):
        raise ModelError("non-finite scores")
    params = []
    for c in range(model.class_count):
        pos = val_labels == c
        if not model.seen[c] or pos.all() or not pos.any():
            params.append(None)
            continue
        params.append(fit_sigmoid(scores[:, c], pos))
    calibrated = CalibratedModel(model, params)
    if calibrated.fallback:
        warnings.warn("identity calibration used for classes without both outcomes in validation",
                      CalibrationWarning, stacklevel=2)
    return calibrated


def predict_proba(model, features):
    return model.predict_proba(features)
