"""Query strategies: random, margin, CAL, DAL and REAL.

Each selector returns exactly ``b`` distinct pool indices drawn from the
unlabeled set. Ties are broken by ascending pool index everywhere.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .dataset import largest_remainder

PROB_FLOOR = 1e-12


class StrategyError(ValueError):
    pass


class StrategyId(str, enum.Enum):
    RANDOM = "random"
    MARGIN = "margin"
    CAL = "cal"
    DAL = "dal"
    REAL = "real"

    @classmethod
    def parse(cls, token):
        try:
            return cls(str(token).strip().lower())
        except ValueError:
            raise StrategyError(f"unknown strategy {token!r}") from None


NON_RANDOM = (StrategyId.CAL, StrategyId.DAL, StrategyId.REAL, StrategyId.MARGIN)


@dataclass(frozen=True)
class StrategyParams:
    cal_k: int = 10
    real_clusters: int = 25
    dal_hidden: int = 64
    dal_epochs: int = 50
    dal_lr: float = 0.1

    def __post_init__(self):
        for name in ("cal_k", "real_clusters", "dal_hidden"):
            if getattr(self, name) <= 0:
                raise StrategyError(f"{name} must be positive")
        if self.dal_epochs < 0 or not self.dal_lr > 0:
            raise StrategyError("dal_epochs must be >= 0 and dal_lr > 0")


@dataclass
class PoolState:
    """Disjoint labeled / unlabeled pool index sets (ascending arrays)."""

    labeled: np.ndarray
    unlabeled: np.ndarray
    labels_of_labeled: np.ndarray

    def __post_init__(self):
        self.labeled = np.asarray(self.labeled, dtype=np.int64)
        self.unlabeled = np.asarray(self.unlabeled, dtype=np.int64)
        self.labels_of_labeled = np.asarray(self.labels_of_labeled, dtype=np.int64)
        if self.labeled.shape != self.labels_of_labeled.shape:
            raise StrategyError("labels_of_labeled must align with labeled")
        if np.intersect1d(self.labeled, self.unlabeled).size:
            raise StrategyError("labeled and unlabeled sets overlap")

    @classmethod
    def initial(cls, pool_size, labeled, labels):
        labeled = np.asarray(labeled, dtype=np.int64)
        order = np.argsort(labeled)
        unlabeled = np.setdiff1d(np.arange(pool_size), labeled)
        return cls(labeled[order], unlabeled, np.asarray(labels)[order])

    def add(self, new, new_labels):
        new = np.asarray(new, dtype=np.int64)
        if np.setdiff1d(new, self.unlabeled).size or np.unique(new).size != new.size:
            raise StrategyError("queried indices must be distinct unlabeled indices")
        labeled = np.concatenate([self.labeled, new])
        labels = np.concatenate([self.labels_of_labeled, np.asarray(new_labels, dtype=np.int64)])
        order = np.argsort(labeled)
        return PoolState(labeled[order], np.setdiff1d(self.unlabeled, new), labels[order])


def _check_budget(pool, b):
    if b < 0:
        raise StrategyError("batch size must be non-negative")
    if b > pool.unlabeled.size:
        raise StrategyError(f"batch size {b} exceeds unlabeled pool ({pool.unlabeled.size})")


def _take_lowest(values, indices, b):
    """``b`` indices with the lowest values; ties to the lower index."""
    order = np.lexsort((indices, values))
    return np.sort(indices[order[:b]])


def select_random(pool, b, rng):
    _check_budget(pool, b)
    return np.sort(rng.choice(pool.unlabeled, size=b, replace=False))


def margins(proba):
    """Top-1 minus top-2 probability per row."""
    top2 = np.sort(proba, axis=1)[:, -2:]
    return top2[:, 1] - top2[:, 0]


def select_margin(model, features, pool, b):
    _check_budget(pool, b)
    if model.class_count < 2:
        raise StrategyError("margin needs at least 2 classes")
    if b == 0:
        return np.empty(0, dtype=np.int64)
    proba = model.predict_proba(features[pool.unlabeled])
    return _take_lowest(margins(proba), pool.unlabeled, b)


def kl_divergence(p, q):
    """Row-wise KL(p || q) with both arguments floored at ``PROB_FLOOR`` inside logs."""
    return np.sum(p * (np.log(np.maximum(p, PROB_FLOOR)) - np.log(np.maximum(q, PROB_FLOOR))), axis=-1)


def cal_scores(features, pool, proba_labeled, proba_unlabeled, k):
    """Mean KL(neighbour || candidate) over the k nearest labeled neighbours."""
    k = min(k, pool.labeled.size)
    dist = cdist(features[pool.unlabeled], features[pool.labeled], "sqeuclidean")
    nbrs = np.argsort(dist, axis=1, kind="stable")[:, :k]
    kl = kl_divergence(proba_labeled[nbrs], proba_unlabeled[:, None, :])
    return kl.mean(axis=1)


def select_cal(model, features, pool, b, k=10):
    _check_budget(pool, b)
    if pool.labeled.size == 0:
        raise StrategyError("CAL needs a non-empty labeled set")
    if b == 0:
        return np.empty(0, dtype=np.int64)
    scores = cal_scores(features, pool,
                        model.predict_proba(features[pool.labeled]),
                        model.predict_proba(features[pool.unlabeled]), k)
    return _take_lowest(-scores, pool.unlabeled, b)


class Discriminator:
    """One-hidden-layer ReLU network with a logistic output (label 1 = unlabeled)."""

    def __init__(self, dim, hidden, rng):
        self.W1 = rng.standard_normal((dim, hidden)) * np.sqrt(2.0 / dim)
        self.b1 = np.zeros(hidden)
        # zero output layer: an untrained discriminator outputs exactly 0.5
        self.w2 = np.zeros(hidden)
        self.b2 = 0.0

    def logits(self, X):
        return np.maximum(X @ self.W1 + self.b1, 0.0) @ self.w2 + self.b2

    def predict(self, X):
        z = self.logits(X)
        return 1.0 / (1.0 + np.exp(-z))

    def loss_and_grad(self, X, target, weight):
        """Weighted mean logistic loss and its gradient (W1, b1, w2, b2)."""
        pre = X @ self.W1 + self.b1
        h = np.maximum(pre, 0.0)
        z = h @ self.w2 + self.b2
        loss = float(np.sum(weight * (np.logaddexp(0.0, z) - target * z)) / weight.sum())
        dz = weight * (1.0 / (1.0 + np.exp(-z)) - target) / weight.sum()
        gw2 = h.T @ dz
        gb2 = float(dz.sum())
        dpre = np.outer(dz, self.w2) * (pre > 0)
        return loss, (X.T @ dpre, dpre.sum(axis=0), gw2, gb2)

    def step(self, grads, lr):
        gW1, gb1, gw2, gb2 = grads
        self.W1 = self.W1 - lr * gW1
        self.b1 = self.b1 - lr * gb1
        self.w2 = self.w2 - lr * gw2
        self.b2 = self.b2 - lr * gb2


def train_discriminator(features, pool, params, rng):
    """Fit the labeled-vs-unlabeled discriminator on standardised features.

    Returns the network, the standardised unlabeled features and the
    per-epoch training losses.
    """
    rows = np.concatenate([pool.labeled, pool.unlabeled])
    X = features[rows]
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    X = (X - mu) / np.where(sd > 0, sd, 1.0)
    target = np.concatenate([np.zeros(pool.labeled.size), np.ones(pool.unlabeled.size)])
    # both memberships carry equal total weight
    weight = np.where(target == 1, 0.5 / pool.unlabeled.size, 0.5 / pool.labeled.size)
    net = Discriminator(X.shape[1], params.dal_hidden, rng)
    losses = []
    for _ in range(params.dal_epochs):
        loss, grads = net.loss_and_grad(X, target, weight)
        losses.append(loss)
        net.step(grads, params.dal_lr)
    return net, X[pool.labeled.size:], losses


def select_dal(features, pool, b, params=StrategyParams(), rng=None):
    _check_budget(pool, b)
    if pool.labeled.size == 0:
        raise StrategyError("DAL needs a non-empty labeled set")
    if b == 0:
        return np.empty(0, dtype=np.int64)
    if rng is None:
        rng = np.random.default_rng(0)
    net, X_unlabeled, _ = train_discriminator(features, pool, params, rng)
    return _take_lowest(-net.predict(X_unlabeled), pool.unlabeled, b)


def kmeans(X, k, rng, max_iter=100):
    """Lloyd's algorithm with k-means++ seeding; returns (labels, centers).

    Empty clusters keep their previous center. Stops when assignments no
    longer change or after ``max_iter`` iterations.
    """
    n = X.shape[0]
    k = min(k, n)
    sq = (X * X).sum(axis=1)
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.maximum(sq - 2.0 * X @ centers[0] + centers[0] @ centers[0], 0.0)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            pick = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            pick = min(pick, n - 1)
        else:
            pick = int(rng.integers(n))
        centers[j] = X[pick]
        d2 = np.minimum(d2, np.maximum(sq - 2.0 * X @ centers[j] + centers[j] @ centers[j], 0.0))

    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        dist = sq[:, None] - 2.0 * X @ centers.T + (centers * centers).sum(axis=1)[None, :]
        new = np.argmin(dist, axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            members = labels == j
            if members.any():
                centers[j] = X[members].mean(axis=0)
    return labels, centers


def real_clusters(features, pool, k, rng):
    """Cluster ids for ``pool.unlabeled`` (aligned with it).

    Rows are put in a canonical (lexicographic feature) order before
    clustering so the result does not depend on pool storage order.
    """
    X = features[pool.unlabeled]
    canon = np.lexsort(X.T[::-1])
    labels_c, _ = kmeans(X[canon], k, rng)
    # renumber clusters by first appearance in canonical order
    _, first = np.unique(labels_c, return_index=True)
    remap = np.empty(labels_c.max() + 1, dtype=np.int64)
    remap[labels_c[np.sort(first)]] = np.arange(first.size)
    labels = np.empty(X.shape[0], dtype=np.int64)
    labels[canon] = remap[labels_c]
    return labels


def real_from_clusters(clusters, proba, unlabeled, b):
    """REAL selection given cluster ids and predicted probabilities of the unlabeled rows.

    Each cluster's pseudo-label is its modal predicted class; members whose
    prediction disagrees are "errors". The budget is split across clusters in
    proportion to error counts (largest remainder), and within a cluster the
    errors with the most confident (own) prediction go first. Any budget not
    covered by errors is filled by smallest margin.
    """
    pred = np.argmax(proba, axis=1)
    conf = proba[np.arange(pred.size), pred]
    errors = []
    for c in range(int(clusters.max()) + 1 if clusters.size else 0):
        members = np.flatnonzero(clusters == c)
        if members.size == 0:
            errors.append(members)
            continue
        pseudo = int(np.argmax(np.bincount(pred[members])))
        wrong = members[pred[members] != pseudo]
        errors.append(wrong[np.lexsort((unlabeled[wrong], -conf[wrong]))])
    counts = np.array([e.size for e in errors], dtype=np.int64)
    total = int(counts.sum())
    take = min(b, total)
    chosen = []
    if take:
        alloc = largest_remainder(counts * take, take, caps=counts, denominator=total)
        for e, a in zip(errors, alloc):
            chosen.extend(e[:a].tolist())
    chosen = np.array(sorted(chosen), dtype=np.int64)
    picked = unlabeled[chosen]
    if picked.size < b:
        rest = np.setdiff1d(np.arange(unlabeled.size), chosen)
        fill = _take_lowest(margins(proba[rest]), unlabeled[rest], b - picked.size)
        picked = np.concatenate([picked, fill])
    return np.sort(picked)


def select_real(model, features, pool, b, params=StrategyParams(), rng=None):
    _check_budget(pool, b)
    if b == 0:
        return np.empty(0, dtype=np.int64)
    if rng is None:
        rng = np.random.default_rng(0)
    clusters = real_clusters(features, pool, params.real_clusters, rng)
    proba = model.predict_proba(features[pool.unlabeled])
    return real_from_clusters(clusters, proba, pool.unlabeled, b)


def dispatch(strategy, model, features, pool, b, params=StrategyParams(), rng=None):
    """Route to the selector for ``strategy`` (a :class:`StrategyId`)."""
    if rng is None:
        rng = np.random.default_rng(0)
    strategy = StrategyId(strategy)
    if strategy is StrategyId.RANDOM:
        picked = select_random(pool, b, rng)
    elif strategy is StrategyId.MARGIN:
        picked = select_margin(model, features, pool, b)
    elif strategy is StrategyId.CAL:
        picked = select_cal(model, features, pool, b, params.cal_k)
    elif strategy is StrategyId.DAL:
        picked = select_dal(features, pool, b, params, rng)
    else:
        picked = select_real(model, features, pool, b, params, rng)
    if picked.size != b:
        raise StrategyError(f"{strategy.value} returned {picked.size} indices, expected {b}")
    return picked
