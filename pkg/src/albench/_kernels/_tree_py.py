"""Pure-Python/numpy tree kernel.

Mirrors ``_tree_ext.pyx`` operation for operation; the two must grow
bit-identical trees (see tests/test_kernels.py).
"""

import numpy as np

from ._common import SplitMix, node_state


def _best_split(X, y, cw, idx, n_classes, min_samples_leaf, max_features, state):
    n_features = X.shape[1]
    m = idx.shape[0]
    rng = SplitMix(state)
    perm = list(range(n_features))
    total = np.bincount(y[idx], minlength=n_classes)

    best = -np.inf
    best_feature = -1
    best_threshold = 0.0
    lo = min_samples_leaf - 1
    hi = m - min_samples_leaf - 1
    for j in range(n_features):
        if j >= max_features and best_feature >= 0:
            break
        r = j + rng.next() % (n_features - j)
        perm[j], perm[r] = perm[r], perm[j]
        f = perm[j]
        vals = X[idx, f]
        order = np.argsort(vals, kind="stable")
        v = vals[order]
        if v[0] == v[m - 1] or hi < lo:
            continue
        onehot = np.zeros((m, n_classes), dtype=np.int64)
        onehot[np.arange(m), y[idx][order]] = 1
        left = np.cumsum(onehot, axis=0)[lo:hi + 1]
        wl = np.zeros(left.shape[0])
        wr = np.zeros(left.shape[0])
        sl = np.zeros(left.shape[0])
        sr = np.zeros(left.shape[0])
        for k in range(n_classes):
            lw = left[:, k] * cw[k]
            rw = (total[k] - left[:, k]) * cw[k]
            wl = wl + lw
            wr = wr + rw
            sl = sl + lw * lw
            sr = sr + rw * rw
        valid = v[lo:hi + 1] < v[lo + 1:hi + 2]
        if not valid.any():
            continue
        proxy = np.where(valid, sl / np.where(valid, wl, 1.0) + sr / np.where(valid, wr, 1.0), -np.inf)
        i = int(np.argmax(proxy))
        if proxy[i] > best:
            best = proxy[i]
            best_feature = f
            a = float(v[lo + i])
            b = float(v[lo + i + 1])
            t = (a + b) * 0.5
            if t >= b:
                t = a
            best_threshold = t
    return best_feature, best_threshold


def build_tree(X, y, cw, samples, n_classes, max_depth, min_samples_leaf, max_features, seed):
    """Grow one tree over the (bootstrapped) rows ``samples``.

    Returns ``(feature, threshold, left, right, depth, counts)``; leaves have
    ``left == -1`` and every node keeps its class counts so that the tree can
    be truncated at any depth when predicting.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    cw = np.ascontiguousarray(cw, dtype=np.float64)
    feature, threshold, left, right, depth, counts = [], [], [], [], [], []

    stack = [(np.asarray(samples, dtype=np.int64), 0, 1, -1, False)]
    while stack:
        idx, d, path, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            if is_left:
                left[parent] = node
            else:
                right[parent] = node
        cnt = np.bincount(y[idx], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        depth.append(d)
        counts.append(cnt)

        m = idx.shape[0]
        if d >= max_depth or m < 2 * min_samples_leaf or np.count_nonzero(cnt) <= 1:
            continue
        f, t = _best_split(X, y, cw, idx, n_classes, min_samples_leaf, max_features,
                           node_state(seed, path))
        if f < 0:
            continue
        feature[node] = f
        threshold[node] = t
        go_left = X[idx, f] <= t
        stack.append((idx[~go_left], d + 1, 2 * path + 1, node, False))
        stack.append((idx[go_left], d + 1, 2 * path, node, True))

    return (
        np.asarray(feature, dtype=np.int64),
        np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64),
        np.asarray(right, dtype=np.int64),
        np.asarray(depth, dtype=np.int64),
        np.asarray(counts, dtype=np.int64).reshape(-1, n_classes),
    )


def apply_tree(X, feature, threshold, left, right, depth, max_depth):
    """Node reached by each row, stopping early at ``max_depth``."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    rows = np.arange(X.shape[0])
    node = np.zeros(X.shape[0], dtype=np.int64)
    while True:
        active = (left[node] >= 0) & (depth[node] < max_depth)
        if not active.any():
            return node
        a = rows[active]
        na = node[active]
        go_left = X[a, feature[na]] <= threshold[na]
        node[a] = np.where(go_left, left[na], right[na])
