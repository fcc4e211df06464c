"""Slow, loop-based reference implementations used as test oracles."""

import math
from fractions import Fraction

FLOOR = 1e-12


def margin_select(proba_rows, unlabeled, b):
    scored = []
    for i, row in zip(unlabeled, proba_rows):
        top = sorted(row, reverse=True)
        scored.append((top[0] - top[1], int(i)))
    scored.sort()
    return sorted(i for _, i in scored[:b])


def kl(p, q):
    return sum(pi * (math.log(max(pi, FLOOR)) - math.log(max(qi, FLOOR))) for pi, qi in zip(p, q))


def cal_select(X, labeled, unlabeled, proba, k, b):
    """``proba[i]`` is the probability row of pool index ``i``."""
    k = min(k, len(labeled))
    scored = []
    for u in unlabeled:
        dists = sorted((sum((a - c) ** 2 for a, c in zip(X[u], X[j])), int(j)) for j in labeled)
        nbrs = [j for _, j in dists[:k]]
        score = sum(kl(proba[j], proba[u]) for j in nbrs) / k
        scored.append((-score, int(u)))
    scored.sort()
    return sorted(i for _, i in scored[:b])


def _sqdist(a, c):
    return sum((x - y) ** 2 for x, y in zip(a, c))


def kmeans(points, k, rng, max_iter=100):
    n = len(points)
    k = min(k, n)
    centers = [list(points[int(rng.integers(n))])]
    d2 = [_sqdist(p, centers[0]) for p in points]
    for _ in range(1, k):
        total = sum(d2)
        if total > 0:
            u = rng.random() * total
            acc, pick = 0.0, n - 1
            for i, w in enumerate(d2):
                acc += w
                if acc > u:
                    pick = i
                    break
        else:
            pick = int(rng.integers(n))
        centers.append(list(points[pick]))
        d2 = [min(a, _sqdist(p, centers[-1])) for a, p in zip(d2, points)]
    labels = [-1] * n
    for _ in range(max_iter):
        new = [min(range(k), key=lambda j: (_sqdist(p, centers[j]), j)) for p in points]
        if new == labels:
            break
        labels = new
        for j in range(k):
            members = [p for p, l in zip(points, labels) if l == j]
            if members:
                centers[j] = [sum(col) / len(members) for col in zip(*members)]
    return labels


def real_clusters(X, unlabeled, k, rng):
    rows = [list(X[u]) for u in unlabeled]
    order = sorted(range(len(rows)), key=lambda i: rows[i])
    labels_c = kmeans([rows[i] for i in order], k, rng)
    remap = {}
    for l in labels_c:
        remap.setdefault(l, len(remap))
    out = [0] * len(rows)
    for pos, i in enumerate(order):
        out[i] = remap[labels_c[pos]]
    return out


def real_select(clusters, proba_rows, unlabeled, b):
    pred = [max(range(len(r)), key=lambda c: (r[c], -c)) for r in proba_rows]
    errors = {}
    for c in sorted(set(clusters)):
        members = [i for i, l in enumerate(clusters) if l == c]
        votes = {}
        for i in members:
            votes[pred[i]] = votes.get(pred[i], 0) + 1
        pseudo = min(votes, key=lambda cls: (-votes[cls], cls))
        wrong = [i for i in members if pred[i] != pseudo]
        wrong.sort(key=lambda i: (-proba_rows[i][pred[i]], unlabeled[i]))
        errors[c] = wrong
    total = sum(len(e) for e in errors.values())
    take = min(b, total)
    chosen = []
    if take:
        keys = sorted(errors)
        quota = {c: Fraction(len(errors[c]) * take, total) for c in keys}
        alloc = {c: min(math.floor(quota[c]), len(errors[c])) for c in keys}
        rest = take - sum(alloc.values())
        for c in sorted(keys, key=lambda c: (-(quota[c] - math.floor(quota[c])), c)):
            if rest <= 0:
                break
            if alloc[c] < len(errors[c]):
                alloc[c] += 1
                rest -= 1
        for c in keys:
            chosen += errors[c][:alloc[c]]
    picked = [int(unlabeled[i]) for i in chosen]
    if len(picked) < b:
        rest_rows = [i for i in range(len(unlabeled)) if i not in set(chosen)]
        fill = margin_select([proba_rows[i] for i in rest_rows], [unlabeled[i] for i in rest_rows],
                             b - len(picked))
        picked += fill
    return sorted(picked)


def signed_rank_pvalues(d):
    """Exact (upper, lower) tail probabilities of R+ by enumerating all 2^n signs."""
    n = len(d)
    mags = sorted(abs(x) for x in d)
    ranks = {m: i + 1 for i, m in enumerate(mags)}
    r_obs = sum(ranks[abs(x)] for x in d if x > 0)
    upper = lower = 0
    for mask in range(2 ** n):
        r = sum(i + 1 for i in range(n) if mask >> i & 1)
        upper += r >= r_obs
        lower += r <= r_obs
    return r_obs, upper / 2 ** n, lower / 2 ** n
