"""Paired and blocked rank tests: Wilcoxon signed-rank, Friedman, Kendall's W."""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import chi2, rankdata

from .improvement import AnalysisError

EXACT_MAX_N = 12
ALTERNATIVES = ("two_sided", "greater", "less")


def _norm_sf(z):
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def signed_rank_counts(n):
    """Number of sign assignments of ranks 1..n for each value of R+."""
    counts = np.zeros(n * (n + 1) // 2 + 1, dtype=np.int64)
    counts[0] = 1
    for r in range(1, n + 1):
        counts[r:] = counts[r:] + counts[:-r].copy()
    return counts


def wilcoxon_signed_rank(x, y, alternative="two_sided"):
    """Wilcoxon signed-rank test of ``x - y``.

    Parameters
    ----------
    x, y : array_like
        Paired samples of equal length.
    alternative : {"two_sided", "greater", "less"}
        ``greater`` tests whether ``x`` tends to exceed ``y``.

    Returns
    -------
    (statistic, p) : tuple of float
        ``statistic`` is R+, the rank sum of positive differences.

    Zero differences are dropped and tied magnitudes get average ranks.
    With at most 12 non-zero differences and no ties the p-value comes from
    the exact null distribution; otherwise from the normal approximation
    with tie and continuity corrections.
    """
    if alternative not in ALTERNATIVES:
        raise AnalysisError(f"alternative must be one of {ALTERNATIVES}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or x.size == 0:
        raise AnalysisError("x and y must be equal-length non-empty vectors")
    d = x - y
    d = d[d != 0]
    if d.size == 0:
        raise AnalysisError("all differences are zero")
    n = d.size
    ranks = rankdata(np.abs(d))
    r_plus = float(ranks[d > 0].sum())
    _, tie_sizes = np.unique(ranks, return_counts=True)
    tied = bool(np.any(tie_sizes > 1))

    if n <= EXACT_MAX_N and not tied:
        counts = signed_rank_counts(n)
        total = float(2 ** n)
        r = int(round(r_plus))
        upper = counts[r:].sum() / total
        lower = counts[: r + 1].sum() / total
    else:
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(np.sum(tie_sizes ** 3 - tie_sizes)) / 48.0
        if var <= 0:
            raise AnalysisError("zero variance in signed-rank statistic")
        sd = math.sqrt(var)
        upper = _norm_sf((r_plus - mean - 0.5) / sd)
        lower = _norm_sf((mean - r_plus - 0.5) / sd)
    if alternative == "greater":
        p = upper
    elif alternative == "less":
        p = lower
    else:
        p = min(1.0, 2.0 * min(upper, lower))
    return r_plus, float(p)


def rank_within_blocks(data):
    """Average ranks (1 = smallest) within each row of an m x k matrix."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise AnalysisError("blocks must be a 2-d matrix")
    if np.isnan(data).any():
        raise AnalysisError("blocks contain missing values")
    return np.apply_along_axis(rankdata, 1, data) if data.size else data


def _tie_term(ranks):
    total = 0.0
    for row in ranks:
        _, t = np.unique(row, return_counts=True)
        total += float(np.sum(t ** 3 - t))
    return total


def friedman_test(blocks):
    """Friedman chi-square over an m (blocks) x k (treatments) matrix.

    Returns ``(statistic, df, p)``. A matrix whose rows are all fully tied
    gives statistic 0 and p = 1.
    """
    ranks = rank_within_blocks(blocks)
    m, k = ranks.shape
    if m < 2 or k < 2:
        raise AnalysisError("friedman_test needs at least 2 blocks and 2 treatments")
    R = ranks.sum(axis=0)
    stat = 12.0 / (m * k * (k + 1)) * float(np.sum(R ** 2)) - 3.0 * m * (k + 1)
    denom = 1.0 - _tie_term(ranks) / (m * (k ** 3 - k))
    if denom <= 1e-12:
        return 0.0, k - 1, 1.0
    stat = max(stat / denom, 0.0)
    return float(stat), k - 1, float(chi2.sf(stat, k - 1))


def kendalls_w(blocks):
    """Kendall's coefficient of concordance, tie-corrected.

    Rows are judges (m) and columns the items they rank (k).
    """
    ranks = rank_within_blocks(blocks)
    m, k = ranks.shape
    if k < 2:
        raise AnalysisError("kendalls_w needs at least 2 items")
    if m < 2:
        raise AnalysisError("kendalls_w needs at least 2 judges")
    R = ranks.sum(axis=0)
    S = float(np.sum((R - R.mean()) ** 2))
    denom = m * m * (k ** 3 - k) - m * _tie_term(ranks)
    if denom <= 0:
        return 0.0
    return float(12.0 * S / denom)
