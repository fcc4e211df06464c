"""Relative improvement over random, size alignment and aggregates."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

RANDOM = "random"
CELL = ["dataset", "pipeline", "b", "s"]


class AnalysisError(ValueError):
    pass


def relative_improvement(f_q, f_r):
    """Percent improvement of ``f_q`` over the random score ``f_r``.

    Returns ``None`` when ``f_r`` is 0 (undefined; such records are left
    out of every aggregate).
    """
    f_q, f_r = float(f_q), float(f_r)
    if f_q < 0 or f_r < 0 or math.isnan(f_q) or math.isnan(f_r):
        raise AnalysisError(f"scores must be non-negative, got {f_q}, {f_r}")
    if f_r == 0:
        return None
    return 100.0 * (f_q - f_r) / f_r


def align_label_sizes(n, source_grid, target_grid):
    """Map labeled-set size ``n`` to the closest size on ``target_grid``.

    Equidistant sizes go to the smaller target; sizes below the grid go to
    its smallest member. ``source_grid`` is only checked for emptiness.
    """
    if len(source_grid) == 0 or len(target_grid) == 0:
        raise AnalysisError("empty size grid")
    target = sorted(target_grid)
    i = bisect.bisect_left(target, n)
    if i == 0:
        return target[0]
    if i == len(target):
        return target[-1]
    lo, hi = target[i - 1], target[i]
    return lo if n - lo <= hi - n else hi


@dataclass(frozen=True)
class ImprovementRecord:
    pipeline: str
    strategy: str
    dataset: str
    b: int
    s: int
    n: int
    delta: float
    trial: int = 0


def valid_rows(table):
    """Rows that carry a score (error rows are dropped)."""
    ok = table["f1_macro"].notna()
    if "flags" in table:
        ok &= ~table["flags"].fillna("").astype(str).str.contains("error")
    rows = table[ok]
    return rows.assign(n=rows["n"].astype(np.int64))


def mean_scores(table):
    """f(h, q, d, b, s, n) averaged over trials."""
    rows = valid_rows(table)
    keys = CELL + ["strategy", "n"]
    return rows.groupby(keys, sort=True)["f1_macro"].mean().reset_index()


def target_grid(table):
    """Sizes of the (b, s) setting with the largest batch; alignment target."""
    rows = valid_rows(table)
    b, s = max(map(tuple, rows[["b", "s"]].drop_duplicates().to_numpy().tolist()))
    return sorted(rows[(rows.b == b) & (rows.s == s)]["n"].unique().tolist())


def improvement_records(table, align=True):
    """δ records per (h, q non-random, d, b, s, trial, aligned n).

    Each trial of a non-random strategy is paired with the random trial of
    the same index (both start from the same seed set), at equal n. Several
    sizes aligned to one target size are averaged. Undefined δ (random score
    0) is dropped.
    """
    rows = valid_rows(table)
    if rows.empty:
        raise AnalysisError("no scored rows")
    grid = target_grid(table) if align else None
    records = []
    for key, cell in rows.groupby(CELL, sort=True):
        base = cell[cell.strategy == RANDOM].set_index(["trial", "n"])["f1_macro"]
        if base.empty:
            raise AnalysisError(f"missing random baseline for {dict(zip(CELL, key))}")
        sizes = sorted(cell["n"].unique().tolist())
        dataset, pipeline, b, s = key
        for (q, trial), part in cell[cell.strategy != RANDOM].groupby(["strategy", "trial"], sort=True):
            acc = {}
            for n, score in zip(part["n"], part["f1_macro"]):
                if (trial, n) not in base.index:
                    raise AnalysisError(f"missing random baseline for trial {trial} at n={n} "
                                        f"in {dict(zip(CELL, key))}")
                d = relative_improvement(score, base[(trial, n)])
                if d is None:
                    continue
                target = align_label_sizes(n, sizes, grid) if align else n
                acc.setdefault(target, []).append(d)
            for n in sorted(acc):
                records.append(ImprovementRecord(pipeline, q, dataset, int(b), int(s), int(n),
                                                 float(np.mean(acc[n])), int(trial)))
    return records


def records_frame(records):
    cols = ["pipeline", "strategy", "dataset", "b", "s", "n", "delta", "trial"]
    return pd.DataFrame([r.__dict__ for r in records], columns=cols)


def expected_improvement(records, fixed, n):
    """Simple mean of δ over records matching ``fixed`` (a key->value dict) at size ``n``."""
    match = [r.delta for r in records
             if r.n == n and all(getattr(r, k) == v for k, v in fixed.items())]
    if not match:
        raise AnalysisError(f"no records match {fixed} at n={n}")
    return float(np.mean(match))


@dataclass(frozen=True)
class AlwaysOnSummary:
    pct_negative: float
    mean_nonneg: float | None
    mean: float
    std_nonneg: float | None
    std: float


def always_on_summary(deltas):
    d = np.asarray([x for x in deltas if x is not None], dtype=np.float64)
    if d.size == 0:
        raise AnalysisError("always_on_summary of no deltas")
    nonneg = d[d >= 0]
    return AlwaysOnSummary(
        100.0 * np.count_nonzero(d < 0) / d.size,
        float(nonneg.mean()) if nonneg.size else None,
        float(d.mean()),
        float(nonneg.std()) if nonneg.size else None,
        float(d.std()),
    )


def variance_profile(table):
    """Per n: mean over (h, d, b, s) of the population variance, across
    strategies, of trial-averaged F1.

    Returns a DataFrame with columns ``n``, ``variance``, ``cells``.
    """
    f = mean_scores(table)
    out = []
    for key, cell in f.groupby(CELL + ["n"], sort=True):
        if cell["strategy"].nunique() < 2:
            raise AnalysisError(f"fewer than 2 strategies in cell {dict(zip(CELL + ['n'], key))}")
        out.append((key[-1], float(np.var(cell["f1_macro"].to_numpy()))))
    frame = pd.DataFrame(out, columns=["n", "variance"])
    return (frame.groupby("n", sort=True)["variance"].agg(["mean", "size"])
            .rename(columns={"mean": "variance", "size": "cells"}).reset_index())
