"""Plot-ready report tables built from a results table."""

from __future__ import annotations

import itertools

import numpy as np
import pandas as pd

from .improvement import (AnalysisError, always_on_summary, improvement_records,
                          records_frame, variance_profile)
from .stats import friedman_test, kendalls_w, wilcoxon_signed_rank

REPORT_KINDS = ("delta_curves", "heatmap_cells", "always_on", "variance_profile", "tests")
ALWAYS_ON_COLUMNS = ["avg_for", "pct_negative", "mean_nonneg", "mean", "std_nonneg", "std"]
TEST_COLUMNS = ["test", "factor", "scope", "m", "k", "statistic", "df", "p", "kendalls_w", "note"]

# the block key of one factor is every record key except the factor itself
_KEYS = ["pipeline", "strategy", "dataset", "b", "s", "trial", "n"]


def delta_curves(records):
    return records_frame(records).sort_values(_KEYS, kind="mergesort").reset_index(drop=True)


def heatmap_cells(records):
    """Mean δ per (pipeline, strategy, n); ``*`` rows marginalise one factor."""
    frame = records_frame(records)
    parts = [
        frame.groupby(["pipeline", "strategy", "n"])["delta"].agg(["mean", "size"]).reset_index(),
        frame.groupby(["pipeline", "n"])["delta"].agg(["mean", "size"]).reset_index().assign(strategy="*"),
        frame.groupby(["strategy", "n"])["delta"].agg(["mean", "size"]).reset_index().assign(pipeline="*"),
    ]
    out = pd.concat(parts, ignore_index=True).rename(columns={"mean": "mean_delta", "size": "count"})
    out = out[["pipeline", "strategy", "n", "mean_delta", "count"]]
    return out.sort_values(["pipeline", "strategy", "n"], kind="mergesort").reset_index(drop=True)


def always_on(records):
    """Table with one row overall, one per pipeline and one per strategy."""
    frame = records_frame(records)
    rows = [("Overall", frame["delta"])]
    rows += [(str(h), g["delta"]) for h, g in frame.groupby("pipeline", sort=True)]
    rows += [(str(q), g["delta"]) for q, g in frame.groupby("strategy", sort=True)]
    out = []
    for name, deltas in rows:
        s = always_on_summary(deltas.tolist())
        out.append([name, s.pct_negative, s.mean_nonneg, s.mean, s.std_nonneg, s.std])
    return pd.DataFrame(out, columns=ALWAYS_ON_COLUMNS)


def matched_blocks(records, factor):
    """Blocks of matched δ observations with ``factor`` as the treatment.

    Returns ``(matrix, block_keys, treatments)``; blocks missing any
    treatment are left out.
    """
    frame = records_frame(records)
    rest = [k for k in _KEYS if k != factor]
    wide = frame.pivot_table(index=rest, columns=factor, values="delta", aggfunc="mean")
    wide = wide.dropna(axis=0, how="any").sort_index()
    return wide.to_numpy(), list(wide.index), [str(c) for c in wide.columns]


def effect_sizes(records):
    """Friedman test and Kendall's W for the strategy and pipeline factors."""
    rows = []
    for factor in ("strategy", "pipeline"):
        matrix, _, treatments = matched_blocks(records, factor)
        m, k = matrix.shape if matrix.ndim == 2 else (0, len(treatments))
        if m < 2 or k < 2:
            rows.append(["friedman", factor, "all", m, k, None, None, None, None,
                         "needs at least 2 matched blocks and 2 treatments"])
            continue
        stat, df, p = friedman_test(matrix)
        rows.append(["friedman", factor, "all", m, k, stat, df, p, kendalls_w(matrix), ""])
    return rows


def batch_seed_tests(records):
    """Two-sided Wilcoxon on aligned δ pairs between every two (b, s) settings."""
    frame = records_frame(records)
    settings = sorted(set(zip(frame.b, frame.s)))
    rows = []
    for v1, v2 in itertools.combinations(settings, 2):
        a = frame[(frame.b == v1[0]) & (frame.s == v1[1])].set_index(["pipeline", "strategy", "dataset", "trial", "n"])
        c = frame[(frame.b == v2[0]) & (frame.s == v2[1])].set_index(["pipeline", "strategy", "dataset", "trial", "n"])
        joined = a[["delta"]].join(c[["delta"]], how="inner", lsuffix="_1", rsuffix="_2").sort_index()
        label = f"{v1[0]}/{v1[1]} vs {v2[0]}/{v2[1]}"
        scopes = [("all", joined)] + [(str(h), g) for h, g in joined.groupby(level="pipeline", sort=True)]
        for scope, part in scopes:
            try:
                stat, p = wilcoxon_signed_rank(part["delta_1"], part["delta_2"])
                rows.append(["wilcoxon", label, scope, len(part), 2, stat, None, p, None, ""])
            except AnalysisError as exc:
                rows.append(["wilcoxon", label, scope, len(part), 2, None, None, None, None, str(exc)])
    return rows


def tests(records):
    return pd.DataFrame(effect_sizes(records) + batch_seed_tests(records), columns=TEST_COLUMNS)


def build_report(table, kind):
    """Report ``kind`` for a results table as a DataFrame."""
    if kind not in REPORT_KINDS:
        raise AnalysisError(f"unknown report kind {kind!r}; expected one of {REPORT_KINDS}")
    if kind == "variance_profile":
        return variance_profile(table)
    records = improvement_records(table)
    if not records:
        raise AnalysisError("no non-random strategy rows to compare")
    return {"delta_curves": delta_curves, "heatmap_cells": heatmap_cells,
            "always_on": always_on, "tests": tests}[kind](records)
