"""Experiment-matrix expansion, (parallel) execution, persistence and reports."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .analysis import build_report
from .config import ConfigError, MatrixConfig
from .dataset import DatasetError, load_table, make_blobs, stratified_indices
from .loop import ExperimentConfig, run_trial

log = logging.getLogger(__name__)

HEADER = ["dataset", "pipeline", "strategy", "b", "s", "trial", "iteration", "n", "f1_macro",
          "hyperparameters", "flags", "seed", "wall_ms"]
KEY = HEADER[:7]
RESULTS = "results.csv"
SORTED = "results_sorted.csv"
MANIFEST = "manifest.json"


def derive_seed(*parts):
    """63-bit seed from a stable hash of ``parts``."""
    digest = hashlib.sha256("\x1f".join(map(str, parts)).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") & (2**63 - 1)


# ---------------------------------------------------------------- datasets

def dataset_id(token):
    return token if token.startswith("blobs:") else Path(token).stem


def load_dataset(token):
    """Bundle for a CSV path or a ``blobs:C:D:N:S:K`` token."""
    if token.startswith("blobs:"):
        parts = token.split(":")[1:]
        if len(parts) != 5:
            raise DatasetError(f"synthetic token must be blobs:C:D:N:S:K, got {token!r}")
        try:
            c, d, n, k = int(parts[0]), int(parts[1]), int(parts[2]), int(parts[4])
            sep = float(parts[3])
        except ValueError:
            raise DatasetError(f"bad synthetic token {token!r}") from None
        return make_blobs(c, d, n, sep, np.random.default_rng(k), id=token)
    return load_table(token, id=dataset_id(token))


def split_pool_test(bundle, split, base_seed):
    """Stratified test set first, then a stratified pool from the rest.

    When fewer than ``pool_size`` rows remain, the whole remainder is the
    pool.
    """
    rng = np.random.default_rng(derive_seed(base_seed, "split", bundle.id))
    n = len(bundle)
    if split.test_size >= n:
        raise DatasetError(f"{bundle.id}: test_size {split.test_size} leaves no pool")
    test = stratified_indices(bundle.labels, split.test_size, rng, bundle.class_count) \
        if split.test_size else np.empty(0, dtype=np.int64)
    rest = np.setdiff1d(np.arange(n), test)
    if split.pool_size < rest.size:
        rest = rest[stratified_indices(bundle.labels[rest], split.pool_size, rng, bundle.class_count)]
    return bundle.subset(rest), bundle.subset(test)


_CACHE = {}


def pool_and_test(token, split, base_seed):
    key = (token, split, base_seed)
    if key not in _CACHE:
        _CACHE[key] = split_pool_test(load_dataset(token), split, base_seed)
    return _CACHE[key]


# ---------------------------------------------------------------- matrix

@dataclass(frozen=True)
class Trial:
    token: str
    config: ExperimentConfig

    @property
    def key(self):
        c = self.config
        return (c.dataset_id, c.pipeline.id, c.strategy.value, c.batch_size, c.seed_size, c.trial)


def expand_matrix(config):
    """Every trial of the matrix, in a fixed order.

    The trial seed depends on (base_seed, dataset, pipeline, b, s, trial)
    but not on the strategy, so all strategies of one cell start from the
    same seed set and are paired.
    """
    trials = []
    ids = [dataset_id(t) for t in config.datasets]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"dataset ids are not unique: {ids}")
    for token, did in zip(config.datasets, ids):
        for h in config.pipelines:
            spec = config.pipeline_spec(h)
            for q in config.strategies:
                for b, s in config.batch_seed:
                    for i in range(config.trials):
                        try:
                            exp = ExperimentConfig(
                                did, spec, q, b, s, config.max_labeled,
                                trial_seed=derive_seed(config.base_seed, did, h, b, s, i),
                                strategy_params=config.strategy_params,
                                validation_fraction=config.validation_fraction, trial=i)
                        except ValueError as exc:
                            raise ConfigError(str(exc)) from None
                        trials.append(Trial(token, exp))
    return trials


def _fmt(x):
    return repr(float(x))


def trial_rows(trial, split, base_seed):
    """Result rows (strings, HEADER order) of one trial; failures give an error row."""
    c = trial.config
    head = [c.dataset_id, c.pipeline.id, c.strategy.value, str(c.batch_size), str(c.seed_size),
            str(c.trial)]
    try:
        pool, test = pool_and_test(trial.token, split, base_seed)
        record = run_trial(c, pool, test)
    except Exception as exc:  # recorded, the run continues
        log.warning("trial %s failed: %s", trial.key, exc)
        msg = json.dumps({"error": f"{type(exc).__name__}: {exc}"}, sort_keys=True)
        return [head + ["-1", "", "", msg, "error", str(c.trial_seed), "0.000"]]
    rows = []
    for e in record.entries:
        flags = []
        if e.calibration_fallback:
            flags.append("calibration_fallback")
        if record.reseeded:
            flags.append("reseeded")
        hyper = json.dumps({k: (float(v) if isinstance(v, float) else v)
                            for k, v in e.hyperparameters.items()}, sort_keys=True)
        rows.append(head + [str(e.t), str(e.n), _fmt(e.f1_macro), hyper, ";".join(flags),
                            str(c.trial_seed), f"{e.wall_ms:.3f}"])
    return rows


def _run_one(args):
    trial, split, base_seed = args
    return trial.key, trial_rows(trial, split, base_seed)


# ---------------------------------------------------------------- persistence

def _fingerprint(config):
    d = asdict(config)
    d.pop("output_dir")
    return hashlib.sha256(json.dumps(d, sort_keys=True, default=list).encode()).hexdigest()


def _row_key(row):
    return tuple(row[:6])


def _load_existing(out, config, expected):
    """Rows of fully recorded trials from a previous (possibly interrupted) run."""
    results, manifest = out / RESULTS, out / MANIFEST
    if not results.exists():
        return {}
    if manifest.exists():
        saved = json.loads(manifest.read_text(encoding="utf-8"))
        if saved.get("config") != _fingerprint(config):
            raise ConfigError(f"{out} holds results of a different configuration")
    with results.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        if next(reader, None) != HEADER:
            raise ConfigError(f"{results} has an unexpected header")
        grouped = {}
        for row in reader:
            grouped.setdefault(_row_key(row), []).append(row)
    done = {}
    for key, rows in grouped.items():
        error = len(rows) == 1 and rows[0][10] == "error"
        if error or sorted(int(r[6]) for r in rows) == list(range(expected.get(key, -1))):
            done[key] = rows
    return done


def _write_manifest(out, config, completed, total):
    data = {"config": _fingerprint(config), "total": total,
            "completed": sorted("|".join(k) for k in completed)}
    tmp = out / (MANIFEST + ".tmp")
    tmp.write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")
    os.replace(tmp, out / MANIFEST)


def run_matrix(config, workers=1, out=None, progress=None):
    """Execute every trial not yet recorded under ``out``; return the sorted table.

    Rows are appended to ``results.csv`` one trial at a time by this
    process only, so an interrupted run resumes by skipping complete trials.
    On completion ``results_sorted.csv`` holds the canonical table: rows
    sorted by primary key and without the timing column.
    """
    out = Path(out or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    trials = expand_matrix(config)
    expected = {tuple(map(str, t.key)): t.config.iterations + 1 for t in trials}
    done = _load_existing(out, config, expected)
    todo = [t for t in trials if tuple(map(str, t.key)) not in done]
    log.info("%d trials, %d already recorded, %d to run", len(trials), len(done), len(todo))

    # rewrite without rows of partially written trials
    tmp = out / (RESULTS + ".tmp")
    with tmp.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HEADER)
        for key in sorted(done):
            writer.writerows(done[key])
    os.replace(tmp, out / RESULTS)
    completed = set(done)
    _write_manifest(out, config, completed, len(trials))

    with (out / RESULTS).open("a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")

        def record(key, rows):
            writer.writerows(rows)
            fh.flush()
            completed.add(tuple(map(str, key)))
            _write_manifest(out, config, completed, len(trials))
            if progress is not None:
                progress(len(completed), len(trials))

        jobs = [(t, config.split, config.base_seed) for t in todo]
        if workers <= 1:
            for job in jobs:
                record(*_run_one(job))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(_run_one, job) for job in jobs]
                for future in as_completed(futures):
                    record(*future.result())
    return write_sorted(out)


def _sort_key(row):
    return (row[0], row[1], row[2], int(row[3]), int(row[4]), int(row[5]), int(row[6]))


def write_sorted(out):
    """Write and return the path of the canonical sorted table."""
    out = Path(out)
    with (out / RESULTS).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = sorted(reader, key=_sort_key)
    keep = [i for i, name in enumerate(header) if name != "wall_ms"]
    with (out / SORTED).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([header[i] for i in keep])
        writer.writerows([[row[i] for i in keep] for row in rows])
    return out / SORTED


def read_results(path):
    """Results table as a DataFrame; ``path`` may be a run directory."""
    path = Path(path)
    if path.is_dir():
        path = path / RESULTS
    return pd.read_csv(path, dtype={"dataset": str, "pipeline": str, "strategy": str,
                                    "hyperparameters": str, "flags": str},
                       keep_default_na=False, na_values={"f1_macro": [""], "n": [""]})


def export_reports(table, kind, path=None):
    """Build report ``kind`` from a results table (DataFrame or path); write CSV if ``path``."""
    if not isinstance(table, pd.DataFrame):
        table = read_results(table)
    frame = build_report(table, kind)
    if path is not None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
    return frame
