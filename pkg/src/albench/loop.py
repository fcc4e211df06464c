"""One active-learning trial: seed set, then T rounds of query / label / retrain."""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import CalibrationWarning, PipelineSpec, f1_macro, grid_search, platt_calibrate
from .qstrat import PoolState, StrategyId, StrategyParams, dispatch

# sub-seed stream ids
SEED_SET, STRATEGY, MODEL = 0, 1, 2


class TrialError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_id: str
    pipeline: PipelineSpec
    strategy: StrategyId
    batch_size: int
    seed_size: int
    max_labeled: int = 5000
    seed_strategy: str = "random"
    metric: str = "f1_macro"
    trial_seed: int = 0
    strategy_params: StrategyParams = field(default_factory=StrategyParams)
    validation_fraction: float = 0.2
    trial: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strategy", StrategyId(self.strategy))
        if self.batch_size <= 0 or self.seed_size <= 0:
            raise ValueError("batch and seed sizes must be positive")
        if self.max_labeled < self.seed_size:
            raise ValueError("max_labeled must be at least the seed size")
        if (self.max_labeled - self.seed_size) % self.batch_size:
            raise ValueError(f"(max_labeled - seed_size) / batch_size is not an integer: "
                             f"({self.max_labeled} - {self.seed_size}) / {self.batch_size}")
        if self.seed_strategy != "random":
            raise ValueError("only the random seed-set strategy is supported")

    @property
    def iterations(self):
        """T, the number of querying iterations."""
        return (self.max_labeled - self.seed_size) // self.batch_size


@dataclass
class IterationEntry:
    t: int
    n: int
    f1_macro: float
    hyperparameters: dict
    calibration_fallback: bool
    wall_ms: float


@dataclass
class RunRecord:
    config: ExperimentConfig
    entries: list = field(default_factory=list)
    final_labeled: np.ndarray = None
    reseeded: bool = False


def stream(trial_seed, kind, t=0):
    """Independent generator for (trial, stream kind, iteration)."""
    return np.random.default_rng(np.random.SeedSequence([int(trial_seed) % 2**63, kind, t]))


def oracle_label(indices, bundle):
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size and (indices.min() < 0 or indices.max() >= len(bundle)):
        raise IndexError("index outside the pool")
    return bundle.labels[indices].copy()


def draw_seed_set(config, pool):
    """Uniform seed set; one reseed (with a derived seed) if it has < 2 classes."""
    for attempt in (0, 1):
        rng = stream(config.trial_seed, SEED_SET, attempt)
        seed = rng.choice(len(pool), size=config.seed_size, replace=False)
        if np.unique(pool.labels[seed]).size >= 2:
            return seed, attempt > 0
    raise TrialError("seed set contains fewer than 2 classes after reseeding")


def fit_round(config, X, y, class_count, t):
    """Model selection + calibration on the current labeled set (M_t)."""
    rng = stream(config.trial_seed, MODEL, t)
    with warnings.catch_warnings():
        # the fallback is recorded per iteration instead
        warnings.simplefilter("ignore", CalibrationWarning)
        base = grid_search(config.pipeline, X, y, config.metric, rng, class_count,
                           config.validation_fraction)
        _, val = base.validation
        model = platt_calibrate(base, X[val], y[val])
    return model


def run_trial(config, bundle, test, progress=None):
    """Run one batch active-learning trial on ``bundle`` (the pool).

    At every iteration the model is re-selected and re-calibrated from
    scratch and scored on ``test``; the query at iteration t uses M_{t-1}.
    """
    if len(bundle) < config.max_labeled:
        raise TrialError(f"pool has {len(bundle)} instances, fewer than max_labeled={config.max_labeled}")
    if len(test) == 0:
        raise TrialError("empty test set")
    X = bundle.features
    seed, reseeded = draw_seed_set(config, bundle)
    pool = PoolState.initial(len(bundle), seed, oracle_label(seed, bundle))
    record = RunRecord(config, reseeded=reseeded)
    model = None
    for t in range(config.iterations + 1):
        start = time.perf_counter()
        if t > 0:
            new = dispatch(config.strategy, model, X, pool, config.batch_size,
                           config.strategy_params, stream(config.trial_seed, STRATEGY, t))
            pool = pool.add(new, oracle_label(new, bundle))
        expected = config.seed_size + t * config.batch_size
        if pool.labeled.size != expected or pool.labeled.size + pool.unlabeled.size != len(bundle):
            raise TrialError("pool bookkeeping violated")
        model = fit_round(config, X[pool.labeled], pool.labels_of_labeled, bundle.class_count, t)
        score = f1_macro(model.predict(test.features), test.labels, bundle.class_count)
        record.entries.append(IterationEntry(
            t, int(pool.labeled.size), score, dict(model.base.params), model.fallback,
            (time.perf_counter() - start) * 1e3))
        if progress is not None:
            progress(t, pool)
    record.final_labeled = pool.labeled.copy()
    return record
