"""Experiment-matrix configuration and its flat key-value file format.

A config file holds one ``key = value`` pair per line; ``#`` starts a
comment and list values are comma separated::

    datasets = blobs:6:5:500:4.4:1, data/news.csv
    pipelines = linear, forest
    strategies = random, margin, cal, dal, real
    batch_seed = 50:50
    trials = 5
    max_labeled = 500

Dataset tokens are CSV paths (relative paths resolve against the config
file's directory) or synthetic tokens ``blobs:C:D:N:S:K`` (classes, dim,
per-class count, separation, generator seed).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .dataset import DatasetError, SplitSpec
from .model import default_pipeline
from .model.base import ModelError
from .qstrat import StrategyError, StrategyId, StrategyParams


class ConfigError(ValueError):
    pass


PIPELINES = ("linear", "forest")


@dataclass(frozen=True)
class MatrixConfig:
    datasets: tuple
    pipelines: tuple = PIPELINES
    strategies: tuple = tuple(q.value for q in StrategyId)
    batch_seed: tuple = ((200, 200), (500, 500))
    trials: int = 3
    base_seed: int = 0
    max_labeled: int = 5000
    pool_size: int = 20000
    test_size: int = 5000
    validation_fraction: float = 0.2
    output_dir: str = "results"
    cal_k: int = 10
    real_clusters: int = 25
    dal_hidden: int = 64
    dal_epochs: int = 50

    def __post_init__(self):
        for name in ("datasets", "pipelines", "strategies", "batch_seed"):
            value = tuple(getattr(self, name))
            if not value:
                raise ConfigError(f"{name} must be non-empty")
            if len(set(value)) != len(value):
                raise ConfigError(f"{name} has duplicate entries")
            object.__setattr__(self, name, value)
        for p in self.pipelines:
            if p not in PIPELINES:
                raise ConfigError(f"unknown pipeline {p!r}; expected one of {PIPELINES}")
        try:
            object.__setattr__(self, "strategies",
                               tuple(StrategyId.parse(q).value for q in self.strategies))
            self.split
            self.strategy_params
        except (StrategyError, DatasetError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        for b, s in self.batch_seed:
            if b <= 0 or s <= 0:
                raise ConfigError("batch and seed sizes must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")

    @property
    def split(self):
        return SplitSpec(self.pool_size, self.test_size, self.validation_fraction)

    @property
    def strategy_params(self):
        return StrategyParams(cal_k=self.cal_k, real_clusters=self.real_clusters,
                              dal_hidden=self.dal_hidden, dal_epochs=self.dal_epochs)

    def pipeline_spec(self, name):
        try:
            return default_pipeline(name)
        except ModelError as exc:
            raise ConfigError(str(exc)) from None

    def to_text(self):
        """Serialise back to the file format (round-trips through parse_config)."""
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if f.name == "batch_seed":
                value = ", ".join(f"{b}:{s}" for b, s in value)
            elif isinstance(value, tuple):
                value = ", ".join(map(str, value))
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


_FIELDS = {f.name: f for f in dataclasses.fields(MatrixConfig)}
_LISTS = {"datasets", "pipelines", "strategies", "batch_seed"}


def _convert(key, raw):
    if key in _LISTS:
        items = [item.strip() for item in raw.split(",") if item.strip()]
        if key == "batch_seed":
            pairs = []
            for item in items:
                parts = item.split(":")
                if len(parts) != 2:
                    raise ConfigError(f"batch_seed entries look like b:s, got {item!r}")
                pairs.append((_int(key, parts[0]), _int(key, parts[1])))
            return tuple(pairs)
        return tuple(items)
    if key in ("output_dir",):
        return raw
    if key == "validation_fraction":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: not a number: {raw!r}") from None
    return _int(key, raw)


def _int(key, raw):
    try:
        return int(raw.strip())
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {raw!r}") from None


def parse_config(text, base_dir=None):
    """Parse config-file text into a :class:`MatrixConfig`.

    Unknown or repeated keys, unknown strategies and malformed values are
    errors. ``base_dir`` anchors relative dataset paths.
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _convert(key, raw)
    if "datasets" not in values:
        raise ConfigError("datasets is required")
    if base_dir is not None:
        values["datasets"] = tuple(resolve_token(t, base_dir) for t in values["datasets"])
    return MatrixConfig(**values)


def resolve_token(token, base_dir):
    if token.startswith("blobs:") or Path(token).is_absolute():
        return token
    return str(Path(base_dir) / token)


def load_config(path):
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)
