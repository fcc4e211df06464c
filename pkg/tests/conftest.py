import numpy as np
import pytest

from albench.dataset import make_blobs


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def blobs3():
    """300-point, 3-class, 4-d blob set (well separated)."""
    return make_blobs(3, 4, 100, 6.0, np.random.default_rng(3))


class FixedProba:
    """Stand-in calibrated model returning a fixed probability row per pool index."""

    def __init__(self, table):
        self.table = np.asarray(table, dtype=np.float64)
        self.class_count = self.table.shape[1]

    def predict_proba(self, features):
        idx = np.asarray(features)[:, 0].astype(np.int64)
        return self.table[idx]


@pytest.fixture
def fixed_proba():
    return FixedProba
