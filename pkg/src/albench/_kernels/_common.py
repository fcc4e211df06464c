"""Counter-based splitmix64 shared by both tree backends.

Node-level randomness is keyed on (tree seed, node path) instead of a running
stream, so a tree grown to depth D is exactly the depth-D truncation of the
same tree grown deeper. Both backends must produce the same draws.
"""

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    """splitmix64 finaliser on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def node_state(tree_seed, path):
    return mix64(tree_seed ^ mix64(path))


class SplitMix:
    """Sequential splitmix64 stream (pure Python)."""

    __slots__ = ("state",)

    def __init__(self, state):
        self.state = state & MASK64

    def next(self):
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)


def tree_seed(forest_seed, tree_index):
    return mix64((forest_seed & MASK64) ^ mix64(tree_index + 1))


def bootstrap_indices(seed, n):
    """``n`` draws with replacement from ``range(n)``, vectorised splitmix64."""
    with np.errstate(over="ignore"):
        z = np.uint64(seed & MASK64) + np.arange(1, n + 1, dtype=np.uint64) * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return (z % np.uint64(n)).astype(np.int64)
