"""Time tree growing with the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--rows 500 2000] [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

from albench._kernels import load_backend
from albench._kernels._common import bootstrap_indices, tree_seed
from albench.model.base import balanced_class_weights


def grow(backend, X, y, class_count, trees, seed=7):
    cw = balanced_class_weights(y, class_count)
    mf = max(1, int(math.sqrt(X.shape[1])))
    out = []
    for i in range(trees):
        ts = tree_seed(seed, i)
        samples = bootstrap_indices(ts, y.size)
        out.append(backend.build_tree(X, y, cw, samples, class_count, 30, 1, mf, ts))
    return out


def best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, nargs="+", default=[500, 2000])
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--classes", type=int, default=4)
    ap.add_argument("--trees", type=int, default=10)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    try:
        compiled = load_backend("compiled")
    except ImportError:
        compiled = None
        print("compiled backend not built; timing the Python fallback only")
    python = load_backend("python")
    rng = np.random.default_rng(0)
    print(f"{'rows':>6} {'python ms/tree':>15} {'compiled ms/tree':>17} {'speedup':>8} identical")
    for n in args.rows:
        X = rng.standard_normal((n, args.dim))
        y = rng.integers(0, args.classes, n)
        t_py = best_of(lambda: grow(python, X, y, args.classes, args.trees), args.repeat)
        line = f"{n:>6} {1e3 * t_py / args.trees:>15.2f}"
        if compiled is not None:
            t_c = best_of(lambda: grow(compiled, X, y, args.classes, args.trees), args.repeat)
            same = all(all(np.array_equal(a, b) for a, b in zip(p, c)) for p, c in
                       zip(grow(python, X, y, args.classes, args.trees),
                           grow(compiled, X, y, args.classes, args.trees)))
            line += f" {1e3 * t_c / args.trees:>17.2f} {t_py / t_c:>8.1f} {same}"
        print(line)


if __name__ == "__main__":
    main()
