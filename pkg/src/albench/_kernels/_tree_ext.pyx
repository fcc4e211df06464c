# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tree kernel; arithmetic mirrors ``_tree_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport malloc, free, qsort

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef struct Pair:
    double v
    int64_t c


cdef int _cmp_pair(const void* a, const void* b) noexcept nogil:
    cdef double x = (<Pair*>a).v
    cdef double y = (<Pair*>b).v
    if x < y:
        return -1
    if x > y:
        return 1
    return 0


cdef struct Frame:
    int64_t start
    int64_t end
    int64_t depth
    uint64_t path
    int64_t parent
    int is_left


def build_tree(const double[:, ::1] X, const int64_t[::1] y, const double[::1] cw,
               samples, int n_classes, int max_depth, int min_samples_leaf,
               int max_features, uint64_t seed):
    cdef int64_t[::1] idx = np.array(samples, dtype=np.int64, copy=True)
    cdef int64_t m_total = idx.shape[0]
    cdef int64_t n_features = X.shape[1]
    cdef int64_t cap = 2 * m_total + 1
    cdef int K = n_classes

    feature_a = np.full(cap, -1, dtype=np.int64)
    threshold_a = np.zeros(cap, dtype=np.float64)
    left_a = np.full(cap, -1, dtype=np.int64)
    right_a = np.full(cap, -1, dtype=np.int64)
    depth_a = np.zeros(cap, dtype=np.int64)
    counts_a = np.zeros((cap, K), dtype=np.int64)
    cdef int64_t[::1] feature = feature_a
    cdef double[::1] threshold = threshold_a
    cdef int64_t[::1] left = left_a
    cdef int64_t[::1] right = right_a
    cdef int64_t[::1] depth = depth_a
    cdef int64_t[:, ::1] counts = counts_a

    cdef Frame* stack = <Frame*>malloc((cap + 1) * sizeof(Frame))
    cdef Pair* buf = <Pair*>malloc((m_total + 1) * sizeof(Pair))
    cdef int64_t* perm = <int64_t*>malloc((n_features + 1) * sizeof(int64_t))
    cdef int64_t* lc = <int64_t*>malloc((K + 1) * sizeof(int64_t))
    cdef int64_t* tot = <int64_t*>malloc((K + 1) * sizeof(int64_t))
    cdef int64_t top = 0, n_nodes = 0
    cdef Frame fr
    cdef int64_t node, i, j, k, r, m, lo, hi, f, mid, nonzero, best_f, tmp
    cdef double best, best_t, wl, wr, sl, sr, lw, rw, proxy, a, b, t
    cdef uint64_t state
    cdef bint found

    try:
        with nogil:
            stack[0].start = 0
            stack[0].end = m_total
            stack[0].depth = 0
            stack[0].path = 1
            stack[0].parent = -1
            stack[0].is_left = 0
            top = 1
            while top > 0:
                top -= 1
                fr = stack[top]
                node = n_nodes
                n_nodes += 1
                if fr.parent >= 0:
                    if fr.is_left:
                        left[fr.parent] = node
                    else:
                        right[fr.parent] = node
                depth[node] = fr.depth
                m = fr.end - fr.start
                for k in range(K):
                    tot[k] = 0
                for i in range(fr.start, fr.end):
                    tot[y[idx[i]]] += 1
                nonzero = 0
                for k in range(K):
                    counts[node, k] = tot[k]
                    if tot[k] > 0:
                        nonzero += 1
                if fr.depth >= max_depth or m < 2 * min_samples_leaf or nonzero <= 1:
                    continue

                # split search over a lazily drawn feature permutation
                state = mix64(seed ^ mix64(fr.path))
                for j in range(n_features):
                    perm[j] = j
                best = -1.0 / 0.0
                best_f = -1
                best_t = 0.0
                lo = min_samples_leaf - 1
                hi = m - min_samples_leaf - 1
                for j in range(n_features):
                    if j >= max_features and best_f >= 0:
                        break
                    state = state + GOLDEN
                    r = j + <int64_t>(mix64(state) % <uint64_t>(n_features - j))
                    tmp = perm[j]
                    perm[j] = perm[r]
                    perm[r] = tmp
                    f = perm[j]
                    for i in range(m):
                        buf[i].v = X[idx[fr.start + i], f]
                        buf[i].c = y[idx[fr.start + i]]
                    qsort(buf, m, sizeof(Pair), _cmp_pair)
                    if buf[0].v == buf[m - 1].v or hi < lo:
                        continue
                    for k in range(K):
                        lc[k] = 0
                    for i in range(hi + 1):
                        lc[buf[i].c] += 1
                        if i < lo:
                            continue
                        if not (buf[i].v < buf[i + 1].v):
                            continue
                        wl = 0.0
                        wr = 0.0
                        sl = 0.0
                        sr = 0.0
                        for k in range(K):
                            lw = <double>lc[k] * cw[k]
                            rw = <double>(tot[k] - lc[k]) * cw[k]
                            wl = wl + lw
                            wr = wr + rw
                            sl = sl + lw * lw
                            sr = sr + rw * rw
                        proxy = sl / wl + sr / wr
                        if proxy > best:
                            best = proxy
                            best_f = f
                            a = buf[i].v
                            b = buf[i + 1].v
                            t = (a + b) * 0.5
                            if t >= b:
                                t = a
                            best_t = t
                if best_f < 0:
                    continue

                feature[node] = best_f
                threshold[node] = best_t
                # partition: rows going left first
                i = fr.start
                j = fr.end - 1
                while i <= j:
                    if X[idx[i], best_f] <= best_t:
                        i += 1
                    else:
                        tmp = idx[i]
                        idx[i] = idx[j]
                        idx[j] = tmp
                        j -= 1
                mid = i
                stack[top].start = mid
                stack[top].end = fr.end
                stack[top].depth = fr.depth + 1
                stack[top].path = 2 * fr.path + 1
                stack[top].parent = node
                stack[top].is_left = 0
                top += 1
                stack[top].start = fr.start
                stack[top].end = mid
                stack[top].depth = fr.depth + 1
                stack[top].path = 2 * fr.path
                stack[top].parent = node
                stack[top].is_left = 1
                top += 1
    finally:
        free(stack)
        free(buf)
        free(perm)
        free(lc)
        free(tot)

    return (feature_a[:n_nodes].copy(), threshold_a[:n_nodes].copy(), left_a[:n_nodes].copy(),
            right_a[:n_nodes].copy(), depth_a[:n_nodes].copy(), counts_a[:n_nodes].copy())


def apply_tree(const double[:, ::1] X, const int64_t[::1] feature, const double[::1] threshold,
               const int64_t[::1] left, const int64_t[::1] right, const int64_t[::1] depth,
               int64_t max_depth):
    cdef int64_t n = X.shape[0]
    out_a = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] out = out_a
    cdef int64_t i, node
    with nogil:
        for i in range(n):
            node = 0
            while left[node] >= 0 and depth[node] < max_depth:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] = node
    return out_a
