# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels; see ``_kernels_py`` for the reference semantics.

The per-source loops run without the GIL so callers can fan blocks of
sources out over threads.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64


def betweenness_block(const i64[::1] indptr, const i64[::1] indices, Py_ssize_t n,
                      Py_ssize_t start, Py_ssize_t stop):
    cdef double[::1] out = np.zeros(n, dtype=np.float64)
    cdef i64[::1] dist = np.empty(n, dtype=np.int64)
    cdef double[::1] sigma = np.empty(n, dtype=np.float64)
    cdef double[::1] delta = np.empty(n, dtype=np.float64)
    cdef i64[::1] order = np.empty(max(n, 1), dtype=np.int64)
    cdef Py_ssize_t s, v, w, k, head, tail, pos
    cdef i64 dv
    cdef double acc
    with nogil:
        for s in range(start, stop):
            for v in range(n):
                dist[v] = -1
                sigma[v] = 0.0
                delta[v] = 0.0
            dist[s] = 0
            sigma[s] = 1.0
            # order doubles as the BFS queue: head chases tail
            order[0] = s
            head = 0
            tail = 1
            while head < tail:
                v = order[head]
                head += 1
                dv = dist[v] + 1
                for k in range(indptr[v], indptr[v + 1]):
                    w = indices[k]
                    if dist[w] < 0:
                        dist[w] = dv
                        order[tail] = w
                        tail += 1
                    if dist[w] == dv:
                        sigma[w] += sigma[v]
            pos = tail - 1
            while pos >= 0:
                v = order[pos]
                pos -= 1
                dv = dist[v] + 1
                acc = 0.0
                for k in range(indptr[v], indptr[v + 1]):
                    w = indices[k]
                    if dist[w] == dv:
                        acc += sigma[v] / sigma[w] * (1.0 + delta[w])
                delta[v] = acc
                if v != s:
                    out[v] += acc
    return np.asarray(out)


def closeness_block(const i64[::1] indptr, const i64[::1] indices, Py_ssize_t n,
                    Py_ssize_t start, Py_ssize_t stop):
    cdef Py_ssize_t m = stop - start
    cdef i64[::1] reached = np.zeros(m, dtype=np.int64)
    cdef i64[::1] total = np.zeros(m, dtype=np.int64)
    cdef i64[::1] dist = np.empty(n, dtype=np.int64)
    cdef i64[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef Py_ssize_t s, v, w, k, head, tail
    cdef i64 dv, r, acc
    with nogil:
        for s in range(start, stop):
            for v in range(n):
                dist[v] = -1
            dist[s] = 0
            queue[0] = s
            head = 0
            tail = 1
            r = 0
            acc = 0
            while head < tail:
                v = queue[head]
                head += 1
                dv = dist[v] + 1
                for k in range(indptr[v], indptr[v + 1]):
                    w = indices[k]
                    if dist[w] < 0:
                        dist[w] = dv
                        r += 1
                        acc += dv
                        queue[tail] = w
                        tail += 1
            reached[s - start] = r
            total[s - start] = acc
    return np.asarray(reached), np.asarray(total)


def pagerank(const i64[::1] in_indptr, const i64[::1] in_indices,
             const i64[::1] out_degree, double damping, Py_ssize_t max_iter, double tol):
    cdef Py_ssize_t n = out_degree.shape[0]
    cdef double[::1] pr = np.ones(n, dtype=np.float64)
    cdef double[::1] new = np.empty(n, dtype=np.float64)
    cdef double[::1] share = np.empty(n, dtype=np.float64)
    cdef double[::1] inv = np.empty(n, dtype=np.float64)
    history = []
    cdef Py_ssize_t i, j, k, it = 0
    cdef double dmass, acc, val, diff, change = float("inf"), l1
    cdef double base = 1.0 - damping
    for j in range(n):
        inv[j] = 1.0 / out_degree[j] if out_degree[j] else 0.0
    while it < max_iter:
        it += 1
        with nogil:
            dmass = 0.0
            for j in range(n):
                share[j] = pr[j] * inv[j]
                if out_degree[j] == 0:
                    dmass += pr[j]
            dmass /= n
            change = 0.0
            l1 = 0.0
            for i in range(n):
                acc = 0.0
                for k in range(in_indptr[i], in_indptr[i + 1]):
                    acc += share[in_indices[k]]
                val = damping * (acc + dmass) + base
                diff = val - pr[i]
                if diff < 0:
                    diff = -diff
                if diff > change:
                    change = diff
                l1 += diff
                new[i] = val
            for i in range(n):
                pr[i] = new[i]
        history.append(l1)
        if change < tol:
            break
    return np.asarray(pr).copy(), it, change, np.asarray(history, dtype=np.float64)
