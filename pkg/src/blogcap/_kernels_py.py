"""Pure-Python graph kernels.

Drop-in fallback for the compiled ``_kernels`` extension; signatures and
return types match exactly.  Graphs arrive as CSR arrays (``indptr``,
``indices``) over node indices ``0..n-1``.
"""

from collections import deque

import numpy as np


def betweenness_block(indptr, indices, n, start, stop):
    """Brandes dependency accumulation for sources ``start..stop-1``.

    Returns an ``(n,)`` float64 array of partial directed betweenness sums.
    """
    ptr = indptr.tolist()
    nbr = indices.tolist()
    out = [0.0] * n
    for s in range(start, stop):
        dist = [-1] * n
        sigma = [0.0] * n
        delta = [0.0] * n
        dist[s] = 0
        sigma[s] = 1.0
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            dv = dist[v] + 1
            for k in range(ptr[v], ptr[v + 1]):
                w = nbr[k]
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
        for v in reversed(order):
            dv = dist[v] + 1
            acc = 0.0
            for k in range(ptr[v], ptr[v + 1]):
                w = nbr[k]
                if dist[w] == dv:
                    acc += sigma[v] / sigma[w] * (1.0 + delta[w])
            delta[v] = acc
            if v != s:
                out[v] += acc
    return np.asarray(out, dtype=np.float64)


def closeness_block(indptr, indices, n, start, stop):
    """BFS from each source in ``start..stop-1``.

    Returns ``(reached, dist_sum)`` int64 arrays of length ``stop - start``:
    the number of other nodes reachable from the source and the sum of their
    hop distances.
    """
    ptr = indptr.tolist()
    nbr = indices.tolist()
    reached = []
    total = []
    for s in range(start, stop):
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        r = 0
        acc = 0
        while queue:
            v = queue.popleft()
            dv = dist[v] + 1
            for k in range(ptr[v], ptr[v + 1]):
                w = nbr[k]
                if dist[w] < 0:
                    dist[w] = dv
                    r += 1
                    acc += dv
                    queue.append(w)
        reached.append(r)
        total.append(acc)
    return np.asarray(reached, dtype=np.int64), np.asarray(total, dtype=np.int64)


def pagerank(in_indptr, in_indices, out_degree, damping, max_iter, tol):
    """Synchronous iteration of ``PR(i) = c * sum_{j->i} PR(j)/d_j + (1 - c)``.

    Dangling mass is spread uniformly over all nodes.  Starts from all ones.
    Returns ``(pr, iterations, max_abs_change, l1_history)``.
    """
    n = len(out_degree)
    ptr = in_indptr.tolist()
    src = in_indices.tolist()
    deg = out_degree.tolist()
    dangling = [j for j in range(n) if deg[j] == 0]
    inv = [1.0 / d if d else 0.0 for d in deg]
    pr = [1.0] * n
    base = 1.0 - damping
    history = []
    change = float("inf")
    it = 0
    while it < max_iter:
        it += 1
        share = [pr[j] * inv[j] for j in range(n)]
        dmass = 0.0
        for j in dangling:
            dmass += pr[j]
        dmass /= n
        new = [0.0] * n
        change = 0.0
        l1 = 0.0
        for i in range(n):
            acc = 0.0
            for k in range(ptr[i], ptr[i + 1]):
                acc += share[src[k]]
            val = damping * (acc + dmass) + base
            diff = abs(val - pr[i])
            if diff > change:
                change = diff
            l1 += diff
            new[i] = val
        pr = new
        history.append(l1)
        if change < tol:
            break
    return np.asarray(pr, dtype=np.float64), it, change, np.asarray(history, dtype=np.float64)
