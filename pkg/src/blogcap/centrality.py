"""Structural-capital measures: in/out degree, closeness, betweenness, PageRank.

All measures are directed.  Closeness and betweenness are computed per source
node in fixed-size blocks; blocks may run on a thread pool, and partial sums
are always reduced in block order so the thread count never changes a result.
"""

import enum
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParams, IoFailure

log = logging.getLogger(__name__)

if os.environ.get("BLOGCAP_PURE_PYTHON"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels

        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _kernels_py as kernels

        BACKEND = "python"

BLOCK = 32


class Measure(enum.Enum):
    IN_DEGREE = "in_degree"
    OUT_DEGREE = "out_degree"
    CLOSENESS = "closeness"
    BETWEENNESS = "betweenness"
    PAGERANK_RAW = "pagerank_raw"
    PAGERANK_SCALED = "pagerank_0_10"


@dataclass(frozen=True)
class PageRankParams:
    damping: float = 0.85
    max_iterations: int = 200
    tolerance: float = 1e-12

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise InvalidParams(f"damping must lie in (0, 1), got {self.damping}")
        if self.max_iterations < 1:
            raise InvalidParams("max_iterations must be positive")
        if self.tolerance < 0:
            raise InvalidParams("tolerance must be non-negative")


@dataclass(frozen=True, eq=False)
class CentralityVector:
    measure: Measure
    nodes: tuple
    values: np.ndarray
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True
    history: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __getitem__(self, node):
        return self.values[self.nodes.index(node)]

    def __len__(self):
        return len(self.nodes)

    def as_dict(self):
        return dict(zip(self.nodes, self.values.tolist()))


def _blocks(n):
    return [(lo, min(lo + BLOCK, n)) for lo in range(0, n, BLOCK)]


def _run_blocks(fn, blocks, threads):
    if threads <= 1 or len(blocks) <= 1:
        return [fn(lo, hi) for lo, hi in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda b: fn(*b), blocks))


def in_degree_centrality(net):
    indptr, _ = net.csr_in()
    return CentralityVector(Measure.IN_DEGREE, net.nodes, np.diff(indptr).astype(np.float64))


def out_degree_centrality(net):
    indptr, _ = net.csr()
    return CentralityVector(Measure.OUT_DEGREE, net.nodes, np.diff(indptr).astype(np.float64))


def reachability(net, threads=1):
    """Per node: how many other nodes it reaches and the summed hop distance."""
    n = len(net)
    indptr, indices = net.csr()
    parts = _run_blocks(
        lambda lo, hi: kernels.closeness_block(indptr, indices, n, lo, hi), _blocks(n), threads
    )
    if not parts:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    reached = np.concatenate([p[0] for p in parts])
    dist_sum = np.concatenate([p[1] for p in parts])
    return reached, dist_sum


def closeness_centrality(net, threads=1):
    """Reachable-set closeness with Wasserman-Faust scaling.

    ``(r / sum_d) * (r / (n - 1))`` where r counts the nodes reachable from x
    over out-edges; 0 for nodes that reach nobody.  On a strongly connected
    graph this reduces to ``(n - 1) / sum_d``.
    """
    n = len(net)
    reached, dist_sum = reachability(net, threads)
    values = np.zeros(n, dtype=np.float64)
    mask = reached > 0
    r = reached[mask].astype(np.float64)
    values[mask] = (r / dist_sum[mask]) * (r / (n - 1))
    return CentralityVector(Measure.CLOSENESS, net.nodes, values)


def betweenness_centrality(net, threads=1):
    """Unnormalized directed betweenness via Brandes' accumulation."""
    n = len(net)
    indptr, indices = net.csr()
    parts = _run_blocks(
        lambda lo, hi: kernels.betweenness_block(indptr, indices, n, lo, hi), _blocks(n), threads
    )
    total = np.zeros(n, dtype=np.float64)
    for part in parts:
        total += part
    return CentralityVector(Measure.BETWEENNESS, net.nodes, total)


def pagerank(net, params=None):
    """Non-normalized PageRank, ``PR(i) = c * sum_{j->i} PR(j)/d_j + (1 - c)``.

    Values average 1.  Dangling nodes spread their score uniformly over every
    node.  When the iteration cap is hit the vector is still returned, with
    ``converged=False`` and a logged warning.
    """
    params = params or PageRankParams()
    if len(net) == 0:
        raise InvalidParams("pagerank needs a non-empty network")
    in_ptr, in_idx = net.csr_in()
    out_ptr, _ = net.csr()
    out_degree = np.ascontiguousarray(np.diff(out_ptr))
    pr, iterations, residual, history = kernels.pagerank(
        in_ptr, in_idx, out_degree, params.damping, params.max_iterations, params.tolerance
    )
    converged = residual < params.tolerance
    if not converged:
        log.warning(
            "PageRank did not converge: residual %.3g after %d iterations", residual, iterations
        )
    return CentralityVector(
        Measure.PAGERANK_RAW, net.nodes, pr, iterations, float(residual), converged, history
    )


def pagerank_scale10(raw):
    """Map raw PageRank onto integer toolbar-style scores 0..10.

    ``round(10 * ln(raw / min) / ln(max / min))`` with halves rounded up;
    a degenerate range (max/min within 1e-12 of 1) scores every node 10.
    """
    values = np.asarray(raw.values, dtype=np.float64)
    if values.size == 0:
        return CentralityVector(Measure.PAGERANK_SCALED, raw.nodes, values.copy())
    if np.any(values <= 0):
        raise InvalidParams("raw PageRank values must be positive")
    lo, hi = values.min(), values.max()
    span = math.log(hi / lo)
    if span <= 1e-12:
        scaled = np.full(values.shape, 10.0)
    else:
        scaled = np.floor(10.0 * np.log(values / lo) / span + 0.5)
        np.clip(scaled, 0.0, 10.0, out=scaled)
    return CentralityVector(Measure.PAGERANK_SCALED, raw.nodes, scaled)


def compute_all(net, params=None, measures=None, threads=1, symmetrize=False):
    """Compute the requested measures (all of them by default) keyed by :class:`Measure`."""
    if symmetrize:
        net = net.symmetrized()
    wanted = set(Measure) if measures is None else set(measures)
    if Measure.PAGERANK_SCALED in wanted:
        wanted.add(Measure.PAGERANK_RAW)
    out = {}
    if Measure.IN_DEGREE in wanted:
        out[Measure.IN_DEGREE] = in_degree_centrality(net)
    if Measure.OUT_DEGREE in wanted:
        out[Measure.OUT_DEGREE] = out_degree_centrality(net)
    if Measure.CLOSENESS in wanted:
        out[Measure.CLOSENESS] = closeness_centrality(net, threads)
    if Measure.BETWEENNESS in wanted:
        out[Measure.BETWEENNESS] = betweenness_centrality(net, threads)
    if Measure.PAGERANK_RAW in wanted:
        out[Measure.PAGERANK_RAW] = pagerank(net, params)
    if Measure.PAGERANK_SCALED in wanted:
        out[Measure.PAGERANK_SCALED] = pagerank_scale10(out[Measure.PAGERANK_RAW])
    return out


CSV_COLUMNS = ("blog_id",) + tuple(m.value for m in Measure)
_INTEGER = {Measure.IN_DEGREE, Measure.OUT_DEGREE, Measure.PAGERANK_SCALED}


def format_real(x):
    return f"{x:.9f}"


def centrality_csv(table):
    """CSV text for a full ``compute_all`` result."""
    nodes = table[Measure.IN_DEGREE].nodes
    lines = [",".join(CSV_COLUMNS)]
    for i, node in enumerate(nodes):
        cells = [node]
        for m in Measure:
            v = table[m].values[i]
            cells.append(str(int(v)) if m in _INTEGER else format_real(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def write_centrality_csv(table, path):
    try:
        Path(path).write_text(centrality_csv(table), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
