"""Directed recommendation networks: data model, CSV I/O and snowball delineation."""

import logging
from collections import deque
from pathlib import Path

import numpy as np

from .errors import EmptyFile, IoFailure, MalformedRow, UnknownSeed

log = logging.getLogger(__name__)

EDGE_HEADER = ("source_id", "target_id")


class BlogNetwork:
    """Immutable directed graph of blogs; an edge ``(s, t)`` means *s recommends t*.

    Node order is the order in which ids were first seen, and every derived
    vector or matrix follows it.
    """

    __slots__ = ("_nodes", "_index", "_edges", "_edge_set", "_csr", "_csr_in")

    def __init__(self, nodes, edges=()):
        nodes = tuple(nodes)
        index = {}
        for node in nodes:
            if not isinstance(node, str) or not node:
                raise ValueError(f"invalid blog id {node!r}")
            if node in index:
                raise ValueError(f"duplicate node {node!r}")
            index[node] = len(index)
        seen = set()
        ordered = []
        for s, t in edges:
            if s not in index or t not in index:
                raise ValueError(f"edge ({s!r}, {t!r}) has an endpoint outside the node set")
            if s == t:
                raise ValueError(f"self-loop on {s!r}")
            if (s, t) in seen:
                raise ValueError(f"duplicate edge ({s!r}, {t!r})")
            seen.add((s, t))
            ordered.append((s, t))
        self._nodes = nodes
        self._index = index
        self._edges = tuple(ordered)
        self._edge_set = frozenset(seen)
        self._csr = None
        self._csr_in = None

    @property
    def nodes(self):
        return self._nodes

    @property
    def edges(self):
        return self._edges

    @property
    def edge_set(self):
        return self._edge_set

    def __len__(self):
        return len(self._nodes)

    def __contains__(self, node):
        return node in self._index

    def __eq__(self, other):
        if not isinstance(other, BlogNetwork):
            return NotImplemented
        return self._nodes == other._nodes and self._edge_set == other._edge_set

    def __hash__(self):
        return hash((self._nodes, self._edge_set))

    def __repr__(self):
        return f"BlogNetwork(n={len(self._nodes)}, m={len(self._edges)})"

    def index(self, node):
        return self._index[node]

    def successors(self, node):
        return [t for s, t in self._edges if s == node]

    def csr(self):
        """Out-adjacency as ``(indptr, indices)``; neighbours sorted by node index."""
        if self._csr is None:
            self._csr = _build_csr(len(self._nodes), self._index_pairs(reverse=False))
        return self._csr

    def csr_in(self):
        """In-adjacency as ``(indptr, indices)``; row ``i`` lists the recommenders of ``i``."""
        if self._csr_in is None:
            self._csr_in = _build_csr(len(self._nodes), self._index_pairs(reverse=True))
        return self._csr_in

    def _index_pairs(self, reverse):
        idx = self._index
        if reverse:
            return [(idx[t], idx[s]) for s, t in self._edges]
        return [(idx[s], idx[t]) for s, t in self._edges]

    def adjacency_matrix(self):
        """Dense 0/1 matrix with ``a[i, x] = 1`` when node i recommends node x."""
        n = len(self._nodes)
        a = np.zeros((n, n), dtype=np.int64)
        for s, t in self._edges:
            a[self._index[s], self._index[t]] = 1
        return a

    def symmetrized(self):
        """Copy in which every edge is mirrored by its reverse."""
        edges = list(self._edges)
        present = set(self._edge_set)
        for s, t in self._edges:
            if (t, s) not in present:
                present.add((t, s))
                edges.append((t, s))
        return BlogNetwork(self._nodes, edges)

    def subgraph(self, keep):
        """Induced subgraph on ``keep``, preserving this network's node and edge order."""
        keep = set(keep)
        nodes = [v for v in self._nodes if v in keep]
        edges = [(s, t) for s, t in self._edges if s in keep and t in keep]
        return BlogNetwork(nodes, edges)


def _build_csr(n, pairs):
    pairs = sorted(pairs)
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices = np.empty(len(pairs), dtype=np.int64)
    for k, (a, b) in enumerate(pairs):
        indptr[a + 1] += 1
        indices[k] = b
    np.cumsum(indptr, out=indptr)
    return indptr, indices


def _read_lines(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return text.splitlines()


def load_edge_list(path):
    """Read a ``source_id,target_id`` CSV into a :class:`BlogNetwork`.

    Duplicate rows collapse into one edge and self-loops are dropped; both
    emit a warning on the module logger.  Quoting is not supported, so a row
    whose field contains a comma is rejected as malformed.
    """
    lines = _read_lines(path)
    if not lines or not any(line.strip() for line in lines):
        raise EmptyFile(f"{path} is empty")
    header = tuple(f.strip() for f in lines[0].lstrip("\ufeff").split(","))
    if header != EDGE_HEADER:
        raise MalformedRow(1, f"expected header {','.join(EDGE_HEADER)}")

    nodes = {}
    edges = []
    seen = set()
    rows = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 2:
            raise MalformedRow(lineno, f"expected 2 fields, got {len(fields)}")
        s, t = fields
        if not s or not t:
            raise MalformedRow(lineno, "empty blog id")
        if '"' in s or '"' in t:
            raise MalformedRow(lineno, "quoted fields are not supported")
        rows += 1
        nodes.setdefault(s, None)
        nodes.setdefault(t, None)
        if s == t:
            log.warning("line %d: dropping self-loop on %s", lineno, s)
            continue
        if (s, t) in seen:
            log.warning("line %d: duplicate edge %s -> %s collapsed", lineno, s, t)
            continue
        seen.add((s, t))
        edges.append((s, t))
    if rows == 0:
        raise EmptyFile(f"{path} has a header but no edge rows")
    return BlogNetwork(nodes, edges)


def write_edge_list(net, path):
    lines = [",".join(EDGE_HEADER)]
    lines.extend(f"{s},{t}" for s, t in net.edges)
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def delineate_snowball(net, seed, depth=1):
    """Egocentric network around ``seed``.

    The boundary holds the seed plus every blog reachable over at most
    ``depth`` out-edges (depth 1: the blogs the seed cites).  All edges of
    ``net`` with both endpoints inside the boundary are kept, including links
    among the cited blogs and links back to the seed.
    """
    if seed not in net:
        raise UnknownSeed(seed)
    if depth < 0:
        raise ValueError("depth must be non-negative")
    indptr, indices = net.csr()
    nodes = net.nodes
    start = net.index(seed)
    level = {start: 0}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        if level[v] == depth:
            continue
        for w in indices[indptr[v]:indptr[v + 1]]:
            w = int(w)
            if w not in level:
                level[w] = level[v] + 1
                queue.append(w)
    return net.subgraph(nodes[i] for i in level)


def degree_sequences(net):
    """Map each blog id to ``(in_degree, out_degree)``."""
    counts = {v: [0, 0] for v in net.nodes}
    for s, t in net.edges:
        counts[s][1] += 1
        counts[t][0] += 1
    return {v: (c[0], c[1]) for v, c in counts.items()}
