"""Synthetic blogospheres with known ground truth.

Networks grow by preferential attachment: each new blog recommends ``m``
distinct older blogs picked with probability proportional to
``in_degree + 1``.  Attributes are drawn independently, class labels are
sampled from a multinomial logit with known coefficients, and visit counts are
drawn from disjoint ascending bands per class.

Randomness comes from numpy's PCG64 ``Generator``: the network stream is
seeded with ``seed`` and the attribute/outcome stream with ``[seed, 1]``, so
the two never share draws.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .centrality import PageRankParams, compute_all
from .errors import InvalidParams, IoFailure
from .features import (
    N_CLASSES,
    PROFESSIONS,
    AttractivenessClass,
    BlogAttributes,
    build_design_matrix,
    required_measures,
    resolve_terms,
    write_attributes,
)
from .graph import BlogNetwork, write_edge_list

RECOVERY_TERMS = ("Intercept", "CE", "TE_x_CE", "CP_x_CA", "TE_x_CA")

# rows: Low, Average, ModeratelyHigh, High (VeryLow is the zero baseline);
# the intercept column is overwritten when calibrate_intercepts is on
RECOVERY_TRUTH = (
    (0.0, 0.02, 0.002, 0.03, -0.02),
    (0.0, 0.04, -0.002, -0.03, 0.02),
    (0.0, 0.06, 0.004, 0.05, 0.03),
    (0.0, 0.08, 0.006, 0.08, 0.05),
)

PROFESSION_PROBS = (0.15, 0.35, 0.15, 0.10, 0.15, 0.10)

VISIT_BANDS = (
    (500, 10_000),
    (10_000, 40_000),
    (40_000, 120_000),
    (120_000, 400_000),
    (400_000, 1_600_000),
)

MAX_EXPERIENCE = 14.0
MAX_POSTS = 84


@dataclass(frozen=True)
class GenParams:
    n: int
    m: int = 3
    seed: int = 0
    terms: tuple = RECOVERY_TERMS
    truth: tuple = RECOVERY_TRUTH
    calibrate_intercepts: bool = True
    profession_probs: tuple = PROFESSION_PROBS
    reply_prob: float = 0.3
    posts_mean: float = 8.0
    pagerank: PageRankParams = field(default_factory=PageRankParams)

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.m, int)):
            raise InvalidParams("n and m must be integers")
        if not self.n > self.m >= 1:
            raise InvalidParams(f"need n > m >= 1, got n={self.n}, m={self.m}")
        if not 0 <= self.seed < 2**64:
            raise InvalidParams("seed must be a 64-bit unsigned integer")
        terms = resolve_terms(self.terms)
        object.__setattr__(self, "terms", terms)
        truth = np.asarray(self.truth, dtype=np.float64)
        if truth.shape != (N_CLASSES - 1, len(terms)):
            raise InvalidParams(
                f"truth must have shape ({N_CLASSES - 1}, {len(terms)}), got {truth.shape}"
            )
        object.__setattr__(self, "truth", tuple(map(tuple, truth.tolist())))
        probs = np.asarray(self.profession_probs, dtype=np.float64)
        if probs.shape != (len(PROFESSIONS),) or np.any(probs < 0) or not np.isclose(probs.sum(), 1):
            raise InvalidParams("profession_probs must be 6 non-negative weights summing to 1")
        if not 0.0 <= self.reply_prob <= 1.0:
            raise InvalidParams("reply_prob must lie in [0, 1]")
        if self.posts_mean < 0:
            raise InvalidParams("posts_mean must be non-negative")


def _ids(n):
    width = len(str(n - 1))
    return [f"b{i:0{width}d}" for i in range(n)]


def _seed_clique(m):
    return [(i, j) for i in range(m + 1) for j in range(m + 1) if i != j]


def _assemble(n, pairs):
    ids = _ids(n)
    return BlogNetwork(ids, [(ids[s], ids[t]) for s, t in pairs])


def generate_pa_network(params):
    """Preferential attachment with kernel ``in_degree + 1``.

    Edge count is ``m (m + 1) + m (n - m - 1)``.
    """
    rng = np.random.default_rng(params.seed)
    m = params.m
    pairs = _seed_clique(m)
    # node v sits in the urn in_degree(v) + 1 times
    urn = [v for v in range(m + 1) for _ in range(m + 1)]
    for t in range(m + 1, params.n):
        chosen = []
        while len(chosen) < m:
            v = urn[int(rng.integers(len(urn)))]
            if v not in chosen:
                chosen.append(v)
        for v in chosen:
            pairs.append((t, v))
        urn.extend(chosen)
        urn.append(t)
    return _assemble(params.n, pairs)


def generate_uniform_network(params):
    """Control graph: same growth, but targets drawn uniformly among older blogs."""
    rng = np.random.default_rng(params.seed)
    m = params.m
    pairs = _seed_clique(m)
    for t in range(m + 1, params.n):
        for v in rng.choice(t, size=m, replace=False).tolist():
            pairs.append((t, v))
    return _assemble(params.n, pairs)


def _softmax_rows(X, full):
    eta = X @ full.T
    eta -= eta.max(axis=1, keepdims=True)
    p = np.exp(eta)
    return p / p.sum(axis=1, keepdims=True)


def calibrate_intercepts(X, slopes, n_classes=N_CLASSES, iters=100):
    """Intercepts making the average predicted share of every class ``1 / n_classes``.

    ``slopes`` is ``(J - 1, K)`` with column 0 ignored.  Solved by Newton on
    the concave objective whose stationarity condition is the share equation.
    """
    coef = np.array(slopes, dtype=np.float64)
    coef[:, 0] = 0.0
    n = X.shape[0]
    target = n / n_classes
    for _ in range(iters):
        full = np.vstack([np.zeros(X.shape[1]), coef])
        p = _softmax_rows(X, full)[:, 1:]
        g = target - p.sum(axis=0)
        if np.max(np.abs(g)) < 1e-9 * n:
            break
        H = -(np.diag(p.sum(axis=0)) - p.T @ p)
        coef[:, 0] -= np.linalg.solve(H, g)
    return coef


@dataclass(frozen=True, eq=False)
class SyntheticData:
    attributes: dict
    labels: dict
    terms: tuple
    truth: np.ndarray
    X: np.ndarray

    @property
    def visits(self):
        return {b: a.visits_6mo for b, a in self.attributes.items()}

    def class_counts(self):
        return np.bincount(list(self.labels.values()), minlength=N_CLASSES)


def generate_attributes_and_outcome(net, params):
    """Draw blogger attributes, sample classes from the true logit, assign visits.

    Visit bands are disjoint and ascending by class, so quintile binning of
    the visits returns the sampled labels exactly whenever the five sampled
    class counts are equal; otherwise only blogs at band edges move between
    adjacent classes.
    """
    if len(net) != params.n:
        raise InvalidParams(f"network has {len(net)} nodes, params expect {params.n}")
    rng = np.random.default_rng([params.seed, 1])
    ids = net.nodes
    n = len(ids)
    experience = np.round(rng.uniform(0.0, MAX_EXPERIENCE, size=n), 1)
    posts = np.minimum(rng.poisson(params.posts_mean, size=n), MAX_POSTS)
    profession = rng.choice(len(PROFESSIONS), size=n, p=np.asarray(params.profession_probs))
    replied = rng.random(n) < params.reply_prob
    draft = {
        b: BlogAttributes(b, 0, float(experience[i]), PROFESSIONS[profession[i]], int(posts[i]),
                          bool(replied[i]))
        for i, b in enumerate(ids)
    }

    centralities = compute_all(net, params.pagerank, measures=required_measures(params.terms))
    dm = build_design_matrix(centralities, draft, params.terms, classes={b: 0 for b in ids},
                             row_ids=ids)
    truth = np.asarray(params.truth, dtype=np.float64)
    if params.calibrate_intercepts:
        truth = calibrate_intercepts(dm.X, truth)
    full = np.vstack([np.zeros(dm.X.shape[1]), truth])
    cum = np.cumsum(_softmax_rows(dm.X, full), axis=1)
    u = rng.random(n)
    labels = np.minimum((cum < u[:, None]).sum(axis=1), N_CLASSES - 1)

    visits = np.empty(n, dtype=np.int64)
    for k, (lo, hi) in enumerate(VISIT_BANDS):
        mask = labels == k
        visits[mask] = rng.integers(lo, hi, size=int(mask.sum()))

    attributes = {
        b: BlogAttributes(b, int(visits[i]), a.experience_years, a.profession, a.posts_7d,
                          a.replied_to_readers)
        for i, (b, a) in enumerate(draft.items())
    }
    label_map = {b: AttractivenessClass(int(labels[i])) for i, b in enumerate(ids)}
    return SyntheticData(attributes, label_map, params.terms, truth, dm.X)


def truth_document(params, data):
    return {
        "generator": "preferential_attachment",
        "n": params.n,
        "m": params.m,
        "seed": params.seed,
        "baseline": AttractivenessClass.VeryLow.name,
        "terms": list(data.terms),
        "coefficients": {
            AttractivenessClass(j + 1).name: data.truth[j].tolist() for j in range(N_CLASSES - 1)
        },
        "class_counts": data.class_counts().tolist(),
        "damping": params.pagerank.damping,
    }


def read_truth(path):
    """Load a truth sidecar; returns ``(terms, coefficients)`` with coefficients ``(4, K)``."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    coef = np.array(
        [doc["coefficients"][AttractivenessClass(j).name] for j in range(1, N_CLASSES)],
        dtype=np.float64,
    )
    return tuple(doc["terms"]), coef


def write_dataset(out_dir, params):
    """Generate a network plus attributes and write ``edges.csv``, ``attributes.csv``
    and ``truth.json`` into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out}: {exc}") from exc
    net = generate_pa_network(params)
    data = generate_attributes_and_outcome(net, params)
    write_edge_list(net, out / "edges.csv")
    write_attributes(data.attributes, out / "attributes.csv")
    try:
        (out / "truth.json").write_text(
            json.dumps(truth_document(params, data), indent=2) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise IoFailure(f"cannot write truth sidecar: {exc}") from exc
    return net, data


def expected_edge_count(n, m):
    return m * (m + 1) + m * (n - m - 1)
