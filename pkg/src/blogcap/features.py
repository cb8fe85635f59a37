"""Outcome classes, blogger moderators and the interaction design matrix.

Terms are written as tokens.  Centralities: ``CE`` in-degree, ``CO``
out-degree, ``CC`` closeness, ``CI`` betweenness, ``PR`` PageRank on the 0-10
scale, ``PRR`` raw PageRank.  Moderators: ``TE`` years of experience, ``CP``
posts in seven days, ``CA`` replied to readers (0/1), and profession dummies
``AP1`` teacher, ``AP2`` economist, ``AP3`` consultant/investor, ``APB``
businessman/CEO, ``APJ`` journalist, ``APO`` other.  A product term joins two
tokens with ``_x_`` (``TE_x_CC``); ``Intercept`` is the constant column.
"""

import csv
import enum
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .centrality import Measure
from .errors import (
    DesignError,
    DuplicateBlogId,
    IoFailure,
    MalformedRow,
    MissingBlog,
    MissingColumn,
    TooFewObservations,
    UnknownProfession,
    UnknownTerm,
)

N_CLASSES = 5


class AttractivenessClass(enum.IntEnum):
    VeryLow = 0
    Low = 1
    Average = 2
    ModeratelyHigh = 3
    High = 4


class Profession(enum.Enum):
    Teacher = "Teacher"
    Economist = "Economist"
    BusinessmanCeo = "BusinessmanCeo"
    Journalist = "Journalist"
    ConsultantInvestor = "ConsultantInvestor"
    Other = "Other"


PROFESSIONS = tuple(Profession)

_PROFESSION_ALIASES = {re.sub(r"[^a-z]", "", p.value.lower()): p for p in Profession}
_PROFESSION_ALIASES["others"] = Profession.Other


def parse_profession(text):
    key = re.sub(r"[^a-z]", "", text.strip().lower())
    try:
        return _PROFESSION_ALIASES[key]
    except KeyError:
        raise UnknownProfession(f"unknown profession {text!r}") from None


@dataclass(frozen=True)
class BlogAttributes:
    blog_id: str
    visits_6mo: int
    experience_years: float
    profession: Profession
    posts_7d: int
    replied_to_readers: bool


ATTRIBUTE_COLUMNS = (
    "blog_id",
    "visits_6mo",
    "experience_years",
    "profession",
    "posts_7d",
    "replied_to_readers",
)


def _nonneg_int(text, lineno, name):
    try:
        value = int(text)
    except ValueError:
        raise MalformedRow(lineno, f"{name} must be an integer, got {text!r}") from None
    if value < 0:
        raise MalformedRow(lineno, f"{name} must be non-negative")
    return value


def load_attributes(path):
    """Read the per-blog attributes CSV into ``{blog_id: BlogAttributes}``."""
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise MissingColumn(f"{path} has no header")
    header = [h.strip() for h in rows[0]]
    missing = [c for c in ATTRIBUTE_COLUMNS if c not in header]
    if missing:
        raise MissingColumn(f"{path} lacks column(s): {', '.join(missing)}")
    pos = {c: header.index(c) for c in ATTRIBUTE_COLUMNS}

    out = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(header):
            raise MalformedRow(lineno, f"expected {len(header)} fields, got {len(row)}")
        get = lambda c: row[pos[c]].strip()  # noqa: E731
        blog_id = get("blog_id")
        if not blog_id:
            raise MalformedRow(lineno, "empty blog_id")
        if blog_id in out:
            raise DuplicateBlogId(f"blog {blog_id!r} appears twice (line {lineno})")
        try:
            experience = float(get("experience_years"))
        except ValueError:
            raise MalformedRow(lineno, "experience_years must be a number") from None
        if not math.isfinite(experience) or experience < 0:
            raise MalformedRow(lineno, "experience_years must be finite and non-negative")
        replied = get("replied_to_readers")
        if replied not in ("0", "1"):
            raise MalformedRow(lineno, "replied_to_readers must be 0 or 1")
        out[blog_id] = BlogAttributes(
            blog_id=blog_id,
            visits_6mo=_nonneg_int(get("visits_6mo"), lineno, "visits_6mo"),
            experience_years=experience,
            profession=parse_profession(get("profession")),
            posts_7d=_nonneg_int(get("posts_7d"), lineno, "posts_7d"),
            replied_to_readers=replied == "1",
        )
    return out


def write_attributes(attrs, path):
    lines = [",".join(ATTRIBUTE_COLUMNS)]
    for a in attrs.values():
        lines.append(
            f"{a.blog_id},{a.visits_6mo},{a.experience_years!r},{a.profession.value},"
            f"{a.posts_7d},{int(a.replied_to_readers)}"
        )
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def classify_attractiveness(visits, n_classes=N_CLASSES):
    """Rank-based quintile classes.

    Blogs are sorted by ``(visits, blog_id)`` and rank r of N lands in class
    ``floor(5 r / N)``, so class sizes differ by at most one even with tied
    visit counts.
    """
    if len(visits) < n_classes:
        raise TooFewObservations(f"need at least {n_classes} blogs, got {len(visits)}")
    ranked = sorted(visits, key=lambda b: (visits[b], b))
    n = len(ranked)
    return {b: AttractivenessClass(n_classes * r // n) for r, b in enumerate(ranked)}


def encode_profession(attrs):
    """Six 0/1 indicators in the order teacher, economist, businessman/CEO,
    journalist, consultant/investor, other."""
    return tuple(int(attrs.profession is p) for p in PROFESSIONS)


CENTRALITY_TOKENS = {
    "CE": Measure.IN_DEGREE,
    "CO": Measure.OUT_DEGREE,
    "CC": Measure.CLOSENESS,
    "CI": Measure.BETWEENNESS,
    "PR": Measure.PAGERANK_SCALED,
    "PRR": Measure.PAGERANK_RAW,
}

MODERATOR_TOKENS = {
    "TE": lambda a: float(a.experience_years),
    "CP": lambda a: float(a.posts_7d),
    "CA": lambda a: float(a.replied_to_readers),
    "AP1": lambda a: float(a.profession is Profession.Teacher),
    "AP2": lambda a: float(a.profession is Profession.Economist),
    "AP3": lambda a: float(a.profession is Profession.ConsultantInvestor),
    "APB": lambda a: float(a.profession is Profession.BusinessmanCeo),
    "APJ": lambda a: float(a.profession is Profession.Journalist),
    "APO": lambda a: float(a.profession is Profession.Other),
}

INTERCEPT = "Intercept"
SEP = "_x_"

_TABLE2_CENTRALITIES = ("CE", "CC", "CI", "PR")
_TABLE2_MODERATORS = ("TE", "AP1", "AP2", "AP3", "CP", "CA")

TABLE2_TERMS = (
    (INTERCEPT,)
    + _TABLE2_CENTRALITIES
    + tuple(f"{m}{SEP}{c}" for m in _TABLE2_MODERATORS for c in _TABLE2_CENTRALITIES)
)

PRESETS = {"table2": TABLE2_TERMS}


def parse_term(term):
    """Split a descriptor into its base tokens; ``()`` for the intercept."""
    if term == INTERCEPT:
        return ()
    parts = tuple(term.split(SEP))
    if len(parts) > 2 or not all(parts):
        raise UnknownTerm(f"cannot parse term {term!r}")
    for p in parts:
        if p not in CENTRALITY_TOKENS and p not in MODERATOR_TOKENS:
            raise UnknownTerm(f"unknown variable {p!r} in term {term!r}")
    return parts


def resolve_terms(selection):
    """Accept a preset name, a comma-separated string, or a sequence of descriptors."""
    if isinstance(selection, str):
        if selection in PRESETS:
            return PRESETS[selection]
        selection = [t.strip() for t in selection.split(",") if t.strip()]
    terms = [INTERCEPT] + [t for t in selection if t != INTERCEPT]
    if len(set(terms)) != len(terms):
        raise UnknownTerm("duplicate term in term list")
    for t in terms:
        parse_term(t)
    return tuple(terms)


def required_measures(terms):
    return {CENTRALITY_TOKENS[p] for t in terms for p in parse_term(t) if p in CENTRALITY_TOKENS}


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    row_ids: tuple
    terms: tuple
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "row_ids", tuple(self.row_ids))
        object.__setattr__(self, "terms", tuple(self.terms))
        if X.ndim != 2 or X.shape != (len(self.row_ids), len(self.terms)):
            raise DesignError(f"X has shape {X.shape}, expected ({len(self.row_ids)}, {len(self.terms)})")
        if y.shape != (X.shape[0],):
            raise DesignError("y length does not match row count")
        if len(set(self.terms)) != len(self.terms):
            raise DesignError("term descriptors must be unique")
        if not self.terms or self.terms[0] != INTERCEPT or not np.all(X[:, 0] == 1.0):
            raise DesignError("first column must be an all-ones Intercept")
        zero = [t for t, col in zip(self.terms, X.T) if not np.any(col)]
        if zero:
            raise DesignError(f"constant-zero column(s): {', '.join(zero)}")

    def column(self, term):
        return self.X[:, self.terms.index(term)]

    def to_csv(self):
        lines = [",".join(("blog_id",) + self.terms + ("class",))]
        for rid, row, cls in zip(self.row_ids, self.X, self.y):
            lines.append(",".join([rid] + [repr(float(v)) for v in row] + [str(int(cls))]))
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        try:
            Path(path).write_text(self.to_csv(), encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc


def _base_values(token, row_ids, centralities, attrs):
    if token in CENTRALITY_TOKENS:
        measure = CENTRALITY_TOKENS[token]
        if measure not in centralities:
            raise MissingBlog(f"no {measure.value} values supplied for term variable {token}")
        vec = centralities[measure]
        lookup = dict(zip(vec.nodes, vec.values.tolist()))
        try:
            return np.array([lookup[b] for b in row_ids], dtype=np.float64)
        except KeyError as exc:
            raise MissingBlog(f"blog {exc.args[0]!r} has no {measure.value} value") from None
    get = MODERATOR_TOKENS[token]
    return np.array([get(attrs[b]) for b in row_ids], dtype=np.float64)


def build_design_matrix(centralities, attrs, terms=TABLE2_TERMS, classes=None, row_ids=None,
                        zscore=False):
    """Assemble regressors and outcome classes for every blog in the network.

    Rows follow the node order of the centrality vectors (or ``row_ids``).
    When ``classes`` is omitted they are derived from the visit counts of the
    rows via :func:`classify_attractiveness`.  ``zscore`` standardizes every
    non-intercept column after products are formed.
    """
    terms = resolve_terms(terms)
    if row_ids is None:
        if not centralities:
            raise DesignError("row_ids are required when no centralities are given")
        row_ids = next(iter(centralities.values())).nodes
    row_ids = tuple(row_ids)
    absent = [b for b in row_ids if b not in attrs]
    if absent:
        raise MissingBlog(f"no attributes for blog(s): {', '.join(absent[:5])}")

    cache = {}
    columns = []
    for term in terms:
        parts = parse_term(term)
        col = np.ones(len(row_ids))
        for p in parts:
            if p not in cache:
                cache[p] = _base_values(p, row_ids, centralities, attrs)
            col = col * cache[p]
        columns.append(col)
    X = np.column_stack(columns) if columns else np.empty((len(row_ids), 0))
    if zscore:
        for k in range(1, X.shape[1]):
            sd = X[:, k].std()
            if sd > 0:
                X[:, k] = (X[:, k] - X[:, k].mean()) / sd

    if classes is None:
        classes = classify_attractiveness({b: attrs[b].visits_6mo for b in row_ids})
    try:
        y = np.array([int(classes[b]) for b in row_ids], dtype=np.int64)
    except KeyError as exc:
        raise MissingBlog(f"blog {exc.args[0]!r} has no attractiveness class") from None
    return DesignMatrix(row_ids, terms, X, y)
