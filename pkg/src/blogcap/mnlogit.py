"""Multinomial logit by Newton-Raphson, with Wald inference.

Coefficients are passed around as a ``(J - 1, K)`` array: one row per
non-baseline category, in ascending category order, one column per design
term.  The baseline row is identically zero.  Flattened parameter vectors,
gradients, Hessians and covariances use the same category-major layout.
"""

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg
from scipy.stats import norm

from .errors import (
    DimensionMismatch,
    MissingClass,
    NotConverged,
    SeparationDetected,
    SingularHessian,
)
from .features import N_CLASSES, AttractivenessClass

log = logging.getLogger(__name__)

SEPARATION_BOUND = 30.0
RIDGE_LADDER = (1e-6, 1e-5, 1e-4, 1e-3, 1e-2)
EPV_THRESHOLD = 10.0


def _prepare(X, y, coefficients, baseline):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    coef = np.asarray(coefficients, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X {X.shape} and y {y.shape} are inconsistent")
    if coef.ndim != 2 or coef.shape[1] != X.shape[1]:
        raise DimensionMismatch(
            f"coefficients {coef.shape} do not match {X.shape[1]} design columns"
        )
    n_classes = coef.shape[0] + 1
    if not 0 <= baseline < n_classes:
        raise DimensionMismatch(f"baseline {baseline} outside 0..{n_classes - 1}")
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise DimensionMismatch(f"labels must lie in 0..{n_classes - 1}")
    full = np.insert(coef, baseline, 0.0, axis=0)
    return X, y, full


def _free(n_classes, baseline):
    return [j for j in range(n_classes) if j != baseline]


def _log_softmax(X, full):
    eta = X @ full.T
    eta -= eta.max(axis=1, keepdims=True)
    return eta - np.log(np.exp(eta).sum(axis=1, keepdims=True))


def log_likelihood(X, y, coefficients, baseline=0):
    """Sum over rows of the log softmax probability of the observed class."""
    X, y, full = _prepare(X, y, coefficients, baseline)
    logp = _log_softmax(X, full)
    return float(logp[np.arange(len(y)), y].sum())


def gradient(X, y, coefficients, baseline=0):
    X, y, full = _prepare(X, y, coefficients, baseline)
    p = np.exp(_log_softmax(X, full))
    resid = -p
    resid[np.arange(len(y)), y] += 1.0
    free = _free(full.shape[0], baseline)
    return (resid[:, free].T @ X).ravel()


def hessian(X, y, coefficients, baseline=0):
    X, y, full = _prepare(X, y, coefficients, baseline)
    p = np.exp(_log_softmax(X, full))
    return _hessian_from_probs(X, p, baseline)


def _hessian_from_probs(X, p, baseline):
    free = _free(p.shape[1], baseline)
    k = X.shape[1]
    m = len(free)
    H = np.empty((m * k, m * k))
    for a, j in enumerate(free):
        for b, l in enumerate(free[a:], start=a):
            w = p[:, j] * ((j == l) - p[:, l])
            block = -(X.T @ (w[:, None] * X))
            H[a * k:(a + 1) * k, b * k:(b + 1) * k] = block
            H[b * k:(b + 1) * k, a * k:(a + 1) * k] = block.T
    return H


def _loglik_grad_hess(X, y, full, baseline):
    logp = _log_softmax(X, full)
    n = len(y)
    ll = float(logp[np.arange(n), y].sum())
    p = np.exp(logp)
    free = _free(full.shape[0], baseline)
    resid = -p
    resid[np.arange(n), y] += 1.0
    g = (resid[:, free].T @ X).ravel()
    return ll, g, _hessian_from_probs(X, p, baseline)


def _cholesky(A):
    """Cholesky factor of A, or None when A is (numerically) not positive definite."""
    try:
        L = linalg.cholesky(A, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError):
        return None
    d = np.diag(L)
    if d.min() <= 0 or (d.min() / d.max()) ** 2 < 1e-14:
        return None
    return L


@dataclass(frozen=True, eq=False)
class ModelFit:
    terms: tuple
    coefficients: np.ndarray
    covariance: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool
    ridge_used: float
    gradient_max_abs: float
    n_obs: int
    baseline: int = 0
    ll_history: tuple = field(default=())

    @property
    def n_classes(self):
        return self.coefficients.shape[0] + 1

    @property
    def categories(self):
        return tuple(_free(self.n_classes, self.baseline))

    def block(self, category):
        return self.coefficients[self.categories.index(int(category))]

    def to_dict(self):
        return {
            "baseline": category_label(self.baseline),
            "n_classes": self.n_classes,
            "terms": list(self.terms),
            "categories": [category_label(j) for j in self.categories],
            "coefficients": {
                category_label(j): self.coefficients[a].tolist() for a, j in enumerate(self.categories)
            },
            "covariance": self.covariance.ravel().tolist(),
            "covariance_shape": list(self.covariance.shape),
            "log_likelihood": self.log_likelihood,
            "n_obs": self.n_obs,
            "convergence": {
                "converged": self.converged,
                "iterations": self.iterations,
                "ridge_used": self.ridge_used,
                "gradient_max_abs": self.gradient_max_abs,
                "log_likelihood_history": list(self.ll_history),
            },
        }

    @classmethod
    def from_dict(cls, d):
        cats = [parse_category(c) for c in d["categories"]]
        coef = np.array([d["coefficients"][category_label(j)] for j in cats], dtype=np.float64)
        conv = d["convergence"]
        return cls(
            terms=tuple(d["terms"]),
            coefficients=coef,
            covariance=np.array(d["covariance"], dtype=np.float64).reshape(d["covariance_shape"]),
            log_likelihood=d["log_likelihood"],
            iterations=conv["iterations"],
            converged=conv["converged"],
            ridge_used=conv["ridge_used"],
            gradient_max_abs=conv["gradient_max_abs"],
            n_obs=d["n_obs"],
            baseline=parse_category(d["baseline"]),
            ll_history=tuple(conv.get("log_likelihood_history", ())),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


def category_label(j):
    return AttractivenessClass(j).name if j < N_CLASSES else str(j)


def parse_category(s):
    return int(AttractivenessClass[s]) if s in AttractivenessClass.__members__ else int(s)


def fit(dm, baseline=AttractivenessClass.VeryLow, n_classes=N_CLASSES, max_iter=200,
        grad_tol=1e-8, ll_tol=1e-10):
    """Maximum-likelihood fit of the multinomial logit on a design matrix.

    Newton-Raphson from zero with step halving: a step is only accepted if the
    log-likelihood does not drop.  A numerically singular Hessian is retried
    with a ridge ``lambda * I`` escalating 1e-6 .. 1e-2.  The reported
    covariance inverts the plain (unridged) information matrix at the optimum.
    """
    X = np.asarray(dm.X, dtype=np.float64)
    y = np.asarray(dm.y, dtype=np.int64)
    baseline = int(baseline)
    if y.size and (y.min() < 0 or y.max() >= n_classes):
        raise DimensionMismatch(f"labels must lie in 0..{n_classes - 1}")
    counts = np.bincount(y, minlength=n_classes)
    absent = [category_label(j) for j in range(n_classes) if counts[j] == 0]
    if absent:
        raise MissingClass(f"no observations for class(es): {', '.join(absent)}")

    k = X.shape[1]
    m = n_classes - 1
    coef = np.zeros((m, k))
    full = np.insert(coef, baseline, 0.0, axis=0)
    ll, g, H = _loglik_grad_hess(X, y, full, baseline)
    history = [ll]
    ridge_used = 0.0
    converged = False
    iterations = 0

    while iterations < max_iter:
        if np.max(np.abs(g)) < grad_tol:
            converged = True
            break
        A = -H
        L = _cholesky(A)
        if L is None:
            for lam in RIDGE_LADDER:
                L = _cholesky(A + lam * np.eye(A.shape[0]))
                if L is not None:
                    ridge_used = max(ridge_used, lam)
                    break
            else:
                raise SingularHessian("Hessian stays singular after ridge escalation to 1e-2")
        step = linalg.cho_solve((L, True), g).reshape(m, k)

        t = 1.0
        accepted = False
        for _ in range(60):
            cand = coef + t * step
            ll_c = log_likelihood(X, y, cand, baseline)
            if ll_c >= ll:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            log.warning("line search failed at iteration %d", iterations)
            break
        iterations += 1
        coef = cand
        if np.max(np.abs(coef)) > SEPARATION_BOUND:
            raise SeparationDetected(
                f"|coefficient| exceeded {SEPARATION_BOUND:g} at iteration {iterations}; "
                "the classes are (quasi-)separated, add a ridge or drop terms"
            )
        full = np.insert(coef, baseline, 0.0, axis=0)
        delta = ll_c - ll
        ll, g, H = _loglik_grad_hess(X, y, full, baseline)
        history.append(ll)
        if abs(delta) < ll_tol:
            converged = True
            break

    A = -H
    L = _cholesky(A)
    if L is not None:
        cov = linalg.cho_solve((L, True), np.eye(A.shape[0]))
    else:
        log.warning("information matrix is singular at the optimum; using a pseudo-inverse")
        cov = np.linalg.pinv(A)
    cov = 0.5 * (cov + cov.T)
    if not converged:
        log.warning("Newton iterations stopped without convergence after %d steps", iterations)
    return ModelFit(
        terms=tuple(dm.terms),
        coefficients=coef,
        covariance=cov,
        log_likelihood=ll,
        iterations=iterations,
        converged=converged,
        ridge_used=ridge_used,
        gradient_max_abs=float(np.max(np.abs(g))) if g.size else 0.0,
        n_obs=int(len(y)),
        baseline=baseline,
        ll_history=tuple(history),
    )


def relative_risk_ratio(beta):
    return math.exp(beta)


def stars(p):
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class InferenceRow:
    term: str
    category: int
    beta: float
    rrr: float
    se: float
    z: float
    p_value: float
    stars: str

    @property
    def category_label(self):
        return category_label(self.category)


def inference(fit, allow_unconverged=False):
    """Wald tests per coefficient, ordered term-major then category."""
    if not fit.converged and not allow_unconverged:
        raise NotConverged("model did not converge; refusing to report inference")
    k = len(fit.terms)
    se_all = np.sqrt(np.clip(np.diag(fit.covariance), 0.0, None))
    rows = []
    for t, term in enumerate(fit.terms):
        for a, cat in enumerate(fit.categories):
            beta = float(fit.coefficients[a, t])
            se = float(se_all[a * k + t])
            z = beta / se if se > 0 else (0.0 if beta == 0 else math.copysign(math.inf, beta))
            p = float(2.0 * norm.sf(abs(z)))
            rows.append(InferenceRow(term, cat, beta, relative_risk_ratio(beta), se, z, p, stars(p)))
    return rows


def predict_proba(fit, w):
    """Class probabilities for one design row (or a stack of rows)."""
    w = np.asarray(w, dtype=np.float64)
    single = w.ndim == 1
    W = np.atleast_2d(w)
    if W.shape[1] != len(fit.terms):
        raise DimensionMismatch(f"row has {W.shape[1]} entries, model has {len(fit.terms)} terms")
    full = np.insert(fit.coefficients, fit.baseline, 0.0, axis=0)
    p = np.exp(_log_softmax(W, full))
    p /= p.sum(axis=1, keepdims=True)
    return p[0] if single else p


@dataclass(frozen=True)
class EpvReport:
    smallest_class: int
    parameters: int
    epv: float
    warning: bool

    @property
    def message(self):
        if self.warning:
            return f"events per parameter {self.epv:.1f} < {EPV_THRESHOLD:g}"
        return f"events per parameter {self.epv:.1f}"


def epv_check(dm, n_classes=N_CLASSES):
    """Smallest outcome class size over the parameters per equation."""
    counts = np.bincount(np.asarray(dm.y, dtype=np.int64), minlength=n_classes)
    smallest = int(counts.min()) if counts.size else 0
    params = len(dm.terms)
    epv = smallest / params if params else math.inf
    report = EpvReport(smallest, params, epv, epv < EPV_THRESHOLD)
    if report.warning:
        log.warning(report.message)
    return report
