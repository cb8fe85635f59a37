import math

import numpy as np
import pytest

from blogcap.errors import MissingClass, NotConverged, SeparationDetected
from blogcap.features import DesignMatrix
from blogcap.mnlogit import (
    ModelFit,
    epv_check,
    fit,
    gradient,
    hessian,
    inference,
    log_likelihood,
    predict_proba,
    relative_risk_ratio,
    stars,
)
from oracles import binary_logit_newton, binary_loglik, softmax_direct


def make_dm(X, y, terms=None):
    X = np.asarray(X, dtype=np.float64)
    terms = terms or ("Intercept",) + tuple(f"x{i}" for i in range(1, X.shape[1]))
    return DesignMatrix(tuple(f"r{i}" for i in range(len(X))), tuple(terms), X, np.asarray(y))


def simulate(rng, n, k, n_classes=5, scale=0.5):
    X = np.column_stack([np.ones(n), rng.normal(size=(n, k - 1))])
    B = np.vstack([np.zeros(k), rng.normal(scale=scale, size=(n_classes - 1, k))])
    eta = X @ B.T
    p = np.exp(eta - eta.max(axis=1, keepdims=True))
    p /= p.sum(axis=1, keepdims=True)
    y = np.array([rng.choice(n_classes, p=row) for row in p])
    return X, y, B[1:]


def fd_gradient(X, y, coef, h=1e-6):
    g = np.zeros(coef.size)
    for i in range(coef.size):
        e = np.zeros(coef.size)
        e[i] = h
        up = log_likelihood(X, y, coef + e.reshape(coef.shape))
        dn = log_likelihood(X, y, coef - e.reshape(coef.shape))
        g[i] = (up - dn) / (2 * h)
    return g


def test_loglik_at_zero_is_uniform(rng):
    X, y, _ = simulate(rng, 40, 3)
    assert log_likelihood(X, y, np.zeros((4, 3))) == pytest.approx(40 * math.log(0.2), abs=1e-10)


def test_loglik_nonpositive(rng):
    for _ in range(10):
        X, y, B = simulate(rng, 30, 4)
        assert log_likelihood(X, y, rng.normal(size=B.shape)) <= 0.0


def test_loglik_two_classes_equals_binary(rng):
    X, y, B = simulate(rng, 50, 3, n_classes=2)
    beta = rng.normal(size=3)
    assert log_likelihood(X, y, beta[None, :]) == pytest.approx(binary_loglik(X, y, beta), abs=1e-10)


def test_gradient_matches_finite_differences(rng):
    for _ in range(5):
        X, y, B = simulate(rng, 40, 4)
        coef = rng.normal(scale=0.3, size=B.shape)
        g = gradient(X, y, coef)
        fd = fd_gradient(X, y, coef)
        assert np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1.0) < 1e-6


def test_gradient_respects_baseline(rng):
    X, y, B = simulate(rng, 40, 3)
    coef = rng.normal(scale=0.3, size=B.shape)
    g = gradient(X, y, coef, baseline=2)
    h = 1e-6
    e = np.zeros_like(coef)
    e[0, 1] = h
    fd = (log_likelihood(X, y, coef + e, baseline=2) - log_likelihood(X, y, coef - e, baseline=2)) / (2 * h)
    assert g[1] == pytest.approx(fd, rel=1e-6)


def test_hessian_symmetric_negative_semidefinite(rng):
    X, y, B = simulate(rng, 40, 4)
    H = hessian(X, y, rng.normal(scale=0.3, size=B.shape))
    assert np.allclose(H, H.T, atol=1e-12)
    assert np.linalg.eigvalsh(H).max() <= 1e-10


def test_hessian_matches_gradient_differences(rng):
    X, y, B = simulate(rng, 40, 3)
    coef = rng.normal(scale=0.3, size=B.shape)
    H = hessian(X, y, coef)
    h = 1e-6
    for i in range(coef.size):
        e = np.zeros(coef.size)
        e[i] = h
        col = (gradient(X, y, coef + e.reshape(coef.shape)) - gradient(X, y, coef - e.reshape(coef.shape))) / (2 * h)
        np.testing.assert_allclose(H[:, i], col, atol=1e-5)


def test_fit_reaches_stationary_point(rng):
    X, y, _ = simulate(rng, 800, 3)
    res = fit(make_dm(X, y))
    assert res.converged
    assert np.max(np.abs(gradient(X, y, res.coefficients))) < 1e-8
    assert np.all(np.diff(res.ll_history) >= 0)


def test_fit_two_classes_matches_binary_logit(rng):
    X, y, _ = simulate(rng, 300, 3, n_classes=2, scale=1.0)
    res = fit(make_dm(X, y), n_classes=2)
    np.testing.assert_allclose(res.coefficients[0], binary_logit_newton(X, y), atol=1e-6)


def test_fit_balanced_intercept_only_is_zero():
    y = np.repeat(np.arange(5), 20)
    res = fit(make_dm(np.ones((100, 1)), y))
    np.testing.assert_allclose(res.coefficients, 0.0, atol=1e-12)
    assert res.iterations == 0 and res.converged


def test_intercept_only_gives_log_odds():
    y = np.repeat(np.arange(5), [10, 20, 30, 15, 25])
    res = fit(make_dm(np.ones((100, 1)), y))
    np.testing.assert_allclose(res.coefficients[:, 0], np.log([2, 3, 1.5, 2.5]), atol=1e-8)


def test_fit_recovers_truth_large_sample(rng):
    X, y, B = simulate(rng, 20000, 3)
    res = fit(make_dm(X, y))
    assert np.max(np.abs(res.coefficients - B)) < 0.1


def test_missing_class():
    y = np.array([0, 1, 2, 3] * 5)
    with pytest.raises(MissingClass, match="High"):
        fit(make_dm(np.ones((20, 1)), y))


def test_separation_detected():
    x = np.arange(50, dtype=float)
    y = np.minimum(x // 10, 4).astype(int)
    X = np.column_stack([np.ones(50), x])
    with pytest.raises(SeparationDetected):
        fit(make_dm(X, y))


def test_fit_deterministic(rng):
    X, y, _ = simulate(rng, 300, 4)
    a, b = fit(make_dm(X, y)), fit(make_dm(X, y))
    assert a.to_json() == b.to_json()


def test_relabel_equivariance(rng):
    # changing the baseline only re-expresses the same model
    X, y, _ = simulate(rng, 400, 3)
    a = fit(make_dm(X, y), baseline=0)
    b = fit(make_dm(X, y), baseline=2)
    assert a.log_likelihood == pytest.approx(b.log_likelihood, abs=1e-8)
    full_a = np.insert(a.coefficients, 0, 0.0, axis=0)
    full_b = np.insert(b.coefficients, 2, 0.0, axis=0)
    np.testing.assert_allclose(full_a - full_a[2], full_b, atol=1e-6)


def test_duplicated_data_shrinks_se(rng):
    X, y, _ = simulate(rng, 300, 3)
    a = fit(make_dm(X, y))
    b = fit(make_dm(np.vstack([X, X]), np.concatenate([y, y])))
    np.testing.assert_allclose(b.coefficients, a.coefficients, atol=1e-9)
    np.testing.assert_allclose(np.sqrt(np.diag(b.covariance)),
                               np.sqrt(np.diag(a.covariance)) / math.sqrt(2), rtol=1e-9)


def test_model_fit_dict_roundtrip(rng):
    X, y, _ = simulate(rng, 200, 2)
    res = fit(make_dm(X, y))
    back = ModelFit.from_dict(res.to_dict())
    assert back.to_json() == res.to_json()


@pytest.mark.parametrize("beta, rrr", [(0.43, 1.5373), (-1.21, 0.298)])
def test_relative_risk_ratio_examples(beta, rrr):
    assert relative_risk_ratio(beta) == pytest.approx(rrr, abs=5e-4)


@pytest.mark.parametrize("p, s", [(0.0004, "***"), (0.001, "**"), (0.009, "**"),
                                  (0.01, "*"), (0.049, "*"), (0.05, ""), (0.5, "")])
def test_stars_thresholds(p, s):
    assert stars(p) == s


def test_inference_rows(rng):
    X, y, _ = simulate(rng, 500, 3)
    res = fit(make_dm(X, y))
    rows = inference(res)
    assert len(rows) == 3 * 4
    assert [r.term for r in rows[:4]] == ["Intercept"] * 4
    assert [r.category_label for r in rows[:4]] == ["Low", "Average", "ModeratelyHigh", "High"]
    for r in rows:
        assert r.rrr == math.exp(r.beta)
        assert r.z == pytest.approx(r.beta / r.se)
        assert 0.0 <= r.p_value <= 1.0


def test_inference_zero_beta():
    y = np.repeat(np.arange(5), 20)
    rows = inference(fit(make_dm(np.ones((100, 1)), y)))
    assert all(r.rrr == 1.0 and r.stars == "" and r.p_value == 1.0 for r in rows)


def test_inference_refuses_unconverged(rng):
    X, y, _ = simulate(rng, 300, 3)
    res = fit(make_dm(X, y), max_iter=1)
    assert not res.converged
    with pytest.raises(NotConverged):
        inference(res)
    assert len(inference(res, allow_unconverged=True)) == 12


def test_predict_proba(rng):
    X, y, _ = simulate(rng, 300, 3)
    res = fit(make_dm(X, y))
    for w in X[:20]:
        p = predict_proba(res, w)
        assert abs(p.sum() - 1.0) < 1e-12
        rows = np.insert(res.coefficients, 0, 0.0, axis=0)
        np.testing.assert_allclose(p, softmax_direct(w, rows), atol=1e-12)


def test_predict_proba_shift_invariant(rng):
    # subtracting one category's row from every row re-expresses the same model
    X, y, _ = simulate(rng, 300, 3)
    res = fit(make_dm(X, y))
    full = np.insert(res.coefficients, 0, 0.0, axis=0)
    shifted = np.delete(full - full[3], 3, axis=0)
    other = ModelFit(res.terms, shifted, res.covariance, res.log_likelihood,
                     res.iterations, True, 0.0, 0.0, res.n_obs, baseline=3)
    np.testing.assert_allclose(predict_proba(other, X[:20]), predict_proba(res, X[:20]), atol=1e-12)


def test_epv_small_sample_warns(caplog):
    y = np.repeat(np.arange(5), 33)
    X = np.ones((165, 29))
    rep = epv_check(make_dm(X, y, ("Intercept",) + tuple(f"t{i}" for i in range(28))))
    assert rep.smallest_class == 33 and rep.parameters == 29
    assert rep.epv == pytest.approx(33 / 29) and rep.warning
    assert "events per parameter 1.1 < 10" in caplog.text


def test_epv_large_sample_silent(caplog):
    y = np.repeat(np.arange(5), 2000)
    rep = epv_check(make_dm(np.ones((10000, 5)), y))
    assert rep.epv == 400 and not rep.warning
    assert "events per parameter" not in caplog.text


def test_epv_intercept_only():
    y = np.repeat(np.arange(5), [7, 8, 9, 10, 11])
    assert epv_check(make_dm(np.ones((45, 1)), y)).epv == 7
