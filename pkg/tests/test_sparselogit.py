import numpy as np
import pytest

from dashmine.mining import _candidate_arrays
from dashmine.sparselogit import (
    candidate_column,
    fit_l1_logistic_path,
    lambda_grid,
    null_gradient,
    weighted_log_loss,
)


def make_problem(seed=0, n=300, k=6, signal=None, flip=0.15):
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(n, k)).astype(np.float32)
    literals = np.hstack([bits, 1 - bits]).astype(np.float32)
    cand_a, cand_b = _candidate_arrays(k, 2)
    if signal is None:
        signal = (bits[:, 0] > 0.5) & (bits[:, 2] < 0.5)
    y = np.where(rng.random(n) < 1 - flip, signal, ~signal).astype(np.float64)
    w = np.ones(n)
    return literals, cand_a, cand_b, y, w


def full_matrix(literals, cand_a, cand_b):
    return np.column_stack(
        [candidate_column(literals, cand_a[j], cand_b[j])
         for j in range(len(cand_a))]
    )


def kkt_residuals(literals, cand_a, cand_b, y, w, lam, coefs, intercept):
    X = full_matrix(literals, cand_a, cand_b)
    eta = intercept + X @ np.array(
        [coefs.get(j, 0.0) for j in range(X.shape[1])]
    )
    p = 1.0 / (1.0 + np.exp(-eta))
    g = X.T @ (w * (p - y)) / w.sum()
    return g


class TestPath:
    def test_kkt_conditions_hold_along_path(self):
        literals, ca, cb, y, w = make_problem()
        g0 = null_gradient(literals, ca, cb, y, w)
        lambdas = lambda_grid(np.abs(g0).max(), 8, 0.2)
        path = fit_l1_logistic_path(literals, ca, cb, y, w, lambdas)
        for li, lam in enumerate(lambdas):
            g = kkt_residuals(literals, ca, cb, y, w, lam, path.coefs[li],
                              path.intercepts[li])
            active = set(path.coefs[li])
            for j in range(len(ca)):
                if j in active:
                    assert abs(abs(g[j]) - lam) < 5e-4
                else:
                    assert abs(g[j]) <= lam + 5e-4

    def test_matches_sklearn_objective(self):
        sklearn = pytest.importorskip("sklearn.linear_model")
        literals, ca, cb, y, w = make_problem(seed=3, n=250, k=5)
        X = full_matrix(literals, ca, cb)
        n = X.shape[0]
        for lam in (0.02, 0.008):
            path = fit_l1_logistic_path(literals, ca, cb, y, w,
                                        np.array([lam]), tol=1e-8)
            ours = np.zeros(X.shape[1])
            for j, b in path.coefs[0].items():
                ours[j] = b
            model = sklearn.LogisticRegression(
                penalty="l1", C=1.0 / (n * lam), solver="liblinear",
                tol=1e-9, max_iter=10000,
            )
            model.fit(X, y)

            def objective(coef, b0):
                eta = b0 + X @ coef
                nll = np.mean(
                    np.log1p(np.exp(-np.abs(eta))) + np.maximum(eta, 0) - y * eta
                )
                return nll + lam * np.abs(coef).sum()

            ours_obj = objective(ours, path.intercepts[0])
            sk_obj = objective(model.coef_[0], model.intercept_[0])
            assert ours_obj <= sk_obj + 1e-6

    def test_planted_conjunction_dominates(self):
        literals, ca, cb, y, w = make_problem(seed=5, n=800, flip=0.1)
        g0 = null_gradient(literals, ca, cb, y, w)
        lambdas = lambda_grid(np.abs(g0).max(), 12, 0.1)
        path = fit_l1_logistic_path(literals, ca, cb, y, w, lambdas)
        # The planted candidate is bit0 & ~bit2; find its index.
        k = 6
        target = None
        from dashmine.mining import generate_candidate_rules, Literal

        conds = generate_candidate_rules([f"b{i}" for i in range(k)], 2)
        for j, cond in enumerate(conds):
            if set((l.feature, l.negated) for l in cond) == {
                ("b0", False), ("b2", True)
            }:
                target = j
        final = path.coefs[-1]
        assert target in final
        assert final[target] == max(final.values())

    def test_weights_shift_the_intercept(self):
        literals, ca, cb, y, w = make_problem(seed=7)
        heavy = np.where(y > 0.5, 5.0, 1.0)
        g0 = null_gradient(literals, ca, cb, y, heavy)
        lambdas = np.array([np.abs(g0).max()])  # intercept-only
        path = fit_l1_logistic_path(literals, ca, cb, y, heavy, lambdas)
        p_bar = float((heavy * y).sum() / heavy.sum())
        assert path.intercepts[0] == pytest.approx(
            np.log(p_bar / (1 - p_bar)), abs=1e-6
        )
        assert path.coefs[0] == {}

    def test_lambda_grid_shape(self):
        grid = lambda_grid(2.0, 20, 0.2)
        assert len(grid) == 20
        assert grid[0] == pytest.approx(2.0)
        assert grid[-1] == pytest.approx(0.4)
        assert np.all(np.diff(grid) < 0)

    def test_log_loss_matches_reference(self):
        y = np.array([1.0, 0.0, 1.0])
        p = np.array([0.9, 0.2, 0.6])
        w = np.array([1.0, 2.0, 1.0])
        expected = -(np.log(0.9) + 2 * np.log(0.8) + np.log(0.6)) / 4
        assert weighted_log_loss(y, p, w) == pytest.approx(expected)
