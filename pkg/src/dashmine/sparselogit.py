"""L1-penalized logistic regression over binary rule-indicator columns.

Solved by cyclic coordinate descent on an IRLS quadratic approximation
(glmnet-style) with warm starts along a descending lambda path.  The working
set is driven by exact KKT checks: candidates enter when their gradient
exceeds lambda and the restricted solve repeats until no violations remain,
so every path point is a verified optimum of the full problem.

Candidate columns are single literals or products of two literal columns,
so the full-candidate gradient needed for the KKT checks reduces to one
small dense GEMM over the literal matrix instead of a pass over a
materialized candidate matrix.

Objective, for the candidate indicator matrix X built from literal columns:

    (1/W) sum_i w_i * [log(1 + exp(eta_i)) - y_i * eta_i] + lambda * ||beta||_1

with eta = b0 + X beta, W = sum_i w_i, and an unpenalized intercept b0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

_P_EPS = 1e-9
_Q_FLOOR = 1e-5
_KKT_SLACK = 1e-5
_MAX_KKT_ROUNDS = 30
_MAX_NEW_PER_ROUND = 512


@dataclass
class PathResult:
    lambdas: np.ndarray
    coefs: list[dict[int, float]]  # candidate index -> coefficient, per lambda
    intercepts: np.ndarray
    converged: list[bool]


def candidate_column(
    literals: np.ndarray, lit_a: int, lit_b: int, dtype=np.float64
) -> np.ndarray:
    """Materialize one candidate indicator column (lit_b < 0 for singles)."""
    if lit_b < 0:
        return literals[:, lit_a].astype(dtype)
    return (literals[:, lit_a] * literals[:, lit_b]).astype(dtype)


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ez = np.exp(eta[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def weighted_log_loss(y: np.ndarray, p: np.ndarray, w: np.ndarray) -> float:
    p = np.clip(p, _P_EPS, 1.0 - _P_EPS)
    losses = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    return float(np.dot(w, losses) / w.sum())


class _GradientEngine:
    """Full gradient over all candidates via the positive-bit Gram trick.

    Literal columns come in (bit, 1-bit) pairs, so every candidate gradient
    is a linear combination of A = P' diag(r) P, s = P' r and t = sum(r)
    computed from the positive bit matrix P alone:

        g(x_i)            = s_i            g(~x_i)           = t - s_i
        g(x_i & x_j)      = A_ij           g(x_i & ~x_j)     = s_i - A_ij
        g(~x_i & x_j)     = s_j - A_ij     g(~x_i & ~x_j)    = t - s_i - s_j + A_ij
    """

    def __init__(self, literals: np.ndarray, cand_a: np.ndarray, cand_b: np.ndarray):
        n_lits = literals.shape[1]
        if n_lits % 2:
            raise ValueError("literal matrix must hold bit columns then negations")
        self.k = n_lits // 2
        self.bits32 = np.ascontiguousarray(literals[:, : self.k], dtype=np.float32)

        k = self.k
        m = cand_a.shape[0]
        self.singles = cand_b < 0
        pairs = ~self.singles
        self.single_idx = cand_a[self.singles] % k
        self.single_neg = cand_a[self.singles] >= k
        pa = cand_a[pairs]
        pb = cand_b[pairs]
        self.pair_i = pa % k
        self.pair_j = pb % k
        self.pair_case = (pa >= k).astype(np.int64) * 2 + (pb >= k).astype(np.int64)
        self.pairs = pairs
        self.m = m

    def __call__(self, resid: np.ndarray) -> np.ndarray:
        # resid = w * (p - y) / W, one entry per row
        r32 = resid.astype(np.float32)
        s = (self.bits32.T @ r32).astype(np.float64)
        t = float(r32.sum(dtype=np.float64))
        A = (self.bits32.T @ (self.bits32 * r32[:, None])).astype(np.float64)

        g = np.empty(self.m, dtype=np.float64)
        g_single = np.where(self.single_neg, t - s[self.single_idx],
                            s[self.single_idx])
        g[self.singles] = g_single
        aij = A[self.pair_i, self.pair_j]
        si = s[self.pair_i]
        sj = s[self.pair_j]
        pair_vals = np.choose(
            self.pair_case,
            [aij, si - aij, sj - aij, t - si - sj + aij],
        )
        g[self.pairs] = pair_vals
        return g


def lambda_grid(lam_max: float, n_points: int = 20, ratio: float = 0.2) -> np.ndarray:
    """Descending logarithmic grid from lam_max to ratio * lam_max."""
    if lam_max <= 0:
        raise ValueError("lambda_max must be positive")
    return lam_max * np.logspace(0.0, np.log10(ratio), n_points)


def null_gradient(
    literals: np.ndarray,
    cand_a: np.ndarray,
    cand_b: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
) -> np.ndarray:
    """Gradient at the intercept-only optimum; its max-abs is lambda_max."""
    W = w.sum()
    p_bar = min(max(float(np.dot(w, y) / W), _P_EPS), 1.0 - _P_EPS)
    resid = w * (p_bar - y) / W
    return _GradientEngine(literals, cand_a, cand_b)(resid)


@njit(cache=True)
def _cd_solve(X, omega, rho, beta, H, lam, tol, max_rounds):
    """Cyclic CD on the weighted-lasso surrogate, active-set accelerated.

    X is Fortran-ordered (n, m); rho holds z - b0 - X beta and is updated in
    place along with beta.  Returns (intercept shift, converged flag).
    """
    n, m = X.shape
    sum_omega = omega.sum()
    b_shift = 0.0
    converged = False
    for _ in range(max_rounds):
        # Full pass over every eligible column.
        delta_full = 0.0
        for k in range(m):
            h = H[k]
            if h <= 0.0:
                continue
            u = h * beta[k]
            for i in range(n):
                u += omega[i] * rho[i] * X[i, k]
            if u > lam:
                b_new = (u - lam) / h
            elif u < -lam:
                b_new = (u + lam) / h
            else:
                b_new = 0.0
            d = b_new - beta[k]
            if d != 0.0:
                for i in range(n):
                    rho[i] -= d * X[i, k]
                beta[k] = b_new
                if abs(d) > delta_full:
                    delta_full = abs(d)
        num = 0.0
        for i in range(n):
            num += omega[i] * rho[i]
        db = num / sum_omega
        if db != 0.0:
            for i in range(n):
                rho[i] -= db
            b_shift += db
            if abs(db) > delta_full:
                delta_full = abs(db)
        if delta_full < tol:
            converged = True
            break
        # Refine over the active set only.
        for _ in range(60):
            delta = 0.0
            for k in range(m):
                if beta[k] == 0.0:
                    continue
                h = H[k]
                if h <= 0.0:
                    continue
                u = h * beta[k]
                for i in range(n):
                    u += omega[i] * rho[i] * X[i, k]
                if u > lam:
                    b_new = (u - lam) / h
                elif u < -lam:
                    b_new = (u + lam) / h
                else:
                    b_new = 0.0
                d = b_new - beta[k]
                if d != 0.0:
                    for i in range(n):
                        rho[i] -= d * X[i, k]
                    beta[k] = b_new
                    if abs(d) > delta:
                        delta = abs(d)
            num = 0.0
            for i in range(n):
                num += omega[i] * rho[i]
            db = num / sum_omega
            if db != 0.0:
                for i in range(n):
                    rho[i] -= db
                b_shift += db
                if abs(db) > delta:
                    delta = abs(db)
            if delta < tol:
                break
    return b_shift, converged


def fit_l1_logistic_path(
    literals: np.ndarray,
    cand_a: np.ndarray,
    cand_b: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    lambdas: np.ndarray,
    tol: float = 1e-6,
    max_outer: int = 25,
) -> PathResult:
    """Fit the whole lambda path with warm starts.

    `literals` is (n_rows, n_literal_cols) in {0, 1}; candidate j is the
    indicator literals[:, cand_a[j]] (times literals[:, cand_b[j]] when
    cand_b[j] >= 0).  Rows may carry arbitrary positive weights `w`.
    """
    n = literals.shape[0]
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    wn = w / w.sum()

    grad_engine = _GradientEngine(literals, cand_a, cand_b)
    col_cache: dict[int, np.ndarray] = {}

    def col(j: int) -> np.ndarray:
        if j not in col_cache:
            col_cache[j] = candidate_column(literals, cand_a[j], cand_b[j])
        return col_cache[j]

    # Warm state: intercept-only optimum.
    active: dict[int, float] = {}
    p_bar = min(max(float(np.dot(wn, y)), _P_EPS), 1.0 - _P_EPS)
    intercept = float(np.log(p_bar / (1.0 - p_bar)))
    eta = np.full(n, intercept)
    grad = grad_engine(wn * (_sigmoid(eta) - y))
    grad_fresh = True

    coefs_out: list[dict[int, float]] = []
    intercepts_out = np.empty(len(lambdas))
    converged_out: list[bool] = []

    for lam_idx, lam in enumerate(lambdas):
        eligible = set(active)
        converged = True
        for _ in range(_MAX_KKT_ROUNDS):
            changed, ok, intercept = _solve_restricted(
                sorted(eligible), col, y, wn, lam, active, eta, intercept,
                tol, max_outer,
            )
            converged = converged and ok
            if changed or not grad_fresh:
                grad = grad_engine(wn * (_sigmoid(eta) - y))
                grad_fresh = True
            over = np.flatnonzero(np.abs(grad) > lam + _KKT_SLACK)
            new = [j for j in over if j not in eligible]
            if not new:
                break
            if len(new) > _MAX_NEW_PER_ROUND:
                order = np.argsort(-np.abs(grad[np.asarray(new)]), kind="stable")
                new = [new[i] for i in order[:_MAX_NEW_PER_ROUND]]
            eligible.update(new)
        else:
            converged = False

        coefs_out.append({j: b for j, b in sorted(active.items())})
        intercepts_out[lam_idx] = intercept
        converged_out.append(converged)

    return PathResult(
        lambdas=np.asarray(lambdas, dtype=np.float64),
        coefs=coefs_out,
        intercepts=intercepts_out,
        converged=converged_out,
    )


def _solve_restricted(
    idx: list[int],
    col,
    y: np.ndarray,
    wn: np.ndarray,
    lam: float,
    active: dict[int, float],
    eta: np.ndarray,
    b0: float,
    tol: float,
    max_outer: int,
) -> tuple[bool, bool, float]:
    """IRLS outer loop around the CD kernel; mutates active/eta in place.

    Returns (any coefficient or intercept changed, converged, intercept).
    """
    if not idx:
        # Intercept-only: closed form at the weighted mean.
        p_bar = min(max(float(np.dot(wn, y)), _P_EPS), 1.0 - _P_EPS)
        b_new = float(np.log(p_bar / (1.0 - p_bar)))
        changed = abs(b_new - b0) > tol
        eta[:] = b_new
        return changed, True, b_new

    X = np.asfortranarray(np.column_stack([col(j) for j in idx]))
    beta = np.array([active.get(j, 0.0) for j in idx])
    eta[:] = b0 + X @ beta

    changed_any = False
    converged = False
    for _ in range(max_outer):
        p = _sigmoid(eta)
        q = np.clip(p * (1.0 - p), _Q_FLOOR, None)
        omega = wn * q
        rho = (y - p) / q  # z - b0 - X beta at the current iterate
        H = omega @ X  # binary columns: x^2 = x
        b_shift, inner_ok = _cd_solve(
            X, omega, rho, beta, H, lam, tol, 3
        )
        b0 += b_shift
        eta_new = b0 + X @ beta
        outer_shift = float(np.max(np.abs(eta_new - eta)))
        eta[:] = eta_new
        if outer_shift > 1e-12:
            changed_any = True
        if inner_ok and outer_shift < 10 * tol:
            converged = True
            break

    for k, j in enumerate(idx):
        if beta[k] != 0.0:
            active[j] = float(beta[k])
        else:
            active.pop(j, None)
    return changed_any, converged, b0
