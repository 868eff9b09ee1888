"""Soft-margin SVMs trained with an SMO dual solver (libsvm-style working-set selection)."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..dataspace import Dataset
from ..errors import TrainingError

log = logging.getLogger(__name__)

TAU = 1e-12


def smo(K: np.ndarray, y: np.ndarray, c: float, tol: float = 1e-3, max_iter: int = 200_000):
    """Solve min 1/2 a'Qa - e'a s.t. y'a = 0, 0 <= a <= c, with Q = yy'K.

    ``y`` must be +/-1. Uses maximal-violating-pair selection for the first index
    and second-order gain for the second (Fan, Chen & Lin). Returns ``(alpha, rho)``;
    the decision function is ``sum_i alpha_i y_i K(x_i, x) - rho``.
    """
    n = len(y)
    y = y.astype(float)
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0
    for it in range(max_iter):
        at_upper = alpha >= c
        at_lower = alpha <= 0
        minus_yg = -y * grad
        up = np.where(pos, ~at_upper, ~at_lower)
        low = np.where(pos, ~at_lower, ~at_upper)
        if not up.any() or not low.any():
            break
        cand_up = np.where(up, minus_yg, -np.inf)
        i = int(np.argmax(cand_up))
        g_max = cand_up[i]
        g_min = np.min(np.where(low, minus_yg, np.inf))
        if g_max - g_min < tol:
            break
        Ki = K[i]
        b = g_max - minus_yg
        quad = diag[i] + diag - 2.0 * Ki
        quad = np.where(quad > 0, quad, TAU)
        score = np.where(low & (b > 0), -(b * b) / quad, np.inf)
        j = int(np.argmin(score))
        if not np.isfinite(score[j]):
            break
        Kj = K[j]
        yi, yj = y[i], y[j]
        ai, aj = alpha[i], alpha[j]
        if yi != yj:
            q = diag[i] + diag[j] + 2.0 * yi * yj * Ki[j]
            q = q if q > 0 else TAU
            delta = (-grad[i] - grad[j]) / q
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > c:
                    ni, nj = c, c - diff
            elif nj > c:
                nj, ni = c, c + diff
        else:
            q = diag[i] + diag[j] - 2.0 * Ki[j]
            q = q if q > 0 else TAU
            delta = (grad[i] - grad[j]) / q
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > c:
                if ni > c:
                    ni, nj = c, total - c
                if nj > c:
                    nj, ni = c, total - c
            else:
                if nj < 0:
                    nj, ni = 0.0, total
                if ni < 0:
                    ni, nj = 0.0, total
        dai, daj = ni - ai, nj - aj
        alpha[i], alpha[j] = ni, nj
        # dQ_i = y y_i K_i
        grad += y * (yi * dai * Ki + yj * daj * Kj)
    else:
        log.warning("SMO stopped at max_iter=%d before reaching tol=%g", max_iter, tol)
    return alpha, _rho(alpha, grad, y, c)


def _rho(alpha, grad, y, c):
    yg = y * grad
    free = (alpha > 0) & (alpha < c)
    if free.any():
        return float(yg[free].mean())
    at_upper = alpha >= c
    pos = y > 0
    # bounds from libsvm's calculate_rho
    ub_mask = (at_upper & ~pos) | (~at_upper & pos)
    lb_mask = (at_upper & pos) | (~at_upper & ~pos)
    ub = yg[ub_mask].min() if ub_mask.any() else np.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -np.inf
    if not np.isfinite(ub) or not np.isfinite(lb):
        return float(ub if np.isfinite(ub) else lb)
    return float((ub + lb) / 2.0)


def _signed_labels(ds: Dataset):
    if ds.single_class:
        raise TrainingError(f"{ds.name}: SVM training needs both classes")
    return np.where(ds.y == 1, 1.0, -1.0)


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Malicious iff w.x + b > 0."""

    w: np.ndarray
    b: float
    c: float | None = None
    kind: str = "linear"

    def decision_function(self, X):
        X = np.asarray(X, dtype=float)
        return X @ self.w + self.b

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            return int(self.decision_function(X) > 0)
        return (self.decision_function(X) > 0).astype(np.int64)

    def describe(self):
        return f"linear(c={self.c})"


def train_linear(ds: Dataset, c: float = 1.0, tol: float = 1e-3) -> LinearModel:
    """Hinge-loss linear SVM with penalty ``c`` and an unregularized bias."""
    y = _signed_labels(ds)
    X = ds.X
    alpha, rho = smo(X @ X.T, y, c, tol=tol)
    w = (alpha * y) @ X
    if not np.all(np.isfinite(w)):
        raise TrainingError("linear SVM produced non-finite weights")
    return LinearModel(w=w, b=-rho, c=c)


def rbf_kernel(A, B, gamma):
    sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * A @ B.T
    return np.exp(-gamma * np.maximum(sq, 0.0))


class RBFModel:
    kind = "rbf"

    def __init__(self, support, coef, b, gamma, c):
        self.support = support
        self.coef = coef
        self.b = b
        self.gamma = gamma
        self.c = c

    def decision_function(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return rbf_kernel(X, self.support, self.gamma) @ self.coef + self.b

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        out = (self.decision_function(X) > 0).astype(np.int64)
        return int(out[0]) if X.ndim == 1 else out

    def describe(self):
        return f"rbf(gamma={self.gamma}, c={self.c}, n_sv={len(self.support)})"


def train_rbf(ds: Dataset, gamma: float = 0.1, c: float = 1.0, tol: float = 1e-3) -> RBFModel:
    y = _signed_labels(ds)
    alpha, rho = smo(rbf_kernel(ds.X, ds.X, gamma), y, c, tol=tol)
    sv = alpha > 0
    return RBFModel(ds.X[sv].copy(), (alpha * y)[sv], -rho, gamma, c)
