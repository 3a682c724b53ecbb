"""Empirical HSIC and the projection objective.

``objective_trace`` evaluates the objective literally with an explicit
centering matrix and is kept as the reference. ``objective_frobenius`` uses the
equivalent closed form built from label-weighted sample means, which costs
O(ndC) and is what the rest of the package calls.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ShapeError
from .kernels import centering_matrix


def empirical_hsic(K: np.ndarray, L: np.ndarray) -> float:
    """Biased HSIC estimate ``tr(K H L H) / (m - 1)^2``."""
    K = np.asarray(K, dtype=np.float64)
    L = np.asarray(L, dtype=np.float64)
    if K.shape != L.shape or K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ShapeError(f"need two square matrices of equal size, got {K.shape} and {L.shape}")
    m = K.shape[0]
    if m < 2:
        raise DomainError("HSIC needs at least two samples")
    Kc = K - K.mean(axis=0, keepdims=True)
    Lc = L - L.mean(axis=0, keepdims=True)
    # tr(HKHL) = sum((HK) * (HL)^T); symmetrizing the product makes the
    # result bit-identical under swapping K and L
    P = Kc * Lc.T
    return float(np.sum(0.5 * (P + P.T)) / (m - 1) ** 2)


def _check(V, X, Y):
    V = np.asarray(V, dtype=np.float64)
    if V.ndim == 1:
        V = V[:, None]
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    d, n = X.shape
    if V.shape[0] != d:
        raise ShapeError(f"projection has {V.shape[0]} rows, data has dimension {d}")
    if Y.shape[0] != n:
        raise ShapeError(f"label matrix has {Y.shape[0]} rows for {n} samples")
    if n < 2:
        raise DomainError("objective needs at least two samples")
    return V, X, Y


def objective_trace(V, X, Y) -> float:
    """``tr(V^T X H Y Y^T H X^T V) / (n - 1)^2`` evaluated as written."""
    V, X, Y = _check(V, X, Y)
    n = X.shape[1]
    H = centering_matrix(n)
    inner = X @ H @ Y @ Y.T @ H @ X.T
    return float(np.trace(V.T @ inner @ V) / (n - 1) ** 2)


def label_weighted_means(X, Y):
    """Return ``(XY_bar, X_bar, Y_bar)``: ``X @ Y / n``, the mean sample, the mean label row."""
    n = X.shape[1]
    return X @ Y / n, X.mean(axis=1), Y.mean(axis=0)


def objective_frobenius(V, X, Y) -> float:
    """``n^2 / (n - 1)^2 * ||V^T (XY_bar - X_bar Y_bar)||_F^2``."""
    V, X, Y = _check(V, X, Y)
    n = X.shape[1]
    xy_bar, x_bar, y_bar = label_weighted_means(X, Y)
    centred = xy_bar - np.outer(x_bar, y_bar)
    return float(n**2 / (n - 1) ** 2 * np.sum((V.T @ centred) ** 2))


def objective(V, X, Y) -> float:
    return objective_frobenius(V, X, Y)
