"""Fitting linear and kernel projections.

The linear fit takes the top-p eigenvectors of ``A A^T`` with
``A = X H Y`` (``d x C``), so the ``n x n`` matrix ``H Y Y^T H`` is never
formed. The kernel fit solves ``Q b = lam (K + ridge I) b`` with
``Q = (K H Y)(K H Y)^T`` through a Cholesky reduction to a standard symmetric
problem.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ConfigError, NumericError, ShapeError, ValidationError
from .kernels import KernelSpec, cross_gram, gram


@dataclass(frozen=True)
class FitConfig:
    p: int = 2
    ridge: float | None = None
    eig_tolerance: float = 1e-8

    def __post_init__(self):
        if self.p < 1:
            raise ConfigError("target dimension p must be at least 1")
        if self.ridge is not None and self.ridge < 0:
            raise ConfigError("ridge must be non-negative")
        if not self.eig_tolerance > 0:
            raise ConfigError("eig_tolerance must be positive")


@dataclass(frozen=True)
class LinearProjection:
    V: np.ndarray
    eigenvalues: np.ndarray
    n_train: int = 0

    @property
    def p(self) -> int:
        return self.V.shape[1]

    @property
    def d(self) -> int:
        return self.V.shape[0]

    @property
    def objective(self) -> float:
        """Objective value implied by the eigenvalues."""
        return float(np.sum(self.eigenvalues) / (self.n_train - 1) ** 2)


@dataclass(frozen=True)
class KernelProjection:
    beta: np.ndarray
    train_data: np.ndarray | None
    spec: KernelSpec
    eigenvalues: np.ndarray
    ridge: float
    embedding: np.ndarray = field(repr=False, default=None)

    @property
    def p(self) -> int:
        return self.beta.shape[1]

    @property
    def n_train(self) -> int:
        return self.beta.shape[0]

    @property
    def objective(self) -> float:
        return float(np.sum(self.eigenvalues) / (self.n_train - 1) ** 2)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry is positive (first on ties)."""
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def symmetric_top_eigenpairs(M: np.ndarray, p: int, tol: float = 1e-8):
    """Largest ``p`` eigenpairs of a symmetric matrix, values nonincreasing.

    Eigenvectors follow the sign rule of ``_fix_signs``. Raises when M is not
    symmetric within 1e-10 (relative to its largest entry) or when a residual
    ``|Mv - lam v|`` exceeds ``tol * |M|_F``.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError("eigenproblem needs a square matrix")
    m = M.shape[0]
    if not 1 <= p <= m:
        raise ConfigError(f"p={p} outside 1..{m}")
    scale = max(1.0, float(np.max(np.abs(M), initial=0.0)))
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-10 * scale:
        raise ValidationError("matrix is not symmetric")
    M = 0.5 * (M + M.T)
    values, vectors = linalg.eigh(M, subset_by_index=[m - p, m - 1], driver="evr")
    values = values[::-1].copy()
    vectors = _fix_signs(vectors[:, ::-1].copy())
    residual = np.linalg.norm(M @ vectors - vectors * values, axis=0)
    if np.any(residual > tol * max(np.linalg.norm(M), 1.0)):
        raise NumericError("eigensolver residual above tolerance")
    return values, vectors


def _warn_rank(p, n_classes, d):
    limit = min(n_classes - 1, d)
    if p > limit:
        warnings.warn(
            f"p={p} exceeds the {limit} directions the labels can inform; "
            "trailing directions carry zero eigenvalues",
            RuntimeWarning,
            stacklevel=3,
        )


def fit_linear(X, Y, config: FitConfig) -> LinearProjection:
    """Orthonormal ``V`` maximizing ``tr(V^T X H Y Y^T H X^T V)``."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    d, n = X.shape
    if n < 2:
        raise ValidationError("fitting needs at least two samples")
    if Y.shape[0] != n:
        raise ShapeError("label matrix and data disagree on sample count")
    if config.p > d:
        raise ConfigError(f"p={config.p} exceeds the data dimension {d}")
    _warn_rank(config.p, Y.shape[1], d)
    A = (X - X.mean(axis=1, keepdims=True)) @ Y
    values, V = symmetric_top_eigenpairs(A @ A.T, config.p, config.eig_tolerance)
    return LinearProjection(V=V, eigenvalues=values, n_train=n)


def fit_pca(X, p: int) -> LinearProjection:
    """Unsupervised baseline: the same solver with ``Y Y^T = I``."""
    X = np.asarray(X, dtype=np.float64)
    d, n = X.shape
    if p > d:
        raise ConfigError(f"p={p} exceeds the data dimension {d}")
    A = X - X.mean(axis=1, keepdims=True)
    values, V = symmetric_top_eigenpairs(A @ A.T, p)
    return LinearProjection(V=V, eigenvalues=values, n_train=n)


def default_ridge(K: np.ndarray) -> float:
    return 1e-8 * float(np.trace(K)) / K.shape[0]


def fit_kernel(X, Y, spec: KernelSpec, config: FitConfig, K: np.ndarray | None = None) -> KernelProjection:
    """Kernel projection coefficients ``beta`` (``n x p``).

    Args:
        X: training data ``(d, n)``; may be None for a precomputed kernel.
        Y: label matrix ``(n, C)``.
        spec: kernel used for training and for later test cross-kernels.
        config: target dimension and ridge (None selects
            ``1e-8 * trace(K) / n``).
        K: precomputed training Gram matrix; required when
            ``spec.family == "precomputed"``.

    Returns:
        A projection with ``beta^T (K + ridge I) beta = I`` and training
        embedding ``beta^T K``.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if K is None:
        if spec.family == "precomputed":
            raise ValidationError("precomputed kernel requires the Gram matrix")
        X = np.asarray(X, dtype=np.float64)
        K = gram(X, spec)
    else:
        K = np.asarray(K, dtype=np.float64)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ShapeError("Gram matrix must be square")
        if np.max(np.abs(K - K.T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(K))):
            raise ValidationError("Gram matrix is not symmetric")
        K = 0.5 * (K + K.T)
    n = K.shape[0]
    if n < 2:
        raise ValidationError("fitting needs at least two samples")
    if Y.shape[0] != n:
        raise ShapeError("label matrix and kernel disagree on sample count")
    if config.p > n:
        raise ConfigError(f"p={config.p} exceeds the {n} training samples")
    _warn_rank(config.p, Y.shape[1], n)

    ridge = default_ridge(K) if config.ridge is None else float(config.ridge)
    try:
        chol = linalg.cholesky(K + ridge * np.eye(n), lower=True)
    except linalg.LinAlgError:
        raise NumericError(
            f"kernel matrix plus ridge {ridge:g} is not positive definite; increase the ridge"
        ) from None
    G = K @ (Y - Y.mean(axis=0, keepdims=True))
    B = linalg.solve_triangular(chol, G, lower=True)
    values, U = symmetric_top_eigenpairs(B @ B.T, config.p, config.eig_tolerance)
    beta = linalg.solve_triangular(chol.T, U, lower=False)
    return KernelProjection(
        beta=beta,
        train_data=None if X is None else np.asarray(X, dtype=np.float64),
        spec=spec,
        eigenvalues=values,
        ridge=ridge,
        embedding=beta.T @ K,
    )


def transform(proj, data: np.ndarray) -> np.ndarray:
    """Embed samples, returning a ``(p, m)`` array.

    For a linear projection ``data`` is ``(d, m)``. For a kernel projection it
    is ``(d, m)`` raw data, or, with a precomputed kernel, the ``(n, m)``
    cross-kernel between training and new samples.
    """
    data = np.asarray(data, dtype=np.float64)
    if isinstance(proj, LinearProjection):
        if data.shape[0] != proj.d:
            raise ShapeError(f"data dimension {data.shape[0]} does not match projection dimension {proj.d}")
        return proj.V.T @ data
    if isinstance(proj, KernelProjection):
        if proj.spec.family == "precomputed":
            if data.shape[0] != proj.n_train:
                raise ShapeError(f"cross-kernel needs {proj.n_train} rows, got {data.shape[0]}")
            return proj.beta.T @ data
        if data.shape[0] != proj.train_data.shape[0]:
            raise ShapeError(
                f"data dimension {data.shape[0]} does not match training dimension {proj.train_data.shape[0]}"
            )
        return proj.beta.T @ cross_gram(proj.train_data, data, proj.spec)
    raise TypeError(f"not a projection: {type(proj).__name__}")
