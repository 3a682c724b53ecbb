"""Kernel specs, Gram matrices, centering and the label (delta) kernel."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DomainError, NumericError, ShapeError, ValidationError

FAMILIES = ("linear", "rbf", "precomputed")
RBF_CONVENTIONS = ("2sigma2", "sigma2")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and bandwidth.

    ``convention`` selects the RBF denominator: ``"2sigma2"`` gives
    ``exp(-|x-y|^2 / (2 sigma^2))``, ``"sigma2"`` gives ``exp(-|x-y|^2 / sigma^2)``.
    """

    family: str = "rbf"
    sigma: float = 1.0
    convention: str = "2sigma2"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown kernel family {self.family!r}")
        if self.family == "rbf" and not self.sigma > 0:
            raise ValidationError("rbf kernel needs sigma > 0")
        if self.convention not in RBF_CONVENTIONS:
            raise ValidationError(f"unknown rbf convention {self.convention!r}")

    @property
    def denominator(self) -> float:
        return (2.0 if self.convention == "2sigma2" else 1.0) * self.sigma**2

    def to_dict(self) -> dict:
        return asdict(self)


def squared_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances between the columns of A and B."""
    return cdist(A.T, B.T, metric="sqeuclidean")


def _evaluate(A, B, spec: KernelSpec) -> np.ndarray:
    if spec.family == "precomputed":
        raise ValidationError("a precomputed kernel cannot be evaluated from data")
    if A.shape[0] != B.shape[0]:
        raise ShapeError(f"ambient dimensions differ: {A.shape[0]} vs {B.shape[0]}")
    if spec.family == "linear":
        K = A.T @ B
    else:
        K = np.exp(-squared_distances(A, B) / spec.denominator)
    if not np.all(np.isfinite(K)):
        raise NumericError("kernel evaluation produced non-finite values")
    return K


def gram(X: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Symmetric ``(n, n)`` Gram matrix of the columns of X."""
    X = np.asarray(X, dtype=np.float64)
    K = _evaluate(X, X, spec)
    K = 0.5 * (K + K.T)
    if spec.family == "rbf":
        np.fill_diagonal(K, 1.0)
    return K


def cross_gram(train: np.ndarray, test: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """``(n, m)`` matrix with entry ``(i, j) = k(train_i, test_j)``."""
    return _evaluate(np.asarray(train, np.float64), np.asarray(test, np.float64), spec)


def centering_matrix(m: int) -> np.ndarray:
    """``I - 11^T / m``."""
    if m < 1:
        raise DomainError("centering matrix needs m >= 1")
    return np.eye(m) - np.full((m, m), 1.0 / m)


def delta_kernel(labels) -> np.ndarray:
    """Entry ``(i, j)`` is 1 when samples i and j share a class, else 0."""
    labels = np.asarray(labels)
    return (labels[:, None] == labels[None, :]).astype(np.float64)
