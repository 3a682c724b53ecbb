"""Probabilistic label vectors for unlabeled samples.

Each unlabeled sample receives a class distribution built from RBF
similarities to its ``k`` nearest labeled neighbours. The labeled rows stay
one-hot, so ``Y @ Y.T`` reproduces the delta kernel on the labeled block and
supplies graded weights everywhere else.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dataset import LabelAssignment
from .errors import ConfigError, ShapeError, ValidationError
from .kernels import squared_distances


@dataclass(frozen=True)
class LabelingConfig:
    k: int = 3
    sigma: float = 0.15
    convention: str = "2sigma2"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("labeling k must be at least 1")
        if not self.sigma > 0:
            raise ConfigError("labeling sigma must be positive")
        if self.convention not in ("2sigma2", "sigma2"):
            raise ConfigError(f"unknown rbf convention {self.convention!r}")


def one_hot(classes, n_classes: int) -> np.ndarray:
    classes = np.asarray(classes, dtype=np.int64)
    Y = np.zeros((classes.size, n_classes))
    Y[np.arange(classes.size), classes - 1] = 1.0
    return Y


def assign_probabilistic_labels(X, labels: LabelAssignment, config: LabelingConfig) -> np.ndarray:
    """Build the ``(n, C)`` row-stochastic label matrix.

    Neighbours are found by Euclidean distance in input space; at equal
    distance the lower-index labeled sample wins. When every neighbour
    similarity underflows to zero the row falls back to the uniform
    distribution and a ``RuntimeWarning`` is issued.
    """
    X = np.asarray(X, dtype=np.float64)
    n_classes = labels.n_classes
    if n_classes < 2:
        raise ValidationError("probabilistic labeling needs at least two classes")
    if X.shape[1] != labels.n:
        raise ShapeError("label assignment and data disagree on sample count")
    l, k = labels.l, config.k
    if k > l:
        raise ConfigError(f"labeling k={k} exceeds the {l} labeled samples")

    Y = np.zeros((labels.n, n_classes))
    Y[:l] = one_hot(labels.labels, n_classes)
    if labels.u == 0:
        return Y

    d2 = squared_distances(X[:, l:], X[:, :l])
    # stable sort keeps the lower labeled index first among equal distances
    nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
    rows = np.arange(labels.u)[:, None]
    denom = (2.0 if config.convention == "2sigma2" else 1.0) * config.sigma**2
    sims = np.exp(-d2[rows, nearest] / denom)
    votes = np.zeros((labels.u, n_classes))
    np.add.at(votes, (np.repeat(rows, k, axis=1), labels.labels[nearest] - 1), sims)

    totals = votes.sum(axis=1)
    dead = totals <= 0
    if np.any(dead):
        warnings.warn(
            f"{int(dead.sum())} unlabeled samples have zero similarity to all "
            f"{k} neighbours; using uniform label vectors",
            RuntimeWarning,
            stacklevel=2,
        )
        votes[dead] = 1.0
        totals[dead] = n_classes
    Y[l:] = votes / totals[:, None]
    return Y


def winner_take_all(Y: np.ndarray) -> np.ndarray:
    """One-hot at each row's argmax; ties go to the lowest class index."""
    Y = np.asarray(Y, dtype=np.float64)
    out = np.zeros_like(Y)
    out[np.arange(Y.shape[0]), np.argmax(Y, axis=1)] = 1.0
    return out


def wta_error_rate(Y_wta: np.ndarray, hidden_truth) -> float:
    """Fraction of unlabeled rows (the trailing ``u`` rows) with the wrong class."""
    hidden_truth = np.asarray(hidden_truth, dtype=np.int64)
    u = hidden_truth.size
    if u > Y_wta.shape[0]:
        raise ShapeError("more hidden labels than label rows")
    if u == 0:
        return 0.0
    predicted = np.argmax(Y_wta[Y_wta.shape[0] - u:], axis=1) + 1
    return float(np.mean(predicted != hidden_truth))


def row_entropy(Y: np.ndarray) -> np.ndarray:
    """Shannon entropy (nats) of each label row."""
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(Y > 0, -Y * np.log(Y), 0.0)
    return terms.sum(axis=1)
