"""Deviation bound between projections fitted on assigned and on true labels.

With winner-take-all label assignment, the square-root objective gap between
the projection fitted on all true labels (``V_star``) and the one fitted on the
assigned labels (``V_dagger``), both scored against the true labels, is at most
``2 (2 + sqrt 2) u P_e / (n - 1)`` where ``P_e`` is the WTA error rate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .dataset import LabelAssignment
from .errors import DomainError, ShapeError
from .labeling import (
    LabelingConfig,
    assign_probabilistic_labels,
    one_hot,
    winner_take_all,
    wta_error_rate,
)
from .objective import label_weighted_means, objective_frobenius
from .solver import FitConfig, fit_linear

BOUND_CONSTANT = 2.0 * (2.0 + math.sqrt(2.0))


@dataclass(frozen=True)
class BoundReport:
    n: int
    l: int  # noqa: E741
    u: int
    p_e_wta: float
    bound_value: float
    gap_value: float
    objective_star: float
    objective_dagger: float
    label_mean_dev: float
    weighted_mean_dev: float
    wta: bool = True

    @property
    def label_mean_bound(self) -> float:
        return math.sqrt(2.0) * self.u * self.p_e_wta / self.n

    @property
    def weighted_mean_bound(self) -> float:
        return 2.0 * self.u * self.p_e_wta / self.n

    @property
    def ratio(self) -> float:
        """gap / bound; 0 when both vanish, inf when only the bound does."""
        if self.bound_value > 0:
            return self.gap_value / self.bound_value
        return 0.0 if self.gap_value <= 1e-9 else math.inf

    def holds(self, atol: float = 1e-9) -> bool:
        return (
            self.gap_value <= self.bound_value + atol
            and self.label_mean_dev <= self.label_mean_bound + 1e-12
            and self.weighted_mean_dev <= self.weighted_mean_bound + 1e-12
        )

    def to_dict(self) -> dict:
        out = asdict(self)
        out["label_mean_bound"] = self.label_mean_bound
        out["weighted_mean_bound"] = self.weighted_mean_bound
        out["holds"] = self.holds()
        return out


def deviation_bound(n: int, u: int, p_e_wta: float) -> float:
    """``2 (2 + sqrt 2) u p_e_wta / (n - 1)``."""
    if n < 2:
        raise DomainError("bound needs n >= 2")
    if not 0 <= u <= n:
        raise DomainError("u must lie in 0..n")
    if not 0.0 <= p_e_wta <= 1.0:
        raise DomainError("error rate must lie in [0, 1]")
    return BOUND_CONSTANT * u * p_e_wta / (n - 1)


theorem3_bound = deviation_bound


def empirical_gap(X, y_p, hidden_truth, config: FitConfig) -> BoundReport:
    """Fit on assigned and on true labels and measure the square-root gap.

    ``y_p`` is the ``(n, C)`` assigned label matrix, labeled rows first;
    ``hidden_truth`` holds the true classes of its trailing ``u`` rows. The
    report is flagged ``wta=False`` when ``y_p`` is not one-hot, in which case
    the bound is not guaranteed.
    """
    X = np.asarray(X, dtype=np.float64)
    y_p = np.asarray(y_p, dtype=np.float64)
    hidden_truth = np.asarray(hidden_truth, dtype=np.int64)
    n, n_classes = y_p.shape
    u = hidden_truth.size
    if X.shape[1] != n:
        raise ShapeError("label matrix and data disagree on sample count")
    if u > n:
        raise ShapeError("more hidden labels than samples")
    l = n - u
    y_n = y_p.copy()
    y_n[l:] = one_hot(hidden_truth, n_classes)
    is_wta = bool(np.all((y_p == 0) | (y_p == 1)) and np.all(y_p.sum(axis=1) == 1))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        v_dagger = fit_linear(X, y_p, config).V
        v_star = fit_linear(X, y_n, config).V
    f_star = objective_frobenius(v_star, X, y_n)
    f_dagger = objective_frobenius(v_dagger, X, y_n)
    p_e = wta_error_rate(winner_take_all(y_p), hidden_truth)

    xy_n, _, ybar_n = label_weighted_means(X, y_n)
    xy_p, _, ybar_p = label_weighted_means(X, y_p)
    return BoundReport(
        n=n,
        l=l,
        u=u,
        p_e_wta=p_e,
        bound_value=deviation_bound(n, u, p_e),
        gap_value=math.sqrt(max(f_star, 0.0)) - math.sqrt(max(f_dagger, 0.0)),
        objective_star=f_star,
        objective_dagger=f_dagger,
        label_mean_dev=float(np.linalg.norm(ybar_n - ybar_p)),
        weighted_mean_dev=float(np.linalg.norm(xy_n - xy_p)),
        wta=is_wta,
    )


def gap_for_assignment(X, labels: LabelAssignment, labeling: LabelingConfig, config: FitConfig, wta=True):
    """Build assigned labels for a masked dataset and report the gap."""
    Y = assign_probabilistic_labels(X, labels, labeling)
    if wta:
        Y = winner_take_all(Y)
    return empirical_gap(X, Y, labels.hidden, config)


def one_nn_refined_bound(p_e_bayes: float, n_classes: int, delta_m: float = 0.0) -> float:
    """Asymptotic 1-NN error bound ``2P - C/(C-1) P^2 + delta``.

    Only meaningful when the class-conditional densities are Lipschitz; the
    finite-sample penalty ``delta_m`` must be supplied by the caller.
    """
    if n_classes < 2:
        raise DomainError("need at least two classes")
    if not 0.0 <= p_e_bayes <= (n_classes - 1) / n_classes:
        raise DomainError("Bayes error must lie in [0, (C-1)/C]")
    if delta_m < 0:
        raise DomainError("delta_m must be non-negative")
    return 2.0 * p_e_bayes - n_classes / (n_classes - 1) * p_e_bayes**2 + delta_m


def random_instance(rng: np.random.Generator, max_d=10, max_n=60, max_classes=4):
    """Random unit-ball dataset with a masked label assignment and a labeling config."""
    n_classes = int(rng.integers(2, max_classes + 1))
    d = int(rng.integers(1, max_d + 1))
    n = int(rng.integers(max(2 * n_classes, 6), max_n + 1))
    centres = rng.normal(size=(d, n_classes))
    classes = np.concatenate([np.arange(1, n_classes + 1), rng.integers(1, n_classes + 1, n - n_classes)])
    X = centres[:, classes - 1] + rng.uniform(0.2, 1.5) * rng.normal(size=(d, n))
    X /= np.max(np.linalg.norm(X, axis=0))
    l = int(rng.integers(n_classes, n))
    perm = rng.permutation(n)
    # keep one labeled sample per class
    firsts = [int(np.flatnonzero(classes[perm] == c)[0]) for c in range(1, n_classes + 1)]
    rest = [i for i in range(n) if i not in firsts]
    perm = perm[firsts + rest]
    X, classes = X[:, perm], classes[perm]
    labels = LabelAssignment(labels=classes[:l], n=n, n_classes=n_classes, hidden=classes[l:])
    labeling = LabelingConfig(k=int(rng.integers(1, l + 1)), sigma=float(rng.uniform(0.05, 1.0)))
    p = int(rng.integers(1, d + 1))
    return X, labels, labeling, FitConfig(p=p)


def bound_sweep(n_instances: int, seed: int = 0, **limits) -> list[BoundReport]:
    """WTA gap reports over independently seeded random instances."""
    reports = []
    for i in range(n_instances):
        rng = np.random.default_rng([seed, i])
        X, labels, labeling, config = random_instance(rng, **limits)
        reports.append(gap_for_assignment(X, labels, labeling, config))
    return reports
