"""Embedding-space classification, leave-one-out selection and scenario runs."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .dataset import LabelAssignment, SplitSpec, make_split
from .errors import ConfigError, DomainError, ShapeError
from .kernels import KernelSpec, squared_distances
from .labeling import LabelingConfig, assign_probabilistic_labels, one_hot
from .solver import FitConfig, fit_kernel, fit_linear, fit_pca, transform

SCENARIOS = ("labeled_only", "ssrl_pl", "all_labels")
BASELINES = ("pca",)
GRID_KEYS = ("labeling_k", "labeling_sigma", "kernel_sigma", "p", "ridge")


@dataclass(frozen=True)
class Hyperparams:
    """Everything needed to turn a labeled dataset into a projection.

    ``labeling_sigma`` defaults to ``kernel_sigma`` when left as None.
    """

    kernel: str = "rbf"
    kernel_sigma: float = 0.15
    labeling_k: int = 3
    labeling_sigma: float | None = None
    p: int = 2
    ridge: float | None = None
    convention: str = "2sigma2"

    @property
    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(self.kernel, self.kernel_sigma, self.convention)

    @property
    def labeling(self) -> LabelingConfig:
        sigma = self.kernel_sigma if self.labeling_sigma is None else self.labeling_sigma
        return LabelingConfig(self.labeling_k, sigma, self.convention)

    @property
    def fit_config(self) -> FitConfig:
        return FitConfig(p=self.p, ridge=self.ridge)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EvalConfig:
    params: Hyperparams = field(default_factory=Hyperparams)
    grid: dict = field(default_factory=dict)
    knn_k: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.knn_k < 1:
            raise ConfigError("knn_k must be at least 1")
        unknown = set(self.grid) - set(GRID_KEYS)
        if unknown:
            raise ConfigError(f"unknown grid keys: {sorted(unknown)}")


@dataclass
class EvalReport:
    scenario: str
    chosen_params: dict
    accuracy_mean: float = 0.0
    accuracy_sd: float = 0.0
    per_split: list = field(default_factory=list)

    def add(self, seed: int, accuracy: float) -> None:
        self.per_split.append({"seed": int(seed), "accuracy": float(accuracy)})
        acc = np.array([s["accuracy"] for s in self.per_split])
        self.accuracy_mean = float(acc.mean())
        self.accuracy_sd = float(acc.std(ddof=1)) if acc.size > 1 else 0.0

    @property
    def accuracies(self) -> np.ndarray:
        return np.array([s["accuracy"] for s in self.per_split])

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "chosen_params": self.chosen_params,
            "accuracy_mean": self.accuracy_mean,
            "accuracy_sd": self.accuracy_sd,
            "per_split": list(self.per_split),
        }


def knn_classify(train_z, train_classes, test_z, k: int = 1) -> np.ndarray:
    """Majority vote among the ``k`` nearest training embeddings.

    Embeddings are ``(p, m)`` with samples as columns. Equal distances prefer
    the lower training index; tied votes go to the lowest class id.
    """
    train_z = np.atleast_2d(np.asarray(train_z, dtype=np.float64))
    test_z = np.atleast_2d(np.asarray(test_z, dtype=np.float64))
    train_classes = np.asarray(train_classes, dtype=np.int64)
    m = train_z.shape[1]
    if m == 0:
        raise DomainError("k-NN needs at least one training sample")
    if train_classes.size != m:
        raise ShapeError("one class per training embedding is required")
    if not 1 <= k <= m:
        raise DomainError(f"k={k} outside 1..{m}")
    if test_z.shape[0] != train_z.shape[0]:
        raise ShapeError("train and test embeddings differ in dimension")
    nearest = np.argsort(squared_distances(test_z, train_z), axis=1, kind="stable")[:, :k]
    votes = train_classes[nearest]
    n_classes = int(train_classes.max())
    counts = np.zeros((votes.shape[0], n_classes + 1), dtype=np.int64)
    np.add.at(counts, (np.arange(votes.shape[0])[:, None], votes), 1)
    return np.argmax(counts[:, 1:], axis=1) + 1


def _clip_p(params: Hyperparams, d: int, n: int) -> Hyperparams:
    limit = d if params.kernel == "linear" else n
    return params if params.p <= limit else replace(params, p=limit)


def fit_scenario(X, labels: LabelAssignment, params: Hyperparams, scenario: str = "ssrl_pl"):
    """Fit the projection a scenario calls for and return it.

    ``labeled_only`` fits on the labeled block alone, ``all_labels`` reveals
    the hidden truth, ``pca`` ignores labels entirely.
    """
    X = np.asarray(X, dtype=np.float64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if scenario == "pca":
            return fit_pca(X, min(params.p, X.shape[0]))
        if scenario == "labeled_only":
            X = X[:, : labels.l]
            Y = one_hot(labels.labels, labels.n_classes)
        elif scenario == "all_labels":
            Y = one_hot(labels.truth, labels.n_classes)
        elif scenario == "ssrl_pl":
            Y = assign_probabilistic_labels(X, labels, params.labeling)
        else:
            raise ConfigError(f"unknown scenario {scenario!r}")
        params = _clip_p(params, X.shape[0], X.shape[1])
        if params.kernel == "linear":
            return fit_linear(X, Y, params.fit_config)
        return fit_kernel(X, Y, params.kernel_spec, params.fit_config)


def _grid_points(base: Hyperparams, grid: dict) -> list[Hyperparams]:
    keys = [k for k in GRID_KEYS if k in grid]
    values = [sorted(grid[k], key=lambda v: (v is None, v)) for k in keys]
    return [replace(base, **dict(zip(keys, combo))) for combo in itertools.product(*values)]


def _hold_out(X, labels: LabelAssignment, i: int):
    """Move labeled sample ``i`` to the first unlabeled slot."""
    keep = [j for j in range(labels.l) if j != i]
    order = keep + [i] + list(range(labels.l, labels.n))
    masked = LabelAssignment(labels=labels.labels[keep], n=labels.n, n_classes=labels.n_classes)
    return X[:, order], masked


def loo_accuracy(X, labels: LabelAssignment, params: Hyperparams, p_values=None) -> dict:
    """Held-out 1-NN accuracy over labeled samples for each target dimension.

    One fit at the largest requested ``p`` serves every smaller ``p``, since the
    leading eigenvectors are nested.
    """
    p_values = sorted(p_values or [params.p])
    hits = {p: 0 for p in p_values}
    for i in range(labels.l):
        Xi, masked = _hold_out(X, labels, i)
        proj = fit_scenario(Xi, masked, replace(params, p=p_values[-1]))
        Z = getattr(proj, "embedding", None)
        if Z is None:
            Z = transform(proj, Xi)
        target = labels.labels[i]
        for p in p_values:
            Zp = Z[: min(p, Z.shape[0])]
            pred = knn_classify(Zp[:, : masked.l], masked.labels, Zp[:, masked.l : masked.l + 1], 1)
            hits[p] += int(pred[0] == target)
    return {p: hits[p] / labels.l for p in p_values}


def loo_select(X, labels: LabelAssignment, config: EvalConfig) -> Hyperparams:
    """Grid point with the best leave-one-out accuracy on the labeled samples.

    Ties go to the first point of the sorted cartesian product. Points whose
    labeling ``k`` exceeds the ``l - 1`` remaining labels are skipped.
    """
    if labels.l < 2:
        raise ConfigError("leave-one-out selection needs at least two labeled samples")
    points = _grid_points(config.params, config.grid)
    if len(points) == 1:
        return points[0]
    scores = {}
    groups: dict = {}
    for idx, point in enumerate(points):
        if point.labeling_k > labels.l - 1:
            continue
        groups.setdefault(replace(point, p=0), []).append((idx, point.p))
    if not groups:
        raise ConfigError("no grid point is valid for the available labels")
    for key, members in groups.items():
        acc = loo_accuracy(X, labels, key, [p for _, p in members])
        for idx, p in members:
            scores[idx] = acc[p]
    best = max(scores, key=lambda idx: (scores[idx], -idx))
    return points[best]


def run_scenarios(X, labels: LabelAssignment, test, config: EvalConfig, scenarios=SCENARIOS, seed=0):
    """Accuracy of each scenario on one split.

    Every scenario is scored the same way: k-NN over the embedded labeled
    training samples, predicting the embedded test samples.

    Returns a dict ``scenario -> EvalReport`` with one ``per_split`` entry.
    """
    X_test, y_test = test
    params = config.params
    if config.grid and "ssrl_pl" in scenarios:
        params = loo_select(X, labels, config)
    reports = {}
    for scenario in scenarios:
        proj = fit_scenario(X, labels, params, scenario)
        Z_train = transform(proj, X[:, : labels.l])
        Z_test = transform(proj, X_test)
        k = min(config.knn_k, labels.l)
        pred = knn_classify(Z_train, labels.labels, Z_test, k)
        report = EvalReport(scenario=scenario, chosen_params=params.to_dict())
        report.add(seed, float(np.mean(pred == y_test)))
        reports[scenario] = report
    return reports


def compare_scenarios(X, classes, split: SplitSpec, config: EvalConfig, repeats: int = 10,
                      scenarios=SCENARIOS, preprocess=None):
    """Run ``run_scenarios`` over ``repeats`` splits seeded ``split.seed + r``.

    ``preprocess`` optionally maps ``(X_train, X_test)`` to transformed copies,
    fitted on the train part only.
    """
    merged = {s: EvalReport(scenario=s, chosen_params={}) for s in scenarios}
    choices = []
    for r in range(repeats):
        seed = split.seed + r
        (Xt, labels), (Xs, ys) = make_split(X, classes, replace(split, seed=seed))
        if preprocess is not None:
            Xt, Xs = preprocess(Xt, Xs)
        result = run_scenarios(Xt, labels, (Xs, ys), config, scenarios, seed)
        for s in scenarios:
            merged[s].add(seed, result[s].per_split[0]["accuracy"])
        choices.append(result[scenarios[0]].chosen_params)
    for s in scenarios:
        merged[s].chosen_params = choices[0] if len(set(map(repr, choices))) == 1 else {"per_split": choices}
    return [merged[s] for s in scenarios]
