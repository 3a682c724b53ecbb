"""Data matrices, CSV ingestion, synthetic generators and label masking.

Throughout the package a data matrix is a ``(d, n)`` float array whose columns
are samples. Labeled samples always come first, so downstream code can slice
``X[:, :l]`` for the labeled block.
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ParseError, SplitError, ValidationError

MISSING_TOKENS = ("", "?")


@dataclass(frozen=True)
class LabelAssignment:
    """Class ids for a labeled-first sample ordering.

    ``labels`` holds the ``l`` known class ids (1-based). ``hidden`` optionally
    holds the true classes of the ``u`` unlabeled samples; it is only present
    when the labels were masked on purpose (splits, bound analysis).
    ``order[j]`` is the original row index of column ``j``.
    """

    labels: np.ndarray
    n: int
    n_classes: int
    hidden: np.ndarray | None = None
    order: np.ndarray | None = None

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        if labels.ndim != 1:
            raise ValidationError("labels must be one-dimensional")
        if labels.size < 1:
            raise ValidationError("at least one labeled sample is required")
        if labels.size > self.n:
            raise ValidationError("more labels than samples")
        if labels.min() < 1 or labels.max() > self.n_classes:
            raise ValidationError(f"class ids must lie in 1..{self.n_classes}")
        if self.hidden is not None:
            hidden = np.asarray(self.hidden, dtype=np.int64)
            object.__setattr__(self, "hidden", hidden)
            if hidden.shape != (self.u,):
                raise ValidationError("hidden truth must cover every unlabeled sample")

    @property
    def l(self) -> int:  # noqa: E743
        return int(self.labels.size)

    @property
    def u(self) -> int:
        return self.n - self.l

    @property
    def truth(self) -> np.ndarray:
        """Full class sequence (labeled then hidden). Requires hidden truth."""
        if self.hidden is None:
            raise ValidationError("no hidden truth recorded for the unlabeled samples")
        return np.concatenate([self.labels, self.hidden])


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.5
    labeled_fraction: float = 0.1
    seed: int = 0
    stratified: bool = True
    labeled_per_class: int | None = None

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValidationError("train_fraction must lie in (0, 1)")
        if not 0.0 < self.labeled_fraction <= 1.0:
            raise ValidationError("labeled_fraction must lie in (0, 1]")
        if self.labeled_per_class is not None and self.labeled_per_class < 1:
            raise ValidationError("labeled_per_class must be at least 1")


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, label_column: int | None = -1, require_labels: bool = True):
    """Read a feature CSV into a labeled-first data matrix.

    A first row in which no cell parses as a number is treated as a header.
    Missing labels are empty cells or ``?``.

    Args:
        path: CSV file.
        label_column: index of the class column (negative counts from the
            end), or None when the file carries features only.
        require_labels: raise when no row carries a label.

    Returns:
        ``(X, labels)`` with ``X`` of shape ``(d, n)``. When the file has no
        labels and ``require_labels`` is false, ``labels`` is None and the
        column order matches the file.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        rows = [(i + 1, row) for i, row in enumerate(csv.reader(handle)) if row]
    if rows and not any(_is_number(c.strip()) for c in rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise ParseError(f"{path}: no data rows")

    width = len(rows[0][1])
    if label_column is not None:
        label_column = label_column % width
    features, classes = [], []
    for line, row in rows:
        if len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", line)
        values = []
        for j, cell in enumerate(row):
            cell = cell.strip()
            if j == label_column:
                if cell in MISSING_TOKENS:
                    classes.append(0)
                    continue
                try:
                    cls = int(cell)
                except ValueError:
                    raise ParseError(f"label {cell!r} is not an integer", line) from None
                if cls < 1:
                    raise ParseError(f"label {cls} is not a positive class id", line)
                classes.append(cls)
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise ParseError(f"non-numeric feature {cell!r} in column {j}", line) from None
            if not np.isfinite(values[-1]):
                raise ParseError(f"non-finite feature in column {j}", line)
        features.append(values)

    X = np.array(features, dtype=np.float64).T
    if label_column is None:
        if require_labels:
            raise ValidationError(f"{path}: no labeled rows")
        return X, None
    classes = np.array(classes, dtype=np.int64)
    if not np.any(classes > 0):
        if require_labels:
            raise ValidationError(f"{path}: no labeled rows")
        return X, None
    order = np.concatenate([np.flatnonzero(classes > 0), np.flatnonzero(classes == 0)])
    labels = LabelAssignment(
        labels=classes[classes > 0],
        n=X.shape[1],
        n_classes=int(classes.max()),
        order=order,
    )
    return X[:, order], labels


def write_text_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_matrix(rows: np.ndarray, extra: list | None = None) -> str:
    """Render a 2-D array as CSV text with round-trip float formatting."""
    lines = []
    for i, row in enumerate(np.asarray(rows, dtype=np.float64)):
        cells = [repr(float(v)) for v in row]
        if extra is not None:
            cells.append(extra[i])
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def save_csv(path, X: np.ndarray, classes=None) -> None:
    """Write samples as rows, class ids in the last column (0 or None = missing)."""
    X = np.asarray(X, dtype=np.float64)
    extra = None
    if classes is not None:
        extra = ["" if c is None or int(c) == 0 else str(int(c)) for c in classes]
        if len(extra) != X.shape[1]:
            raise ValidationError("one class entry per sample is required")
    write_text_atomic(path, format_matrix(X.T, extra))


def normalize_to_unit_ball(X: np.ndarray):
    """Scale all samples by one global factor so the largest norm is 1.

    Data already inside the unit ball, and all-zero data, are returned
    unchanged. Returns ``(X_scaled, factor)``.
    """
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ValidationError("data contains non-finite entries")
    radius = float(np.max(np.linalg.norm(X, axis=0), initial=0.0))
    if radius <= 1.0:
        return X.copy(), 1.0
    return X / radius, 1.0 / radius


def standardize(X: np.ndarray):
    """Per-feature zero mean, unit variance. Returns ``(X, mean, scale)``."""
    mean = X.mean(axis=1, keepdims=True)
    scale = X.std(axis=1, keepdims=True)
    scale[scale == 0] = 1.0
    return (X - mean) / scale, mean.ravel(), scale.ravel()


def generate_two_moons(n: int, noise_sd: float = 0.1, seed: int = 0):
    """Two interleaving half circles.

    Class 1 lies on ``(cos t, sin t)``, class 2 on ``(1 - cos t, 0.5 - sin t)``
    for ``t`` in ``[0, pi]``; Gaussian noise is added to both coordinates.
    Returns ``(X, classes)`` with ``X`` of shape ``(2, n)``.
    """
    if n < 2:
        raise ValidationError("two moons needs n >= 2")
    if noise_sd < 0:
        raise ValidationError("noise_sd must be non-negative")
    n_first = n - n // 2
    n_second = n // 2
    t1 = np.linspace(0.0, np.pi, n_first)
    t2 = np.linspace(0.0, np.pi, n_second)
    X = np.hstack([
        np.vstack([np.cos(t1), np.sin(t1)]),
        np.vstack([1.0 - np.cos(t2), 0.5 - np.sin(t2)]),
    ])
    rng = np.random.default_rng(seed)
    X = X + noise_sd * rng.standard_normal(X.shape)
    classes = np.concatenate([np.ones(n_first, np.int64), np.full(n_second, 2, np.int64)])
    return X, classes


def generate_blobs(n: int, n_classes: int = 3, spread: float = 0.3, dim: int = 2, seed: int = 0):
    """Isotropic Gaussian clusters centred on a unit circle in the first two axes."""
    if n < n_classes or n_classes < 1:
        raise ValidationError("blobs needs n >= n_classes >= 1")
    if dim < 2:
        raise ValidationError("blobs needs dim >= 2")
    rng = np.random.default_rng(seed)
    classes = np.arange(n) % n_classes + 1
    angles = 2.0 * np.pi * (classes - 1) / n_classes
    centres = np.zeros((dim, n))
    centres[0], centres[1] = np.cos(angles), np.sin(angles)
    X = centres + spread * rng.standard_normal((dim, n))
    return X, classes.astype(np.int64)


def _pick_labeled(classes, rng, n_labeled, per_class, stratified):
    """Choose labeled positions within ``classes``; returns a boolean mask."""
    m = classes.size
    perm = rng.permutation(m)
    mask = np.zeros(m, dtype=bool)
    present = np.unique(classes)
    if per_class is not None:
        for c in present:
            members = perm[classes[perm] == c]
            mask[members[:per_class]] = True
        return mask
    if stratified:
        for c in present:
            mask[perm[classes[perm] == c][0]] = True
    for i in perm:
        if mask.sum() >= n_labeled:
            break
        mask[i] = True
    return mask


def mask_labels(X, classes, labeled_fraction=None, labeled_per_class=None, seed=0, stratified=True):
    """Hide a random subset of known labels, keeping them as hidden truth.

    Exactly one of ``labeled_fraction`` and ``labeled_per_class`` is used
    (``labeled_per_class`` wins when both are given). With ``stratified`` every
    class keeps at least one label.

    Returns ``(X_reordered, LabelAssignment)``.
    """
    X = np.asarray(X, dtype=np.float64)
    classes = np.asarray(classes, dtype=np.int64)
    n = classes.size
    if X.shape[1] != n:
        raise ValidationError("one class per sample is required")
    n_classes = int(classes.max())
    if np.any(classes < 1):
        raise ValidationError("class ids must be positive")
    if stratified and np.unique(classes).size < n_classes:
        raise SplitError("a class has no samples to label")
    rng = np.random.default_rng(seed)
    if labeled_per_class is None:
        if labeled_fraction is None:
            raise ValidationError("labeled_fraction or labeled_per_class is required")
        n_labeled = max(1, int(round(n * labeled_fraction)))
    else:
        n_labeled = None
    mask = _pick_labeled(classes, rng, n_labeled, labeled_per_class, stratified)
    order = np.concatenate([np.flatnonzero(mask), np.flatnonzero(~mask)])
    labels = LabelAssignment(
        labels=classes[mask],
        n=n,
        n_classes=n_classes,
        hidden=classes[~mask],
        order=order,
    )
    return X[:, order], labels


def make_split(X, classes, spec: SplitSpec):
    """Seeded train/test split with label masking inside the train part.

    The permutation is drawn once; under ``stratified`` the first occurrence
    of every class in it is forced into the train part, so each class keeps a
    labeled representative.

    Returns ``((X_train, labels), (X_test, test_classes))``. ``labels.order``
    indexes into the original columns.
    """
    X = np.asarray(X, dtype=np.float64)
    classes = np.asarray(classes, dtype=np.int64)
    n = classes.size
    n_classes = int(classes.max())
    rng = np.random.default_rng(spec.seed)
    perm = rng.permutation(n)
    n_train = int(round(n * spec.train_fraction))
    n_train = min(max(n_train, 1), n - 1)

    in_train = np.zeros(n, dtype=bool)
    if spec.stratified:
        present = np.unique(classes)
        if present.size < n_classes or n_train < n_classes:
            raise SplitError("every class needs at least one labeled training sample")
        for c in present:
            in_train[perm[classes[perm] == c][0]] = True
    for i in perm:
        if in_train.sum() >= n_train:
            break
        in_train[i] = True
    train_idx = perm[in_train[perm]]
    test_idx = perm[~in_train[perm]]

    Xt, labels = mask_labels(
        X[:, train_idx],
        classes[train_idx],
        labeled_fraction=spec.labeled_fraction,
        labeled_per_class=spec.labeled_per_class,
        seed=spec.seed + 1,
        stratified=spec.stratified,
    )
    if labels.n_classes != n_classes:
        labels = replace(labels, n_classes=n_classes)
    labels = replace(labels, order=train_idx[labels.order])
    return (Xt, labels), (X[:, test_idx], classes[test_idx])
