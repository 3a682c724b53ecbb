import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssrlpl.dataset import LabelAssignment
from ssrlpl.errors import ConfigError, ShapeError
from ssrlpl.kernels import delta_kernel
from ssrlpl.labeling import (
    LabelingConfig,
    assign_probabilistic_labels,
    one_hot,
    winner_take_all,
    wta_error_rate,
)


def assignment(classes, n, n_classes=None):
    classes = np.asarray(classes)
    return LabelAssignment(labels=classes, n=n, n_classes=n_classes or int(classes.max()))


def test_equidistant_point_splits_evenly():
    X = np.array([[-1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    Y = assign_probabilistic_labels(X, assignment([1, 2], 3), LabelingConfig(k=2, sigma=0.5))
    np.testing.assert_allclose(Y[2], [0.5, 0.5], atol=1e-15)


def test_k1_gives_nearest_class(rng):
    X = rng.normal(size=(2, 30))
    labels = assignment(np.arange(10) % 3 + 1, 30)
    Y = assign_probabilistic_labels(X, labels, LabelingConfig(k=1, sigma=1.0))
    d = ((X[:, 10:, None] - X[:, None, :10]) ** 2).sum(axis=0)
    nearest = labels.labels[np.argmin(d, axis=1)]
    np.testing.assert_array_equal(Y[10:], one_hot(nearest, 3))


def test_hand_computed_row():
    X = np.array([[0.0, 2.0, 0.5], [0.0, 0.0, 0.0]])
    Y = assign_probabilistic_labels(X, assignment([1, 2], 3), LabelingConfig(k=2, sigma=1.0))
    np.testing.assert_allclose(Y[2], [0.7310585786300049, 0.2689414213699951], rtol=1e-14)
    np.testing.assert_array_equal(Y[:2], np.eye(2))


def test_distance_ties_prefer_lower_index():
    # unlabeled point at 0 is equidistant from labeled points at -1 (class 2) and +1 (class 1)
    X = np.array([[-1.0, 1.0, 0.0]])
    Y = assign_probabilistic_labels(X, assignment([2, 1], 3), LabelingConfig(k=1, sigma=1.0))
    np.testing.assert_array_equal(Y[2], [0.0, 1.0])


def test_underflow_falls_back_to_uniform():
    X = np.array([[0.0, 1.0, 50.0]])
    with pytest.warns(RuntimeWarning, match="uniform"):
        Y = assign_probabilistic_labels(X, assignment([1, 2], 3, 3), LabelingConfig(k=2, sigma=1e-3))
    np.testing.assert_allclose(Y[2], [1 / 3] * 3)


def test_config_errors():
    with pytest.raises(ConfigError):
        assign_probabilistic_labels(np.zeros((1, 3)), assignment([1, 2], 3), LabelingConfig(k=3))
    with pytest.raises(ConfigError):
        LabelingConfig(k=0)


def test_winner_take_all_examples():
    np.testing.assert_array_equal(winner_take_all(np.array([[0.2, 0.5, 0.3]])), [[0, 1, 0]])
    hot = np.eye(3)[[2, 0, 1]]
    np.testing.assert_array_equal(winner_take_all(hot), hot)
    np.testing.assert_array_equal(winner_take_all(np.array([[0.5, 0.5]])), [[1, 0]])


def test_wta_error_rate_examples():
    truth = np.array([1, 2, 1, 1, 2, 2, 1, 2, 1, 2])
    Y = one_hot(np.concatenate([[1, 2], truth]), 2)
    assert wta_error_rate(Y, truth) == 0.0
    assert wta_error_rate(Y, 3 - truth) == 1.0
    wrong = truth.copy()
    wrong[[0, 4, 7]] = 3 - wrong[[0, 4, 7]]
    assert wta_error_rate(Y, wrong) == pytest.approx(0.3)
    with pytest.raises(ShapeError):
        wta_error_rate(Y[:3], truth)


@st.composite
def labeling_case(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    n_classes = draw(st.integers(2, 4))
    l = draw(st.integers(n_classes, 12))
    n = l + draw(st.integers(1, 15))
    X = rng.uniform(-1, 1, size=(draw(st.integers(1, 4)), n))
    classes = np.concatenate([np.arange(1, n_classes + 1), rng.integers(1, n_classes + 1, l - n_classes)])
    k = draw(st.integers(1, l))
    sigma = draw(st.floats(0.2, 3.0))
    return X, LabelAssignment(classes, n, n_classes), LabelingConfig(k=k, sigma=sigma)


@settings(max_examples=60, deadline=None)
@given(labeling_case())
def test_label_matrix_invariants(case):
    X, labels, config = case
    Y = assign_probabilistic_labels(X, labels, config)
    np.testing.assert_allclose(Y.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(Y >= 0) and np.all(Y <= 1)
    l = labels.l
    assert np.array_equal((Y @ Y.T)[:l, :l], delta_kernel(labels.labels))
    W = winner_take_all(Y)
    assert np.array_equal(winner_take_all(W), W)
    assert np.array_equal(W[:l], Y[:l])


@settings(max_examples=40, deadline=None)
@given(labeling_case(), st.floats(0.1, 10.0))
def test_similarity_scaling_leaves_labels_unchanged(case, factor):
    # scaling all similarities by c equals shifting squared distances by -2 sigma^2 log c,
    # which translating every point cannot do; instead compare sigma-free ratios directly
    X, labels, config = case
    Y = assign_probabilistic_labels(X, labels, config)
    l = labels.l
    d2 = ((X[:, l:, None] - X[:, None, :l]) ** 2).sum(axis=0)
    nearest = np.argsort(d2, axis=1, kind="stable")[:, : config.k]
    sims = factor * np.exp(-np.take_along_axis(d2, nearest, 1) / (2 * config.sigma**2))
    votes = np.zeros_like(Y[l:])
    for row in range(votes.shape[0]):
        for j, s in zip(nearest[row], sims[row]):
            votes[row, labels.labels[j] - 1] += s
    ok = votes.sum(axis=1) > 0
    np.testing.assert_allclose(Y[l:][ok], (votes / votes.sum(axis=1, keepdims=True))[ok], rtol=1e-10, atol=1e-15)


def test_identical_neighbourhoods_give_identical_rows():
    X = np.array([[0.0, 1.0, 0.3, 0.3], [0.0, 0.0, 0.2, 0.2]])
    Y = assign_probabilistic_labels(X, assignment([1, 2], 4), LabelingConfig(k=2, sigma=0.7))
    assert np.array_equal(Y[2], Y[3])


def test_fully_labeled_returns_one_hot():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        Y = assign_probabilistic_labels(np.zeros((1, 3)), assignment([1, 2, 2], 3), LabelingConfig(k=1))
    np.testing.assert_array_equal(Y, one_hot([1, 2, 2], 2))
