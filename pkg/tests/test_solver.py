import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssrlpl.dataset import generate_two_moons, mask_labels, normalize_to_unit_ball
from ssrlpl.errors import ConfigError, NumericError, ShapeError, ValidationError
from ssrlpl.kernels import KernelSpec, gram
from ssrlpl.labeling import LabelingConfig, assign_probabilistic_labels, one_hot
from ssrlpl.objective import objective_frobenius, objective_trace
from ssrlpl.solver import (
    FitConfig,
    KernelProjection,
    fit_kernel,
    fit_linear,
    fit_pca,
    symmetric_top_eigenpairs,
    transform,
)

from conftest import random_label_matrix, random_orthonormal

LINEAR = KernelSpec("linear")


def embedding_objective(proj, Y):
    """Objective of the training embedding, read with the identity map."""
    Z = proj.embedding
    return objective_frobenius(np.eye(Z.shape[0]), Z, Y)


def test_top_eigenpairs_diagonal():
    values, vectors = symmetric_top_eigenpairs(np.diag([3.0, 1.0, 2.0]), 2)
    np.testing.assert_allclose(values, [3.0, 2.0])
    np.testing.assert_allclose(vectors, np.eye(3)[:, [0, 2]], atol=1e-15)


def test_top_eigenpairs_identity_sign_rule():
    values, vectors = symmetric_top_eigenpairs(np.eye(4), 1)
    assert values[0] == pytest.approx(1.0)
    assert np.linalg.norm(vectors) == pytest.approx(1.0)
    v = vectors[:, 0]
    assert v[np.argmax(np.abs(v))] > 0


def test_top_eigenpairs_random_against_full_solve(rng):
    A = rng.normal(size=(8, 8))
    M = A + A.T
    values, vectors = symmetric_top_eigenpairs(M, 3)
    np.testing.assert_allclose(values, np.sort(np.linalg.eigvalsh(M))[::-1][:3], rtol=1e-12)
    assert np.all(np.linalg.norm(M @ vectors - vectors * values, axis=0) <= 1e-8 * np.linalg.norm(M))
    np.testing.assert_allclose(vectors.T @ vectors, np.eye(3), atol=1e-12)
    for col in vectors.T:
        assert col[np.argmax(np.abs(col))] > 0


def test_top_eigenpairs_validation():
    with pytest.raises(ValidationError):
        symmetric_top_eigenpairs(np.array([[1.0, 2.0], [0.0, 1.0]]), 1)
    with pytest.raises(ConfigError):
        symmetric_top_eigenpairs(np.eye(2), 3)


def test_fit_linear_finds_discriminative_axis():
    X = np.zeros((5, 6))
    X[0] = [1, 1, 1, -1, -1, -1]
    Y = one_hot([1, 1, 1, 2, 2, 2], 2)
    proj = fit_linear(X, Y, FitConfig(p=1))
    np.testing.assert_allclose(proj.V[:, 0], np.eye(5)[0], atol=1e-12)
    A = (X - X.mean(axis=1, keepdims=True)) @ Y
    assert proj.eigenvalues[0] == pytest.approx(np.linalg.eigvalsh(A @ A.T).max())


def test_fit_linear_constant_labels(rng):
    X = rng.normal(size=(4, 10))
    Y = np.tile([0.3, 0.7], (10, 1))
    with pytest.warns(RuntimeWarning):
        proj = fit_linear(X, Y, FitConfig(p=2))
    np.testing.assert_allclose(proj.eigenvalues, 0.0, atol=1e-12)
    np.testing.assert_allclose(proj.V.T @ proj.V, np.eye(2), atol=1e-12)


def test_fit_linear_full_dimension(rng):
    X = rng.normal(size=(3, 12))
    Y = random_label_matrix(rng, 12, 4)
    proj = fit_linear(X, Y, FitConfig(p=3))
    assert objective_trace(proj.V, X, Y) == pytest.approx(objective_trace(np.eye(3), X, Y), rel=1e-10)


def test_fit_linear_p_too_large(rng):
    with pytest.raises(ConfigError):
        fit_linear(rng.normal(size=(2, 5)), random_label_matrix(rng, 5, 2), FitConfig(p=3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_linear_fit_certificates(seed):
    rng = np.random.default_rng(seed)
    d, n, c = int(rng.integers(2, 8)), int(rng.integers(3, 30)), int(rng.integers(2, 5))
    X = rng.normal(size=(d, n))
    Y = random_label_matrix(rng, n, c)
    p = int(rng.integers(1, d + 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        proj = fit_linear(X, Y, FitConfig(p=p))
    V = proj.V
    assert np.max(np.abs(V.T @ V - np.eye(p))) <= 1e-8
    assert np.all(np.diff(proj.eigenvalues) <= 1e-12)
    assert np.all(proj.eigenvalues >= -1e-9)
    best = objective_trace(V, X, Y)
    assert proj.objective == pytest.approx(best, rel=1e-8, abs=1e-14)
    for _ in range(50):
        assert objective_trace(random_orthonormal(rng, d, p), X, Y) <= best + 1e-9
    values = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for q in range(1, d + 1):
            values.append(objective_frobenius(fit_linear(X, Y, FitConfig(p=q)).V, X, Y))
    assert np.all(np.diff(values) >= -1e-12)


def test_fits_are_bit_identical(rng):
    X = rng.normal(size=(4, 20))
    Y = random_label_matrix(rng, 20, 3)
    a, b = fit_linear(X, Y, FitConfig(p=2)), fit_linear(X, Y, FitConfig(p=2))
    assert np.array_equal(a.V, b.V) and np.array_equal(a.eigenvalues, b.eigenvalues)
    ka = fit_kernel(X, Y, KernelSpec("rbf", 0.8), FitConfig(p=2))
    kb = fit_kernel(X, Y, KernelSpec("rbf", 0.8), FitConfig(p=2))
    assert np.array_equal(ka.beta, kb.beta)


@pytest.mark.parametrize("d, n", [(8, 6), (3, 15)])
def test_kernel_linear_matches_linear_fit(rng, d, n):
    X = rng.normal(size=(d, n))
    Y = random_label_matrix(rng, n, 3)
    p = min(2, d)
    lin = fit_linear(X, Y, FitConfig(p=p))
    ker = fit_kernel(X, Y, LINEAR, FitConfig(p=p, ridge=1e-8))
    target = objective_frobenius(lin.V, X, Y)
    assert embedding_objective(ker, Y) == pytest.approx(target, rel=1e-6)
    assert ker.objective == pytest.approx(target, rel=1e-6)


def test_kernel_constraint_and_embedding(rng):
    X = rng.normal(size=(3, 15))
    Y = random_label_matrix(rng, 15, 3)
    proj = fit_kernel(X, Y, KernelSpec("rbf", 1.0), FitConfig(p=2))
    K = gram(X, proj.spec)
    Kr = K + proj.ridge * np.eye(15)
    np.testing.assert_allclose(proj.beta.T @ Kr @ proj.beta, np.eye(2), atol=1e-6)
    np.testing.assert_allclose(proj.embedding, proj.beta.T @ K, atol=1e-12)
    assert proj.ridge == pytest.approx(1e-8 * np.trace(K) / 15)
    Q = K @ (np.eye(15) - 1 / 15) @ Y @ Y.T @ (np.eye(15) - 1 / 15) @ K
    np.testing.assert_allclose(Q @ proj.beta, Kr @ proj.beta * proj.eigenvalues, atol=1e-6 * np.abs(Q).max())


def test_kernel_two_samples():
    X = np.array([[0.0, 1.0]])
    proj = fit_kernel(X, np.eye(2), KernelSpec("rbf", 1.0), FitConfig(p=1))
    K = gram(X, proj.spec) + proj.ridge * np.eye(2)
    assert proj.beta.shape == (2, 1)
    assert (proj.beta.T @ K @ proj.beta)[0, 0] == pytest.approx(1.0)


def test_kernel_not_positive_definite():
    K = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(NumericError, match="ridge"):
        fit_kernel(None, np.eye(2), KernelSpec("precomputed"), FitConfig(p=1, ridge=0.0), K=K)


def test_precomputed_matches_rbf(rng):
    X = rng.normal(size=(2, 12))
    Y = random_label_matrix(rng, 12, 2)
    spec = KernelSpec("rbf", 0.7)
    direct = fit_kernel(X, Y, spec, FitConfig(p=1))
    pre = fit_kernel(None, Y, KernelSpec("precomputed"), FitConfig(p=1), K=gram(X, spec))
    np.testing.assert_allclose(pre.beta, direct.beta, atol=1e-10)
    cross = gram(X, spec)[:, :3]
    np.testing.assert_allclose(transform(pre, cross), direct.embedding[:, :3], atol=1e-10)


def test_transform_linear_training_data(rng):
    X = rng.normal(size=(4, 10))
    proj = fit_linear(X, random_label_matrix(rng, 10, 3), FitConfig(p=2))
    np.testing.assert_array_equal(transform(proj, X), proj.V.T @ X)
    with pytest.raises(ShapeError):
        transform(proj, rng.normal(size=(3, 2)))


def test_transform_kernel_training_point(rng):
    X = rng.normal(size=(3, 10))
    proj = fit_kernel(X, random_label_matrix(rng, 10, 3), KernelSpec("rbf", 1.0), FitConfig(p=2))
    np.testing.assert_allclose(transform(proj, X[:, [4]])[:, 0], proj.embedding[:, 4], atol=1e-12)
    np.testing.assert_allclose(transform(proj, X), proj.embedding, atol=1e-12)
    with pytest.raises(ShapeError):
        transform(proj, rng.normal(size=(2, 1)))


def test_transform_unseen_moons_points():
    X, classes = generate_two_moons(200, 0.1, seed=0)
    X, scale = normalize_to_unit_ball(X)
    Xm, labels = mask_labels(X, classes, labeled_per_class=4, seed=0)
    Y = assign_probabilistic_labels(Xm, labels, LabelingConfig(k=3, sigma=0.15))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        proj = fit_kernel(Xm, Y, KernelSpec("rbf", 0.15), FitConfig(p=2))
    truth = labels.truth
    c1 = proj.embedding[:, truth == 1].mean(axis=1)
    c2 = proj.embedding[:, truth == 2].mean(axis=1)
    t = np.array([0.3, 1.5, 2.6])
    new = np.vstack([np.cos(t), np.sin(t)]) * scale
    Z = transform(proj, new)
    for z in Z.T:
        assert np.linalg.norm(z - c1) < np.linalg.norm(z - c2)


def test_pca_is_identity_label_fit(rng):
    X = rng.normal(size=(5, 9))
    pca = fit_pca(X, 2)
    assert isinstance(pca.V, np.ndarray)
    ref = fit_linear(X, np.eye(9), FitConfig(p=2))
    np.testing.assert_allclose(pca.V, ref.V, atol=1e-10)
    assert not isinstance(pca, KernelProjection)
