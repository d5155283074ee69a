import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kernelsense.kernels import (
    KernelSpec,
    center_cross_gram,
    center_gram,
    center_kernel_vector,
    cross_gram,
    eval_kernel,
    gaussian_rbf,
    gram_matrix,
    linear,
    polynomial,
)

PSD_KERNELS = [
    linear(),
    polynomial(1.0, 2),
    polynomial(0.0, 3),
    gaussian_rbf(15 / math.sqrt(2)),
    gaussian_rbf(0.7),
    KernelSpec("rbf", {"gamma": 0.3}),
    KernelSpec("heavy_tailed_rbf", {"gamma": 0.5, "a": 0.5, "b": 1.0}),
    KernelSpec("heavy_tailed_rbf", {"gamma": 0.2, "a": 1.5, "b": 2.0}),
]
ALL_KERNELS = PSD_KERNELS + [KernelSpec("tanh_nn", {"b": -0.5})]


def test_polynomial_order_two():
    assert eval_kernel(polynomial(1.0, 2), [1.0, 0.0], [1.0, 0.0]) == 4.0


@pytest.mark.parametrize("sigma", [0.1, 1.0, 15 / math.sqrt(2)])
def test_gaussian_at_zero_distance(sigma):
    x = [0.3, -1.0, 2.0]
    assert eval_kernel(gaussian_rbf(sigma), x, x) == 1.0


def test_gaussian_at_default_detector_width():
    # sigma = 15/sqrt(2) gives 2 sigma^2 = 225
    k = gaussian_rbf(15 / math.sqrt(2))
    x, y = np.zeros(2), np.array([9.0, 12.0])
    assert eval_kernel(k, x, y) == pytest.approx(math.exp(-1.0), rel=1e-15)
    y = np.array([7.5, 7.5])  # ||x - y||^2 = 112.5
    assert eval_kernel(k, x, y) == pytest.approx(math.exp(-0.5), rel=1e-15)


def test_remaining_closed_forms():
    x, y = np.array([1.0, -2.0]), np.array([0.5, 4.0])
    assert eval_kernel(linear(), x, y) == -7.5
    assert eval_kernel(KernelSpec("rbf", {"gamma": 0.1}), x, y) == pytest.approx(math.exp(-0.1 * 36.25))
    assert eval_kernel(KernelSpec("tanh_nn", {"b": 1.0}), x, y) == pytest.approx(math.tanh(-6.5))
    ht = KernelSpec("heavy_tailed_rbf", {"gamma": 2.0, "a": 0.5, "b": 1.0})
    xa = np.array([1.0, -math.sqrt(2)])
    ya = np.array([math.sqrt(0.5), 2.0])
    assert eval_kernel(ht, x, y) == pytest.approx(math.exp(-2.0 * np.linalg.norm(xa - ya)))


@pytest.mark.parametrize("kind, params", [
    ("polynomial", {"c": -1.0}),
    ("polynomial", {"degree": 1.5}),
    ("polynomial", {"degree": 0}),
    ("gaussian_rbf", {"sigma": 0.0}),
    ("rbf", {"gamma": -1.0}),
    ("heavy_tailed_rbf", {"b": 0.0}),
    ("gaussian_rbf", {"gamma": 1.0}),
    ("cubic", {}),
    ("rbf", {"gamma": math.nan}),
])
def test_spec_validation(kind, params):
    with pytest.raises(ValueError):
        KernelSpec(kind, params)


def test_spec_dict_round_trip():
    k = KernelSpec.from_dict({"kind": "polynomial", "c": 2.0, "degree": 3})
    assert k.to_dict() == {"kind": "polynomial", "c": 2.0, "degree": 3}
    assert KernelSpec.from_dict(k.to_dict()) == k


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        eval_kernel(linear(), [1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        cross_gram(linear(), np.ones((2, 3)), np.ones((2, 4)))


@pytest.mark.parametrize("k", ALL_KERNELS, ids=lambda k: k.kind)
def test_gram_matches_double_loop(k):
    X = np.random.default_rng(0).standard_normal((6, 4))
    ref = np.array([[eval_kernel(k, X[i], X[j]) for j in range(6)] for i in range(6)])
    np.testing.assert_allclose(gram_matrix(k, X), ref, rtol=1e-12, atol=1e-14)
    K = gram_matrix(k, X)
    assert np.array_equal(K, K.T)


@pytest.mark.parametrize("k", ALL_KERNELS, ids=lambda k: k.kind)
def test_cross_gram_matches_double_loop(k):
    rng = np.random.default_rng(1)
    A, B = rng.standard_normal((3, 5)), rng.standard_normal((2, 5))
    ref = np.array([[eval_kernel(k, A[i], B[j]) for j in range(2)] for i in range(3)])
    np.testing.assert_allclose(cross_gram(k, A, B), ref, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("k", ALL_KERNELS, ids=lambda k: k.kind)
def test_self_cross_gram_is_gram(k):
    X = np.random.default_rng(2).standard_normal((5, 3))
    np.testing.assert_allclose(cross_gram(k, X, X), gram_matrix(k, X), rtol=1e-12, atol=1e-14)


def test_single_frame_gaussian_gram():
    assert np.array_equal(gram_matrix(gaussian_rbf(2.0), np.ones((1, 4))), [[1.0]])


def test_linear_cross_gram_of_orthogonal_sets():
    A = np.array([[1.0, 0, 0, 0], [0, 2.0, 0, 0]])
    B = np.array([[0, 0, 3.0, 0], [0, 0, 0, -1.0]])
    assert np.array_equal(cross_gram(linear(), A, B), np.zeros((2, 2)))


@pytest.mark.parametrize("k", PSD_KERNELS, ids=lambda k: k.kind)
def test_gram_is_psd(k):
    X = np.random.default_rng(3).standard_normal((10, 6))
    lam = np.linalg.eigvalsh(gram_matrix(k, X))
    assert lam[0] >= -1e-8 * max(1.0, lam[-1])


@settings(max_examples=50)
@given(st.sampled_from(ALL_KERNELS),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_kernel_is_exactly_symmetric(k, x, y):
    assert eval_kernel(k, x, y) == eval_kernel(k, y, x)


@settings(max_examples=50)
@given(st.floats(0.05, 50), st.lists(st.floats(-3, 3), min_size=4, max_size=4),
       st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_gaussian_rbf_equals_rbf(sigma, x, y):
    a = eval_kernel(gaussian_rbf(sigma), x, y)
    b = eval_kernel(KernelSpec("rbf", {"gamma": 1 / (2 * sigma**2)}), x, y)
    assert abs(a - b) <= 1e-15 * abs(b)


def test_center_all_ones():
    np.testing.assert_allclose(center_gram(np.ones((4, 4))), np.zeros((4, 4)), atol=1e-15)


def test_center_is_idempotent_and_zero_sum():
    X = np.random.default_rng(4).standard_normal((7, 3))
    K = gram_matrix(polynomial(1.0, 2), X)
    Kc = center_gram(K)
    np.testing.assert_allclose(center_gram(Kc), Kc, atol=1e-12 * np.abs(K).max())
    assert np.abs(Kc.sum(axis=0)).max() <= 1e-9 * np.linalg.norm(K)
    assert np.abs(Kc.sum(axis=1)).max() <= 1e-9 * np.linalg.norm(K)


def test_center_matches_matrix_formula():
    B = np.random.default_rng(5).standard_normal((5, 5))
    K = B @ B.T
    one = np.full((5, 5), 1 / 5)
    ref = K - one @ K - K @ one + one @ K @ one
    np.testing.assert_allclose(center_gram(K), ref, atol=1e-13)


def test_center_cross_gram_matches_explicit_feature_centering():
    rng = np.random.default_rng(6)
    A, B = rng.standard_normal((4, 3)), rng.standard_normal((6, 3))
    ref = (A - A.mean(0)) @ (B - B.mean(0)).T
    np.testing.assert_allclose(center_cross_gram(cross_gram(linear(), A, B)), ref, atol=1e-13)


def test_center_kernel_vector():
    np.testing.assert_array_equal(center_kernel_vector([1.0, 1.0, 1.0]), [0, 0, 0])
    np.testing.assert_array_equal(center_kernel_vector([2.0, 0.0]), [1, -1])
    kT = np.random.default_rng(7).standard_normal(7)
    ones = np.ones((7, 1))
    ref = kT - (ones @ np.full((1, 7), 1 / 7) @ kT[:, None])[:, 0]
    out = center_kernel_vector(kT)
    np.testing.assert_allclose(out, ref, atol=1e-15)
    assert abs(out.sum()) <= 1e-12 * 7 * np.abs(kT).max()
    with pytest.raises(ValueError):
        center_kernel_vector([])
