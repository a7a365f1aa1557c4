import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from setkernels.data import DataError
from setkernels.kernels import gaussian_K, gram, kernel_matrix, median_heuristic_level2
from setkernels.rff import DegenerateScaleError, EmbeddedSample


def test_gaussian_K_examples():
    assert gaussian_K([1.5, 2.0], [1.5, 2.0], 0.3) == 1.0
    assert gaussian_K([0.0], [2.0], 2.0) == pytest.approx(np.exp(-1.0), abs=1e-15)
    with pytest.raises(ValueError):
        gaussian_K([0.0], [0.0, 1.0], 1.0)


def test_kernel_matrix_matches_pointwise():
    rng = np.random.default_rng(0)
    U, V = rng.normal(size=(5, 3)), rng.normal(size=(4, 3))
    K = kernel_matrix(U, V, 0.7)
    for i in range(5):
        for j in range(4):
            assert K[i, j] == pytest.approx(gaussian_K(U[i], V[j], 0.7), rel=1e-12)


def test_linear_kind():
    U = np.array([[1.0, 2.0], [0.0, -1.0]])
    np.testing.assert_array_equal(kernel_matrix(U, U, 1.0, "linear"), U @ U.T)
    with pytest.raises(ValueError):
        kernel_matrix(U, U, 1.0, "poly")


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.tuples(st.integers(2, 50), st.just(4)), elements=st.floats(-3, 3)),
       st.floats(0.05, 20))
def test_gram_psd_and_range(E, ls):
    n = E.shape[0]
    A = EmbeddedSample(E, np.full(n, 1.0 / n), "f")
    K = gram(A, A, ls).values
    assert np.all(K >= 0) and np.all(K <= 1)
    np.testing.assert_array_equal(np.diag(K), 1.0)
    np.testing.assert_allclose(K, K.T, atol=1e-15)
    assert np.linalg.eigvalsh(K).min() >= -1e-8 * n


def test_gram_monotone_in_bandwidth():
    E = np.random.default_rng(2).normal(size=(8, 3))
    A = EmbeddedSample(E, np.full(8, 1 / 8), "f")
    small, large = gram(A, A, 0.5).values, gram(A, A, 2.0).values
    off = ~np.eye(8, dtype=bool)
    assert np.all(large[off] > small[off])


def test_gram_rejects_mismatched_fingerprints():
    A = EmbeddedSample(np.zeros((2, 2)) + [[0], [1]], np.full(2, 0.5), "a")
    B = EmbeddedSample(np.zeros((2, 2)), np.full(2, 0.5), "b")
    with pytest.raises(DataError):
        gram(A, B, 1.0)


def test_level2_median_examples():
    assert median_heuristic_level2(np.array([[0.0], [2.0]])) == 2.0
    assert median_heuristic_level2(np.array([[0.0], [1.0], [3.0]])) == 2.0
    with pytest.raises(DegenerateScaleError):
        median_heuristic_level2(np.ones((3, 2)))
