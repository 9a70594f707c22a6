import math

import numpy as np
import pytest

from driftx import FeatureSet, KernelParams, kernel_matrix, laplace_kernel
from driftx.rng import prng_stream


def test_zero_distance_is_one():
    assert laplace_kernel((0.0, 0.0), (0.0, 0.0), 0.05) == 1.0


def test_analytic_values():
    assert laplace_kernel((0, 0), (0.05, 0), 0.05) == pytest.approx(math.exp(-1), abs=1e-12)
    assert laplace_kernel((0, 0), (0.1, 0), 0.05) == pytest.approx(math.exp(-2), abs=1e-12)


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        laplace_kernel((0, 0), (0, 0, 0), 0.5)
    with pytest.raises(ValueError):
        kernel_matrix(np.zeros((2, 2)), np.zeros((2, 3)), 0.5)


def test_nonfinite_input_rejected():
    with pytest.raises(ValueError):
        laplace_kernel((np.nan, 0), (0, 0), 0.5)
    with pytest.raises(ValueError):
        laplace_kernel((0, 0), (np.inf, 0), 0.5)


def test_bad_tau_rejected():
    for tau in (0.0, -1.0, np.nan, np.inf):
        with pytest.raises(ValueError):
            laplace_kernel((0, 0), (1, 0), tau)


def test_kernel_matrix_identity_case():
    m = kernel_matrix(np.array([[0.0, 0.0]]), np.array([[0.0, 0.0]]), 0.5)
    assert m.shape == (1, 1) and m[0, 0] == 1.0


def test_kernel_matrix_analytic_row():
    m = kernel_matrix(np.array([[0.0, 0.0]]),
                      np.array([[0.05, 0.0], [0.1, 0.0]]), 0.05)
    assert np.allclose(m, [[math.exp(-1), math.exp(-2)]], atol=1e-12)


def test_kernel_matrix_matches_pairwise_recomputation():
    rng = prng_stream(5)
    pts = rng.uniform(-2, 2, size=(5, 3))
    m = kernel_matrix(pts, pts, 0.7)
    # independent oracle: scalar kernel per pair
    for i in range(5):
        for j in range(5):
            assert m[i, j] == pytest.approx(laplace_kernel(pts[i], pts[j], 0.7), abs=1e-14)
    assert np.array_equal(m, m.T)
    assert np.all(np.diag(m) == 1.0)


def test_symmetry_bounds_and_monotonicity():
    rng = prng_stream(11)
    for _ in range(50):
        x, y1, y2 = rng.uniform(-3, 3, size=(3, 4))
        tau = float(rng.uniform(0.1, 2.0))
        k1 = laplace_kernel(x, y1, tau)
        assert k1 == laplace_kernel(y1, x, tau)
        assert 0.0 < k1 <= 1.0
        if np.linalg.norm(x - y1) < np.linalg.norm(x - y2):
            assert k1 > laplace_kernel(x, y2, tau)
        if not np.array_equal(x, y1):
            assert k1 < laplace_kernel(x, y1, tau * 1.5)  # increasing in tau


def test_accepts_feature_sets():
    fs = FeatureSet([[0.0, 0.0], [1.0, 0.0]])
    m = kernel_matrix(fs, fs, 1.0)
    assert m[0, 1] == pytest.approx(math.exp(-1))


def test_kernel_params_validation():
    assert KernelParams((0.5,)).group_weights == (1.0,)
    assert KernelParams((0.5, 1.0)).num_groups == 2
    with pytest.raises(ValueError):
        KernelParams(())
    with pytest.raises(ValueError):
        KernelParams((0.5, -1.0))
    with pytest.raises(ValueError):
        KernelParams((0.5,), (0.0,))  # no positive weight
    with pytest.raises(ValueError):
        KernelParams((0.5, 0.6), (1.0,))  # length mismatch
