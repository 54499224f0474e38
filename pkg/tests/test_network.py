"""Forward pass: Gaussian hidden layer, linear output, squared-error score."""

import math

import numpy as np
import pytest

from relrbf import (
    NetworkParams,
    forward,
    from_features,
    gaussian_kernel,
    predict_labels,
    prototype_distances,
    sse,
)
from relrbf.errors import DimensionMismatchError, NonpositiveSigmaError
from relrbf.prototypes import DistanceState


class TestGaussianKernel:
    def test_zero_distance(self):
        assert gaussian_kernel(0.0, 1.0) == 1.0

    def test_known_values(self):
        assert gaussian_kernel(2.0, 1.0) == pytest.approx(math.exp(-1.0))
        assert gaussian_kernel(1.25, 0.5) == pytest.approx(math.exp(-2.5))

    def test_nonpositive_sigma(self):
        with pytest.raises(NonpositiveSigmaError):
            gaussian_kernel(1.0, 0.0)

    def test_range_and_monotonicity(self):
        d = np.linspace(0, 50, 200)
        h = gaussian_kernel(d, 1.3)
        assert np.all(h > 0) and np.all(h <= 1)
        assert np.all(np.diff(h) < 0)


class TestForward:
    def test_single_prototype_identity(self):
        params = NetworkParams(w0=[0.0], W=[[1.0]], sigma=[1.0])
        resp = forward(DistanceState(np.zeros((1, 4))), params)
        np.testing.assert_allclose(resp.output, 1.0)

    def test_bias_only(self):
        params = NetworkParams(w0=[0.7, -0.2], W=np.zeros((3, 2)), sigma=[1, 1, 1])
        resp = forward(DistanceState(np.random.default_rng(0).uniform(0, 4, (3, 5))), params)
        np.testing.assert_allclose(resp.output, np.tile([0.7, -0.2], (5, 1)))

    def test_known_value(self):
        params = NetworkParams(w0=[0.5], W=[[2.0]], sigma=[1.0])
        resp = forward(DistanceState([[2.0]]), params)
        assert resp.output[0, 0] == pytest.approx(0.5 + 2.0 * math.exp(-1.0))

    def test_dimension_mismatch(self):
        params = NetworkParams(w0=[0.0], W=[[1.0]], sigma=[1.0])
        with pytest.raises(DimensionMismatchError):
            forward(DistanceState(np.zeros((2, 4))), params)

    def test_linear_in_output_weights(self):
        rng = np.random.default_rng(1)
        ds = DistanceState(rng.uniform(0, 5, (3, 6)))
        sigma = rng.uniform(0.5, 2.0, 3)
        pa = NetworkParams(w0=rng.normal(size=2), W=rng.normal(size=(3, 2)), sigma=sigma)
        pb = NetworkParams(w0=rng.normal(size=2), W=rng.normal(size=(3, 2)), sigma=sigma)
        lam = 0.37
        mixed = NetworkParams(
            w0=lam * pa.w0 + (1 - lam) * pb.w0,
            W=lam * pa.W + (1 - lam) * pb.W,
            sigma=sigma,
        )
        np.testing.assert_allclose(
            forward(ds, mixed).output,
            lam * forward(ds, pa).output + (1 - lam) * forward(ds, pb).output,
            atol=1e-12,
        )

    def test_matches_vector_side_forward(self):
        # same parameters, distances from the graph identity vs direct
        # squared norms: responses must coincide
        rng = np.random.default_rng(7)
        X = rng.standard_normal((12, 3))
        U = rng.uniform(0.1, 1.0, (4, 12))
        V = U / U.sum(axis=1, keepdims=True)
        R = from_features(X)
        D_rel = prototype_distances(R, V)
        P = V @ X
        D_vec = ((X[None, :, :] - P[:, None, :]) ** 2).sum(-1)
        params = NetworkParams(
            w0=rng.normal(size=2), W=rng.normal(size=(4, 2)), sigma=rng.uniform(0.5, 2, 4)
        )
        out_rel = forward(DistanceState(D_rel), params).output
        out_vec = forward(DistanceState(D_vec), params).output
        rel_err = np.abs(out_rel - out_vec) / np.maximum(1.0, np.abs(out_vec))
        assert rel_err.max() <= 1e-10


class TestSse:
    def test_perfect_fit(self):
        params = NetworkParams(w0=[1.0], W=[[0.0]], sigma=[1.0])
        resp = forward(DistanceState(np.zeros((1, 3))), params)
        assert sse(np.ones((3, 1)), resp) == 0.0

    def test_unit_error(self):
        params = NetworkParams(w0=[0.0], W=[[0.0]], sigma=[1.0])
        resp = forward(DistanceState(np.zeros((1, 1))), params)
        assert sse([[1.0]], resp) == 1.0

    def test_two_output_example(self):
        params = NetworkParams(w0=[0.8, 0.3], W=np.zeros((1, 2)), sigma=[1.0])
        resp = forward(DistanceState(np.zeros((1, 1))), params)
        assert sse([[1.0, 0.0]], resp) == pytest.approx(0.13)

    def test_dimension_mismatch(self):
        params = NetworkParams(w0=[0.0], W=[[0.0]], sigma=[1.0])
        resp = forward(DistanceState(np.zeros((1, 2))), params)
        with pytest.raises(DimensionMismatchError):
            sse(np.zeros((3, 1)), resp)


def test_predict_labels_tie_breaks_to_smallest():
    out = np.array([[0.5, 0.5, 0.1], [0.1, 0.9, 0.9]])
    np.testing.assert_array_equal(predict_labels(out), [0, 1])
