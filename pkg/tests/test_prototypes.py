"""Weighted-average prototypes and the node-distance identity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relrbf import (
    from_features,
    make_prototype,
    nearest_medoid,
    prototype_distances,
    relational_distance,
)
from relrbf.errors import (
    DimensionMismatchError,
    EmptySetError,
    UnnormalizedPrototypeError,
    ZeroWeightSumError,
)
from relrbf.prototypes import MEDOID, RelationalPrototype

from conftest import brute_force_distance


class TestRelationalDistance:
    def test_half_half_prototype(self, three_points, three_point_R):
        v = make_prototype([2.0, 2.0, 0.0])
        np.testing.assert_allclose(v.weights, [0.5, 0.5, 0.0])
        d = relational_distance(three_point_R, v)
        expected = brute_force_distance(three_points, v.weights)
        np.testing.assert_allclose(expected, [0.25, 0.25, 1.25], atol=1e-15)
        np.testing.assert_allclose(d, expected, atol=1e-12)

    def test_unit_basis_reduces_to_column(self, three_point_R):
        d = relational_distance(three_point_R, np.array([0.0, 1.0, 0.0]))
        np.testing.assert_allclose(d, three_point_R.values[:, 1], atol=1e-15)
        assert d[1] == 0.0

    def test_centroid_prototype(self, three_points, three_point_R):
        v = np.full(3, 1.0 / 3.0)
        d = relational_distance(three_point_R, v)
        expected = brute_force_distance(three_points, v)
        np.testing.assert_allclose(expected, [2.0 / 9.0, 5.0 / 9.0, 5.0 / 9.0], atol=1e-15)
        np.testing.assert_allclose(d, expected, atol=1e-12)

    def test_dimension_mismatch(self, three_point_R):
        with pytest.raises(DimensionMismatchError):
            relational_distance(three_point_R, np.array([0.5, 0.5]))

    def test_unnormalized_rejected(self, three_point_R):
        with pytest.raises(UnnormalizedPrototypeError):
            relational_distance(three_point_R, np.array([0.5, 0.5, 0.5]))

    @given(st.integers(0, 100_000))
    @settings(max_examples=50, deadline=None)
    def test_identity_against_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 51))
        d = int(rng.integers(1, 9))
        X = rng.standard_normal((n, d))
        u = rng.uniform(0.05, 1.0, n)
        v = u / u.sum()
        rel = relational_distance(from_features(X), v)
        brute = brute_force_distance(X, v)
        scale = np.maximum(1.0, np.einsum("ij,ij->i", X, X))
        assert np.max(np.abs(rel - brute) / scale) <= 1e-10

    @given(st.integers(0, 100_000))
    @settings(max_examples=25, deadline=None)
    def test_translation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((10, 3))
        shift = rng.standard_normal(3) * 5
        u = rng.uniform(0.1, 1.0, 10)
        v = u / u.sum()
        d1 = relational_distance(from_features(X), v)
        d2 = relational_distance(from_features(X + shift), v)
        np.testing.assert_allclose(d1, d2, atol=1e-9)

    def test_matrix_form_matches_single(self, three_point_R):
        V = np.array([[0.5, 0.5, 0.0], [0.0, 1.0, 0.0]])
        D = prototype_distances(three_point_R, V)
        for j in range(2):
            np.testing.assert_array_equal(D[j], relational_distance(three_point_R, V[j]))

    def test_weight_gradient_of_distance(self):
        # d_i(w) = (Rw)_i - w^T R w / 2 has dd_i/dw_m = R[i, m] - (Rw)_m;
        # central differences on the raw quadratic must agree
        rng = np.random.default_rng(21)
        X = rng.standard_normal((12, 3))
        R = from_features(X)
        u = rng.uniform(0.1, 1.0, 12)
        w = u / u.sum()
        delta = 1e-6
        Rw = R.values @ w
        for m in range(12):
            wp, wm = w.copy(), w.copy()
            wp[m] += delta
            wm[m] -= delta
            num = (
                prototype_distances(R, wp[None, :])[0]
                - prototype_distances(R, wm[None, :])[0]
            ) / (2 * delta)
            analytic = R.values[:, m] - Rw[m]
            assert np.max(np.abs(num - analytic) / np.maximum(1.0, np.abs(analytic))) <= 1e-6


class TestMakePrototype:
    def test_normalization(self):
        p = make_prototype([2.0, 2.0, 0.0])
        np.testing.assert_allclose(p.weights, [0.5, 0.5, 0.0])
        assert p.weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_class_indicator_is_class_mean(self, three_points, three_point_R):
        p = make_prototype([1.0, 1.0, 0.0])
        d = relational_distance(three_point_R, p)
        class_mean = three_points[:2].mean(axis=0)
        expected = ((three_points - class_mean) ** 2).sum(axis=1)
        np.testing.assert_allclose(d, expected, atol=1e-12)

    def test_zero_sum_rejected(self):
        with pytest.raises(ZeroWeightSumError):
            make_prototype([1.0, -1.0, 0.0])

    def test_negative_weights_warn(self):
        with pytest.warns(UserWarning, match="negative"):
            make_prototype([2.0, -0.5, 0.0])

    def test_medoid_mode_requires_basis_vector(self):
        p = make_prototype([0.0, 3.0, 0.0], mode=MEDOID)
        assert p.medoid_index == 1
        with pytest.raises(ValueError):
            RelationalPrototype(np.array([0.5, 0.5, 0.0]), mode=MEDOID)


class TestNearestMedoid:
    def test_three_point_whole_set(self, three_point_R):
        # row sums 2, 3, 3: the right-angle corner wins
        assert nearest_medoid(three_point_R, {0, 1, 2}) == 0

    def test_singleton(self, three_point_R):
        assert nearest_medoid(three_point_R, {1}) == 1

    def test_tie_breaks_to_smaller_index(self, three_point_R):
        assert nearest_medoid(three_point_R, {1, 2}) == 1

    def test_empty_set(self, three_point_R):
        with pytest.raises(EmptySetError):
            nearest_medoid(three_point_R, set())
