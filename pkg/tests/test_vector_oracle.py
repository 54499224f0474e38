"""Vector-space reference trainer and the lock-step equivalence check."""

import numpy as np
import pytest

from relrbf import from_features
from relrbf.datasets import one_hot, synthetic_blobs
from relrbf.engine import TrainConfig
from relrbf.errors import DimensionMismatchError
from relrbf.initialization import init_params, split as make_split
from relrbf.training import train
from relrbf.vector_oracle import (
    VectorPrototype,
    duality_check,
    vector_distance,
    vector_kmeans,
    vector_train,
)


class TestVectorDistance:
    def test_coincident(self):
        assert vector_distance([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_known_value(self):
        assert vector_distance([0.0, 1.0], [0.5, 0.0]) == pytest.approx(1.25)

    def test_centroid_case(self):
        assert vector_distance([1.0, 0.0], [1 / 3, 1 / 3]) == pytest.approx(5.0 / 9.0)

    def test_prototype_wrapper(self):
        assert vector_distance([0.0, 0.0], VectorPrototype([3.0, 4.0])) == pytest.approx(25.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            vector_distance([1.0], [1.0, 2.0])


class TestVectorKmeans:
    def test_matches_relational_sequence(self):
        from relrbf.initialization import relational_kmeans

        rng = np.random.default_rng(3)
        X = rng.standard_normal((25, 3)) + rng.integers(0, 2, (25, 1)) * 4.0
        init = rng.integers(0, 3, 25)
        _, _, h_rel = relational_kmeans(
            from_features(X), 3, init_assignment=init, return_history=True
        )
        _, _, h_vec = vector_kmeans(X, 3, init_assignment=init, return_history=True)
        assert len(h_rel) == len(h_vec)
        for a, b in zip(h_rel, h_vec):
            np.testing.assert_array_equal(a, b)

    def test_centroids_are_cluster_means(self):
        X = np.array([[0.0, 0.0], [1.0, 0.0], [10.0, 10.0], [11.0, 10.0]])
        partition, centroids = vector_kmeans(X, 2, init_assignment=[0, 0, 1, 1])
        for j in range(2):
            members = np.flatnonzero(partition.assignment == j)
            np.testing.assert_allclose(centroids[j], X[members].mean(axis=0))


class TestVectorTrain:
    def test_zero_epoch_run_returns_init_draw(self):
        X, y = synthetic_blobs(20, classes=2, sep=4.0, seed=0)
        Y = one_hot(y, 2)
        cfg = TrainConfig(c_init=2, seed=9, max_epochs=0)
        res = vector_train(X, Y, cfg)
        # replay the engine's draw order: split, partition, then parameters
        rng = np.random.default_rng(9)
        si = make_split(20, rng=rng)
        rng.integers(0, 2, size=si.train.size)
        expected = init_params(2, 2, cfg, rng=rng)
        np.testing.assert_array_equal(res.params.w0, expected.w0)
        np.testing.assert_array_equal(res.params.W, expected.W)
        np.testing.assert_array_equal(res.params.sigma, expected.sigma)

    def test_rejects_medoid_mode(self):
        X, y = synthetic_blobs(20, classes=2, sep=4.0, seed=0)
        with pytest.raises(ValueError):
            vector_train(X, one_hot(y, 2), TrainConfig(c_init=2, prototype_mode="medoid"))

    def test_same_sse_trajectory_as_graph_trainer(self, three_points):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((30, 4))
        Y = one_hot(rng.integers(0, 2, 30), 2)
        cfg = TrainConfig(c_init=2, c_max=4, seed=5, max_epochs=25)
        g = train(from_features(X), Y, cfg)
        v = vector_train(X, Y, cfg)
        assert g.metrics.epochs == v.metrics.epochs
        np.testing.assert_allclose(g.metrics.sse_train, v.metrics.sse_train, atol=1e-8)
        np.testing.assert_allclose(g.metrics.sse_val, v.metrics.sse_val, atol=1e-8)

    def test_constant_targets_same_solution_as_graph(self):
        X, y = synthetic_blobs(20, classes=2, sep=4.0, seed=4)
        Y = np.tile([1.0, 0.0], (20, 1))
        cfg = TrainConfig(c_init=2, seed=2, max_epochs=120)
        g = train(from_features(X), Y, cfg)
        v = vector_train(X, Y, cfg)
        np.testing.assert_allclose(g.params.w0, v.params.w0, atol=1e-8)
        np.testing.assert_allclose(g.params.W, v.params.W, atol=1e-8)
        np.testing.assert_allclose(g.params.sigma, v.params.sigma, atol=1e-8)


class TestDualityCheck:
    def test_random_instance_passes(self):
        X = np.random.default_rng(17).standard_normal((40, 5))
        report = duality_check(X=X, config=TrainConfig(c_init=3, c_max=5, seed=7), epochs=20)
        assert report.passed
        assert report.epochs == 20
        assert report.max_deviation <= 1e-8

    def test_duplicated_points_benign(self):
        rng = np.random.default_rng(23)
        X = rng.standard_normal((15, 3))
        X = np.vstack([X, X[:5]])
        report = duality_check(X=X, config=TrainConfig(c_init=2, seed=1), epochs=15)
        assert report.passed

    def test_nonrealizable_matrix_flags_no_oracle(self, nonrealizable_R):
        report = duality_check(R=nonrealizable_R, config=TrainConfig(c_init=2, seed=0))
        assert report.no_oracle
        assert report.passed is None
        assert "no oracle" in report.message

    def test_realizable_matrix_direct(self, three_points):
        rng = np.random.default_rng(31)
        X = rng.standard_normal((24, 3))
        R = from_features(X)
        report = duality_check(R=R, config=TrainConfig(c_init=2, seed=3), epochs=10)
        assert report.passed

    def test_requires_exactly_one_input(self, three_point_R, three_points):
        with pytest.raises(ValueError):
            duality_check(X=three_points, R=three_point_R)
        with pytest.raises(ValueError):
            duality_check()
