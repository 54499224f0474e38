import os
from pathlib import Path

import numpy as np
import pytest

from relrbf import AdjacencyMatrix, from_features


@pytest.fixture
def three_points():
    """Unit right triangle: the worked example used throughout the suite."""
    return np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@pytest.fixture
def three_point_R(three_points):
    # squared distances: r01 = 1, r02 = 1, r12 = 2
    return from_features(three_points)


@pytest.fixture
def nonrealizable_R():
    """4-object matrix whose double-centered form is indefinite."""
    R = AdjacencyMatrix(
        [[0, 1, 1, 9], [1, 0, 1, 1], [1, 1, 0, 1], [9, 1, 1, 0]]
    )
    return R


def brute_force_distance(X, weights):
    """Independent oracle: squared distance from each row of X to the
    weighted average sum_i weights[i] X[i] (weights already normalized)."""
    X = np.asarray(X, dtype=float)
    w = np.asarray(weights, dtype=float)
    latent = w @ X
    return np.array([float((x - latent) @ (x - latent)) for x in X])


@pytest.fixture(scope="session")
def wdbc_file(tmp_path_factory):
    """The diagnostic breast-mass dataset written in its canonical file
    layout (id, B/M code, 30 features per line).  scikit-learn ships the
    genuine data, so this reproduces the original file's content."""
    sklearn_datasets = pytest.importorskip("sklearn.datasets")
    bunch = sklearn_datasets.load_breast_cancer()
    path = tmp_path_factory.mktemp("uci") / "wdbc.data"
    with open(path, "w") as fh:
        for i, (row, target) in enumerate(zip(bunch.data, bunch.target)):
            code = "M" if target == 0 else "B"  # sklearn: 0 = malignant
            values = ",".join(repr(float(v)) for v in row)
            fh.write(f"{842302 + i},{code},{values}\n")
    return path


def find_dataset_file(*names):
    """Locate a user-supplied dataset file under $RELRBF_DATA_DIR or ./data."""
    roots = []
    if os.environ.get("RELRBF_DATA_DIR"):
        roots.append(Path(os.environ["RELRBF_DATA_DIR"]))
    roots.append(Path(__file__).resolve().parent.parent / "data")
    for root in roots:
        for name in names:
            candidate = root / name
            if candidate.exists():
                return candidate
    return None
