"""Adjacency-matrix representation of weighted graphs and realizability checks.

An adjacency matrix here is a symmetric, non-negative, zero-diagonal matrix
of pairwise dissimilarities.  Entries are treated as *squared* distances
between (possibly latent) feature vectors: a matrix is realizable by a point
configuration exactly when its double-centered form is positive
semi-definite, which is the condition gating every vector/graph equivalence
guarantee in this package.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    AsymmetryError,
    NegativeEntryError,
    NonFiniteError,
    NonSquareError,
    NonzeroDiagonalError,
    ParseError,
)

# Absolute asymmetry tolerated on input before raising (serialization slop).
SYMMETRY_TOL = 1e-12
# Relative PSD slack used by the embeddability test.
DEFAULT_PSD_TOL = 1e-8


@dataclass(frozen=True)
class AdjacencyMatrix:
    """Symmetric, non-negative, zero-diagonal matrix of pairwise dissimilarities.

    Instances are immutable: the entry array is copied on construction and
    marked read-only, so a matrix can be shared freely across consumers.
    """

    values: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.values, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NonSquareError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise NonFiniteError("adjacency matrix contains non-finite entries")
        asym = np.max(np.abs(a - a.T)) if a.size else 0.0
        if asym > SYMMETRY_TOL:
            raise AsymmetryError(f"asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.0e}")
        a = (a + a.T) / 2.0
        diag = np.abs(np.diagonal(a))
        if diag.size and diag.max() > SYMMETRY_TOL:
            raise NonzeroDiagonalError(f"max |diagonal| = {diag.max():.3e}")
        np.fill_diagonal(a, 0.0)
        if a.size and a.min() < 0.0:
            raise NegativeEntryError(f"negative dissimilarity {a.min():.3e}")
        a.setflags(write=False)
        object.__setattr__(self, "values", a)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class FeatureMatrix:
    """Plain n x d matrix of vector observations (rows are observations)."""

    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.values, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise NonSquareError(f"expected a 2-d feature array, got ndim={x.ndim}")
        if not np.all(np.isfinite(x)):
            raise NonFiniteError("feature matrix contains non-finite entries")
        x = x.copy()
        x.setflags(write=False)
        object.__setattr__(self, "values", x)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RealizabilityReport:
    """Structural and spectral diagnostics for an adjacency matrix.

    ``euclidean_embeddable`` is the operative realizability test: the
    double-centered matrix -J R J / 2 must be PSD up to tolerance.  The
    square-root triangle inequality (``sqrt_metric_ok``) is reported for
    reference but is neither necessary nor sufficient for embeddability of
    squared distances, so it never gates anything.
    """

    is_symmetric: bool
    is_nonnegative: bool
    is_antireflexive: bool
    sqrt_metric_ok: bool
    euclidean_embeddable: bool
    min_eigenvalue: float

    @property
    def all_structural(self) -> bool:
        return self.is_symmetric and self.is_nonnegative and self.is_antireflexive


def double_centered(values: np.ndarray) -> np.ndarray:
    """Return -J A J / 2 with J = I - (1/n) 11^T (the latent Gram matrix)."""
    a = np.asarray(values, dtype=float)
    n = a.shape[0]
    row_mean = a.mean(axis=1, keepdims=True)
    col_mean = a.mean(axis=0, keepdims=True)
    return -0.5 * (a - row_mean - col_mean + a.mean())


def validate(R, tol_psd: float = DEFAULT_PSD_TOL) -> RealizabilityReport:
    """Check structural invariants and embeddability of a dissimilarity matrix.

    Parameters
    ----------
    R : AdjacencyMatrix or array_like
        Square matrix of pairwise dissimilarities (squared-distance scale).
    tol_psd : float
        Relative slack for the PSD test: the matrix is embeddable when the
        smallest eigenvalue of its double-centered form is at least
        ``-tol_psd * max(|eigenvalues|)``.

    Returns
    -------
    RealizabilityReport
    """
    a = R.values if isinstance(R, AdjacencyMatrix) else np.asarray(R, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError("matrix contains non-finite entries")

    scale = float(np.max(np.abs(a))) if a.size else 0.0
    tol = SYMMETRY_TOL * max(1.0, scale)
    is_symmetric = bool(np.max(np.abs(a - a.T)) <= tol) if a.size else True
    is_nonnegative = bool(a.min() >= -tol) if a.size else True
    is_antireflexive = bool(np.max(np.abs(np.diagonal(a))) <= tol) if a.size else True

    sym = (a + a.T) / 2.0
    sqrt_metric_ok = _sqrt_triangle_ok(sym)

    eigvals = np.linalg.eigvalsh(double_centered(sym))
    min_eig = float(eigvals.min())
    thresh = tol_psd * float(np.max(np.abs(eigvals)))
    euclidean_embeddable = bool(
        is_symmetric and is_nonnegative and is_antireflexive and min_eig >= -thresh
    )
    return RealizabilityReport(
        is_symmetric=is_symmetric,
        is_nonnegative=is_nonnegative,
        is_antireflexive=is_antireflexive,
        sqrt_metric_ok=sqrt_metric_ok,
        euclidean_embeddable=euclidean_embeddable,
        min_eigenvalue=min_eig,
    )


def _sqrt_triangle_ok(a: np.ndarray) -> bool:
    """Triangle inequality on sqrt(entries), all triples, small float slack."""
    s = np.sqrt(np.clip(a, 0.0, None))
    n = s.shape[0]
    slack = 1e-12 * max(1.0, float(s.max())) if n else 0.0
    for j in range(n):
        if np.any(s > s[:, j : j + 1] + s[j : j + 1, :] + slack):
            return False
    return True


def from_features(X, standardize: bool = False) -> AdjacencyMatrix:
    """Build the squared-Euclidean dissimilarity matrix of a point set.

    Parameters
    ----------
    X : FeatureMatrix or array_like, shape (n, d)
    standardize : bool
        Z-score every column (population std) before computing distances.
        Constant columns are dropped with a warning.

    Returns
    -------
    AdjacencyMatrix
        r[p, q] = ||x_p - x_q||^2 after optional standardization.
    """
    x = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 2:
        raise ValueError("need at least two observations")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("feature matrix contains non-finite entries")
    if standardize:
        mean = x.mean(axis=0)
        std = x.std(axis=0)
        keep = std > 1e-12 * (np.abs(mean) + 1.0)
        if not np.all(keep):
            dropped = np.flatnonzero(~keep)
            warnings.warn(
                f"dropping {dropped.size} zero-variance feature column(s): "
                f"{dropped.tolist()}",
                UserWarning,
                stacklevel=2,
            )
        x = (x[:, keep] - mean[keep]) / std[keep]
    if x.shape[1] == 0:
        r = np.zeros((x.shape[0], x.shape[0]))
    else:
        r = cdist(x, x, metric="sqeuclidean")
    r = (r + r.T) / 2.0
    np.fill_diagonal(r, 0.0)
    return AdjacencyMatrix(r)


def write_adjacency(R: AdjacencyMatrix, path) -> None:
    """Write an adjacency matrix as headerless CSV at full float precision."""
    np.savetxt(path, R.values, delimiter=",", fmt="%.17g")


def read_adjacency(path) -> AdjacencyMatrix:
    """Read a headerless CSV adjacency matrix.

    Asymmetry up to 1e-12 is silently averaged away; anything larger is an
    error.  Negative entries and nonzero diagonals are rejected.
    """
    try:
        a = np.loadtxt(path, delimiter=",", ndmin=2)
    except (ValueError, OSError) as exc:
        raise ParseError(f"cannot parse adjacency CSV {path}: {exc}") from exc
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParseError(f"{path}: expected square table, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ParseError(f"{path}: non-finite entries")
    asym = float(np.max(np.abs(a - a.T)))
    if asym > SYMMETRY_TOL:
        raise AsymmetryError(f"{path}: asymmetry {asym:.3e} exceeds 1e-12")
    if a.min() < 0.0:
        raise NegativeEntryError(f"{path}: negative entry {a.min():.3e}")
    return AdjacencyMatrix(a)


def read_features(path) -> FeatureMatrix:
    """Read a feature CSV: one observation per row, optional '#' header."""
    try:
        x = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    except (ValueError, OSError) as exc:
        raise ParseError(f"cannot parse feature CSV {path}: {exc}") from exc
    return FeatureMatrix(x)
