"""Dataset ingestion: UCI-format loaders, synthetic generators, graph building.

Every vector dataset is turned into a graph by the standardized squared
Euclidean distance between all observation pairs; an optional entrywise power
(> 1) produces matrices with no exact vector realization, for exercising the
non-realizable code paths.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import MalformedFileError, UnknownKindError
from .graph import AdjacencyMatrix, FeatureMatrix, from_features, read_adjacency

KINDS = ("wdbc", "voting", "heart-cleveland", "adjacency-csv", "synthetic-blobs")


@dataclass
class IngestResult:
    """Graph, one-hot targets, and provenance for one ingested dataset."""

    R: AdjacencyMatrix
    Y: np.ndarray | None
    labels: np.ndarray | None
    class_names: list
    X: np.ndarray | None
    kind: str


def one_hot(labels, g: int | None = None) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    if g is None:
        g = int(labels.max()) + 1
    return np.eye(g)[labels]


def load_wdbc(path):
    """Diagnostic breast-mass dataset: ``id,diagnosis,30 real features``.

    Diagnosis codes: B (benign, class 0) and M (malignant, class 1).
    """
    features, labels = [], []
    with open(path, newline="") as fh:
        for ln, row in enumerate(csv.reader(fh), 1):
            if not row:
                continue
            if len(row) != 32:
                raise MalformedFileError(f"{path}:{ln}: expected 32 fields, got {len(row)}")
            code = row[1].strip().upper()
            if code not in ("B", "M"):
                raise MalformedFileError(f"{path}:{ln}: bad diagnosis {row[1]!r}")
            labels.append(0 if code == "B" else 1)
            try:
                features.append([float(v) for v in row[2:]])
            except ValueError as exc:
                raise MalformedFileError(f"{path}:{ln}: {exc}") from exc
    if not features:
        raise MalformedFileError(f"{path}: no data rows")
    return np.array(features), np.array(labels), ["benign", "malignant"]


VOTE_CODES = {"y": 1.0, "n": -1.0, "?": 0.0}


def load_voting(path):
    """Congressional voting records: ``party,vote1,...,vote16``.

    Votes are trinary: yea (+1), nay (-1), position unknown (0).  Party codes
    democrat (class 0) and republican (class 1).
    """
    features, labels = [], []
    with open(path, newline="") as fh:
        for ln, row in enumerate(csv.reader(fh), 1):
            if not row:
                continue
            if len(row) != 17:
                raise MalformedFileError(f"{path}:{ln}: expected 17 fields, got {len(row)}")
            party = row[0].strip().lower()
            if party not in ("democrat", "republican"):
                raise MalformedFileError(f"{path}:{ln}: bad party {row[0]!r}")
            labels.append(0 if party == "democrat" else 1)
            try:
                features.append([VOTE_CODES[v.strip().lower()] for v in row[1:]])
            except KeyError as exc:
                raise MalformedFileError(f"{path}:{ln}: bad vote code {exc}") from exc
    if not features:
        raise MalformedFileError(f"{path}: no data rows")
    return np.array(features), np.array(labels), ["democrat", "republican"]


def load_heart_cleveland(path):
    """Cleveland heart-disease records: 13 features plus a 0-4 severity code.

    Missing values ('?') are imputed by the column median; the target is
    binarized to absence (0) vs presence (severity >= 1, class 1).
    """
    rows, labels = [], []
    with open(path, newline="") as fh:
        for ln, row in enumerate(csv.reader(fh), 1):
            if not row:
                continue
            if len(row) != 14:
                raise MalformedFileError(f"{path}:{ln}: expected 14 fields, got {len(row)}")
            vals = []
            for v in row[:13]:
                v = v.strip()
                vals.append(np.nan if v in ("?", "") else float(v))
            rows.append(vals)
            try:
                severity = float(row[13])
            except ValueError as exc:
                raise MalformedFileError(f"{path}:{ln}: bad target {row[13]!r}") from exc
            labels.append(0 if severity == 0 else 1)
    if not rows:
        raise MalformedFileError(f"{path}: no data rows")
    X = np.array(rows)
    for j in range(X.shape[1]):
        col = X[:, j]
        missing = np.isnan(col)
        if missing.any():
            col[missing] = np.median(col[~missing])
    return X, np.array(labels), ["absent", "present"]


def synthetic_blobs(
    n: int,
    classes: int = 2,
    sep: float = 10.0,
    dim: int = 2,
    noise: float = 1.0,
    seed: int = 0,
):
    """Balanced isotropic Gaussian clusters with means on a circle of radius
    ``sep`` in the first two dimensions."""
    rng = np.random.default_rng(seed)
    counts = [n // classes + (1 if k < n % classes else 0) for k in range(classes)]
    X_parts, labels = [], []
    for k, count in enumerate(counts):
        angle = 2.0 * np.pi * k / classes
        mean = np.zeros(dim)
        mean[0] = sep * np.cos(angle)
        if dim > 1:
            mean[1] = sep * np.sin(angle)
        X_parts.append(mean + noise * rng.standard_normal((count, dim)))
        labels.extend([k] * count)
    return np.vstack(X_parts), np.array(labels)


def read_labels_csv(path) -> np.ndarray:
    try:
        labels = np.loadtxt(path, dtype=int, ndmin=1)
    except (ValueError, OSError) as exc:
        raise MalformedFileError(f"cannot parse labels file {path}: {exc}") from exc
    return labels


def apply_power(R: AdjacencyMatrix, power: float) -> AdjacencyMatrix:
    """Entrywise power of the dissimilarities (power > 1 is generally not
    realizable by any vector configuration)."""
    if power == 1.0:
        return R
    if power <= 0:
        raise ValueError("power must be positive")
    return AdjacencyMatrix(R.values**power)


def ingest(
    kind: str,
    path=None,
    standardize: bool = True,
    power: float = 1.0,
    labels_path=None,
    blob_options: dict | None = None,
) -> IngestResult:
    """Build (adjacency matrix, one-hot targets) for a named dataset kind.

    File-backed kinds require ``path``.  ``adjacency-csv`` reads the graph
    directly (labels optional, via ``labels_path``); all vector kinds build
    the graph with the standardized squared Euclidean distance.
    """
    if kind not in KINDS:
        raise UnknownKindError(f"unknown dataset kind {kind!r}; expected one of {KINDS}")

    X = None
    class_names: list = []
    labels = None
    if kind == "adjacency-csv":
        if path is None:
            raise MalformedFileError("adjacency-csv requires a path")
        R = read_adjacency(path)
        if labels_path is not None:
            labels = read_labels_csv(labels_path)
            if labels.size != R.n:
                raise MalformedFileError(
                    f"labels count {labels.size} != matrix size {R.n}"
                )
            class_names = [str(c) for c in range(int(labels.max()) + 1)]
    else:
        if kind == "synthetic-blobs":
            opts = dict(blob_options or {})
            X, labels = synthetic_blobs(
                n=int(opts.get("n", 60)),
                classes=int(opts.get("classes", 2)),
                sep=float(opts.get("sep", 10.0)),
                dim=int(opts.get("dim", 2)),
                noise=float(opts.get("noise", 1.0)),
                seed=int(opts.get("seed", 0)),
            )
            class_names = [f"class{k}" for k in range(int(labels.max()) + 1)]
        elif kind == "wdbc":
            X, labels, class_names = load_wdbc(path)
        elif kind == "voting":
            X, labels, class_names = load_voting(path)
        elif kind == "heart-cleveland":
            X, labels, class_names = load_heart_cleveland(path)
        R = from_features(FeatureMatrix(X), standardize=standardize)

    R = apply_power(R, power)
    Y = one_hot(labels, len(class_names) or None) if labels is not None else None
    return IngestResult(R=R, Y=Y, labels=labels, class_names=class_names, X=X, kind=kind)
