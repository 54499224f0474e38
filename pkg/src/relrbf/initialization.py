"""Prototype initialization (relational k-means), parameter draws, data splits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidClusterCountError, TooFewSamplesError
from .graph import AdjacencyMatrix
from .prototypes import FREE, MEDOID, RelationalPrototype, _distances, nearest_medoid


@dataclass(frozen=True)
class Partition:
    """Cluster assignment over n objects; every cluster index is occupied."""

    assignment: np.ndarray
    c: int

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=int).copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    def members(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == j)


@dataclass(frozen=True)
class SplitIndices:
    """Disjoint train/test/validation index sets covering all observations."""

    train: np.ndarray
    test: np.ndarray
    val: np.ndarray

    def __post_init__(self):
        for name in ("train", "test", "val"):
            a = np.asarray(getattr(self, name), dtype=int).copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    @property
    def n(self) -> int:
        return self.train.size + self.test.size + self.val.size


def _as_rng(seed=None, rng=None) -> np.random.Generator:
    if rng is not None:
        return rng
    return np.random.default_rng(seed)


def _ensure_nonempty(assignment: np.ndarray, c: int) -> np.ndarray:
    """Index-based repair for a fresh random partition (no distances yet)."""
    assignment = assignment.copy()
    for j in range(c):
        if not np.any(assignment == j):
            counts = np.bincount(assignment, minlength=c)
            donor = int(np.argmax(counts))
            # take the largest-index member of the largest cluster
            member = int(np.flatnonzero(assignment == donor)[-1])
            assignment[member] = j
    return assignment


def _repair_empty(assignment: np.ndarray, D: np.ndarray, c: int) -> np.ndarray:
    """Fill empty clusters by stealing the observation farthest from its prototype.

    Only observations whose cluster keeps >= 2 members are eligible, so the
    repair never empties another cluster.  Ties break to the smallest index.
    """
    assignment = assignment.copy()
    n = assignment.shape[0]
    idx = np.arange(n)
    for j in range(c):
        if np.any(assignment == j):
            continue
        counts = np.bincount(assignment, minlength=c)
        own = D[assignment, idx]
        eligible = counts[assignment] >= 2
        candidates = np.where(eligible, own, -np.inf)
        assignment[int(np.argmax(candidates))] = j
    return assignment


def kmeans_partition_sequence(compute_distances, init_assignment, c, max_iter=500):
    """Generic alternating assignment loop shared by the relational and
    vector k-means variants.

    ``compute_distances(assignment) -> (c, n)`` supplies prototype-to-object
    distances for prototypes derived from the current assignment.  Returns
    the list of successive assignments (repaired, first entry included) and
    the final distance matrix.
    """
    assignment = _ensure_nonempty(np.asarray(init_assignment, dtype=int), c)
    history = [assignment.copy()]
    D = compute_distances(assignment)
    for _ in range(max_iter):
        new_assignment = np.argmin(D, axis=0)
        new_assignment = _repair_empty(new_assignment, D, c)
        if np.array_equal(new_assignment, assignment):
            break
        assignment = new_assignment
        history.append(assignment.copy())
        D = compute_distances(assignment)
    return history, D


def indicator_weights(assignment: np.ndarray, c: int) -> np.ndarray:
    """(c, n) rows of normalized cluster indicators (class-average prototypes)."""
    n = assignment.shape[0]
    V = np.zeros((c, n))
    for j in range(c):
        members = np.flatnonzero(assignment == j)
        V[j, members] = 1.0 / members.size
    return V


def relational_kmeans(
    R: AdjacencyMatrix,
    c: int,
    seed=None,
    rng=None,
    init_assignment=None,
    max_iter: int = 500,
    return_history: bool = False,
):
    """Cluster graph objects with indicator prototypes and node distances.

    Each prototype is the normalized indicator of its cluster, so its
    distance to object i is exactly the squared distance from i to the
    cluster average in any latent realization.  Iterates until the partition
    stops changing.

    Returns (Partition, [RelationalPrototype]); with ``return_history`` the
    full assignment sequence is appended.
    """
    n = R.n
    if not 1 <= c <= n:
        raise InvalidClusterCountError(f"c={c} outside [1, {n}]")
    if init_assignment is None:
        init_assignment = _as_rng(seed, rng).integers(0, c, size=n)

    def compute(assignment):
        return _distances(R.values, indicator_weights(assignment, c))

    history, _ = kmeans_partition_sequence(compute, init_assignment, c, max_iter)
    final = history[-1]
    prototypes = [
        RelationalPrototype(w, mode=FREE) for w in indicator_weights(final, c)
    ]
    partition = Partition(final, c)
    if return_history:
        return partition, prototypes, history
    return partition, prototypes


def medoid_prototypes(
    R: AdjacencyMatrix, partition: Partition
) -> list[RelationalPrototype]:
    """Snap each cluster to its medoid: the unit-basis prototype of the member
    least dissimilar to the rest of the cluster."""
    prototypes = []
    for j in range(partition.c):
        m = nearest_medoid(R, partition.members(j))
        w = np.zeros(R.n)
        w[m] = 1.0
        prototypes.append(RelationalPrototype(w, mode=MEDOID))
    return prototypes


def init_params(c: int, g: int, config, seed=None, rng=None):
    """Draw output weights and bandwidths uniformly from the configured ranges.

    Draw order is fixed (biases, weights, bandwidths) so that two trainers
    sharing a generator consume the stream identically.
    """
    from .network import NetworkParams

    r = _as_rng(seed, rng)
    lo_w, hi_w = config.weight_init_range
    lo_s, hi_s = config.sigma_init_range
    w0 = r.uniform(lo_w, hi_w, size=g)
    W = r.uniform(lo_w, hi_w, size=(c, g))
    sigma = r.uniform(lo_s, hi_s, size=c)
    return NetworkParams(w0=w0, W=W, sigma=sigma)


def split(
    n: int,
    seed=None,
    rng=None,
    labels=None,
    stratify: bool = False,
) -> SplitIndices:
    """Randomly bin 70% of the data for training; split the rest evenly into
    test and validation (odd remainder: the extra observation goes to test).

    With ``stratify=True`` (requires labels) the 70/15/15 proportions are
    applied within each class.
    """
    if n < 10:
        raise TooFewSamplesError(f"need n >= 10 to split, got {n}")
    r = _as_rng(seed, rng)
    if stratify:
        if labels is None:
            raise ValueError("stratified split requires labels")
        labels = np.asarray(labels, dtype=int)
        train_parts, test_parts, val_parts = [], [], []
        for cls in np.unique(labels):
            members = np.flatnonzero(labels == cls)
            perm = members[r.permutation(members.size)]
            tr, te, va = _cut(perm)
            train_parts.append(tr)
            test_parts.append(te)
            val_parts.append(va)
        train = np.concatenate(train_parts)
        test = np.concatenate(test_parts)
        val = np.concatenate(val_parts)
    else:
        perm = r.permutation(n)
        train, test, val = _cut(perm)
    return SplitIndices(np.sort(train), np.sort(test), np.sort(val))


def _cut(perm: np.ndarray):
    n = perm.size
    n_train = int(np.floor(0.7 * n + 0.5))
    rem = n - n_train
    n_test = rem - rem // 2
    return perm[:n_train], perm[n_train : n_train + n_test], perm[n_train + n_test :]
