"""Shared data containers and label/membership conversions."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class ClusteringError(ValueError):
    """Raised when an algorithm cannot produce a valid clustering."""


class ConstantFeatureError(ValueError):
    """A feature has zero dispersion and cannot be normalised."""

    def __init__(self, column, method):
        self.column = column
        self.method = method
        super().__init__(f"feature {column!r} is constant (zero {method})")


class TooFewClustersError(ClusteringError):
    """Anomalous-pattern extraction found fewer clusters than requested."""

    def __init__(self, found, k, stage=None):
        self.found = found
        self.k = k
        self.stage = stage
        where = f"[{stage}] " if stage else ""
        super().__init__(f"{where}found {found} anomalous clusters, need k={k}")


def as_matrix(X) -> np.ndarray:
    """Return X as a finite 2-D float array, rejecting NaN/Inf and empty input."""
    if isinstance(X, DataMatrix):
        return X.values
    A = np.asarray(X, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a non-empty n x m matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("data contains non-finite values")
    return A


@dataclass(frozen=True)
class DataMatrix:
    values: np.ndarray
    feature_names: Optional[tuple] = None

    def __post_init__(self):
        A = np.array(self.values, dtype=float)
        if A.ndim == 1:
            A = A[:, None]
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise ValueError(f"expected a non-empty n x m matrix, got shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("data contains non-finite values")
        A.setflags(write=False)
        object.__setattr__(self, "values", A)
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != A.shape[1]:
                raise ValueError(f"{len(names)} feature names for {A.shape[1]} columns")
            object.__setattr__(self, "feature_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def names(self) -> tuple:
        if self.feature_names is None:
            return tuple(f"x{j + 1}" for j in range(self.m))
        return self.feature_names


@dataclass(frozen=True)
class LabeledDataset:
    """A data matrix with optional ground-truth labels and free-form metadata.

    ``labels`` may be ``None`` for unlabeled inputs (e.g. a CSV loaded without
    a label column).  When present it must have one entry per row.
    """

    data: DataMatrix
    labels: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not isinstance(self.data, DataMatrix):
            object.__setattr__(self, "data", DataMatrix(self.data))
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.ndim != 1 or len(y) != self.data.n:
                raise ValueError(f"{len(y)} labels for {self.data.n} entities")
            y = y.copy()
            y.setflags(write=False)
            object.__setattr__(self, "labels", y)

    @property
    def X(self) -> np.ndarray:
        return self.data.values

    @property
    def n_classes(self) -> int:
        return 0 if self.labels is None else len(np.unique(self.labels))


def encode_labels(labels: Sequence) -> np.ndarray:
    """Map arbitrary identifiers to 0-based codes in first-appearance order."""
    y = list(labels)
    if not y:
        raise ValueError("labels must be non-empty")
    codes = {}
    return np.array([codes.setdefault(v, len(codes)) for v in y], dtype=np.intp)


@dataclass(frozen=True)
class Membership:
    """Crisp partition stored as 0-based cluster codes.

    ``u`` materialises the n x k binary matrix on demand.
    """

    codes: np.ndarray
    k: int

    def __post_init__(self):
        c = np.asarray(self.codes, dtype=np.intp)
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("membership needs at least one entity")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if c.min() < 0 or c.max() >= self.k:
            raise ValueError("cluster code out of range")
        if np.any(np.bincount(c, minlength=self.k) == 0):
            raise ValueError("membership has an empty cluster")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "codes", c)

    @property
    def u(self) -> np.ndarray:
        U = np.zeros((len(self.codes), self.k), dtype=np.int8)
        U[np.arange(len(self.codes)), self.codes] = 1
        return U

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.codes, minlength=self.k)

    @classmethod
    def from_matrix(cls, u) -> "Membership":
        return cls(labels_from_membership(u) - 1, np.asarray(u).shape[1])


def membership_from_labels(labels: Sequence) -> np.ndarray:
    """Binary n x k matrix with columns in first-appearance order of ``labels``."""
    codes = encode_labels(labels)
    return Membership(codes, int(codes.max()) + 1).u


def labels_from_membership(u) -> np.ndarray:
    """1-based cluster identifiers, one per row of the binary matrix ``u``.

    Columns without members are allowed here; they simply never appear.
    """
    U = np.asarray(u)
    if U.ndim != 2:
        raise ValueError("membership matrix must be 2-D")
    row_sums = (U != 0).sum(axis=1)
    bad = np.flatnonzero(row_sums != 1)
    if len(bad):
        raise ValueError(f"row {bad[0]} has {row_sums[bad[0]]} assignments, expected 1")
    return np.argmax(U != 0, axis=1) + 1


@dataclass(frozen=True)
class ClusteringOutcome:
    """Result of one clustering run.

    ``labels`` are 0-based codes; ``weights`` is uniform for unweighted
    algorithms.  ``criterion`` is the objective the algorithm minimised
    (sum of squares for k-means, the weighted Minkowski criterion otherwise)
    and ``history`` its value after each full iteration.
    """

    labels: np.ndarray
    centroids: np.ndarray
    weights: np.ndarray
    criterion: float
    iterations: int
    converged: bool = True
    p: Optional[float] = None
    history: tuple = ()
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def membership(self) -> Membership:
        return Membership(self.labels, self.k)
