"""k-means, k-means++, ik-means, mwk-means and imwk-means.

All engines work on plain float arrays and 0-based integer labels and return
a :class:`~mwkrescale.core.ClusteringOutcome`.  Ties in assignment go to the
lowest cluster index.  A cluster that empties during a Lloyd loop is
re-seeded with the entity farthest from its own centroid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import ClusteringError, ClusteringOutcome, TooFewClustersError, as_matrix
from .minkowski import (
    DEFAULT_CENTER_PARAMS,
    CenterSearchParams,
    check_exponent,
    minkowski_centers,
    minkowski_distances,
)


# Constant added to every entity/feature term of the weighted criterion by
# the mwk/imwk engines; see :func:`mwk_means`.
DEFAULT_DISPERSION_OFFSET = 0.01


@dataclass(frozen=True)
class RunConfig:
    k: int
    p: Optional[float] = None
    max_iterations: int = 1000
    seed: int = 0
    center_params: CenterSearchParams = field(default_factory=CenterSearchParams)
    dispersion_offset: float = DEFAULT_DISPERSION_OFFSET

    def __post_init__(self):
        if self.dispersion_offset < 0:
            raise ValueError("dispersion_offset must be >= 0")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.p is not None:
            check_exponent(self.p)
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


def _check_k(X, k):
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > X.shape[0]:
        raise ClusteringError(f"k={k} exceeds the number of entities n={X.shape[0]}")


def _labels(labels_or_u):
    a = np.asarray(getattr(labels_or_u, "codes", labels_or_u))
    if a.ndim == 2:
        return np.argmax(a != 0, axis=1)
    return a.astype(np.intp)


def squared_euclidean(X, Z) -> np.ndarray:
    """n x k matrix of squared Euclidean distances."""
    X = np.asarray(X, dtype=float)
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    D = np.empty((X.shape[0], Z.shape[0]))
    for l in range(Z.shape[0]):
        diff = X - Z[l]
        D[:, l] = np.einsum("ij,ij->i", diff, diff)
    return D


def sse(X, labels, Z) -> float:
    """Within-cluster sum of squares, the k-means criterion."""
    X = np.asarray(X, dtype=float)
    labels = _labels(labels)
    diff = X - np.asarray(Z)[labels]
    return float(np.einsum("ij,ij->", diff, diff))


def criterion_value(X, labels, Z, W, p, offset: float = 0.0) -> float:
    """sum_l sum_{i in l} sum_v w_lv^p (|x_iv - z_lv|^p + offset).

    With the default ``offset=0`` this is the plain weighted Minkowski
    criterion.
    """
    p = check_exponent(p)
    X = np.asarray(X, dtype=float)
    labels = _labels(labels)
    Z = np.asarray(Z, dtype=float)
    W = np.asarray(W, dtype=float)
    return float(np.sum((W[labels] ** p) * (np.abs(X - Z[labels]) ** p + offset)))


def dispersions(X, labels, Z, p, offset: float = 0.0) -> np.ndarray:
    """k x m matrix D_lv = sum_{i in l} (|x_iv - z_lv|^p + offset)."""
    X = np.asarray(X, dtype=float)
    labels = _labels(labels)
    Z = np.asarray(Z, dtype=float)
    D = np.zeros_like(Z)
    A = np.abs(X - Z[labels]) ** p
    for l in range(Z.shape[0]):
        rows = labels == l
        D[l] = A[rows].sum(axis=0) + offset * rows.sum()
    return D


def _regularised_distances(X, Z, W, p, offset):
    D = minkowski_distances(X, Z, W, p)
    if offset:
        D += offset * np.sum(W ** p, axis=1)
    return D


def _guarded_centers(X, labels, Z, moving, p, center_params):
    """Minkowski centres for the moving clusters, never worse than the old ones.

    The step search may stop a little short of the exact minimiser; where
    the previous coordinate scores strictly lower on the current members it
    is kept, so the criterion cannot rise in this step.
    """
    capped = 0
    for l in moving:
        V = X[labels == l]
        c, _, cap = minkowski_centers(V, p, center_params)
        old = Z[l]
        keep = np.sum(np.abs(V - old) ** p, axis=0) < np.sum(np.abs(V - c) ** p, axis=0)
        Z[l] = np.where(keep, old, c)
        capped += int(cap.sum())
    return capped


def weights_from_dispersion(D, p) -> np.ndarray:
    """Row-wise w_lv = 1 / sum_j (D_lv / D_lj)^(1/(p-1)).

    Evaluated in the log domain so exponents as large as 1/(1.1-1) = 10 do
    not overflow.  Rows containing zero dispersions share their unit mass
    equally among the zero-dispersion features.
    """
    p = check_exponent(p)
    D = np.atleast_2d(np.asarray(D, dtype=float))
    W = np.empty_like(D)
    zero = D <= 0
    has_zero = zero.any(axis=1)
    if has_zero.any():
        Zr = zero[has_zero].astype(float)
        W[has_zero] = Zr / Zr.sum(axis=1, keepdims=True)
    rest = ~has_zero
    if rest.any():
        logw = -np.log(D[rest]) / (p - 1.0)
        logw -= logw.max(axis=1, keepdims=True)
        w = np.exp(logw)
        W[rest] = w / w.sum(axis=1, keepdims=True)
    return W


def update_weights(X, labels, Z, p, offset: float = 0.0) -> np.ndarray:
    """Optimal within-cluster feature weights for fixed labels and centroids.

    ``labels`` may be 0-based codes, a :class:`Membership`, or a binary
    n x k matrix.  The weights minimise :func:`criterion_value` with the
    same ``offset``.
    """
    p = check_exponent(p)
    X = as_matrix(X)
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if Z.shape[1] != X.shape[1]:
        raise ValueError(f"centroids have {Z.shape[1]} features, data has {X.shape[1]}")
    return weights_from_dispersion(dispersions(X, labels, Z, p, offset), p)


def _reseed_empty(labels, D, k, frozen=()):
    """Give every empty, non-frozen cluster the entity farthest from its centroid."""
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k)
    for l in np.flatnonzero(counts == 0):
        if l in frozen:
            continue
        own = D[np.arange(len(labels)), labels].copy()
        own[counts[labels] <= 1] = -np.inf  # never empty another cluster
        i = int(np.argmax(own))
        if not np.isfinite(own[i]):
            raise ClusteringError("cannot re-seed an empty cluster")
        counts[labels[i]] -= 1
        labels[i] = l
        counts[l] += 1
    return labels


def kmeans(X, Z0, max_iterations: int = 1000) -> ClusteringOutcome:
    """Lloyd's k-means from the initial centroids ``Z0``.

    ``iterations`` counts centroid updates, so a run whose first assignment
    is already stable reports 1.
    """
    X = as_matrix(X)
    Z = np.array(np.atleast_2d(Z0), dtype=float)
    k = Z.shape[0]
    _check_k(X, k)
    if Z.shape[1] != X.shape[1] or not np.all(np.isfinite(Z)):
        raise ValueError("initial centroids must be finite and match the data width")
    labels = None
    history = []
    converged = False
    it = 0
    while True:
        D = squared_euclidean(X, Z)
        new = np.argmin(D, axis=1)
        if labels is not None and np.array_equal(new, labels):
            converged = True
            break
        if it >= max_iterations:
            break
        labels = _reseed_empty(new, D, k)
        for l in range(k):
            Z[l] = X[labels == l].mean(axis=0)
        it += 1
        history.append(sse(X, labels, Z))
    m = X.shape[1]
    return ClusteringOutcome(
        labels=labels, centroids=Z, weights=np.full((k, m), 1.0 / m),
        criterion=history[-1], iterations=it, converged=converged,
        history=tuple(history),
    )


def kmeanspp_init(X, k, seed=None) -> np.ndarray:
    """k-means++ seeding: D(x)^2-weighted sampling of entity rows.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    X = as_matrix(X)
    _check_k(X, k)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = squared_euclidean(X, X[chosen[0]])[:, 0]
    for _ in range(1, k):
        total = d2.sum()
        if not total > 0:
            raise ClusteringError(
                f"k-means++ cannot pick {k} distinct centroids: all remaining entities coincide"
            )
        i = int(rng.choice(n, p=d2 / total))
        chosen.append(i)
        d2 = np.minimum(d2, squared_euclidean(X, X[i])[:, 0])
    return X[chosen].copy()


def kmeanspp(X, k, seed=None, max_iterations: int = 1000) -> ClusteringOutcome:
    return kmeans(X, kmeanspp_init(X, k, seed), max_iterations)


def _anomalous_kmeans(X, zc, max_iterations):
    """Two-centroid k-means around the farthest entity with ``zc`` frozen."""
    far = int(np.argmax(squared_euclidean(X, zc)[:, 0]))
    zt = X[far].copy()
    in_t = None
    for _ in range(max_iterations):
        D = squared_euclidean(X, np.vstack([zt, zc]))
        new = D[:, 0] <= D[:, 1]
        if in_t is not None and np.array_equal(new, in_t):
            break
        in_t = new
        zt = X[in_t].mean(axis=0)
    return zt, in_t


def ikmeans_init(X, k, max_iterations: int = 1000) -> np.ndarray:
    """Anomalous-pattern initialisation (threshold 0, keep the k largest)."""
    X = as_matrix(X)
    _check_k(X, k)
    zc = X.mean(axis=0)
    remaining = np.arange(X.shape[0])
    cents, sizes = [], []
    while len(remaining):
        zt, in_t = _anomalous_kmeans(X[remaining], zc, max_iterations)
        cents.append(zt)
        sizes.append(int(in_t.sum()))
        remaining = remaining[~in_t]
    if len(cents) < k:
        raise TooFewClustersError(len(cents), k)
    order = np.argsort(-np.asarray(sizes), kind="stable")[:k]
    return np.array([cents[i] for i in order])


def ikmeans(X, k, max_iterations: int = 1000) -> ClusteringOutcome:
    return kmeans(X, ikmeans_init(X, k, max_iterations), max_iterations)


def mwk_means(X, Z0, W0, p, max_iterations: int = 1000,
              center_params: CenterSearchParams = DEFAULT_CENTER_PARAMS,
              frozen=(), update=True, offset: float = DEFAULT_DISPERSION_OFFSET) -> ClusteringOutcome:
    """Minkowski weighted k-means from centroids ``Z0`` and weights ``W0``.

    Each iteration assigns by weighted Minkowski distance, moves every
    non-frozen centroid to its cluster's Minkowski centre, then refits the
    weights.  ``frozen`` lists centroid rows that never move; such clusters
    may be empty.  ``update=False`` keeps ``W0`` fixed throughout.

    ``offset`` adds a constant to every entity/feature term, so the
    minimised objective is ``sum w_lv^p (|x_iv - z_lv|^p + offset)``.  It
    stops a feature that is constant inside a cluster from taking all of
    that cluster's weight.  Assignment, centre and weight steps all minimise
    this same objective, so ``history`` never increases.
    """
    if offset < 0:
        raise ValueError("offset must be >= 0")
    p = check_exponent(p)
    X = as_matrix(X)
    Z = np.array(np.atleast_2d(Z0), dtype=float)
    W = np.array(np.atleast_2d(W0), dtype=float)
    k, m = Z.shape
    frozen = frozenset(int(f) for f in frozen)
    if len(frozen) == 0:
        _check_k(X, k)
    if Z.shape[1] != X.shape[1] or W.shape != Z.shape:
        raise ValueError(f"shape mismatch: X {X.shape}, Z {Z.shape}, W {W.shape}")
    moving = [l for l in range(k) if l not in frozen]
    labels = None
    history = []
    capped = 0
    converged = False
    it = 0
    while True:
        D = _regularised_distances(X, Z, W, p, offset)
        new = np.argmin(D, axis=1)
        if labels is not None and np.array_equal(new, labels):
            converged = True
            break
        if it >= max_iterations:
            break
        labels = _reseed_empty(new, D, k, frozen)
        capped += _guarded_centers(X, labels, Z, moving, p, center_params)
        if update:
            W = weights_from_dispersion(dispersions(X, labels, Z, p, offset), p)
        it += 1
        history.append(criterion_value(X, labels, Z, W, p, offset))
    return ClusteringOutcome(
        labels=labels, centroids=Z, weights=W, criterion=history[-1],
        iterations=it, converged=converged, p=p, history=tuple(history),
        extra={"center_search_capped": capped},
    )


def imwk_init(X, k, p, center_params: CenterSearchParams = DEFAULT_CENTER_PARAMS,
              max_iterations: int = 1000, offset: float = DEFAULT_DISPERSION_OFFSET):
    """Minkowski anomalous-pattern initialisation.

    The grand centre is the Minkowski centre of the whole data set, computed
    once and frozen.  For each extraction the weights restart uniform, the
    entity farthest from the grand centre seeds the tentative cluster, and a
    two-centroid mwk-means run settles it.  Returns the centroids and weight
    rows of the k largest extracted clusters, plus all extracted sizes.
    """
    p = check_exponent(p)
    X = as_matrix(X)
    _check_k(X, k)
    n, m = X.shape
    zc, _, _ = minkowski_centers(X, p, center_params)
    uniform = np.full(m, 1.0 / m)
    remaining = np.arange(n)
    cents, wts, sizes = [], [], []
    while len(remaining):
        Xr = X[remaining]
        far = int(np.argmax(minkowski_distances(Xr, zc, uniform, p)[:, 0]))
        out = mwk_means(Xr, np.vstack([Xr[far], zc]), np.vstack([uniform, uniform]), p,
                        max_iterations, center_params, frozen=(1,), offset=offset)
        in_t = out.labels == 0
        cents.append(out.centroids[0])
        wts.append(out.weights[0])
        sizes.append(int(in_t.sum()))
        remaining = remaining[~in_t]
    if len(cents) < k:
        raise TooFewClustersError(len(cents), k)
    order = np.argsort(-np.asarray(sizes), kind="stable")[:k]
    return np.array([cents[i] for i in order]), np.array([wts[i] for i in order]), sizes


def imwk_means(X, k, p, max_iterations: int = 1000,
               center_params: CenterSearchParams = DEFAULT_CENTER_PARAMS,
               offset: float = DEFAULT_DISPERSION_OFFSET) -> ClusteringOutcome:
    Z0, W0, sizes = imwk_init(X, k, p, center_params, max_iterations, offset)
    out = mwk_means(X, Z0, W0, p, max_iterations, center_params, offset=offset)
    out.extra["anomalous_clusters"] = len(sizes)
    return out


ALGORITHMS = ("kmeans++", "ikmeans", "mwk", "imwk")


def cluster(X, algorithm: str, cfg: RunConfig) -> ClusteringOutcome:
    """Run one of :data:`ALGORITHMS` under ``cfg``."""
    X = as_matrix(X)
    if algorithm == "kmeans++":
        return kmeanspp(X, cfg.k, cfg.seed, cfg.max_iterations)
    if algorithm == "ikmeans":
        return ikmeans(X, cfg.k, cfg.max_iterations)
    if cfg.p is None:
        raise ValueError(f"{algorithm} needs a Minkowski exponent p")
    if algorithm == "mwk":
        rng = np.random.default_rng(cfg.seed)
        idx = rng.choice(X.shape[0], size=cfg.k, replace=False)
        W0 = np.full((cfg.k, X.shape[1]), 1.0 / X.shape[1])
        return mwk_means(X, X[idx], W0, cfg.p, cfg.max_iterations, cfg.center_params,
                         offset=cfg.dispersion_offset)
    if algorithm == "imwk":
        return imwk_means(X, cfg.k, cfg.p, cfg.max_iterations, cfg.center_params,
                          cfg.dispersion_offset)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
