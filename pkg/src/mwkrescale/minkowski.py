"""Weighted Minkowski dissimilarity and Minkowski centres."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def check_exponent(p) -> float:
    p = float(p)
    if not np.isfinite(p) or p <= 1.0:
        raise ValueError(f"Minkowski exponent must be > 1, got {p}")
    return p


@dataclass(frozen=True)
class CenterSearchParams:
    step: float = 0.001
    max_iterations: int = 100_000

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


DEFAULT_CENTER_PARAMS = CenterSearchParams()


def weighted_minkowski(x, z, w, p) -> float:
    """p-th power of the weighted Minkowski distance, sum_v w_v^p |x_v - z_v|^p."""
    p = check_exponent(p)
    x, z, w = (np.asarray(a, dtype=float).ravel() for a in (x, z, w))
    if not (len(x) == len(z) == len(w)):
        raise ValueError(f"length mismatch: {len(x)}, {len(z)}, {len(w)}")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    return float(np.sum(w**p * np.abs(x - z) ** p))


def minkowski_distances(X, Z, W, p) -> np.ndarray:
    """n x k matrix of weighted Minkowski distances from rows of X to rows of Z.

    Row l of ``W`` weights the distance to centroid l.
    """
    X = np.asarray(X, dtype=float)
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    Wp = np.atleast_2d(np.asarray(W, dtype=float)) ** p
    D = np.empty((X.shape[0], Z.shape[0]))
    for l in range(Z.shape[0]):
        D[:, l] = (np.abs(X - Z[l]) ** p) @ Wp[l]
    return D


def _gamma(V, mu, p):
    return np.sum(np.abs(V - mu) ** p, axis=0)


def minkowski_centers(V, p, params: CenterSearchParams = DEFAULT_CENTER_PARAMS):
    """Minkowski centre of every column of ``V`` (q x m).

    Each column starts at its mean and moves by ``params.step`` towards lower
    sum_i |v_i - mu|^p until neither neighbour on the step lattice improves.
    The walk's end point is located by galloping plus bisection on the lattice
    index; because the objective is convex along the lattice this lands on the
    same point the step-by-step walk would reach, in O(log) evaluations.

    Returns ``(centers, steps, capped)`` where ``steps`` is the signed number
    of lattice steps from the mean and ``capped`` flags columns stopped by
    ``params.max_iterations``.
    """
    p = check_exponent(p)
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[0] == 0:
        raise ValueError("cannot take the Minkowski centre of an empty set")
    m = V.shape[1]
    s = params.step
    mu0 = V.mean(axis=0)
    if V.shape[0] == 1:
        return mu0, np.zeros(m, dtype=np.int64), np.zeros(m, dtype=bool)

    g0 = _gamma(V, mu0, p)
    g_up = _gamma(V, mu0 + s, p)
    g_dn = _gamma(V, mu0 - s, p)
    d = np.where(g_up < g0, 1.0, np.where(g_dn < g0, -1.0, 0.0))
    moving = d != 0
    J = np.zeros(m, dtype=np.int64)
    capped = np.zeros(m, dtype=bool)
    if not moving.any():
        return mu0, J, capped

    idx = np.flatnonzero(moving)
    Vm, mu, dm = V[:, idx], mu0[idx], d[idx]
    span = np.ptp(V, axis=0)[idx]
    # the minimiser lies in [min, max], so the walk can never exceed this
    bound = np.minimum(np.ceil(span / s).astype(np.int64) + 1, params.max_iterations)

    def rising(j):
        # forward difference along the walk is >= 0: stops at j
        a = _gamma(Vm, mu + dm * j * s, p)
        b = _gamma(Vm, mu + dm * (j + 1) * s, p)
        return b >= a

    lo = np.zeros(len(idx), dtype=np.int64)  # last index known to still descend
    hi = np.full(len(idx), -1, dtype=np.int64)  # first index known to stop
    j = np.ones(len(idx), dtype=np.int64)
    open_ = np.ones(len(idx), dtype=bool)
    while open_.any():
        j = np.minimum(j, bound)
        r = rising(j)
        stop = open_ & r
        hi[stop] = j[stop]
        go = open_ & ~r
        lo[go] = j[go]
        at_cap = go & (j >= bound)
        hi[at_cap] = bound[at_cap]
        open_ = go & ~at_cap
        j = np.where(open_, j * 2, j)
    hit_cap = (hi == bound) & (lo == bound)
    while True:
        gap = (hi - lo > 1) & ~hit_cap
        if not gap.any():
            break
        mid = (lo + hi) // 2
        r = rising(mid)
        hi = np.where(gap & r, mid, hi)
        lo = np.where(gap & ~r, mid, lo)

    J[idx] = (dm * hi).astype(np.int64)
    capped[idx] = hit_cap & (bound == params.max_iterations)
    centers = mu0.copy()
    centers[idx] = mu + dm * hi * s
    return centers, J, capped


def minkowski_center(values, p, params: CenterSearchParams = DEFAULT_CENTER_PARAMS) -> float:
    """Scalar Minkowski centre of a 1-D sample, see :func:`minkowski_centers`."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("cannot take the Minkowski centre of an empty set")
    c, _, _ = minkowski_centers(v[:, None], p, params)
    return float(c[0])


def minkowski_centroids(X, labels, k, p, params: CenterSearchParams = DEFAULT_CENTER_PARAMS,
                        skip=()):
    """k x m matrix of per-cluster, per-feature Minkowski centres.

    ``labels`` holds 0-based cluster codes.  Rows listed in ``skip`` are left
    as NaN for the caller to fill (used for frozen centroids).
    """
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    Z = np.full((k, X.shape[1]), np.nan)
    for l in range(k):
        if l in skip:
            continue
        members = X[labels == l]
        if len(members) == 0:
            raise ValueError(f"cluster {l} is empty")
        Z[l], _, _ = minkowski_centers(members, p, params)
    return Z
