"""Cluster-specific feature rescaling and the rescale-then-recluster pipelines.

The weights fitted by imwk-means minimise the weighted Minkowski criterion
for the partition they came with, so multiplying each entity's features by
its own cluster's weight row compacts the clusters.  Each feature is therefore
rescaled by k different factors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .clustering import DEFAULT_DISPERSION_OFFSET, imwk_means, kmeanspp
from .core import ClusteringError, ClusteringOutcome, as_matrix
from .minkowski import CenterSearchParams, check_exponent
from .normalize import NormalizationMethod, normalize


def rescale_with_weights(X, labels, W) -> np.ndarray:
    """x'_iv = x_iv * w_{l(i), v}, with l(i) the cluster of entity i."""
    X = as_matrix(X)
    W = np.atleast_2d(np.asarray(W, dtype=float))
    labels = np.asarray(getattr(labels, "codes", labels))
    if labels.ndim == 2:
        labels = np.argmax(labels != 0, axis=1)
    if len(labels) != X.shape[0] or W.shape[1] != X.shape[1]:
        raise ValueError(f"shape mismatch: X {X.shape}, labels {labels.shape}, W {W.shape}")
    if labels.min() < 0 or labels.max() >= W.shape[0]:
        raise ValueError("label outside the rows of W")
    out = W[labels]
    out *= X
    return out


@dataclass(frozen=True)
class RescalePipelineConfig:
    k: int
    p1: float
    p2: Optional[float] = None
    normalization: NormalizationMethod = NormalizationMethod.RANGE
    downstream: str = "imwk"  # or "kmeans++"
    kmeanspp_runs: int = 100
    seed: int = 0
    max_iterations: int = 1000
    center_params: CenterSearchParams = field(default_factory=CenterSearchParams)
    dispersion_offset: float = DEFAULT_DISPERSION_OFFSET

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        object.__setattr__(self, "normalization", NormalizationMethod.parse(self.normalization))
        check_exponent(self.p1)
        if self.downstream == "imwk":
            if self.p2 is None:
                raise ValueError("the imwk downstream arm needs p2")
            check_exponent(self.p2)
        elif self.downstream == "kmeans++":
            if self.p2 is not None:
                raise ValueError("p2 is unused by the kmeans++ downstream arm; leave it unset")
            if self.kmeanspp_runs < 1:
                raise ValueError("kmeanspp_runs must be >= 1")
        else:
            raise ValueError(f"unknown downstream algorithm {self.downstream!r}")


class PipelineError(ClusteringError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


def fit_rescaled(X_raw, cfg: RescalePipelineConfig):
    """Normalise, fit imwk-means at p1, and rescale the normalised data.

    Returns ``(X_rescaled, stage_two_outcome)``.
    """
    try:
        Xn = normalize(X_raw, cfg.normalization)
    except ValueError as exc:
        raise PipelineError("normalise", exc) from exc
    try:
        first = imwk_means(Xn, cfg.k, cfg.p1, cfg.max_iterations, cfg.center_params,
                           cfg.dispersion_offset)
    except ClusteringError as exc:
        raise PipelineError("stage-2 imwk", exc) from exc
    return rescale_with_weights(Xn, first.labels, first.weights), first


def rescaled_imwk(X_raw, cfg: RescalePipelineConfig) -> ClusteringOutcome:
    """imwk-means at p2 on data rescaled by an imwk-means fit at p1.

    ``extra["stage2"]`` carries the first-pass outcome whose weights did the
    rescaling.
    """
    if cfg.downstream != "imwk":
        raise ValueError("rescaled_imwk needs downstream='imwk'")
    Xr, first = fit_rescaled(X_raw, cfg)
    return recluster_imwk(Xr, first, cfg.k, cfg.p2, cfg.max_iterations, cfg.center_params,
                          cfg.dispersion_offset)


def recluster_imwk(X_rescaled, first, k, p2, max_iterations=1000,
                   center_params: Optional[CenterSearchParams] = None,
                   offset: float = DEFAULT_DISPERSION_OFFSET) -> ClusteringOutcome:
    """Stage four: imwk-means at ``p2`` on already rescaled data."""
    try:
        out = imwk_means(X_rescaled, k, p2, max_iterations, center_params or CenterSearchParams(),
                         offset)
    except ClusteringError as exc:
        raise PipelineError("stage-4 imwk", exc) from exc
    out.extra["stage2"] = first
    return out


def run_seeds(seed, runs):
    """Independent per-run seeds derived from one master seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(runs)]


def rescaled_kmeanspp(X_raw, cfg: RescalePipelineConfig) -> list:
    """``cfg.kmeanspp_runs`` k-means++ runs on data rescaled by imwk-means at p1."""
    if cfg.downstream != "kmeans++":
        raise ValueError("rescaled_kmeanspp needs downstream='kmeans++'")
    Xr, first = fit_rescaled(X_raw, cfg)
    outs = []
    for s in run_seeds(cfg.seed, cfg.kmeanspp_runs):
        out = kmeanspp(Xr, cfg.k, s, cfg.max_iterations)
        out.extra["stage2"] = first
        outs.append(out)
    return outs
