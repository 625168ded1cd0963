"""Minkowski weighted k-means with cluster-specific feature rescaling."""
from .core import (
    ClusteringError, ClusteringOutcome, ConstantFeatureError, DataMatrix, LabeledDataset,
    Membership, TooFewClustersError, labels_from_membership, membership_from_labels,
)
from .normalize import NormalizationMethod, normalize
from .minkowski import CenterSearchParams, minkowski_center, weighted_minkowski
from .clustering import (
    DEFAULT_DISPERSION_OFFSET, RunConfig, criterion_value, ikmeans_init, imwk_init, imwk_means, kmeans, kmeanspp,
    kmeanspp_init, mwk_means, update_weights,
)
from .rescale import (
    RescalePipelineConfig, rescale_with_weights, rescaled_imwk, rescaled_kmeanspp,
)
from .evaluation import adjusted_rand_index

__version__ = "0.1.0"
