"""Column-wise feature standardisation.

Every function takes an n x m array (or :class:`DataMatrix`) and returns an
array of the same shape.  Features with zero dispersion raise
:class:`ConstantFeatureError`; drop them before normalising.
"""
from __future__ import annotations

import enum

import numpy as np

from .core import ConstantFeatureError, DataMatrix, as_matrix


class NormalizationMethod(str, enum.Enum):
    ZSCORE = "zscore"
    ROBUST = "robust"
    RANGE = "range"
    MINMAX = "minmax"
    UNIT = "unit"
    NONE = "none"

    @classmethod
    def parse(cls, value) -> "NormalizationMethod":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(
                f"unknown normalisation {value!r}; expected one of "
                + ", ".join(m.value for m in cls)
            ) from None


def _names(X, names):
    if names is None and isinstance(X, DataMatrix):
        return X.names
    return names


def _check_nonzero(scale, what, names):
    zero = np.flatnonzero(scale == 0)
    if len(zero):
        j = int(zero[0])
        raise ConstantFeatureError(names[j] if names is not None else j, what)


def zscore(X, names=None) -> np.ndarray:
    """(x - mean) / std with the population standard deviation."""
    names = _names(X, names)
    A = as_matrix(X)
    mu = A.mean(axis=0)
    sd = A.std(axis=0)
    # np.std of a constant column can come out ~1e-17 instead of 0
    sd[np.ptp(A, axis=0) == 0] = 0.0
    _check_nonzero(sd, "standard deviation", names)
    return (A - mu) / sd


def robust_zscore(X, names=None) -> np.ndarray:
    """(x - median) / MAD, MAD unscaled."""
    names = _names(X, names)
    A = as_matrix(X)
    med = np.median(A, axis=0)
    mad = np.median(np.abs(A - med), axis=0)
    _check_nonzero(mad, "median absolute deviation", names)
    return (A - med) / mad


def range_normalize(X, names=None) -> np.ndarray:
    """(x - mean) / (max - min)."""
    names = _names(X, names)
    A = as_matrix(X)
    rng = np.ptp(A, axis=0)
    _check_nonzero(rng, "range", names)
    return (A - A.mean(axis=0)) / rng


def min_max(X, names=None) -> np.ndarray:
    """(x - min) / (max - min), mapping every feature onto [0, 1]."""
    names = _names(X, names)
    A = as_matrix(X)
    lo = A.min(axis=0)
    rng = np.ptp(A, axis=0)
    _check_nonzero(rng, "range", names)
    out = (A - lo) / rng
    return np.clip(out, 0.0, 1.0)


def unit_length(X, names=None) -> np.ndarray:
    """Divide each feature (column) by its Euclidean norm."""
    names = _names(X, names)
    A = as_matrix(X)
    norm = np.linalg.norm(A, axis=0)
    _check_nonzero(norm, "Euclidean norm", names)
    return A / norm


_METHODS = {
    NormalizationMethod.ZSCORE: zscore,
    NormalizationMethod.ROBUST: robust_zscore,
    NormalizationMethod.RANGE: range_normalize,
    NormalizationMethod.MINMAX: min_max,
    NormalizationMethod.UNIT: unit_length,
}


def normalize(X, method="range", names=None) -> np.ndarray:
    method = NormalizationMethod.parse(method)
    if method is NormalizationMethod.NONE:
        return as_matrix(X).copy()
    return _METHODS[method](X, names=names)
