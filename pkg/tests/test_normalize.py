import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mwkrescale.core import ConstantFeatureError, DataMatrix
from mwkrescale.normalize import (
    NormalizationMethod, min_max, normalize, range_normalize, robust_zscore, unit_length, zscore,
)

col = lambda *v: np.array(v, dtype=float)[:, None]


def test_zscore_examples():
    np.testing.assert_allclose(zscore(col(1, 2, 3)).ravel(), [-1.224744871, 0, 1.224744871], atol=1e-8)
    standard = col(-1, 0, 1) * np.sqrt(1.5)
    np.testing.assert_allclose(zscore(standard), standard, atol=1e-9)


def test_zscore_constant_names_column():
    with pytest.raises(ConstantFeatureError) as info:
        zscore(DataMatrix(np.array([[1.0, 5], [2, 5], [3, 5]]), ["ok", "flat"]))
    assert info.value.column == "flat"


def test_robust_zscore_examples():
    np.testing.assert_allclose(robust_zscore(col(1, 2, 3, 4, 100)).ravel(), [-2, -1, 0, 1, 97])
    for a in (0.5, 3.0, 1e4):
        np.testing.assert_allclose(robust_zscore(col(-a, 0, a)).ravel(), [-1, 0, 1])
    with pytest.raises(ConstantFeatureError):
        robust_zscore(col(7, 7, 7, 9))


def test_range_normalize_examples():
    np.testing.assert_allclose(range_normalize(col(0, 2, 4)).ravel(), [-0.5, 0, 0.5])
    x = col(0.3, 1.7, -2.0, 5.5)
    np.testing.assert_allclose(range_normalize(x + 12.5), range_normalize(x), atol=1e-12)
    with pytest.raises(ConstantFeatureError):
        range_normalize(col(3, 3))


def test_min_max_examples():
    np.testing.assert_allclose(min_max(col(0, 5, 10)).ravel(), [0, 0.5, 1])
    np.testing.assert_allclose(min_max(col(-1, 1)).ravel(), [0, 1])
    x = col(4, 9, -2, 0.5)
    np.testing.assert_array_equal(min_max(min_max(x)), min_max(x))
    with pytest.raises(ConstantFeatureError):
        min_max(col(2, 2, 2))


def test_unit_length_examples():
    np.testing.assert_allclose(unit_length(col(3, 4)).ravel(), [0.6, 0.8])
    np.testing.assert_allclose(unit_length(col(1)).ravel(), [1])
    np.testing.assert_allclose(unit_length(col(2, 0, 0)).ravel(), [1, 0, 0])
    with pytest.raises(ConstantFeatureError):
        unit_length(col(0, 0))


def test_none_is_a_copy():
    X = np.arange(6.0).reshape(3, 2)
    out = normalize(X, "none")
    np.testing.assert_array_equal(out, X)
    assert out is not X


def test_parse_method():
    assert NormalizationMethod.parse("MinMax") is NormalizationMethod.MINMAX
    with pytest.raises(ValueError):
        NormalizationMethod.parse("l2")


# well-conditioned matrices: avoid near-constant columns
matrices = arrays(
    np.float64, st.tuples(st.integers(3, 25), st.integers(1, 5)),
    elements=st.floats(-1e3, 1e3, allow_nan=False),
).filter(lambda A: np.all(np.ptp(A, axis=0) > 1e-3 * (1 + np.abs(A).max())))


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_column_statistics(A):
    Z = zscore(A)
    assert np.all(np.abs(Z.mean(axis=0)) < 1e-9)
    assert np.all(np.abs(Z.std(axis=0) - 1) < 1e-9)
    R = range_normalize(A)
    assert np.all(np.abs(R.mean(axis=0)) < 1e-9)
    np.testing.assert_allclose(np.ptp(R, axis=0), 1.0, atol=1e-9)
    M = min_max(A)
    assert M.min() >= 0 and M.max() <= 1
    np.testing.assert_allclose(min_max(M), M, atol=1e-12)
    if np.all(np.linalg.norm(A, axis=0) > 0):
        np.testing.assert_allclose(np.linalg.norm(unit_length(A), axis=0), 1.0, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(matrices, st.randoms())
def test_column_permutation_commutes(A, rnd):
    perm = list(range(A.shape[1]))
    rnd.shuffle(perm)
    for method in ("zscore", "range", "minmax", "unit"):
        if method == "unit" and not np.all(np.linalg.norm(A, axis=0) > 0):
            continue
        np.testing.assert_allclose(normalize(A[:, perm], method), normalize(A, method)[:, perm], rtol=1e-12, atol=1e-12)
    if np.all(np.median(np.abs(A - np.median(A, axis=0)), axis=0) > 0):
        np.testing.assert_allclose(robust_zscore(A[:, perm]), robust_zscore(A)[:, perm], rtol=1e-12, atol=1e-12)
