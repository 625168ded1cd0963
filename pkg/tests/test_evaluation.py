from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mwkrescale.evaluation import adjusted_rand_index, contingency


def pair_ari(S, U):
    """Independent pair-counting form: (index - expected) / (max - expected)."""
    n = len(S)
    pairs = list(combinations(range(n), 2))
    same_s = np.array([S[i] == S[j] for i, j in pairs])
    same_u = np.array([U[i] == U[j] for i, j in pairs])
    index = np.sum(same_s & same_u)
    a, b = same_s.sum(), same_u.sum()
    expected = a * b / len(pairs)
    maximum = (a + b) / 2
    if maximum == expected:
        return None
    return (index - expected) / (maximum - expected)


def naive_table(S, U):
    rs, cs = list(dict.fromkeys(S)), list(dict.fromkeys(U))
    T = np.zeros((len(rs), len(cs)), dtype=int)
    for i, r in enumerate(rs):
        for j, c in enumerate(cs):
            T[i, j] = sum(1 for s, u in zip(S, U) if s == r and u == c)
    return T


def test_contingency_examples():
    t = contingency([1, 1, 2], [1, 1, 2])
    np.testing.assert_array_equal(t.counts, [[2, 0], [0, 1]])
    t = contingency([1, 1, 2, 2], [1, 2, 1, 2])
    np.testing.assert_array_equal(t.counts, np.ones((2, 2)))
    assert t.n == 4 and list(t.a) == [2, 2] and list(t.b) == [2, 2]
    rng = np.random.default_rng(0)
    S, U = rng.integers(0, 4, 20).tolist(), rng.integers(0, 3, 20).tolist()
    np.testing.assert_array_equal(contingency(S, U).counts, naive_table(S, U))
    with pytest.raises(ValueError):
        contingency([1, 2], [1])


def test_ari_examples():
    assert adjusted_rand_index([1, 1, 2, 3], [7, 7, 8, 9]) == 1.0
    # pair oracle: no agreeing pairs, expected 2*2/6, maximum 2 -> -0.5
    assert pair_ari([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(-0.5)
    assert adjusted_rand_index([1, 1, 2, 2], [1, 2, 1, 2]) == pytest.approx(-0.5, abs=1e-15)
    assert adjusted_rand_index([1, 2, 3, 4], [1, 1, 1, 1]) == 0.0
    with pytest.raises(ValueError):
        adjusted_rand_index([1], [1])


def test_ari_degenerate_denominator():
    assert adjusted_rand_index([1, 1, 1], [4, 4, 4]) == 1.0
    assert adjusted_rand_index([1, 2, 3], [4, 5, 6]) == 1.0


labelings = st.integers(2, 50).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 5), min_size=n, max_size=n),
                        st.lists(st.integers(0, 5), min_size=n, max_size=n)))


@given(labelings)
def test_ari_matches_pair_counting(SU):
    S, U = SU
    ref = pair_ari(S, U)
    if ref is not None:
        assert abs(adjusted_rand_index(S, U) - ref) < 1e-12


@given(labelings, st.permutations(range(6)))
def test_ari_symmetry_and_relabeling(SU, perm):
    S, U = SU
    a = adjusted_rand_index(S, U)
    assert abs(a - adjusted_rand_index(U, S)) < 1e-12
    assert adjusted_rand_index([perm[s] for s in S], U) == pytest.approx(a, abs=1e-12)
    assert adjusted_rand_index(S, [perm[u] for u in U]) == pytest.approx(a, abs=1e-12)
    assert -1 <= a <= 1
    if len(set(S)) >= 2:
        assert adjusted_rand_index(S, S) == 1.0
