"""Adjusted Rand Index from a contingency table."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import encode_labels


@dataclass(frozen=True)
class ContingencyTable:
    counts: np.ndarray  # k x r, rows follow S, columns follow U
    a: np.ndarray
    b: np.ndarray
    n: int


def contingency(S, U) -> ContingencyTable:
    S, U = list(S), list(U)
    if len(S) != len(U):
        raise ValueError(f"label vectors differ in length: {len(S)} vs {len(U)}")
    s, u = encode_labels(S), encode_labels(U)
    table = np.zeros((s.max() + 1, u.max() + 1), dtype=np.int64)
    np.add.at(table, (s, u), 1)
    return ContingencyTable(table, table.sum(axis=1), table.sum(axis=0), len(s))


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2.0


def adjusted_rand_index(S, U) -> float:
    """ARI between two labelings of the same n >= 2 entities.

    When the expected and maximum indices coincide (e.g. both labelings put
    everything in one class) returns 1.0 for identical partitions, else 0.0.
    """
    if len(S) < 2:
        raise ValueError("ARI needs at least two entities")
    t = contingency(S, U)
    index = _comb2(t.counts).sum()
    sa, sb = _comb2(t.a).sum(), _comb2(t.b).sum()
    expected = sa * sb / _comb2(t.n)
    maximum = 0.5 * (sa + sb)
    if maximum == expected:
        same = t.counts.shape[0] == t.counts.shape[1] == np.count_nonzero(t.counts)
        return 1.0 if same else 0.0
    return float((index - expected) / (maximum - expected))


ari = adjusted_rand_index
