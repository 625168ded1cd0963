import math

import numpy as np
import pytest
from scipy import stats

from mwkrescale.datagen import (
    DataError, MixtureConfig, NoiseSpec, add_gaussian_noise_features, add_uniform_noise_features,
    generate_mixture, generate_named, inject_within_cluster_noise, load_builtin, load_csv,
    parse_config_name, save_csv,
)


@pytest.fixture(scope="module")
def mix():
    return generate_mixture(MixtureConfig(n=1000, m=6, k=3, seed=11))


def test_mixture_shape_and_classes(mix):
    assert mix.X.shape == (1000, 6)
    sizes = np.bincount(mix.labels)[1:]
    assert len(sizes) == 3 and sizes.min() >= 20 and sizes.sum() == 1000


def test_mixture_rejects_small_n():
    with pytest.raises(ValueError):
        MixtureConfig(n=59, m=2, k=3)


def test_mixture_determinism():
    a = generate_mixture(MixtureConfig(n=200, m=3, k=2, seed=1))
    b = generate_mixture(MixtureConfig(n=200, m=3, k=2, seed=1))
    c = generate_mixture(MixtureConfig(n=200, m=3, k=2, seed=2))
    assert a.X.tobytes() == b.X.tobytes() and np.array_equal(a.labels, b.labels)
    assert not np.array_equal(a.X, c.X)


def test_mixture_within_cluster_variance(mix):
    var = mix.metadata["variances"]
    for l in range(3):
        rows = mix.X[mix.labels == l + 1]
        q = len(rows)
        # 99.9% chi-square band for the sample variance at the drawn sigma^2
        lo = var[l] * stats.chi2.ppf(0.0005, q - 1) / (q - 1)
        hi = var[l] * stats.chi2.ppf(0.9995, q - 1) / (q - 1)
        s2 = rows.var(axis=0, ddof=1)
        assert np.all((s2 > lo) & (s2 < hi))
        assert np.all((s2 > 0.5 * 0.6) & (s2 < 1.5 * 1.67))


def test_cardinalities_cover_the_simplex():
    # counts away from the floor must occur; equal splits would never give them
    mins = [np.bincount(generate_mixture(MixtureConfig(n=200, m=1, k=3, seed=s)).labels)[1:].min()
            for s in range(200)]
    assert min(mins) < 30 and max(mins) > 55


def test_uniform_noise_features(mix):
    out = add_uniform_noise_features(mix, NoiseSpec("NF", count=3, seed=4))
    assert out.X.shape == (1000, 9)
    np.testing.assert_array_equal(out.X[:, :6], mix.X)
    np.testing.assert_array_equal(out.labels, mix.labels)
    lo, hi = mix.X.min(), mix.X.max()
    assert out.X[:, 6:].min() >= lo and out.X[:, 6:].max() <= hi
    default = add_uniform_noise_features(mix, NoiseSpec("NF", seed=4))
    assert default.X.shape[1] == math.ceil(1.5 * 6)
    with pytest.raises(ValueError):
        NoiseSpec("NF", count=0)


def test_uniform_noise_carries_no_class_signal(mix):
    # permutation oracle: F statistic of the noise columns vs label-shuffled nulls
    rng = np.random.default_rng(0)
    exceed = 0
    trials = 0
    for s in range(5):
        out = add_uniform_noise_features(mix, NoiseSpec("NF", count=3, seed=s))
        for v in range(6, 9):
            col = out.X[:, v]
            groups = lambda y: [col[y == c] for c in (1, 2, 3)]
            f_obs = stats.f_oneway(*groups(out.labels)).statistic
            null = [stats.f_oneway(*groups(rng.permutation(out.labels))).statistic for _ in range(200)]
            exceed += f_obs > np.quantile(null, 0.99)
            trials += 1
    assert exceed <= 1


def test_gaussian_noise_features():
    D = generate_mixture(MixtureConfig(n=1000, m=12, k=6, seed=3))
    out = add_gaussian_noise_features(D, NoiseSpec("NNF", count=6, seed=9))
    assert out.X.shape == (1000, 18)
    np.testing.assert_array_equal(out.labels, D.labels)
    np.testing.assert_array_equal(out.X[:, :12], D.X)
    assert np.all(np.abs(out.X[:, 12:].mean(axis=0)) < 0.1)


def _segments_changed(before, after):
    changed = set()
    for c in np.unique(before.labels):
        rows = before.labels == c
        for v in range(before.X.shape[1]):
            if not np.array_equal(before.X[rows, v], after.X[rows, v]):
                changed.add((c, v))
    return changed


def test_within_cluster_noise(mix):
    out = inject_within_cluster_noise(mix, NoiseSpec("WCN", fraction=0.5, seed=2))
    assert out.X.shape == mix.X.shape
    np.testing.assert_array_equal(out.labels, mix.labels)
    changed = _segments_changed(mix, out)
    assert len(changed) == 9
    assert changed == {(c, v) for c, v in out.metadata["noise_segments"]}
    one = inject_within_cluster_noise(mix, NoiseSpec("WCN", fraction=1e-6, seed=2))
    assert len(_segments_changed(mix, one)) == 1
    with pytest.raises(ValueError):
        NoiseSpec("WCN", fraction=0.0)


@pytest.mark.parametrize("name, expected", [
    ("1000x6-3", (1000, 6, 3, None, None)),
    ("1000x6-3 +3NF", (1000, 6, 3, "NF", 3)),
    ("1000x12-6 +6NNF", (1000, 12, 6, "NNF", 6)),
    ("1000x20-10 WCN", (1000, 20, 10, "WCN", None)),
])
def test_parse_config_name(name, expected):
    assert parse_config_name(name) == expected


@pytest.mark.parametrize("name, m_total", [("1000x6-3 +3NF", 9), ("1000x12-6 +6NNF", 18),
                                           ("1000x20-10 +10NF", 30), ("1000x6-3 WCN", 6)])
def test_generate_named_widths(name, m_total):
    D = generate_named(name, seed=5)
    assert D.X.shape == (1000, m_total)
    assert generate_named(name, seed=5).X.tobytes() == D.X.tobytes()


def test_load_csv_one_hot(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,colour,y\n1,red,x\n2,blue,x\n3,green,z\n4,red,z\n", encoding="utf-8")
    D = load_csv(p, label_column="y", categorical_columns=["colour"])
    assert D.X.shape == (4, 4)
    onehot = D.X[:, 1:]
    np.testing.assert_array_equal(onehot.sum(axis=1), [1, 1, 1, 1])
    assert D.data.names == ("a", "colour=blue", "colour=green", "colour=red")
    assert list(D.labels) == ["x", "x", "z", "z"]


def test_load_csv_drops_constant_and_missing(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,c\n1,5,0\n2,5,?\n3,5,1\n4,5,2\n", encoding="utf-8")
    D = load_csv(p)
    assert D.labels is None
    assert D.data.names == ("a", "c")
    assert D.metadata["dropped_constant"] == ["b"]
    assert D.metadata["dropped_missing_rows"] == 1
    with pytest.raises(DataError):
        load_csv(p, missing="error")


def test_load_csv_errors(tmp_path):
    ragged = tmp_path / "r.csv"
    ragged.write_text("a,b\n1,2\n3\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        load_csv(ragged)
    assert info.value.row == 3
    bad = tmp_path / "b.csv"
    bad.write_text("a,b\n1,2\n3,oops\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        load_csv(bad)
    assert (info.value.row, info.value.column) == (3, "b")
    with pytest.raises(DataError):
        load_csv(tmp_path / "missing.csv")


def test_builtin_real_data():
    iris = load_builtin("iris")
    assert iris.X.shape == (150, 4) and iris.n_classes == 3
    zoo = load_builtin("zoo")
    assert zoo.X.shape == (101, 16) and zoo.n_classes == 7


def test_save_and_reload(tmp_path, mix):
    path = tmp_path / "mix.csv"
    save_csv(mix, path)
    back = load_csv(path, label_column="label")
    np.testing.assert_array_equal(back.X, mix.X)
    assert [int(v) for v in back.labels] == mix.labels.tolist()


def test_headerless_soybean_format(tmp_path):
    from mwkrescale.datagen import load_soybean_small
    p = tmp_path / "soy.data"
    p.write_text("0,1,2,D1\n1,1,0,D1\n2,1,2,D2\n0,1,1,D3\n", encoding="utf-8")
    D = load_soybean_small(p)
    # a1 and a3 have three levels each, a2 is constant and dropped
    assert D.X.shape == (4, 6)
    assert D.data.names[:3] == ("a1=0", "a1=1", "a1=2")
    np.testing.assert_array_equal(D.X.sum(axis=1), [2, 2, 2, 2])
    assert list(D.labels) == ["D1", "D1", "D2", "D3"]
    assert D.metadata["dropped_constant"] == ["a2"]
    bad = tmp_path / "bad.data"
    bad.write_text("0,1,D1\n0,D2\n", encoding="utf-8")
    with pytest.raises(DataError) as info:
        load_soybean_small(bad)
    assert info.value.row == 2
