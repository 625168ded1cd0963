"""Synthetic Gaussian mixtures, noise injection and CSV loading."""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import DataMatrix, LabeledDataset


class DataError(ValueError):
    """Malformed input data; ``row`` and ``column`` locate the problem when known."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)


@dataclass(frozen=True)
class MixtureConfig:
    n: int = 1000
    m: int = 6
    k: int = 3
    min_cardinality: int = 20
    sigma_range: tuple = (0.5, 1.5)
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or self.m < 1:
            raise ValueError("k and m must be >= 1")
        if self.n < self.k * self.min_cardinality:
            raise ValueError(
                f"n={self.n} cannot hold {self.k} clusters of at least {self.min_cardinality}"
            )


@dataclass(frozen=True)
class NoiseSpec:
    model: str  # "NF", "NNF" or "WCN"
    count: Optional[int] = None
    fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("NF", "NNF", "WCN"):
            raise ValueError(f"unknown noise model {self.model!r}")
        if self.model == "WCN" and not 0 < self.fraction <= 1:
            raise ValueError("fraction must lie in (0, 1]")
        if self.model != "WCN" and self.count is not None and self.count < 1:
            raise ValueError("noise feature count must be >= 1")


def _cardinalities(rng, n, k, floor):
    # Dirichlet(1,...,1)-multinomial is uniform over compositions of the remainder
    extra = rng.multinomial(n - k * floor, rng.dirichlet(np.ones(k)))
    return floor + extra


def generate_mixture(cfg: MixtureConfig) -> LabeledDataset:
    """Spherical Gaussian clusters with N(0,1) centroid components.

    Each cluster draws its variance uniformly from ``cfg.sigma_range``.  Rows
    are shuffled; labels are 1..k.
    """
    rng = np.random.default_rng(cfg.seed)
    sizes = _cardinalities(rng, cfg.n, cfg.k, cfg.min_cardinality)
    centroids = rng.standard_normal((cfg.k, cfg.m))
    variances = rng.uniform(*cfg.sigma_range, size=cfg.k)
    blocks, labels = [], []
    for l, (size, var) in enumerate(zip(sizes, variances)):
        blocks.append(centroids[l] + math.sqrt(var) * rng.standard_normal((size, cfg.m)))
        labels.append(np.full(size, l + 1))
    X = np.vstack(blocks)
    y = np.concatenate(labels)
    order = rng.permutation(cfg.n)
    meta = {
        "generator": "gaussian_mixture",
        "sizes": sizes.tolist(),
        "variances": variances.tolist(),
        "seed": cfg.seed,
    }
    return LabeledDataset(DataMatrix(X[order]), y[order], meta)


def _with_columns(D: LabeledDataset, cols, prefix, extra_meta):
    X = np.hstack([D.X, cols])
    names = D.data.names + tuple(f"{prefix}{j + 1}" for j in range(cols.shape[1]))
    meta = dict(D.metadata, **extra_meta)
    return LabeledDataset(DataMatrix(X, names), D.labels, meta)


def _default_count(D, spec):
    return spec.count if spec.count is not None else math.ceil(D.data.m / 2)


def add_uniform_noise_features(D: LabeledDataset, spec: NoiseSpec) -> LabeledDataset:
    """Append columns uniform over the pooled [min, max] of the existing data."""
    count = _default_count(D, spec)
    rng = np.random.default_rng(spec.seed)
    lo, hi = float(D.X.min()), float(D.X.max())
    cols = rng.uniform(lo, hi, size=(D.data.n, count))
    return _with_columns(D, cols, "nf", {"noise": "NF", "noise_count": count,
                                         "noise_range": [lo, hi]})


def add_gaussian_noise_features(D: LabeledDataset, spec: NoiseSpec) -> LabeledDataset:
    """Append standard-normal columns."""
    count = _default_count(D, spec)
    rng = np.random.default_rng(spec.seed)
    cols = rng.standard_normal((D.data.n, count))
    return _with_columns(D, cols, "nnf", {"noise": "NNF", "noise_count": count})


def inject_within_cluster_noise(D: LabeledDataset, spec: NoiseSpec) -> LabeledDataset:
    """Overwrite ceil(fraction * m * k) feature segments with uniform noise.

    A segment is one feature restricted to one true cluster; replacement
    values are uniform over that feature's observed [min, max].
    """
    if D.labels is None:
        raise ValueError("within-cluster noise needs labels")
    rng = np.random.default_rng(spec.seed)
    classes = list(dict.fromkeys(D.labels.tolist()))
    m, k = D.data.m, len(classes)
    n_seg = math.ceil(spec.fraction * m * k - 1e-9)
    picks = rng.choice(m * k, size=n_seg, replace=False)
    X = D.X.copy()
    lo, hi = D.X.min(axis=0), D.X.max(axis=0)
    segments = []
    for s in sorted(picks.tolist()):
        l, v = divmod(s, m)
        rows = D.labels == classes[l]
        X[rows, v] = rng.uniform(lo[v], hi[v], size=int(rows.sum()))
        segments.append((classes[l], v))
    meta = dict(D.metadata, noise="WCN", noise_segments=segments)
    return LabeledDataset(DataMatrix(X, D.data.feature_names), D.labels, meta)


def add_noise(D: LabeledDataset, spec: NoiseSpec) -> LabeledDataset:
    return {
        "NF": add_uniform_noise_features,
        "NNF": add_gaussian_noise_features,
        "WCN": inject_within_cluster_noise,
    }[spec.model](D, spec)


_CONFIG_RE = re.compile(r"^(\d+)x(\d+)-(\d+)\s*(?:\+\s*(\d+)\s*(NNF|NF)|(WCN))?$", re.I)


def parse_config_name(name: str):
    """Parse names such as ``1000x6-3``, ``1000x6-3 +3NF`` or ``1000x20-10 WCN``.

    Returns ``(n, m, k, noise_model_or_None, noise_count_or_None)``.
    """
    mt = _CONFIG_RE.match(name.strip().replace(" ", ""))
    if not mt:
        raise ValueError(f"not a mixture configuration name: {name!r}")
    n, m, k = (int(mt.group(i)) for i in (1, 2, 3))
    if mt.group(5):
        return n, m, k, mt.group(5).upper(), int(mt.group(4))
    if mt.group(6):
        return n, m, k, "WCN", None
    return n, m, k, None, None


def generate_named(name: str, seed: int) -> LabeledDataset:
    """Generate a dataset from a configuration name with one seed.

    The mixture and the noise use independent child streams of ``seed``.
    """
    n, m, k, model, count = parse_config_name(name)
    mix_seed, noise_seed = np.random.SeedSequence(seed).generate_state(2)
    D = generate_mixture(MixtureConfig(n=n, m=m, k=k, seed=int(mix_seed)))
    if model is not None:
        D = add_noise(D, NoiseSpec(model, count=count, seed=int(noise_seed)))
    return LabeledDataset(D.data, D.labels, dict(D.metadata, config=name))


MISSING = {"", "?", "na", "nan", "NA", "NaN"}


def _to_float(cell):
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, label_column: Optional[str] = None,
             categorical_columns: Sequence[str] = (), ignore_columns: Sequence[str] = (),
             missing: str = "drop", names: Optional[Sequence[str]] = None) -> LabeledDataset:
    """Load a comma-separated file with a header row.

    Pass ``names`` for files without a header; every row is then data.

    Categorical columns with t categories become t one-hot columns (named
    ``col=value``, categories in sorted order).  Constant numeric columns are
    dropped and reported in ``metadata["dropped_constant"]``.  Rows with a
    missing cell (empty, ``?``, ``NA``) are dropped when ``missing="drop"``
    and rejected when ``missing="error"``.
    """
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise DataError(f"{path} is not UTF-8: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    if names is None:
        header, body, first = [h.strip() for h in rows[0]], rows[1:], 2
    else:
        header, body, first = [str(n) for n in names], rows, 1
    numbered = [(i + first, r) for i, r in enumerate(body) if any(c.strip() for c in r)]
    for lineno, r in numbered:
        if len(r) != len(header):
            raise DataError(f"expected {len(header)} cells, found {len(r)}", row=lineno)
    for col in [label_column, *categorical_columns, *ignore_columns]:
        if col is not None and col not in header:
            raise DataError(f"no such column in {path.name}", column=col)

    keep, dropped_missing = [], 0
    for lineno, r in numbered:
        if any(c.strip() in MISSING for j, c in enumerate(r) if header[j] not in ignore_columns):
            if missing == "error":
                raise DataError("missing value", row=lineno)
            dropped_missing += 1
            continue
        keep.append((lineno, [c.strip() for c in r]))
    if not keep:
        raise DataError(f"{path.name} has no complete rows")

    cats = set(categorical_columns)
    columns, names, dropped_constant = [], [], []
    for j, col in enumerate(header):
        if col == label_column or col in ignore_columns:
            continue
        cells = [r[j] for _, r in keep]
        if col in cats:
            levels = sorted(set(cells))
            if len(levels) < 2:
                raise DataError("categorical column needs at least two categories", column=col)
            for lev in levels:
                columns.append([1.0 if c == lev else 0.0 for c in cells])
                names.append(f"{col}={lev}")
            continue
        vals = []
        for (lineno, _), c in zip(keep, cells):
            v = _to_float(c)
            if v is None:
                raise DataError(f"non-numeric value {c!r}", row=lineno, column=col)
            vals.append(v)
        if max(vals) == min(vals):
            dropped_constant.append(col)
            continue
        columns.append(vals)
        names.append(col)
    if not columns:
        raise DataError(f"{path.name} has no usable features")
    X = np.array(columns, dtype=float).T
    labels = None
    if label_column is not None:
        jl = header.index(label_column)
        labels = np.array([r[jl] for _, r in keep])
    meta = {
        "source": str(path),
        "dropped_constant": dropped_constant,
        "dropped_missing_rows": dropped_missing,
        "categorical": list(categorical_columns),
    }
    return LabeledDataset(DataMatrix(X, names), labels, meta)


BUILTIN = {
    "iris": dict(label_column="class"),
    "zoo": dict(label_column="type", ignore_columns=("name",)),
}


def load_builtin(name: str) -> LabeledDataset:
    """Load a bundled real data set (``iris`` or ``zoo``)."""
    key = name.lower()
    if key not in BUILTIN:
        raise KeyError(f"no bundled data set {name!r}; available: {sorted(BUILTIN)}")
    with resources.as_file(resources.files(__package__) / "data" / f"{key}.csv") as path:
        D = load_csv(path, **BUILTIN[key])
    return LabeledDataset(D.data, D.labels, dict(D.metadata, source=key))


def load_soybean_small(path) -> LabeledDataset:
    """Load the headerless UCI ``soybean-small.data`` file (47 x 35, 4 classes).

    Every attribute is a coded category and is one-hot expanded; attributes
    that take a single value are dropped as constant.
    """
    path = Path(path)
    try:
        with open(path, newline="", encoding="utf-8") as f:
            rows = [r for r in csv.reader(f) if r]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path} is empty")
    m = len(rows[0]) - 1
    names = [f"a{j + 1}" for j in range(m)] + ["class"]
    varying = [names[j] for j in range(m) if len({r[j].strip() for r in rows if len(r) > j}) > 1]
    return load_csv(path, label_column="class", categorical_columns=varying, names=names)


def save_csv(D: LabeledDataset, path, float_format="{!r}") -> None:
    """Write ``D`` with a trailing ``label`` column (when labelled)."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        header = list(D.data.names) + (["label"] if D.labels is not None else [])
        w.writerow(header)
        for i, row in enumerate(D.X):
            cells = [float_format.format(float(v)) for v in row]
            if D.labels is not None:
                cells.append(str(D.labels[i]))
            w.writerow(cells)
