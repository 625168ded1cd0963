"""Experiment harness: dataset batches, normalisations, arms and grid sweeps.

The unit of parallel work is one (dataset instance, normalisation, p1) cell,
which runs imwk-means at p1 once and reuses the fit for every downstream arm
that depends on it.  Records are sorted before they are written, so output
bytes do not depend on worker count or completion order.
"""
from __future__ import annotations

import csv
import hashlib
import logging
import math
import re
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .clustering import DEFAULT_DISPERSION_OFFSET, imwk_means, kmeanspp
from .core import ClusteringError, encode_labels
from .datagen import DataError, generate_named, load_builtin, load_csv, load_soybean_small, parse_config_name
from .evaluation import adjusted_rand_index
from .minkowski import DEFAULT_CENTER_PARAMS
from .normalize import NormalizationMethod, normalize
from .rescale import rescale_with_weights

log = logging.getLogger(__name__)

KMEANSPP, IMWK, RESCALED_KMEANSPP, RESCALED_IMWK = ARMS = (
    "kmeans++", "imwk", "rescaled-kmeans++", "rescaled-imwk")
EMPTY_CELL = ""


class ConfigError(ValueError):
    """Invalid experiment specification."""


def derive_seed(*parts) -> int:
    """64-bit seed that depends only on ``parts`` (ints, floats or strings)."""
    h = hashlib.sha256("\x1f".join(repr(p) for p in parts).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "little")


@dataclass(frozen=True)
class PGrid:
    start: float = 1.1
    stop: float = 5.0
    step: float = 0.1

    def __post_init__(self):
        if not (self.start > 1 and self.stop >= self.start and self.step > 0):
            raise ConfigError(f"invalid exponent grid {self}: need 1 < start <= stop, step > 0")

    def values(self) -> tuple:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return tuple(round(self.start + i * self.step, 10) for i in range(count))


@dataclass(frozen=True)
class DatasetSource:
    """A generator configuration name, a bundled data set, or a CSV file.

    Strings ending in ``.csv`` are paths whose labels sit in ``label_column``;
    a path to ``soybean-small.data`` selects the headerless UCI format.  Any
    other string is a configuration name (``1000x6-3 +3NF``) or a bundled
    data set (``iris``).
    """

    name: str
    path: Optional[str] = None
    label_column: str = "label"
    categorical: tuple = ()
    ignore: tuple = ()
    format: str = "csv"  # or "soybean-small"

    def __post_init__(self):
        if self.format not in ("csv", "soybean-small"):
            raise ConfigError(f"unknown data format {self.format!r}")

    @classmethod
    def coerce(cls, value) -> "DatasetSource":
        if isinstance(value, DatasetSource):
            return value
        if isinstance(value, dict):
            v = dict(value)
            if "path" in v and "name" not in v:
                v["name"] = Path(v["path"]).stem
            for key in ("categorical", "ignore"):
                if key in v:
                    v[key] = tuple(v[key])
            unknown = set(v) - {f.name for f in fields(cls)}
            if unknown:
                raise ConfigError(f"unknown dataset keys {sorted(unknown)}")
            return cls(**v)
        value = str(value)
        if value.lower().endswith(".csv"):
            return cls(name=Path(value).stem, path=value)
        if Path(value).name.lower() == "soybean-small.data":
            return cls(name="soybean-small", path=value, format="soybean-small")
        return cls(name=value)

    @property
    def synthetic(self) -> bool:
        if self.path is not None:
            return False
        try:
            parse_config_name(self.name)
        except ValueError:
            return False
        return True

    def load(self, seed: int):
        if self.synthetic:
            return generate_named(self.name, seed)
        if self.format == "soybean-small":
            return load_soybean_small(self.path)
        if self.path is not None:
            return load_csv(self.path, self.label_column, self.categorical, self.ignore)
        try:
            return load_builtin(self.name)
        except KeyError as exc:
            raise DataError(str(exc.args[0])) from exc


@dataclass(frozen=True)
class ExperimentSpec:
    datasets: tuple
    normalizations: tuple = (NormalizationMethod.RANGE,)
    arms: tuple = ARMS
    p_grid: PGrid = field(default_factory=PGrid)
    kmeanspp_runs: int = 25
    datasets_per_config: int = 10
    master_seed: int = 0
    max_iterations: int = 1000
    dispersion_offset: float = DEFAULT_DISPERSION_OFFSET

    def __post_init__(self):
        ds = tuple(DatasetSource.coerce(d) for d in self.datasets)
        if not ds:
            raise ConfigError("no datasets given")
        object.__setattr__(self, "datasets", ds)
        try:
            norms = tuple(NormalizationMethod.parse(n) for n in self.normalizations)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not norms:
            raise ConfigError("no normalizations given")
        object.__setattr__(self, "normalizations", norms)
        arms = tuple(self.arms)
        bad = [a for a in arms if a not in ARMS]
        if bad or not arms:
            raise ConfigError(f"unknown arms {bad}; choose from {ARMS}")
        object.__setattr__(self, "arms", tuple(a for a in ARMS if a in arms))
        if isinstance(self.p_grid, dict):
            object.__setattr__(self, "p_grid", PGrid(**self.p_grid))
        if self.kmeanspp_runs < 1 or self.datasets_per_config < 1 or self.max_iterations < 1:
            raise ConfigError("kmeanspp_runs, datasets_per_config and max_iterations must be >= 1")
        if self.dispersion_offset < 0:
            raise ConfigError("dispersion_offset must be >= 0")


@dataclass(frozen=True)
class ResultRecord:
    dataset_id: str
    dataset: str
    normalization: str
    arm: str
    p1: Optional[float]
    p2: Optional[float]
    run_index: int
    ari: Optional[float]
    criterion: Optional[float]
    iterations: Optional[int]
    wall_time_ms: float = field(default=0.0, compare=False)
    status: str = "ok"
    reason: str = ""

    def __post_init__(self):
        if self.ari is not None and not -1 - 1e-12 <= self.ari <= 1 + 1e-12:
            raise ValueError(f"ARI {self.ari} outside [-1, 1]")

    @property
    def ok(self) -> bool:
        return self.status == "ok"


RAW_COLUMNS = ("dataset_id", "dataset", "normalization", "arm", "p1", "p2", "run_index",
               "status", "ari", "criterion", "iterations", "reason")
SUMMARY_COLUMNS = ("dataset", "normalization", "arm", "p1", "p2", "mean_ari", "std_ari", "runs")


# ------------------------------------------------------------------ worker


@dataclass(frozen=True)
class _Instance:
    dataset: str
    dataset_id: str
    replicate: int
    X: np.ndarray
    y: np.ndarray
    k: int


def _ari(y, labels) -> float:
    return float(adjusted_rand_index(y, labels))


def _record(inst, norm, arm, p1, p2, run, out=None, elapsed=0.0, error=None):
    if error is not None:
        return ResultRecord(inst.dataset_id, inst.dataset, norm, arm, p1, p2, run, None, None,
                            None, elapsed, "failed", f"{type(error).__name__}: {error}")
    return ResultRecord(inst.dataset_id, inst.dataset, norm, arm, p1, p2, run,
                        _ari(inst.y, out.labels), float(out.criterion), int(out.iterations), elapsed)


def _timed(fn, *args):
    t = time.perf_counter()
    try:
        return fn(*args), None, (time.perf_counter() - t) * 1000
    except (ClusteringError, ValueError, FloatingPointError) as exc:
        return None, exc, (time.perf_counter() - t) * 1000


def _kmeanspp_runs(inst, Xn, norm, arm, p1, spec, grid_key):
    recs = []
    for r in range(spec.kmeanspp_runs):
        seed = derive_seed(spec.master_seed, inst.dataset_id, arm, grid_key, r)
        out, err, ms = _timed(kmeanspp, Xn, inst.k, seed, spec.max_iterations)
        recs.append(_record(inst, norm, arm, p1, None, r, out, ms, err))
    return recs


def _run_unit(args):
    """Records for one (instance, normalisation, p1-or-baseline) cell."""
    inst, norm, p1, spec = args
    try:
        Xn = normalize(inst.X, norm)
    except ValueError as exc:
        return _unit_failures(inst, norm, p1, spec, exc)
    if p1 is None:
        return _kmeanspp_runs(inst, Xn, norm, KMEANSPP, None, spec, "-")
    recs = []
    first, err, ms = _timed(imwk_means, Xn, inst.k, p1, spec.max_iterations,
                            DEFAULT_CENTER_PARAMS, spec.dispersion_offset)
    if IMWK in spec.arms:
        recs.append(_record(inst, norm, IMWK, p1, None, 0, first, ms, err))
    if err is not None:
        stage = ClusteringError(f"stage-2 imwk at p1={p1}: {err}")
        return recs + _unit_failures(inst, norm, p1, spec, stage, skip=(IMWK,))
    Xr = rescale_with_weights(Xn, first.labels, first.weights)
    if RESCALED_KMEANSPP in spec.arms:
        recs += _kmeanspp_runs(inst, Xr, norm, RESCALED_KMEANSPP, p1, spec, p1)
    if RESCALED_IMWK in spec.arms:
        for p2 in spec.p_grid.values():
            out, err, ms = _timed(imwk_means, Xr, inst.k, p2, spec.max_iterations,
                                  DEFAULT_CENTER_PARAMS, spec.dispersion_offset)
            recs.append(_record(inst, norm, RESCALED_IMWK, p1, p2, 0, out, ms, err))
    return recs


def _unit_failures(inst, norm, p1, spec, exc, skip=()):
    recs = []
    fail = lambda arm, q1, q2, r: _record(inst, norm, arm, q1, q2, r, error=exc)
    if p1 is None:
        return [fail(KMEANSPP, None, None, r) for r in range(spec.kmeanspp_runs)]
    if IMWK in spec.arms and IMWK not in skip:
        recs.append(fail(IMWK, p1, None, 0))
    if RESCALED_KMEANSPP in spec.arms:
        recs += [fail(RESCALED_KMEANSPP, p1, None, r) for r in range(spec.kmeanspp_runs)]
    if RESCALED_IMWK in spec.arms:
        recs += [fail(RESCALED_IMWK, p1, p2, 0) for p2 in spec.p_grid.values()]
    return recs


# -------------------------------------------------------------- experiment


def load_instances(spec: ExperimentSpec) -> list:
    """Materialise every dataset instance; raises DataError on unusable input."""
    out = []
    for src in spec.datasets:
        reps = spec.datasets_per_config if src.synthetic else 1
        for r in range(reps):
            did = f"{src.name}#{r}"
            D = src.load(derive_seed(spec.master_seed, did, "data"))
            if D.labels is None:
                raise DataError(f"data set {src.name!r} has no labels to score against")
            y = encode_labels(D.labels)
            out.append(_Instance(src.name, did, r, np.asarray(D.X), y, int(y.max()) + 1))
    return out


def _units(spec, instances):
    needs_p1 = any(a in spec.arms for a in (IMWK, RESCALED_KMEANSPP, RESCALED_IMWK))
    for inst in instances:
        for norm in spec.normalizations:
            if KMEANSPP in spec.arms:
                yield inst, norm.value, None, spec
            if needs_p1:
                for p1 in spec.p_grid.values():
                    yield inst, norm.value, p1, spec


def _sort_key(spec):
    dpos = {d.name: i for i, d in enumerate(spec.datasets)}
    npos = {n.value: i for i, n in enumerate(spec.normalizations)}
    apos = {a: i for i, a in enumerate(ARMS)}

    def key(r):
        rep = int(r.dataset_id.rpartition("#")[2])
        return (dpos[r.dataset], rep, npos[r.normalization], apos[r.arm],
                -1 if r.p1 is None else r.p1, -1 if r.p2 is None else r.p2, r.run_index)
    return key


def run_experiment(spec: ExperimentSpec, workers: int = 1, instances=None) -> list:
    """Run every arm of ``spec``; returns records in canonical order.

    Failures become records with ``status="failed"``; the batch never aborts
    on an algorithm error.
    """
    instances = load_instances(spec) if instances is None else instances
    units = list(_units(spec, instances))
    if workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_unit, units))
    else:
        chunks = [_run_unit(u) for u in units]
    records = [r for chunk in chunks for r in chunk]
    for r in records:
        if not r.ok:
            log.warning("%s %s %s p1=%s p2=%s run %d failed: %s", r.dataset_id, r.normalization,
                        r.arm, r.p1, r.p2, r.run_index, r.reason)
    return sorted(records, key=_sort_key(spec))


# --------------------------------------------------------------- summaries


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    normalization: str
    arm: str
    p1: Optional[float]
    p2: Optional[float]
    mean_ari: Optional[float]
    std_ari: Optional[float]
    runs: int


def summarize(records: Sequence[ResultRecord]) -> list:
    """Mean and population std of ARI per (dataset, normalisation, arm, p1, p2).

    Cells without a successful run keep ``None`` for mean and std.
    """
    groups = {}
    for r in records:
        groups.setdefault((r.dataset, r.normalization, r.arm, r.p1, r.p2), []).append(r)
    rows = []
    for (d, n, a, p1, p2), recs in groups.items():
        vals = np.array([r.ari for r in recs if r.ok], dtype=float)
        if len(vals):
            rows.append(SummaryRow(d, n, a, p1, p2, float(vals.mean()), float(vals.std()), len(vals)))
        else:
            rows.append(SummaryRow(d, n, a, p1, p2, None, None, 0))
    return rows


def best_cells(summary: Sequence[SummaryRow]) -> list:
    """Grid argmax of mean ARI per (dataset, normalisation, arm).

    Ties go to the smaller p1, then the smaller p2.
    """
    best = {}
    for row in sorted(summary, key=lambda s: (s.p1 or -1, s.p2 or -1)):
        if row.mean_ari is None:
            continue
        key = (row.dataset, row.normalization, row.arm)
        if key not in best or row.mean_ari > best[key].mean_ari:
            best[key] = row
    order = {s: i for i, s in enumerate(dict.fromkeys((s.dataset, s.normalization, s.arm) for s in summary))}
    return sorted(best.values(), key=lambda s: order[(s.dataset, s.normalization, s.arm)])


@dataclass(frozen=True)
class GridResult:
    dataset: str
    normalization: str
    p_values: tuple
    mean: np.ndarray  # NaN where a cell has no successful run
    mask: np.ndarray  # True where the cell does not beat the baseline
    baseline: Optional[float]

    def best(self):
        """(p1, p2, mean) of the argmax cell; ties go to smaller p1 then p2."""
        if np.all(np.isnan(self.mean)):
            return None
        i, j = np.unravel_index(np.nanargmax(self.mean), self.mean.shape)
        return self.p_values[i], self.p_values[j], float(self.mean[i, j])


def grid_from_summary(summary, dataset, normalization, p_values) -> GridResult:
    norm = NormalizationMethod.parse(normalization).value
    index = {p: i for i, p in enumerate(p_values)}
    G = np.full((len(p_values), len(p_values)), np.nan)
    baseline = None
    for s in summary:
        if s.dataset != dataset or s.normalization != norm:
            continue
        if s.arm == KMEANSPP:
            baseline = s.mean_ari
        elif s.arm == RESCALED_IMWK and s.mean_ari is not None:
            G[index[s.p1], index[s.p2]] = s.mean_ari
    with np.errstate(invalid="ignore"):
        mask = np.isnan(G) | (G <= baseline if baseline is not None else False)
    return GridResult(dataset, norm, tuple(p_values), G, mask, baseline)


def sweep_grid(dataset, normalization, spec: ExperimentSpec, workers: int = 1) -> tuple:
    """Rescaled imwk-means over the full (p1, p2) grid for one dataset batch.

    Returns ``(GridResult, records)``; the k-means++ baseline is computed
    once for the batch.
    """
    sub = ExperimentSpec(
        datasets=(DatasetSource.coerce(dataset),), normalizations=(normalization,),
        arms=(KMEANSPP, RESCALED_IMWK), p_grid=spec.p_grid, kmeanspp_runs=spec.kmeanspp_runs,
        datasets_per_config=spec.datasets_per_config, master_seed=spec.master_seed,
        max_iterations=spec.max_iterations, dispersion_offset=spec.dispersion_offset,
    )
    records = run_experiment(sub, workers)
    grid = grid_from_summary(summarize(records), sub.datasets[0].name, normalization,
                             spec.p_grid.values())
    for i, j in zip(*np.nonzero(np.isnan(grid.mean))):
        log.warning("grid cell p1=%s p2=%s has no successful run", grid.p_values[i], grid.p_values[j])
    return grid, records


# ------------------------------------------------------------------ output


def check_writable(out_dir) -> Path:
    """Create ``out_dir`` and prove it is writable, before any computation."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=out, prefix=".probe"):
            pass
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _full(v) -> str:
    return "" if v is None else repr(float(v)) if isinstance(v, float) else str(v)


def _short(v) -> str:
    return EMPTY_CELL if v is None else f"{v:.6g}"


def _p(v) -> str:
    return "" if v is None else f"{v:g}"


def _writer(path):
    f = open(path, "w", newline="", encoding="utf-8")
    return f, csv.writer(f, lineterminator="\n")


def write_raw(records, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(RAW_COLUMNS)
        for r in records:
            d = asdict(r)
            w.writerow([_p(d[c]) if c in ("p1", "p2") else _full(d[c]) for c in RAW_COLUMNS])


def read_raw(path) -> list:
    def num(s, cast=float):
        return None if s == "" else cast(s)
    with open(path, newline="", encoding="utf-8") as f:
        return [ResultRecord(
            row["dataset_id"], row["dataset"], row["normalization"], row["arm"],
            num(row["p1"]), num(row["p2"]), int(row["run_index"]), num(row["ari"]),
            num(row["criterion"]), num(row["iterations"], int), 0.0, row["status"], row["reason"],
        ) for row in csv.DictReader(f)]


def write_timings(records, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(("dataset_id", "normalization", "arm", "p1", "p2", "run_index", "wall_time_ms"))
        for r in records:
            w.writerow((r.dataset_id, r.normalization, r.arm, _p(r.p1), _p(r.p2), r.run_index,
                        f"{r.wall_time_ms:.3f}"))


def write_summary(rows, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(SUMMARY_COLUMNS)
        for s in rows:
            w.writerow((s.dataset, s.normalization, s.arm, _p(s.p1), _p(s.p2),
                        _short(s.mean_ari), _short(s.std_ari), s.runs))


def _slug(text) -> str:
    return re.sub(r"[^A-Za-z0-9_-]+", "_", text).strip("_")


def write_grid(grid: GridResult, out_dir) -> tuple:
    """Write the mean-ARI grid (p1 rows, p2 columns) and its parallel mask."""
    out = Path(out_dir)
    stem = f"{_slug(grid.dataset)}_{grid.normalization}"
    paths = out / f"grid_{stem}.csv", out / f"mask_{stem}.csv"
    for path, values, fmt in ((paths[0], grid.mean, lambda v: EMPTY_CELL if np.isnan(v) else f"{v:.6g}"),
                              (paths[1], grid.mask, lambda v: str(int(v)))):
        f, w = _writer(path)
        with f:
            w.writerow(["p1\\p2", *(_p(p) for p in grid.p_values)])
            for p1, row in zip(grid.p_values, values):
                w.writerow([_p(p1), *(fmt(v) for v in row)])
    return paths


def report(records: Sequence[ResultRecord], out_dir, p_values=None) -> str:
    """Write raw, timing, summary, best-cell and grid CSVs; return a text summary.

    Wall times go to ``timings.csv`` so that ``raw.csv`` is byte-identical
    across reruns of one spec.
    """
    if not records:
        raise ValueError("no records to report")
    out = check_writable(out_dir)
    write_raw(records, out / "raw.csv")
    write_timings(records, out / "timings.csv")
    summary = summarize(records)
    write_summary(summary, out / "summary.csv")
    best = best_cells(summary)
    write_summary(best, out / "best.csv")
    if p_values is not None:
        pairs = dict.fromkeys((s.dataset, s.normalization) for s in summary if s.arm == RESCALED_IMWK)
        for d, n in pairs:
            write_grid(grid_from_summary(summary, d, n, p_values), out)
    failed = sum(not r.ok for r in records)
    lines = [f"{len(records)} records, {failed} failed"]
    for s in best:
        where = " ".join(f"{k}={_p(v)}" for k, v in (("p1", s.p1), ("p2", s.p2)) if v is not None)
        lines.append(f"{s.dataset} [{s.normalization}] {s.arm}: mean ARI {s.mean_ari:.4f} "
                     f"+/- {s.std_ari:.4f} over {s.runs} runs {where}".rstrip())
    return "\n".join(lines)
