"""Command-line entry point: ``generate``, ``cluster``, ``bench`` and ``sweep``.

Settings come from built-in defaults, then an optional flat YAML/JSON
``--config`` file, then command-line flags (highest precedence).

Exit codes: 0 success, 2 configuration error, 3 data error, 4 some runs failed.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np
import yaml

from . import bench
from .bench import ARMS, ConfigError, DatasetSource, ExperimentSpec, PGrid
from .clustering import DEFAULT_DISPERSION_OFFSET, RunConfig, cluster, kmeanspp
from .core import ClusteringError, encode_labels
from .datagen import DataError, generate_named, save_csv
from .evaluation import adjusted_rand_index
from .normalize import NormalizationMethod, normalize
from .rescale import RescalePipelineConfig, rescaled_imwk, rescaled_kmeanspp

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_PARTIAL = 0, 2, 3, 4

DEFAULTS = {
    "datasets": [],
    "norm": ["range"],
    "arm": list(ARMS),
    "k": None,
    "p": None,
    "p1": None,
    "p2": None,
    "p_start": 1.1,
    "p_stop": 5.0,
    "p_step": 0.1,
    "runs": 25,
    "datasets_per_config": 10,
    "seed": 0,
    "workers": 1,
    "out": "results",
    "max_iterations": 1000,
    "dispersion_offset": DEFAULT_DISPERSION_OFFSET,
}
LIST_KEYS = {"datasets", "norm", "arm"}
CLUSTER_ARMS = ("kmeans++", "ikmeans", "mwk", "imwk", "rescaled-kmeans++", "rescaled-imwk")

log = logging.getLogger("mwkrescale")


def load_config_file(path) -> dict:
    """Read a flat mapping from a YAML (or JSON) file."""
    try:
        with open(path, encoding="utf-8") as f:
            doc = yaml.safe_load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML/JSON: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a mapping of settings")
    aliases = {"normalizations": "norm", "arms": "arm", "kmeanspp_runs": "runs",
               "master_seed": "seed", "dataset": "datasets"}
    out = {}
    for key, value in doc.items():
        key = aliases.get(str(key).replace("-", "_"), str(key).replace("-", "_"))
        if key not in DEFAULTS:
            raise ConfigError(f"unknown setting {key!r} in {path}")
        if isinstance(value, dict) and key != "datasets":
            raise ConfigError(f"setting {key!r} must be flat, got a mapping")
        if key in LIST_KEYS and not isinstance(value, list):
            value = [value]
        out[key] = value
    return out


def resolve(args) -> dict:
    """Merge defaults < config file < explicit flags."""
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        settings.update(load_config_file(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and value != []:
            settings[key] = value
    return settings


def _comma_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _spec(s, datasets=None) -> ExperimentSpec:
    return ExperimentSpec(
        datasets=tuple(datasets if datasets is not None else s["datasets"]),
        normalizations=tuple(s["norm"]), arms=tuple(s["arm"]),
        p_grid=PGrid(float(s["p_start"]), float(s["p_stop"]), float(s["p_step"])),
        kmeanspp_runs=int(s["runs"]), datasets_per_config=int(s["datasets_per_config"]),
        master_seed=int(s["seed"]), max_iterations=int(s["max_iterations"]),
        dispersion_offset=float(s["dispersion_offset"]),
    )


# --------------------------------------------------------------- commands


def cmd_generate(args, s) -> int:
    out = bench.check_writable(s["out"])
    src = DatasetSource.coerce(args.name)
    if not src.synthetic:
        raise ConfigError(f"{args.name!r} is not a generator configuration such as '1000x6-3 +3NF'")
    count = int(args.count if args.count is not None else s["datasets_per_config"])
    for r in range(count):
        did = f"{src.name}#{r}"
        D = generate_named(src.name, bench.derive_seed(int(s["seed"]), did, "data"))
        path = out / f"{bench._slug(src.name)}_{r}.csv"
        save_csv(D, path)
        print(path)
    return EXIT_OK


def cmd_cluster(args, s) -> int:
    src = DatasetSource.coerce(args.dataset)
    D = src.load(bench.derive_seed(int(s["seed"]), f"{src.name}#0", "data"))
    if D.labels is None and s["k"] is None:
        raise ConfigError("unlabelled data needs --k")
    y = encode_labels(D.labels) if D.labels is not None else None
    k = int(s["k"]) if s["k"] is not None else int(y.max()) + 1
    arm = args.arm or "imwk"
    norm = s["norm"][0] if isinstance(s["norm"], list) else s["norm"]
    offset = float(s["dispersion_offset"])
    if arm in ("rescaled-imwk", "rescaled-kmeans++"):
        p1 = s["p1"] if s["p1"] is not None else s["p"]
        if p1 is None:
            raise ConfigError(f"{arm} needs --p1")
        cfg = RescalePipelineConfig(
            k=k, p1=float(p1), p2=None if arm == "rescaled-kmeans++" else float(s["p2"] or p1),
            normalization=norm, downstream="imwk" if arm == "rescaled-imwk" else "kmeans++",
            kmeanspp_runs=int(s["runs"]), seed=int(s["seed"]),
            max_iterations=int(s["max_iterations"]), dispersion_offset=offset)
        outs = [rescaled_imwk(D.X, cfg)] if arm == "rescaled-imwk" else rescaled_kmeanspp(D.X, cfg)
    else:
        X = normalize(D.X, norm)
        if arm == "kmeans++":
            seeds = [bench.derive_seed(int(s["seed"]), f"{src.name}#0", arm, "-", r)
                     for r in range(int(s["runs"]))]
            outs = [kmeanspp(X, k, sd, int(s["max_iterations"])) for sd in seeds]
        else:
            p = s["p"] if s["p"] is not None else s["p1"]
            cfg = RunConfig(k=k, p=None if p is None else float(p), seed=int(s["seed"]),
                            max_iterations=int(s["max_iterations"]), dispersion_offset=offset)
            outs = [cluster(X, arm, cfg)]
    crit = np.array([o.criterion for o in outs])
    print(f"dataset {src.name}  arm {arm}  k {k}  norm {norm}  runs {len(outs)}")
    print(f"criterion {crit.mean():.6g}" + (f" +/- {crit.std():.3g}" if len(outs) > 1 else ""))
    if y is not None:
        a = np.array([adjusted_rand_index(y, o.labels) for o in outs])
        print(f"ARI {a.mean():.6g}" + (f" +/- {a.std():.3g}" if len(outs) > 1 else ""))
    if args.labels:
        out = bench.check_writable(s["out"])
        np.savetxt(out / "labels.csv", outs[0].labels + 1, fmt="%d")
    return EXIT_OK


def cmd_bench(args, s) -> int:
    spec = _spec(s)
    bench.check_writable(s["out"])
    records = bench.run_experiment(spec, int(s["workers"]))
    print(bench.report(records, s["out"], spec.p_grid.values()))
    return EXIT_PARTIAL if any(not r.ok for r in records) else EXIT_OK


def cmd_sweep(args, s) -> int:
    spec = _spec(s, datasets=[args.dataset])
    out = bench.check_writable(s["out"])
    norm = spec.normalizations[0]
    grid, records = bench.sweep_grid(spec.datasets[0], norm, spec, int(s["workers"]))
    bench.report(records, out)
    gpath, mpath = bench.write_grid(grid, out)
    best = grid.best()
    base = "n/a" if grid.baseline is None else f"{grid.baseline:.4f}"
    print(f"k-means++ baseline mean ARI {base}")
    if best is not None:
        print(f"best cell p1={best[0]:g} p2={best[1]:g} mean ARI {best[2]:.4f}")
    print(f"{int(grid.mask.sum())} of {grid.mask.size} cells masked; grid {gpath}, mask {mpath}")
    return EXIT_PARTIAL if any(not r.ok for r in records) else EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat YAML/JSON settings file")
    common.add_argument("--k", type=int)
    common.add_argument("--p", type=float)
    common.add_argument("--p1", type=float)
    common.add_argument("--p2", type=float)
    common.add_argument("--norm", type=_comma_list,
                        help="zscore|robust|range|minmax|unit|none (comma-separated for bench)")
    common.add_argument("--runs", type=int, help="k-means++ runs per data set")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--workers", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--datasets-per-config", dest="datasets_per_config", type=int)
    common.add_argument("--p-step", dest="p_step", type=float, help="exponent grid step")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="mwkrescale", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    g = sub.add_parser("generate", parents=[common], help="write synthetic data set CSVs")
    g.add_argument("name", help="configuration name, e.g. '1000x6-3 +3NF'")
    g.add_argument("--count", type=int, help="number of data sets (default datasets_per_config)")
    c = sub.add_parser("cluster", parents=[common], help="run one algorithm on one data set")
    c.add_argument("dataset", help="configuration name, bundled name (iris, zoo) or CSV path")
    c.add_argument("--arm", choices=CLUSTER_ARMS)
    c.add_argument("--labels", action="store_true", help="write labels.csv to --out")
    b = sub.add_parser("bench", parents=[common], help="run a full experiment")
    b.add_argument("datasets", nargs="*", help="data sets (overrides the config file)")
    b.add_argument("--arm", type=_comma_list, help=f"comma-separated subset of {','.join(ARMS)}")
    w = sub.add_parser("sweep", parents=[common], help="(p1, p2) grid for one data set batch")
    w.add_argument("dataset")
    return parser


COMMANDS = {"generate": cmd_generate, "cluster": cmd_cluster, "bench": cmd_bench, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        s = resolve(args)
        if args.command == "bench" and not s["datasets"]:
            raise ConfigError("bench needs data sets (positional or 'datasets' in --config)")
        for n in s["norm"]:
            NormalizationMethod.parse(n)
        return COMMANDS[args.command](args, s)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ClusteringError as exc:
        print(f"clustering failed: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
