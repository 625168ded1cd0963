"""All four arms on the bundled real data sets under range and z-score.

Extra CSVs can be added with ``--csv path:label_column``; the UCI
soybean-small file is accepted as is.

Usage: python scripts/real_data.py [--csv data/x.csv:class] [--soybean soybean-small.data]
"""
import argparse

from mwkrescale.bench import DatasetSource, ExperimentSpec, report, run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--csv", nargs="*", default=[])
    ap.add_argument("--soybean", default=None)
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2013)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/real")
    args = ap.parse_args()
    sources = [DatasetSource("iris"), DatasetSource("zoo")]
    for item in args.csv:
        path, _, label = item.rpartition(":")
        sources.append(DatasetSource.coerce({"path": path, "label_column": label}))
    if args.soybean:
        sources.append(DatasetSource.coerce(args.soybean))
    spec = ExperimentSpec(datasets=tuple(sources), normalizations=("range", "zscore"),
                          kmeanspp_runs=args.runs, master_seed=args.seed)
    print(report(run_experiment(spec, args.workers), args.out, spec.p_grid.values()))


if __name__ == "__main__":
    main()
