"""k-means++ across the twelve synthetic configurations and four normalisations.

Usage: python scripts/synthetic_kmeanspp.py [--datasets 10] [--runs 25] [--out results/kmeanspp]
"""
import argparse

from mwkrescale.bench import ExperimentSpec, report, run_experiment

CONFIGS = [f"{base}{noise}" for noise in ("", " +{h}NF", " +{h}NNF", " WCN")
           for base in ("1000x6-3", "1000x12-6", "1000x20-10")]


def config_names():
    out = []
    for name in CONFIGS:
        m = int(name.split("x")[1].split("-")[0])
        out.append(name.format(h=(m + 1) // 2))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--datasets", type=int, default=10)
    ap.add_argument("--runs", type=int, default=25)
    ap.add_argument("--seed", type=int, default=2013)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/kmeanspp")
    args = ap.parse_args()
    spec = ExperimentSpec(datasets=tuple(config_names()),
                          normalizations=("minmax", "range", "zscore", "robust"),
                          arms=("kmeans++",), kmeanspp_runs=args.runs,
                          datasets_per_config=args.datasets, master_seed=args.seed)
    print(report(run_experiment(spec, args.workers), args.out))


if __name__ == "__main__":
    main()
