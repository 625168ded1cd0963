"""All four arms on the synthetic configurations, with (p1, p2) grids.

The full 0.1-step grid costs about 1,600 imwk-means runs per data set; use
``--step 0.3`` for a quick pass.

Usage: python scripts/synthetic_rescaling.py [--norm range] [--step 0.1] [--configs "1000x6-3 +3NF" ...]
"""
import argparse

from mwkrescale.bench import ExperimentSpec, PGrid, report, run_experiment
from synthetic_kmeanspp import config_names


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--configs", nargs="*", default=None)
    ap.add_argument("--norm", default="range")
    ap.add_argument("--step", type=float, default=0.1)
    ap.add_argument("--datasets", type=int, default=10)
    ap.add_argument("--runs", type=int, default=25)
    ap.add_argument("--seed", type=int, default=2013)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/rescaling")
    args = ap.parse_args()
    grid = PGrid(1.1, 5.0, args.step)
    spec = ExperimentSpec(datasets=tuple(args.configs or config_names()), normalizations=(args.norm,),
                          p_grid=grid, kmeanspp_runs=args.runs, datasets_per_config=args.datasets,
                          master_seed=args.seed)
    print(report(run_experiment(spec, args.workers), args.out, grid.values()))


if __name__ == "__main__":
    main()
