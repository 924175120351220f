"""Desk-scale algorithm comparison.

Runs ILS and the smoothed variant (one run per seed, shared instance) and
prints the comparison table; per-run trace CSVs and summary.csv land under
--out-dir. Defaults reproduce the n=500 comparison: evaluation budget 2e8,
lambda stepping to 0.001..0.004 at 20/40/60/80% of the budget, auto alpha,
20 seeds from master seed 0.

Usage:
    python scripts/run_comparison.py --out-dir comparison-out [--seeds 20]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from lsils.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("-n", type=int, default=500)
    parser.add_argument("--density", type=float, default=0.1)
    parser.add_argument("--instance-seed", type=int, default=7)
    parser.add_argument("--algos", default="ils,lsils:plusminusi,lsils:random")
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--budget", default="evals:2e8")
    parser.add_argument("--log-interval", default="evals:2e6")
    parser.add_argument("--jobs", type=int, default=None)
    parser.add_argument("--out-dir", default="comparison-out")
    args = parser.parse_args()

    argv = [
        "batch",
        "--gen", f"n={args.n},density={args.density},range=-100:100,"
                 f"seed={args.instance_seed}",
        "--algos", args.algos,
        "--seeds", str(args.seeds),
        "--seed", str(args.seed),
        "--budget", args.budget,
        "--log-interval", args.log_interval,
        "--lambda", "paper",
        "--alpha", "auto",
        "--out-dir", args.out_dir,
    ]
    if args.jobs is not None:
        argv += ["--jobs", str(args.jobs)]
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
