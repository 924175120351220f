"""Small-instance landscape study.

Generates one dense random instance, then reports the local-optima census,
value histogram size, and collision probability for the original objective,
each toy objective anchored at a random point, and the smoothed blends over
a lambda grid. Writes per-objective histograms and per-kind sweep curves as
CSV files.

Usage:
    python scripts/landscape_study.py --out-dir study-out [-n 18] [--seed 7]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from lsils import (
    ToyKind,
    analyze,
    construct_toy,
    gen_random_instance,
    lambda_sweep,
    random_solution,
    seeded_rng,
)
from lsils.landscape import histogram_csv, report_text, sweep_csv

ANCHOR_STREAM = 5

# Blend scales sized so the toy's largest entry lands near the original
# instance's mean absolute entry (about 50 for the +-100 dense regime).
ALPHA_PRESETS = {
    ToyKind.PLUS_MINUS_ONE: 50.0,
    ToyKind.PLUS_MINUS_I: 2.8,
    ToyKind.RANDOM: 1.0,
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("-n", type=int, default=18)
    parser.add_argument("--density", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--grid", default="0:1:0.1", help="lambda grid start:stop:step")
    parser.add_argument("--out-dir", default="landscape-study")
    args = parser.parse_args()

    from lsils.cli import parse_grid

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = parse_grid(args.grid)

    inst = gen_random_instance(args.n, args.density, (-100, 100), seed=args.seed)
    anchor = random_solution(args.n, seeded_rng(args.seed, ANCHOR_STREAM))
    print(f"instance: n={args.n} density={inst.density:g} seed={args.seed}")
    print(f"anchor:   {''.join(str(int(b)) for b in anchor)}")
    print()

    objectives = [("original", inst)]
    for kind in list(ToyKind):
        objectives.append((kind.value, construct_toy(kind, anchor, seed=args.seed)))

    for name, objective in objectives:
        report = analyze(objective)
        print(report_text(report))
        path = out_dir / f"histogram-{name}.csv"
        path.write_text(histogram_csv(report.histogram), newline="\n")
        print(f"wrote {path}")
        print()

    for kind in list(ToyKind):
        alpha = ALPHA_PRESETS[kind]
        curve = lambda_sweep(inst, kind, anchor, alpha, grid, toy_seed=args.seed)
        path = out_dir / f"sweep-{kind.value}.csv"
        path.write_text(sweep_csv(curve), newline="\n")
        counts = ", ".join(f"{lam:g}:{count}" for lam, count in curve)
        print(f"sweep {kind.value} (alpha {alpha:g}): {counts}")
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
