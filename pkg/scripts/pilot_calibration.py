"""Pilot runs over the reciprocator knobs (memory, explore).

Prints, for each knob setting, the fig1 cell means, the callout means, the
fig3 corner means and the contribution disparity of default general runs.
These are the numbers the frozen defaults were chosen from.

    python3 scripts/pilot_calibration.py --reps 10
"""

import argparse
import itertools
from dataclasses import replace

import numpy as np

from oclab import experiments as ex
from oclab.engine import run
from oclab.model import ModelParams, mix_general


def corner_means(base, reps, seed):
    spec = ex.sweep_fig3(base, reps=reps, seed=seed)
    spec.cells = [c for c in spec.cells if "corner" in c.tags]
    table = ex.run_sweep(spec)
    return {f"R={s.params.rivalry:g},H={s.params.heterogeneity:g}": round(s.mean, 4)
            for s in table.summary()}


def disparity(base, reps, seed):
    runs = [run(base, mix_general(), ex.derive_seed(seed, 9000, k)) for k in range(reps)]
    return np.mean([r.gini for r in runs]), np.mean([r.top20_share for r in runs])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=ex.DEFAULT_SEED)
    ap.add_argument("--memory", type=int, nargs="+", default=[1, 10])
    ap.add_argument("--explore", type=float, nargs="+", default=[0.0, 0.01])
    args = ap.parse_args()

    for memory, explore in itertools.product(args.memory, args.explore):
        base = replace(ModelParams(), memory=memory, explore=explore)
        fig1 = ex.run_sweep(ex.sweep_fig1(base, reps=args.reps, seed=args.seed))
        callout = ex.run_sweep(ex.sweep_fig1_callout(base, reps=args.reps, seed=args.seed))
        means = [s.mean for s in fig1.summary()]
        deltas = np.diff(means)
        gini, top = disparity(base, args.reps, args.seed)
        print(f"memory={memory} explore={explore}")
        print("  fig1     ", " ".join(f"{m:.4f}" for m in means))
        print(f"  gains    first3 {deltas[:3].mean():.4f} last3 {deltas[-3:].mean():.4f}")
        print("  callout  ", " ".join(f"{s.mean:.4f}" for s in callout.summary()))
        print("  corners  ", corner_means(base, args.reps, args.seed))
        print(f"  disparity gini {gini:.3f} top20 {top:.3f}")


if __name__ == "__main__":
    main()
