"""Run the three figure sweeps at full size and write CSV + SVG output.

    python3 scripts/reproduce_figures.py --out results --parallelism 4

Equivalent to ``oclab fig1``, ``oclab fig2`` and ``oclab fig3`` with the
same flags; afterwards prints the headline numbers for each figure.
"""

import argparse
import sys
import time

from oclab import csvio, experiments as ex
from oclab.cli import main as cli


def headline(out):
    fig1 = csvio.read_runs_csv(f"{out}/fig1_runs.csv")
    print("fig1 means:", " ".join(f"{s.mean:.4f}" for s in fig1.summary()))
    fig2 = csvio.read_runs_csv(f"{out}/fig2_runs.csv")
    fr = [s.mean for s in fig2.summary() if ex.population_of(s.mix) == "free_riders"]
    print(f"fig2 free-rider cells: max mean {max(fr):.4f}")
    fig3 = csvio.read_runs_csv(f"{out}/fig3_runs.csv")
    for r in ex.corner_tukey(fig3):
        print(f"fig3 {r.labels[0]} vs {r.labels[1]}: diff {r.mean_diff:+.4f} p {r.p:.2e}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--parallelism", default="1")
    ap.add_argument("--reps", default="30")
    ap.add_argument("--seed", default=str(ex.DEFAULT_SEED))
    args = ap.parse_args()
    for fig in ("fig1", "fig2", "fig3"):
        t0 = time.perf_counter()
        code = cli([fig, "--out", args.out, "--parallelism", args.parallelism,
                    "--reps", args.reps, "--seed", args.seed])
        if code:
            return code
        print(f"{fig}: {time.perf_counter() - t0:.1f}s")
    headline(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
