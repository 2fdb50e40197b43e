"""qED against Turnbull on the mixed-scheme study at n=500.

    python3 scripts/comparison_study.py [--reps 300] [--dists gamma,weibull] [--out out/comparison_study]
"""

import argparse
import time
from pathlib import Path

from qedlife.study import COMPARISON_DISTS, comparison_study, reports_csv, reports_of, run_study, summarize


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=300)
    ap.add_argument("--dists", default=",".join(COMPARISON_DISTS))
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--out", type=Path, default=Path("out/comparison_study"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    t0 = time.time()
    reports = reports_of(run_study(comparison_study(args.reps, args.dists.split(",")), jobs=args.jobs))
    table = summarize(reports)
    (args.out / "summary.csv").write_text(table.to_csv(4))
    (args.out / "replications.csv").write_text(reports_csv(reports))
    print(table.to_csv(4), end="")
    print(f"{time.time() - t0:.0f} s")


if __name__ == "__main__":
    main()
