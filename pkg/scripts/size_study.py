"""Sample-size study on Weibull(5, 10): Chebyshev distance at n = 50, 500, 2500.

    python3 scripts/size_study.py [--reps 200] [--out out/size_study]
"""

import argparse
import time
from pathlib import Path

from qedlife.study import size_study, reports_csv, reports_of, run_study, summarize


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--sizes", default="50,500,2500")
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--out", type=Path, default=Path("out/size_study"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    sizes = tuple(int(v) for v in args.sizes.split(","))

    t0 = time.time()
    reports = reports_of(run_study(size_study(args.reps, sizes), jobs=args.jobs))
    table = summarize(reports)
    (args.out / "summary.csv").write_text(table.to_csv(4))
    (args.out / "replications.csv").write_text(reports_csv(reports))
    print(table.to_csv(4), end="")
    med = [row.rho_median for row in table.rows]
    print("median rho:", ", ".join(f"{m:.4f}" for m in med))
    if len(med) > 1:
        print(f"ratio first/second: {med[0] / med[1]:.2f}")
    print(f"{time.time() - t0:.0f} s")


if __name__ == "__main__":
    main()
