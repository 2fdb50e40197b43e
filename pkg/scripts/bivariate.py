"""Recover the (age, service) law of a synthetic workforce and print the tables.

    python3 scripts/bivariate.py [--n 5000] [--seed 909] [--out out/bivariate]

Reports the bivariate Chebyshev distance to the Monte-Carlo truth and, per
age-minus-service stratum of mass at least 0.1, the sup distance between
the fitted and true conditional age distributions.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from qedlife.lifetables import (
    EmptyStratum,
    PopulationModel,
    cdf_table,
    fit_population,
    lattice_cdf,
    population_law,
    selection_table,
    simulate_population,
)
from qedlife.qed import EstimatorConfig


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=909)
    ap.add_argument("--truth-size", type=int, default=4_000_000)
    ap.add_argument("--out", type=Path, default=Path("out/bivariate"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    model = PopulationModel()
    rng = np.random.default_rng(args.seed)
    t0 = time.time()
    s = simulate_population(model, args.n, rng)
    wf = fit_population(s, EstimatorConfig(tol=1e-9, max_iter=20_000))
    truth = population_law(model, wf.estimate.grid, args.truth_size, rng)
    print("degrees (censoring/truncation): {:.3f}/{:.3f}".format(*s.degrees))
    print(f"converged: {wf.result.converged} after {wf.result.iterations} iterations")
    print(f"bivariate rho: {np.max(np.abs(lattice_cdf(wf.estimate) - lattice_cdf(truth))):.4f}")
    for lo in range(model.gap_floor, model.gap_floor + 40, 5):
        try:
            ref = selection_table(truth, lo, band=5)
        except EmptyStratum:
            continue
        if ref.mass < 0.1:
            continue
        got = selection_table(wf.estimate, lo, band=5)
        print(f"stratum [{lo}, {lo + 5}): mass {ref.mass:.3f}, rho {np.max(np.abs(got.cdf - ref.cdf)):.4f}")
    (args.out / "fitted_table.csv").write_text(cdf_table(wf.estimate).to_csv())
    (args.out / "true_table.csv").write_text(cdf_table(truth).to_csv())
    print(f"{time.time() - t0:.0f} s")


if __name__ == "__main__":
    main()
