"""Monte-Carlo replication harness and the configurations of the accuracy studies."""

from __future__ import annotations

import csv
import functools
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baselines import product_limit_lt_rc, turnbull_frydman_fit
from .metrics import ReplicationReport, SummaryTable, chebyshev, quantile_error, cdf_on
from .qed import EstimatorConfig, fit
from .synth import (
    SIZE_MIX,
    COMPARISON_MIX,
    TABLE_SCHEMES,
    CalibrationTargets,
    DistSpec,
    SchemeMix,
    calibrate_mix,
    generate_sample,
)

ESTIMATORS = ("qed", "km", "turnbull")
#: Types the product-limit estimator can take: exact or right-censored, at most left-truncated.
KM_CODES = frozenset({"CN", "RCN", "CLT", "RCLT"})


class StudyError(ValueError):
    pass


def replication_seed(master: int, *key: int) -> int:
    """Seed of one replication, derived from the master seed and its key."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class Arm:
    """One (distribution, mix) cell of a study."""

    dist: DistSpec
    mix: SchemeMix
    scheme: str
    n: int

    def check(self, estimators: Sequence[str]):
        for e in estimators:
            if e not in ESTIMATORS:
                raise StudyError(f"unknown estimator {e!r}; choose from {ESTIMATORS}")
        if "km" in estimators:
            bad = [c for c in self.mix.codes() if c not in KM_CODES]
            if bad:
                raise StudyError(f"km supports exact/right-censored, left-truncated data only; "
                                 f"scheme {self.scheme} contains {bad}")


@dataclass
class Study:
    arms: list[Arm]
    replications: int
    estimators: tuple[str, ...] = ("qed",)
    seed: int = 0
    quantiles: tuple[float, ...] = (0.5,)
    cfg: EstimatorConfig = field(default_factory=EstimatorConfig)
    cdf_points: dict[int, np.ndarray] | None = None   # arm index -> points to record CDFs at

    def __post_init__(self):
        if self.replications < 1:
            raise StudyError("replications must be >= 1")
        if not self.arms:
            raise StudyError("a study needs at least one arm")
        self.estimators = tuple(self.estimators)
        for a in self.arms:
            a.check(self.estimators)

    def tasks(self):
        for i in range(len(self.arms)):
            for r in range(self.replications):
                yield i, r


@dataclass
class Replication:
    arm: int
    replication: int
    reports: list[ReplicationReport]
    cdfs: dict[str, np.ndarray] = field(default_factory=dict)


def _fit_one(name, sample, cfg):
    if name == "qed":
        res = fit(sample.data, "auto", cfg)
        return res.estimate, res
    if name == "turnbull":
        res = turnbull_frydman_fit(sample.data, cfg)
        return res.estimate, res
    pl = product_limit_lt_rc(sample.data)
    return pl.estimate, None


def run_replication(study: Study, arm_index: int, rep: int) -> Replication:
    arm = study.arms[arm_index]
    seed = replication_seed(study.seed, arm_index, rep)
    sample = generate_sample(arm.dist, arm.mix, arm.n, np.random.default_rng(seed))
    truth_q = {q: float(arm.dist.ppf(q)) for q in study.quantiles}
    out = Replication(arm_index, rep, [])
    pts = None if study.cdf_points is None else study.cdf_points.get(arm_index)
    for name in study.estimators:
        est, res = _fit_one(name, sample, study.cfg)
        rho = chebyshev(est, arm.dist.cdf, truth_left=arm.dist.cdf_left)
        deltas = {q: quantile_error(est, truth_q[q], q) for q in study.quantiles}
        rep_ = ReplicationReport(rho, deltas, arm.scheme, arm.n, seed, name, arm.dist.label(), rep)
        if res is not None:
            rep_.iterations = res.iterations
            rep_.converged = res.converged
            rep_.degenerate = len(res.degenerate_flags)
            rep_.adjusted_n = res.adjusted_n
        out.reports.append(rep_)
        if pts is not None:
            out.cdfs[name] = cdf_on(est, pts)
    return out


def _task(args):
    study, i, r = args
    return run_replication(study, i, r)


def default_jobs() -> int:
    return max(1, min(os.cpu_count() or 1, 8))


def run_study(study: Study, jobs: int | None = None) -> list[Replication]:
    """All replications, ordered by (arm, replication) whatever the pool does."""
    jobs = default_jobs() if jobs is None else int(jobs)
    work = [(study, i, r) for i, r in study.tasks()]
    if jobs <= 1 or len(work) < 2:
        out = [_task(w) for w in work]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_task, work, chunksize=max(1, len(work) // (8 * jobs))))
    return sorted(out, key=lambda x: (x.arm, x.replication))


def reports_of(reps: Sequence[Replication]) -> list[ReplicationReport]:
    return [r for rep in reps for r in rep.reports]


def reports_csv(reports: Sequence[ReplicationReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=ReplicationReport.FIELDS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()


def read_reports_csv(text: str) -> list[ReplicationReport]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        r = ReplicationReport(float(row["rho"]), {0.5: float(row["delta"])}, row["scheme"],
                              int(row["n"]), int(row["seed"]), row["estimator"], row["distribution"],
                              int(row["replication"]), int(row["iterations"]), bool(int(row["converged"])),
                              int(row["degenerate"]), float(row["adjusted_n"]))
        out.append(r)
    return out


def summarize(reports: Sequence[ReplicationReport], order: Sequence[str] | None = None) -> SummaryTable:
    """Per-scheme summary; with several estimators rows are ``estimator:scheme``."""
    ests = list(dict.fromkeys(r.estimator for r in reports))
    if len(ests) <= 1:
        return SummaryTable.from_reports(reports, order)
    relabeled = [ReplicationReport(r.rho, r.delta_by_quantile, f"{r.estimator}:{r.scheme}", r.n, r.seed)
                 for r in reports]
    keys = [f"{e}:{s}" for e in ests for s in (order or dict.fromkeys(r.scheme for r in reports))]
    return SummaryTable.from_reports(relabeled, keys)


# --------------------------------------------------------------------------- #
# Study configurations
# --------------------------------------------------------------------------- #

#: Shares of the left-truncated right-censored Tweedie study.
LTRC_MIX = {"CN": .22, "RCN": .135, "CLT": .395, "RCLT": .25}
LTRC_TARGETS = CalibrationTargets(censoring=0.385, truncation=0.645, inflation=1.55)
SIZE_TARGETS = CalibrationTargets(censoring=0.8, truncation=0.55, inflation=1.98)
COMPARISON_TARGETS = CalibrationTargets(censoring=0.6, truncation=0.7, inflation=1.59)
#: Reach of censoring bounds in the sample-size study, the largest that keeps
#: the n=2500 median error within about 3%.
SIZE_CENSOR_REACH = 0.2
#: Share of the single non-complete type in each sampling-scheme sample.
SCHEME_SHARE = 0.3
COMPARISON_DISTS = ("gamma", "weibull", "lognormal", "tweedie")


def distribution(name: str) -> DistSpec:
    try:
        return getattr(DistSpec, name)()
    except AttributeError:
        raise StudyError(f"unknown distribution {name!r}") from None


@functools.lru_cache(maxsize=None)
def _calibrated_cached(dist_name: str, mix_key: tuple, reach: float, targets: tuple, seed: int):
    mix = SchemeMix(dict(mix_key), censor_reach=reach)
    return calibrate_mix(distribution(dist_name), mix, CalibrationTargets(*targets), seed)


def _calibrated(dist_name, mix_key, reach, targets: CalibrationTargets, seed):
    key = (targets.censoring, targets.truncation, targets.inflation, targets.tol,
           targets.pilot, targets.inflation_pilot)
    return _calibrated_cached(dist_name, mix_key, reach, key, seed)


def ltrc_mix(seed: int = 0) -> SchemeMix:
    return _calibrated("tweedie", tuple(LTRC_MIX.items()), 1.0, LTRC_TARGETS, seed)


def size_mix(seed: int = 0) -> SchemeMix:
    return _calibrated("weibull", tuple(SIZE_MIX.items()), SIZE_CENSOR_REACH, SIZE_TARGETS, seed)


def comparison_mix(dist_name: str, seed: int = 0) -> SchemeMix:
    return _calibrated(dist_name, tuple(COMPARISON_MIX.items()), 1.0, COMPARISON_TARGETS, seed)


def size_study(replications: int, sizes=(50, 500, 2500), seed: int = 7) -> Study:
    mix = size_mix()
    arms = [Arm(DistSpec.weibull(), mix, f"n={n}", n) for n in sizes]
    return Study(arms, replications, ("qed",), seed)


def scheme_study(replications: int, seed: int = 8, schemes: Sequence[str] = TABLE_SCHEMES,
                   coverage_points: np.ndarray | None = None) -> Study:
    g = DistSpec.gamma()
    arms = [Arm(g, SchemeMix.single(c, SCHEME_SHARE), c, 250) for c in schemes]
    pts = None if coverage_points is None else {i: coverage_points for i in range(len(arms))}
    return Study(arms, replications, ("qed",), seed, cdf_points=pts)


def comparison_study(replications: int, dists: Sequence[str] = COMPARISON_DISTS, seed: int = 9) -> Study:
    arms = [Arm(distribution(d), comparison_mix(d), d, 500) for d in dists]
    return Study(arms, replications, ("qed", "turnbull"), seed)


def coverage_lattice(dist: DistSpec, levels=None) -> np.ndarray:
    """True quantiles at probability levels 0.01, 0.02, ..., 0.99."""
    levels = np.arange(1, 100) / 100 if levels is None else np.asarray(levels, float)
    return np.asarray(dist.ppf(levels), float)

