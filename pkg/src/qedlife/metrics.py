"""Accuracy measures: Chebyshev distance, quantile ratio, replication summaries, bands."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import MassFunction, quantile


def _step_cdf(est: MassFunction):
    atoms = est.atoms[0]
    cum = np.concatenate([[0.0], np.cumsum(est.marginal(0))])

    def right(x):
        return np.minimum(cum[np.searchsorted(atoms, x, side="right")], 1.0)

    def left(x):
        return np.minimum(cum[np.searchsorted(atoms, x, side="left")], 1.0)

    return right, left


def default_eval_points(est: MassFunction) -> np.ndarray:
    atoms = est.atoms[0]
    mids = 0.5 * (atoms[1:] + atoms[:-1])
    return np.sort(np.concatenate([atoms, mids]))


def chebyshev(est: MassFunction, truth_cdf: Callable | MassFunction, eval_points=None,
              truth_left: Callable | None = None) -> float:
    """Sup-norm distance between a univariate step estimate and a reference CDF.

    At every evaluation point both one-sided values are compared:
    the estimate's ``F(x)`` against ``truth(x)`` and its left limit ``F(x-)``
    against ``truth_left(x)``, the reference's left limit.  By default that is
    ``truth`` one floating-point step below ``x``, which is exact for step
    references and for continuous ones.

    Parameters
    ----------
    est : MassFunction
    truth_cdf : callable or MassFunction
    eval_points : array-like, optional
        Defaults to the estimate's atoms plus midpoints between them, together
        with the reference's atoms when it is a step function.
    """
    if est.dim != 1:
        raise ValueError("chebyshev distance is univariate")
    right, left = _step_cdf(est)
    if isinstance(truth_cdf, MassFunction):
        t_right, t_left = _step_cdf(truth_cdf)
        if eval_points is None:
            pts = np.unique(np.concatenate([default_eval_points(est), default_eval_points(truth_cdf)]))
        else:
            pts = np.asarray(eval_points, float)
    else:
        t_right = lambda x: np.asarray(truth_cdf(x), float)  # noqa: E731
        t_left = truth_left or (lambda x: t_right(np.nextafter(x, -np.inf)))  # noqa: E731
        pts = default_eval_points(est) if eval_points is None else np.asarray(eval_points, float)
    if pts.size == 0:
        raise ValueError("no evaluation points")
    d_r = np.abs(right(pts) - t_right(pts))
    d_l = np.abs(left(pts) - t_left(pts))
    return float(max(d_r.max(), d_l.max()))


def quantile_error(est: MassFunction, truth_quantile: float, q: float = 0.5) -> float:
    """Ratio of the estimated to the true ``q``-quantile."""
    if truth_quantile == 0:
        raise ValueError("true quantile is zero; relative error undefined")
    return quantile(est, q) / truth_quantile


@dataclass
class ReplicationReport:
    rho: float
    delta_by_quantile: dict[float, float]
    scheme: str
    n: int
    seed: int
    estimator: str = "qed"
    distribution: str = ""
    replication: int = 0
    iterations: int = 0
    converged: bool = True
    degenerate: int = 0
    adjusted_n: float = float("nan")

    @property
    def delta(self) -> float:
        return self.delta_by_quantile.get(0.5, float("nan"))

    FIELDS = ("estimator", "distribution", "scheme", "n", "replication", "seed", "rho",
              "delta", "iterations", "converged", "degenerate", "adjusted_n")

    def row(self) -> dict:
        return {"estimator": self.estimator, "distribution": self.distribution,
                "scheme": self.scheme, "n": self.n, "replication": self.replication,
                "seed": self.seed, "rho": repr(float(self.rho)), "delta": repr(float(self.delta)),
                "iterations": self.iterations, "converged": int(self.converged),
                "degenerate": self.degenerate, "adjusted_n": repr(float(self.adjusted_n))}


SUMMARY_COLUMNS = ("scheme", "rho_01", "rho_mean", "rho_99", "delta_01", "delta_mean", "delta_99")


@dataclass
class SummaryRow:
    scheme: str
    rho_01: float
    rho_mean: float
    rho_99: float
    delta_01: float
    delta_mean: float
    delta_99: float
    rho_median: float = float("nan")
    delta_median: float = float("nan")
    count: int = 0

    @classmethod
    def from_values(cls, scheme, rho, delta) -> "SummaryRow":
        rho = np.asarray(rho, float)
        delta = np.asarray(delta, float)
        r01, r50, r99 = np.quantile(rho, [0.01, 0.5, 0.99])
        d01, d50, d99 = np.quantile(delta, [0.01, 0.5, 0.99])
        return cls(scheme, r01, rho.mean(), r99, d01, delta.mean(), d99, r50, d50, len(rho))


@dataclass
class SummaryTable:
    rows: list[SummaryRow] = field(default_factory=list)

    @classmethod
    def from_reports(cls, reports: Sequence[ReplicationReport], order: Sequence[str] | None = None):
        groups: dict[str, list[ReplicationReport]] = {}
        for r in reports:
            groups.setdefault(r.scheme, []).append(r)
        keys = [k for k in (order or groups) if k in groups]
        return cls([SummaryRow.from_values(k, [r.rho for r in groups[k]],
                                           [r.delta for r in groups[k]]) for k in keys])

    def __getitem__(self, scheme: str) -> SummaryRow:
        for r in self.rows:
            if r.scheme == scheme:
                return r
        raise KeyError(scheme)

    def to_csv(self, digits: int = 3) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in self.rows:
            w.writerow([r.scheme] + [f"{getattr(r, c):.{digits}f}" for c in SUMMARY_COLUMNS[1:]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SummaryTable":
        rows = []
        for rec in csv.DictReader(io.StringIO(text)):
            rows.append(SummaryRow(rec["scheme"], *(float(rec[c]) for c in SUMMARY_COLUMNS[1:])))
        return cls(rows)


@dataclass
class Bands:
    lower: np.ndarray
    mean: np.ndarray
    upper: np.ndarray


def bands(cdfs, alpha: float = 0.001) -> Bands:
    """Pointwise empirical ``alpha/2`` and ``1 - alpha/2`` quantiles plus the mean.

    ``cdfs`` is a ``(replications, points)`` array of CDF values on a common
    set of points, or a sequence of MassFunctions sharing their atoms.
    """
    if len(cdfs) and isinstance(cdfs[0], MassFunction):
        atoms = cdfs[0].atoms[0]
        for c in cdfs[1:]:
            if len(c.atoms[0]) != len(atoms) or np.any(c.atoms[0] != atoms):
                raise ValueError("replications are on different atom sets")
        vals = np.array([np.cumsum(c.marginal(0)) for c in cdfs])
    else:
        vals = np.asarray(cdfs, float)
    if vals.ndim != 2 or len(vals) < 2:
        raise ValueError("bands need at least two replications on common points")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    lo, hi = np.quantile(vals, [alpha / 2, 1 - alpha / 2], axis=0)
    mean = vals.mean(axis=0)
    return Bands(np.minimum(lo, mean), mean, np.maximum(hi, mean))


def cdf_on(est: MassFunction, points) -> np.ndarray:
    right, _ = _step_cdf(est)
    return right(np.asarray(points, float))
