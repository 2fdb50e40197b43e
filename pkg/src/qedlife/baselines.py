"""Reference estimators: the left-truncated right-censored product-limit
estimator and the Turnbull self-consistency estimator with truncation ghosts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import INF, Grid, IntervalSample, MassFunction, Observation
from .qed import EstimatorConfig, FitResult, _pad, _Engine, _iterate, _initial_mass, compile_observations


@dataclass(frozen=True)
class LtRcRecord:
    """Subject entering observation at ``entry`` and leaving at ``exit``."""

    entry: float
    exit: float
    event: bool

    def __post_init__(self):
        if not self.entry < self.exit and not (self.entry <= self.exit and self.event):
            raise ValueError(f"entry {self.entry} must precede exit {self.exit}")
        if not np.isfinite(self.exit):
            raise ValueError("exit time must be finite")


@dataclass
class ProductLimitResult:
    estimate: MassFunction
    deficit: float                      # mass placed on the terminal atom
    terminal_atom: float | None
    degenerate_times: list[float] = field(default_factory=list)

    @property
    def flagged(self) -> bool:
        return self.deficit > 0 or bool(self.degenerate_times)


def records_from_sample(data: IntervalSample) -> list[LtRcRecord]:
    """Exact and right-censored, left-truncated rows as product-limit records."""
    rc = (data.c_hi == INF) & np.isfinite(data.c_lo)
    ok = (data.exact | rc) & (data.t_hi == INF)
    if not ok.all():
        bad = np.flatnonzero(~ok)[:10].tolist()
        raise ValueError(f"product-limit needs exact or right-censored, left-truncated rows; bad rows {bad}")
    return [LtRcRecord(t, c, bool(e)) for t, c, e in zip(data.t_lo, data.c_lo, data.exact)]


def product_limit_lt_rc(records: Sequence[LtRcRecord]) -> ProductLimitResult:
    """Product-limit CDF with delayed entry.

    The risk set at an event time ``t`` is ``{k: entry_k < t <= exit_k}``.
    Survival left at the end is put on one terminal atom past the largest
    finite time.
    """
    if isinstance(records, IntervalSample):
        records = records_from_sample(records)
    entry = np.array([r.entry for r in records], float)
    exit_ = np.array([r.exit for r in records], float)
    event = np.array([r.event for r in records], bool)
    if not event.any():
        raise ValueError("at least one event is required")
    times = np.unique(exit_[event])
    ent_sorted = np.sort(entry)
    ext_sorted = np.sort(exit_)
    # entry < t  and  exit >= t
    entered = np.searchsorted(ent_sorted, times, side="left")
    left = np.searchsorted(ext_sorted, times, side="left")
    at_risk = entered - left
    deaths = np.bincount(np.searchsorted(times, exit_[event]), minlength=len(times))
    degenerate = at_risk <= 0
    hazard = np.where(degenerate, 1.0, deaths / np.maximum(at_risk, 1))
    hazard = np.minimum(hazard, 1.0)
    surv = np.cumprod(1.0 - hazard)
    mass = -np.diff(np.concatenate([[1.0], surv]))
    deficit = float(surv[-1])
    finite = np.concatenate([entry[np.isfinite(entry)], exit_])
    bounds = np.unique(finite)
    atoms, masses, terminal = times, mass, None
    if deficit > 1e-15:
        terminal = float(bounds[-1] + _pad(bounds))
        atoms = np.append(times, terminal)
        masses = np.append(mass, deficit)
    else:
        deficit = 0.0
    masses = np.maximum(masses, 0.0)
    est = MassFunction(Grid((atoms,)), masses / masses.sum())
    return ProductLimitResult(est, deficit, terminal, times[degenerate].tolist())


# --------------------------------------------------------------------------- #
# Turnbull
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class TurnbullInterval:
    left: float
    right: float
    left_closed: bool = False
    right_closed: bool = True

    @property
    def is_singleton(self) -> bool:
        return self.left == self.right

    def representative(self, pad: float) -> float:
        """Point carrying the interval's mass when the estimate is evaluated."""
        if self.is_singleton:
            return self.left
        if np.isfinite(self.left) and np.isfinite(self.right):
            return 0.5 * (self.left + self.right)
        if np.isfinite(self.left):
            return self.left + pad
        if np.isfinite(self.right):
            return self.right - pad
        return 0.0


def _censor_edges(obs):
    if isinstance(obs, IntervalSample):
        exact = obs.exact
        return (obs.c_lo, obs.c_hi, np.where(exact, True, False), np.where(exact, True, False))
    lo, hi, lc, hc = [], [], [], []
    for o in obs:
        if o.dim != 1 or len(o.censor.boxes) != 1:
            raise ValueError("Turnbull intervals need univariate interval censoring sets")
        b = o.censor.boxes[0]
        lo.append(b.lo[0]); hi.append(b.hi[0])
        lc.append(b.lo_closed[0]); hc.append(b.hi_closed[0])
    return np.array(lo), np.array(hi), np.array(lc), np.array(hc)


def turnbull_intervals(obs) -> list[TurnbullInterval]:
    """Innermost intervals of the censoring sets.

    A pair (l, r) of a left and a right endpoint with ``l < r`` is innermost
    when no endpoint of any censoring set lies strictly between them.  Exact
    values give singletons.
    """
    lo, hi, lc, hc = _censor_edges(obs)
    exact = lo == hi
    ends = np.unique(np.concatenate([lo, hi]))
    out = [TurnbullInterval(v, v, True, True) for v in np.unique(lo[exact])]
    L = {}
    for v, c in zip(lo[~exact], lc[~exact]):
        L[v] = L.get(v, False) or c
    R = {}
    for v, c in zip(hi[~exact], hc[~exact]):
        R[v] = R.get(v, False) or c
    for l, l_closed in L.items():
        # the next endpoint above l must be a right endpoint
        i = np.searchsorted(ends, l, side="right")
        if i >= len(ends):
            continue
        r = ends[i]
        if r in R:
            out.append(TurnbullInterval(l, r, bool(l_closed), bool(R[r])))
    return sorted(out, key=lambda t: (t.left, t.right))


def turnbull_grid(obs) -> tuple[Grid, list[TurnbullInterval]]:
    ints = turnbull_intervals(obs)
    lo, hi, _, _ = _censor_edges(obs)
    allb = np.concatenate([lo, hi])
    if isinstance(obs, IntervalSample):
        allb = np.concatenate([allb, obs.t_lo, obs.t_hi])
    bounds = np.unique(allb[np.isfinite(allb)])
    pad = _pad(bounds)
    reps = np.array([t.representative(pad) for t in ints])
    order = np.argsort(reps, kind="stable")
    reps, ints = reps[order], [ints[i] for i in order]
    if np.any(np.diff(reps) <= 0):
        keep = np.concatenate([[True], np.diff(reps) > 0])
        reps, ints = reps[keep], [t for t, k in zip(ints, keep) if k]
    return Grid((reps,)), ints


@dataclass
class TurnbullResult(FitResult):
    intervals: list[TurnbullInterval] = field(default_factory=list)


def turnbull_frydman_fit(obs, cfg: EstimatorConfig | None = None) -> TurnbullResult:
    """Self-consistency EM on the innermost intervals.

    Each observation spreads its unit over the intervals inside its censoring
    set in proportion to the current masses, and adds the expected number of
    unseen draws, ``P(T_k) / (1 - P(T_k))``, over the intervals in its
    truncation set.  An interval counts as truncated for observation k when
    its representative point lies in ``T_k``.
    """
    cfg = cfg or EstimatorConfig()
    grid, ints = turnbull_grid(obs)
    comp = compile_observations(obs, grid)
    eng = _Engine(comp, cfg)
    m = _initial_mass(grid, cfg)
    m, it, res, conv = _iterate(eng, m, cfg)
    est = MassFunction(grid, m, check=False)
    return TurnbullResult(est, it, res, eng.adjusted_n(m), sorted(eng.flags), conv, comp.n,
                          intervals=ints)
