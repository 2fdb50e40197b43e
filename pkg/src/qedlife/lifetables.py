"""Regions for HR and joint-life records, bivariate fits and decrement tables.

Employee records are mapped to the pair (x, e) = (lifetime age, total years of
service).  An employee still on the payroll at the end of the window has a
censoring set bounded by the diagonal ``e - e_k <= x - x_k``, which is not a
box union; such sets are built as staircases on an integer lattice of ages.
All coordinates from records are mapped to lattice units with ``ceil`` so
that a lattice CDF value ``F(a, b)`` is exactly ``P(X <= a, E <= b)``.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import INF, Box, Grid, MassFunction, Observation, Region

log = logging.getLogger(__name__)

DEATH, RESIGNATION, ACTIVE = 1, 2, 3
DAYS_PER_YEAR = 365.25


def years_between(a: dt.date, b: dt.date) -> float:
    return (b - a).days / DAYS_PER_YEAR


def parse_date(s) -> dt.date | None:
    if s is None:
        return None
    if isinstance(s, dt.date):
        return s
    s = str(s).strip()
    return dt.date.fromisoformat(s) if s else None


@dataclass(frozen=True)
class EmployeeRecord:
    birth: dt.date
    hire: dt.date
    term: dt.date | None
    reason: int
    period_start: dt.date
    period_end: dt.date

    def __post_init__(self):
        if self.reason not in (DEATH, RESIGNATION, ACTIVE):
            raise ValueError(f"termination reason must be 1, 2 or 3, got {self.reason}")
        if not self.birth < self.hire:
            raise ValueError(f"hire date {self.hire} is not after birth {self.birth}")
        if self.term is not None and self.term < self.hire:
            raise ValueError(f"termination {self.term} precedes hire {self.hire}")
        if self.period_end <= self.period_start:
            raise ValueError("empty observation window")
        if self.hire > self.period_end:
            raise ValueError("hired after the observation window")
        if self.reason != ACTIVE and self.term is None:
            raise ValueError("a terminated record needs a termination date")
        if self.term is not None and self.term < self.period_start:
            raise ValueError("terminated before the observation window")
        if years_between(self.birth, self.hire) > 100:
            raise ValueError("implausible hire age")

    @property
    def entry_date(self) -> dt.date:
        return max(self.hire, self.period_start)

    @property
    def entry_age(self) -> float:
        return years_between(self.birth, self.entry_date)

    @property
    def entry_service(self) -> float:
        return years_between(self.hire, self.entry_date)

    @property
    def exit_date(self) -> dt.date:
        if self.reason == ACTIVE or self.term is None:
            return self.period_end
        return self.term

    @property
    def exit_age(self) -> float:
        return years_between(self.birth, self.exit_date)

    @property
    def exit_service(self) -> float:
        return years_between(self.hire, self.exit_date)

    @property
    def hire_age(self) -> float:
        return years_between(self.birth, self.hire)


EMPLOYEE_COLUMNS = ("birth", "hire", "term", "reason", "period_start", "period_end")


def read_employee_csv(text: str) -> list[EmployeeRecord]:
    """Parse ``birth,hire,term,reason,period_start,period_end`` rows."""
    rows = list(csv.DictReader(io.StringIO(text)))
    out = []
    for line, r in enumerate(rows, start=2):
        try:
            missing = [c for c in EMPLOYEE_COLUMNS if c not in r]
            if missing:
                raise ValueError(f"missing columns {missing}")
            out.append(EmployeeRecord(parse_date(r["birth"]), parse_date(r["hire"]),
                                      parse_date(r["term"]), int(r["reason"]),
                                      parse_date(r["period_start"]), parse_date(r["period_end"])))
        except (ValueError, TypeError) as exc:
            raise ValueError(f"line {line}: {exc}") from None
    return out


def write_employee_csv(records: Iterable[EmployeeRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EMPLOYEE_COLUMNS)
    for r in records:
        w.writerow([r.birth.isoformat(), r.hire.isoformat(), r.term.isoformat() if r.term else "",
                    r.reason, r.period_start.isoformat(), r.period_end.isoformat()])
    return buf.getvalue()


# --------------------------------------------------------------------------- #
# Employee regions
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Lattice:
    """Integer lattice (in units of ``step`` years) carrying bivariate fits."""

    step: float = 1.0
    age_max: float = 110.0
    service_max: float = 60.0

    def up(self, v: float) -> float:
        """Smallest lattice value >= v (with a guard against float noise)."""
        return self.step * math.ceil(v / self.step - 1e-9)

    def above(self, v: float) -> float:
        """Smallest lattice value whose cell lies entirely above v."""
        return self.step * (math.floor(v / self.step + 1e-9) + 1)

    def grid(self, age_min: float = 0.0) -> Grid:
        ages = np.arange(self.up(age_min), self.age_max + self.step / 2, self.step)
        serv = np.arange(0.0, self.service_max + self.step / 2, self.step)
        return Grid((ages, serv), constraint=service_within_age)


def service_within_age(points: np.ndarray) -> np.ndarray:
    return points[:, 1] <= points[:, 0]


def _pt(x, e) -> Box:
    return Box.point([x, e])


def employee_truncation(entry_age: float, entry_service: float, lattice: Lattice) -> Region:
    """``{x < t} U {x >= t, e < tau}`` with t, tau the age and service at entry."""
    t = lattice.up(entry_age)
    tau = lattice.up(entry_service)
    boxes = [Box.make([-INF, -INF], [t, INF])]
    if tau > 0:
        boxes.append(Box.make([t, -INF], [INF, tau], lo_closed=[True, False], hi_closed=False))
    return Region(tuple(boxes), 2)


def staircase(age: float, service: float, lattice: Lattice) -> Region:
    """Lattice cells of ``{x > age, e >= service, e - service <= x - age}``."""
    a0 = lattice.above(age)
    b0 = lattice.up(service)
    # on the lattice, e - x <= service - age becomes b - a <= up(service - age)
    d = lattice.up(service - age)
    boxes = []
    top = lattice.up(lattice.service_max)
    b = b0
    while b <= top + 1e-9:
        lo_x = max(a0, b - d)
        last = b >= top - 1e-9
        hi_e = INF if last else b
        boxes.append(Box.make([lo_x, b], [INF, hi_e], lo_closed=True, hi_closed=[False, True]))
        b += lattice.step
    return _merge_rows(boxes)


def _merge_rows(boxes: list[Box]) -> Region:
    """Merge consecutive rows that start at the same age."""
    out: list[Box] = []
    for bx in boxes:
        if out and out[-1].lo[0] == bx.lo[0] and out[-1].hi[1] != INF:
            prev = out[-1]
            out[-1] = Box((prev.lo[0], prev.lo[1]), (INF, bx.hi[1]),
                          (True, True), (False, bx.hi_closed[1]))
        else:
            out.append(bx)
    return Region(tuple(out), 2)


def employee_regions(rec: EmployeeRecord, lattice: Lattice | None = None) -> Observation:
    """Censoring and truncation sets of one employee on the (age, service) plane.

    death:        the single point (exit age, exit service)
    resignation:  service known, lifetime beyond the exit age
    active:       staircase above (current age, current service) whose
                  service gain never exceeds the age gain
    """
    lattice = lattice or Lattice()
    x, e = rec.exit_age, rec.exit_service
    if e > x:
        raise ValueError("service exceeds age")
    trunc = employee_truncation(rec.entry_age, rec.entry_service, lattice)
    if rec.reason == DEATH:
        censor = Region.of(_pt(lattice.up(x), lattice.up(e)))
    elif rec.reason == RESIGNATION:
        b = lattice.up(e)
        censor = Region.of(Box.make([lattice.above(x), b], [INF, b], True, [False, True]))
    else:
        censor = staircase(x, e, lattice)
    return Observation(censor, trunc)


@dataclass
class WorkforceFit:
    result: object
    observations: list[Observation]
    lattice: Lattice

    @property
    def estimate(self) -> MassFunction:
        return self.result.estimate


def fit_employees(records: Sequence[EmployeeRecord], lattice: Lattice | None = None, cfg=None) -> WorkforceFit:
    """Bivariate qED of (lifetime age, service) on the lattice."""
    from .qed import EstimatorConfig, fit

    if not records:
        raise ValueError("no employee records")
    if lattice is None:
        lattice = Lattice(age_max=max(Lattice().up(r.exit_age) for r in records) + 1.0,
                          service_max=max(Lattice().up(r.exit_service) for r in records) + 1.0)
    obs = [employee_regions(r, lattice) for r in records]
    grid = lattice.grid(min(lattice.up(r.entry_age) for r in records))
    res = fit(obs, grid, cfg or EstimatorConfig())
    return WorkforceFit(res, obs, lattice)


# --------------------------------------------------------------------------- #
# Joint lives
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class JointLifeRecord:
    """Husband and wife entering at ages ``t``/``tau``, observed ``y`` years.

    ``m`` and ``w`` are the ages at which each spouse left observation, with
    the matching death flags.
    """

    t: float
    tau: float
    y: float
    m: float
    w: float
    m_dead: bool
    w_dead: bool

    def __post_init__(self):
        if self.m < self.t or self.w < self.tau:
            raise ValueError("exit ages must not precede entry ages")


def joint_life_regions(rec: JointLifeRecord, atol: float = 1e-9) -> Observation:
    m_alive = abs((rec.m - rec.t) - rec.y) <= atol
    w_alive = abs((rec.w - rec.tau) - rec.y) <= atol
    m_died = rec.m_dead and (rec.m - rec.t) < rec.y + atol
    w_died = rec.w_dead and (rec.w - rec.tau) < rec.y + atol
    if m_died and w_died:
        censor = Region.point([rec.m, rec.w])
    elif m_alive and not rec.m_dead and w_died:
        censor = Region.of(Box.make([rec.m, rec.w], [INF, rec.w], [False, True], [False, True]))
    elif w_alive and not rec.w_dead and m_died:
        censor = Region.of(Box.make([rec.m, rec.w], [rec.m, INF], [True, False], [True, False]))
    elif m_alive and w_alive and not (rec.m_dead or rec.w_dead):
        censor = Region.of(Box.make([rec.m, rec.w], [INF, INF]))
    else:
        raise ValueError(f"record matches no joint-life observation pattern: {rec}")
    trunc = Region((Box.make([-INF, -INF], [rec.t, INF]),
                    Box.make([rec.t, -INF], [INF, rec.tau], [True, False], False)), 2)
    return Observation(censor, trunc)


# --------------------------------------------------------------------------- #
# Tables
# --------------------------------------------------------------------------- #


@dataclass
class ConditionalCDF:
    hire_age: float
    band: tuple[float, float]
    ages: np.ndarray
    cdf: np.ndarray
    mass: float                # unconditional probability of the stratum

    def at(self, x) -> np.ndarray:
        idx = np.searchsorted(self.ages, np.asarray(x, float), side="right")
        return np.concatenate([[0.0], self.cdf])[idx]


class EmptyStratum(ValueError):
    pass


def selection_table(p: MassFunction, hire_age: float, basis: str = "service",
                    band: float = 5.0) -> ConditionalCDF:
    """Distribution of age given the hire-age stratum containing ``hire_age``.

    ``basis="service"``: ``p`` is over (age, service) and the stratum is the
    band ``lo <= age - service < lo + band``.  ``basis="hire_age"``: ``p`` is
    over (age, hire age) and the stratum is ``lo <= hire age < lo + band``.
    Strata start at multiples of ``band``.
    """
    if p.dim != 2:
        raise ValueError("selection tables need a bivariate mass function")
    lo = band * math.floor(hire_age / band + 1e-9)
    ages, other = p.atoms
    A, O = np.meshgrid(ages, other, indexing="ij")
    key = A - O if basis == "service" else O
    if basis not in ("service", "hire_age"):
        raise ValueError(f"unknown basis {basis!r}")
    inside = (key >= lo - 1e-9) & (key < lo + band - 1e-9)
    m = np.where(inside, p.mass, 0.0).sum(axis=1)
    total = m.sum()
    if total <= 0:
        raise EmptyStratum(f"no mass in hire-age stratum [{lo:g}, {lo + band:g})")
    return ConditionalCDF(hire_age, (lo, lo + band), ages, np.minimum(np.cumsum(m) / total, 1.0), float(total))


@dataclass
class CDFTable:
    ages: np.ndarray
    services: np.ndarray
    values: np.ndarray

    def to_csv(self, digits: int = 4) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["age"] + [f"{s:g}" for s in self.services])
        for a, row in zip(self.ages, self.values):
            w.writerow([f"{a:g}"] + [f"{v:.{digits}f}" for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CDFTable":
        rows = list(csv.reader(io.StringIO(text)))
        services = np.array([float(v) for v in rows[0][1:]])
        ages = np.array([float(r[0]) for r in rows[1:]])
        vals = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
        return cls(ages, services, vals)


def cdf_table(p: MassFunction, age_step: float = 2.0, service_step: float = 4.0,
              age_start: float | None = None) -> CDFTable:
    """``F(age, service)`` on a lattice, rows = ages, columns = service."""
    if age_step <= 0 or service_step <= 0:
        raise ValueError("steps must be positive")
    ages, serv = p.atoms
    a0 = ages[0] if age_start is None else age_start
    row = np.arange(a0, ages[-1] + age_step, age_step)
    row = row[row < ages[-1] + age_step - 1e-9]
    col = np.arange(0.0, serv[-1] + service_step, service_step)
    col = col[col < serv[-1] + service_step - 1e-9]
    cum = p.mass.cumsum(0).cumsum(1)
    ia = np.searchsorted(ages, row, side="right") - 1
    ie = np.searchsorted(serv, col, side="right") - 1
    vals = np.zeros((len(row), len(col)))
    ok_a, ok_e = ia >= 0, ie >= 0
    vals[np.ix_(ok_a, ok_e)] = cum[np.ix_(ia[ok_a], ie[ok_e])]
    return CDFTable(row, col, np.minimum(vals, 1.0))


def lattice_cdf(p: MassFunction) -> np.ndarray:
    """``F`` at every grid atom pair."""
    return np.minimum(p.mass.cumsum(0).cumsum(1), 1.0)


# --------------------------------------------------------------------------- #
# Synthetic population
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class PopulationModel:
    """Integer-year population with a known joint law of (lifetime, service).

    Service ``E = 1 + floor(Gamma(service_shape, service_scale))``.  The gap
    ``A = X - E`` is ``gap_floor + floor(Gamma(gap_shape, gap_scale) +
    gap_slope * E)``, so ``A`` and ``E`` are dependent.  Deaths of former
    employees are recorded, so a lifetime is observed whenever it ends inside
    the window.

    Observation: hire age ``H`` uniform on ``hire_ages``; with probability
    ``p_hired_before`` the person was hired ``tau ~ U{1..tau_max}`` years
    before the window start, otherwise at the start.  The window lasts
    ``y`` years, short (``U{short}``) with probability ``1 - p_long``, long
    (``U{long}``) otherwise.  Window draws are independent of ``(X, E)``.
    ``gap_floor >= max(hire_ages)``, which keeps ``E <= X - H``.
    """

    service_shape: float = 2.0
    service_scale: float = 8.0
    gap_floor: int = 40
    gap_shape: float = 2.0
    gap_scale: float = 3.0
    gap_slope: float = 0.2
    hire_ages: tuple[int, int] = (18, 40)
    p_hired_before: float = 0.85
    tau_max: int = 20
    short: tuple[int, int] = (5, 15)
    long: tuple[int, int] = (20, 50)
    p_long: float = 0.3

    def __post_init__(self):
        if self.gap_floor < self.hire_ages[1]:
            raise ValueError("gap_floor must be at least the largest hire age")

    def draw(self, size: int, rng: np.random.Generator):
        e = 1 + np.floor(rng.gamma(self.service_shape, self.service_scale, size))
        a = self.gap_floor + np.floor(rng.gamma(self.gap_shape, self.gap_scale, size) + self.gap_slope * e)
        return a + e, e

    def windows(self, size: int, rng: np.random.Generator):
        h = rng.integers(self.hire_ages[0], self.hire_ages[1] + 1, size).astype(float)
        before = rng.random(size) < self.p_hired_before
        tau = np.where(before, rng.integers(1, self.tau_max + 1, size), 0).astype(float)
        long_ = rng.random(size) < self.p_long
        y = np.where(long_, rng.integers(self.long[0], self.long[1] + 1, size),
                     rng.integers(self.short[0], self.short[1] + 1, size)).astype(float)
        return h, tau, y


@dataclass
class PopulationSample:
    entry_age: np.ndarray
    entry_service: np.ndarray
    exit_age: np.ndarray
    exit_service: np.ndarray
    reason: np.ndarray
    lifetime: np.ndarray
    service: np.ndarray
    drawn: int

    def __len__(self):
        return len(self.reason)

    @property
    def degrees(self) -> tuple[float, float]:
        """(share not observed exactly, share hired before the window)."""
        return float(np.mean(self.reason != DEATH)), float(np.mean(self.entry_service > 0))

    def observations(self, lattice: Lattice) -> list[Observation]:
        return [employee_observation(*row, lattice=lattice) for row in
                zip(self.entry_age, self.entry_service, self.exit_age, self.exit_service, self.reason)]


def employee_observation(entry_age, entry_service, exit_age, exit_service, reason,
                         lattice: Lattice | None = None) -> Observation:
    """Regions from ages and service in years (see :func:`employee_regions`)."""
    lattice = lattice or Lattice()
    x, e = float(exit_age), float(exit_service)
    if e > x:
        raise ValueError("service exceeds age")
    trunc = employee_truncation(entry_age, entry_service, lattice)
    reason = int(reason)
    if reason == DEATH:
        censor = Region.of(_pt(lattice.up(x), lattice.up(e)))
    elif reason == RESIGNATION:
        b = lattice.up(e)
        censor = Region.of(Box.make([lattice.above(x), b], [INF, b], True, [False, True]))
    elif reason == ACTIVE:
        censor = staircase(x, e, lattice)
    else:
        raise ValueError(f"termination reason must be 1, 2 or 3, got {reason}")
    return Observation(censor, trunc)


def simulate_population(model: PopulationModel, n: int, rng: np.random.Generator) -> PopulationSample:
    """``n`` people on the payroll at the window start or hired at it.

    The window ends half a year after an integer service count, so exits
    strictly inside the window and survivors never share a lattice cell.
    """
    cols = {k: [] for k in ("t", "tau", "xk", "ek", "d", "x", "e")}
    drawn = 0
    got = 0
    while got < n:
        m = 4 * n
        x, e = model.draw(m, rng)
        h, tau, y = model.windows(m, rng)
        drawn += m
        keep = e >= tau                       # employed at the window start
        x, e, h, tau, y = x[keep], e[keep], h[keep], tau[keep], y[keep]
        t = h + tau
        end_age, end_serv = t + y + 0.5, tau + y + 0.5
        died = x <= t + y
        left = ~died & (e <= tau + y)
        reason = np.where(died, DEATH, np.where(left, RESIGNATION, ACTIVE))
        xk = np.where(died, x, end_age)
        ek = np.where(died | left, e, end_serv)
        take = min(n - got, len(x))
        for k, v in zip(cols, (t, tau, xk, ek, reason, x, e)):
            cols[k].append(v[:take])
        got += take
    c = {k: np.concatenate(v) for k, v in cols.items()}
    return PopulationSample(c["t"], c["tau"], c["xk"], c["ek"], c["d"].astype(int), c["x"], c["e"], drawn)


def population_law(model: PopulationModel, grid: Grid, size: int, rng: np.random.Generator) -> MassFunction:
    """Monte-Carlo law of ``(X, E)`` on ``grid``; values past the last atom go to it."""
    x, e = model.draw(size, rng)
    ages, serv = grid.atoms
    ia = np.clip(np.searchsorted(ages, x, side="left"), 0, len(ages) - 1)
    ib = np.clip(np.searchsorted(serv, e, side="left"), 0, len(serv) - 1)
    mass = np.zeros(grid.shape)
    np.add.at(mass, (ia, ib), 1.0)
    mass *= grid.mask
    return MassFunction(grid, mass / mass.sum(), check=False)


def fit_population(sample: PopulationSample, cfg=None):
    """Bivariate qED of a synthetic sample on a lattice covering its bounds."""
    from .qed import EstimatorConfig, fit

    lattice = Lattice(age_max=float(np.max(np.ceil(sample.exit_age))) + 1.0,
                      service_max=float(np.max(np.ceil(sample.exit_service))) + 1.0)
    obs = sample.observations(lattice)
    grid = lattice.grid(float(np.min(sample.entry_age)))
    return WorkforceFit(fit(obs, grid, cfg or EstimatorConfig()), obs, lattice)
