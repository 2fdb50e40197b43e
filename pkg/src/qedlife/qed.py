"""Quasi-empirical distribution (qED) for truncated and censored samples.

Each observation k is a pair (C_k, T_k): the latent value is known to lie in
C_k, and it was recorded only because it avoided T_k.  The estimate is a
fixed point of

    m'(a) = (1/N) sum_k [ P(a | C_k) + P(a, T_k) / (1 - P(T_k)) ],
    N     = sum_k 1 / (1 - P(T_k)),

iterated from a uniform start ("eq20").  The "eq22" variant iterates

    m'(a) = (1/n) sum_k [ P(a | C_k) (1 - P(T_k)) + P(a, T_k) ]

and renormalizes.  Both share the same fixed points.

All region probabilities are box sums over a prefix-summed mass array and the
per-observation weights are spread back over cells with a difference array,
so one iteration costs O(cells + boxes * 2^d).
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    INF,
    Grid,
    IntervalSample,
    MassFunction,
    Observation,
    Region,
    box_scatter,
    box_sums,
    finite_bounds,
    prefix_sum,
)

log = logging.getLogger(__name__)


class Variant(str, enum.Enum):
    EQ20 = "eq20"
    EQ22 = "eq22"


class DegenerateTruncation(ValueError):
    """P(T_k) reached 1 - trunc_guard for observation ``index``."""

    def __init__(self, index, p_trunc):
        self.index = index
        self.p_trunc = p_trunc
        super().__init__(f"observation {index}: P(T) = {p_trunc:.6g} is degenerate")


@dataclass(frozen=True)
class EstimatorConfig:
    """Settings shared by the qED and Turnbull fits.

    Parameters
    ----------
    tol : float
        Stop when the L-infinity change of the mass vector drops below this.
    max_iter : int
        Iteration cap; reaching it returns a result flagged non-converged.
    variant : {"eq20", "eq22"}
    trunc_guard : float
        P(T_k) is clamped to ``1 - trunc_guard`` (and the observation flagged).
    eps_cond : float
        Below this P(C_k) the conditional law on C_k is taken uniform on its cells.
    init : "uniform" or array-like
        Starting masses, shaped like the grid.
    accelerate : bool
        Use SQUAREM extrapolation between plain steps.  Same fixed point, far
        fewer iterations on heavily censored data.
    """

    tol: float = 1e-9
    max_iter: int = 10000
    variant: Variant = Variant.EQ20
    trunc_guard: float = 1e-8
    eps_cond: float = 1e-12
    init: object = "uniform"
    accelerate: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 < self.trunc_guard < 1:
            raise ValueError("trunc_guard must lie in (0, 1)")
        if not self.eps_cond >= 0:
            raise ValueError("eps_cond must be nonnegative")
        if isinstance(self.init, str) and self.init != "uniform":
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class FitResult:
    estimate: MassFunction
    iterations: int
    final_residual: float
    adjusted_n: float
    degenerate_flags: list[int] = field(default_factory=list)
    converged: bool = True
    n_obs: int = 0

    @property
    def ok(self) -> bool:
        return self.converged and not self.degenerate_flags


# --------------------------------------------------------------------------- #
# Grids
# --------------------------------------------------------------------------- #


def _pad(bounds: np.ndarray) -> float:
    span = float(bounds[-1] - bounds[0]) if len(bounds) else 0.0
    return 0.5 * max(1.0, span)


def _synthetic_coordinate(lo, hi, lo_closed, hi_closed, bounds) -> float:
    if np.isfinite(lo) and np.isfinite(hi):
        return lo if lo == hi else 0.5 * (lo + hi)
    if np.isfinite(lo):
        return max(lo, bounds[-1] if len(bounds) else lo) + _pad(bounds)
    if np.isfinite(hi):
        return min(hi, bounds[0] if len(bounds) else hi) - _pad(bounds)
    return float(bounds[0]) if len(bounds) else 0.0


def _repair_grid(atoms, censors, constraint, base_bounds):
    """Append one synthetic atom per dimension for censor regions with no cell."""
    grid = Grid.from_atoms(*atoms, constraint=constraint)
    for _ in range(3):
        empty = [i for i, c in enumerate(censors) if _cell_count(grid, c) == 0]
        if not empty:
            return grid
        new = [list(a) for a in atoms]
        for i in empty:
            box = censors[i].boxes[0]
            for j in range(grid.dim):
                a, b = grid.index_range(j, box.lo[j], box.hi[j], box.lo_closed[j], box.hi_closed[j])
                if b <= a:
                    new[j].append(_synthetic_coordinate(
                        box.lo[j], box.hi[j], box.lo_closed[j], box.hi_closed[j], base_bounds[j]))
        atoms = [np.unique(a) for a in new]
        grid = Grid.from_atoms(*atoms, constraint=constraint)
    empty = [i for i, c in enumerate(censors) if _cell_count(grid, c) == 0]
    if empty:
        raise ValueError(f"censoring regions with no grid cell: observations {empty[:20]}")
    return grid


def _cell_count(grid: Grid, region: Region) -> int:
    boxes = grid.index_boxes(region)
    if len(boxes) == 0:
        return 0
    return int(round(box_sums(prefix_sum(grid.mask.astype(float)), boxes).sum()))


def default_grid(obs, constraint=None) -> Grid:
    """Every finite bound of every region, plus synthetic atoms where needed.

    A censoring set that holds no atom gets one: the midpoint of a bounded
    side, or ``max bound + pad`` / ``min bound - pad`` for an open ray, with
    ``pad = 0.5 * max(1, span of the bounds)``.
    """
    if isinstance(obs, IntervalSample):
        return _interval_default_grid(obs)
    obs = list(obs)
    if not obs:
        raise ValueError("at least one observation is required")
    dim = obs[0].dim
    bounds = finite_bounds(obs, dim)
    atoms = [b if len(b) else np.array([0.0]) for b in bounds]
    return _repair_grid(atoms, [o.censor for o in obs], constraint, bounds)


def _interval_default_grid(s: IntervalSample) -> Grid:
    if len(s) == 0:
        raise ValueError("at least one observation is required")
    allb = np.concatenate([s.c_lo, s.c_hi, s.t_lo, s.t_hi])
    bounds = np.unique(allb[np.isfinite(allb)])
    atoms = bounds if len(bounds) else np.array([0.0])
    a, b = _interval_ranges(atoms, s.c_lo, s.c_hi)
    empty = np.flatnonzero(b <= a)
    if len(empty):
        extra = [_synthetic_coordinate(s.c_lo[i], s.c_hi[i], False, False, bounds) for i in empty]
        atoms = np.unique(np.concatenate([atoms, extra]))
    return Grid((atoms,))


def compact_grid(obs, constraint=None) -> Grid:
    """Exact coordinates only, plus the synthetic atoms default_grid would add.

    This is the support used by product-limit estimators.
    """
    if isinstance(obs, IntervalSample):
        x = obs.c_lo[obs.exact]
        allb = np.concatenate([obs.c_lo, obs.c_hi, obs.t_lo, obs.t_hi])
        bounds = np.unique(allb[np.isfinite(allb)])
        atoms = np.unique(x) if len(x) else bounds[:1]
        a, b = _interval_ranges(atoms, obs.c_lo, obs.c_hi)
        empty = np.flatnonzero(b <= a)
        if len(empty):
            extra = [_synthetic_coordinate(obs.c_lo[i], obs.c_hi[i], False, False, bounds) for i in empty]
            atoms = np.unique(np.concatenate([atoms, extra]))
        return Grid((atoms,))
    obs = list(obs)
    dim = obs[0].dim
    bounds = finite_bounds(obs, dim)
    pts = [set() for _ in range(dim)]
    for o in obs:
        if o.is_exact:
            for j, v in enumerate(o.censor.boxes[0].lo):
                pts[j].add(v)
    atoms = [np.array(sorted(p)) if p else bounds[j][:1] for j, p in enumerate(pts)]
    atoms = [a if len(a) else np.array([0.0]) for a in atoms]
    return _repair_grid(atoms, [o.censor for o in obs], constraint, bounds)


# --------------------------------------------------------------------------- #
# Compilation of observations to index boxes
# --------------------------------------------------------------------------- #


def _interval_ranges(atoms, lo, hi):
    """Index ranges of atoms strictly inside (lo, hi), or equal to lo when lo == hi."""
    exact = lo == hi
    a = np.where(exact, np.searchsorted(atoms, lo, "left"), np.searchsorted(atoms, lo, "right"))
    b = np.where(exact, np.searchsorted(atoms, hi, "right"), np.searchsorted(atoms, hi, "left"))
    return a, np.maximum(a, b)


@dataclass
class Compiled:
    """Observations grouped into unique (C, T) pairs and mapped to index boxes."""

    grid: Grid
    counts: np.ndarray          # multiplicity of each unique observation
    members: list               # original indices of each unique observation
    c_boxes: np.ndarray         # (Kc, d, 2)
    c_owner: np.ndarray         # unique-observation index of each C box
    t_boxes: np.ndarray
    t_owner: np.ndarray
    c_cells: np.ndarray         # unmasked cell count of each C_k
    n: int

    @property
    def n_unique(self) -> int:
        return len(self.counts)

    def trunc_mask(self) -> np.ndarray:
        out = np.zeros(self.n_unique, dtype=bool)
        out[self.t_owner] = True
        return out


def compile_observations(obs, grid: Grid) -> Compiled:
    if isinstance(obs, IntervalSample):
        return _compile_intervals(obs, grid)
    obs = list(obs)
    if not obs:
        raise ValueError("at least one observation is required")
    keys: dict = {}
    members: list = []
    for i, o in enumerate(obs):
        if o.dim != grid.dim:
            raise ValueError(f"observation {i} has dim {o.dim}, grid has {grid.dim}")
        key = (o.censor.boxes, o.trunc.boxes)
        if key not in keys:
            keys[key] = len(keys)
            members.append([])
        members[keys[key]].append(i)
    uniq = [obs[m[0]] for m in members]
    c_b, c_o, t_b, t_o = [], [], [], []
    for k, o in enumerate(uniq):
        cb = grid.index_boxes(o.censor)
        tb = grid.index_boxes(o.trunc)
        c_b.append(cb); c_o.append(np.full(len(cb), k))
        t_b.append(tb); t_o.append(np.full(len(tb), k))
    d = grid.dim
    c_boxes = np.concatenate(c_b) if c_b else np.zeros((0, d, 2), np.int64)
    t_boxes = np.concatenate(t_b) if t_b else np.zeros((0, d, 2), np.int64)
    comp = Compiled(grid, np.array([len(m) for m in members], float), members,
                    c_boxes.astype(np.int64), np.concatenate(c_o).astype(np.int64),
                    t_boxes.astype(np.int64), np.concatenate(t_o).astype(np.int64),
                    np.zeros(len(uniq)), len(obs))
    _validate(comp, uniq)
    return comp


def _compile_intervals(s: IntervalSample, grid: Grid) -> Compiled:
    if grid.dim != 1:
        raise ValueError("interval samples need a univariate grid")
    if len(s) == 0:
        raise ValueError("at least one observation is required")
    atoms = grid.atoms[0]
    M = len(atoms)
    rows = np.stack([s.c_lo, s.c_hi, s.t_lo, s.t_hi], axis=1)
    uniq, inv = np.unique(rows, axis=0, return_inverse=True)
    inv = inv.ravel()
    counts = np.bincount(inv, minlength=len(uniq)).astype(float)
    order = np.argsort(inv, kind="stable")
    splits = np.cumsum(counts.astype(int))[:-1]
    members = [m.tolist() for m in np.split(order, splits)]
    c_lo, c_hi, t_lo, t_hi = uniq.T
    a, b = _interval_ranges(atoms, c_lo, c_hi)
    c_boxes = np.stack([a, b], axis=1)[:, None, :]
    c_owner = np.arange(len(uniq))
    # T = (-inf, t_lo) U (t_hi, inf)
    lt_end = np.searchsorted(atoms, t_lo, "left")
    rt_start = np.searchsorted(atoms, t_hi, "right")
    has_l = lt_end > 0
    has_r = rt_start < M
    t_list = [np.stack([np.zeros(has_l.sum(), int), lt_end[has_l]], 1),
              np.stack([rt_start[has_r], np.full(has_r.sum(), M)], 1)]
    t_boxes = np.concatenate(t_list)[:, None, :]
    t_owner = np.concatenate([np.flatnonzero(has_l), np.flatnonzero(has_r)])
    comp = Compiled(grid, counts, members, c_boxes.astype(np.int64), c_owner,
                    t_boxes.astype(np.int64), t_owner.astype(np.int64),
                    (b - a).astype(float), len(s))
    empty = np.flatnonzero(b <= a)
    if len(empty):
        bad = sorted(members[i][0] for i in empty)
        raise ValueError(f"censoring regions with no grid atom: observations {bad[:20]}")
    overlap = (a < lt_end) | (b > rt_start)
    if overlap.any():
        bad = sorted(members[i][0] for i in np.flatnonzero(overlap))
        raise ValueError(f"censor and truncation sets share grid atoms: observations {bad[:20]}")
    return comp


def _validate(comp: Compiled, uniq):
    cells = comp.grid.mask.astype(float)
    pref = prefix_sum(cells)
    per_box = box_sums(pref, comp.c_boxes)
    comp.c_cells = np.bincount(comp.c_owner, weights=per_box, minlength=comp.n_unique)
    empty = np.flatnonzero(comp.c_cells < 0.5)
    if len(empty):
        bad = sorted(comp.members[i][0] for i in empty)
        raise ValueError(f"censoring regions with no grid cell: observations {bad[:20]}")
    bad = []
    for k in np.unique(comp.t_owner):
        cb = comp.c_boxes[comp.c_owner == k]
        tb = comp.t_boxes[comp.t_owner == k]
        lo = np.maximum(cb[:, None, :, 0], tb[None, :, :, 0])
        hi = np.minimum(cb[:, None, :, 1], tb[None, :, :, 1])
        inter = np.stack([lo, hi], -1).reshape(-1, comp.grid.dim, 2)
        inter = inter[np.all(inter[..., 1] > inter[..., 0], axis=1)]
        if len(inter) and box_sums(pref, inter).sum() > 0.5:
            bad.append(comp.members[k][0])
    if bad:
        raise ValueError(f"censor and truncation sets share grid cells: observations {sorted(bad)[:20]}")


# --------------------------------------------------------------------------- #
# The fixed-point map
# --------------------------------------------------------------------------- #


class _Engine:
    def __init__(self, comp: Compiled, cfg: EstimatorConfig):
        self.comp = comp
        self.cfg = cfg
        self.shape = comp.grid.shape
        self.mask = comp.grid.mask.astype(float)
        self.flags: set[int] = set()
        self.has_trunc = len(comp.t_boxes) > 0
        self.univariate = comp.grid.dim == 1
        if self.univariate:
            self._ca = comp.c_boxes[:, 0, 0]
            self._cb = comp.c_boxes[:, 0, 1]
            self._ta = comp.t_boxes[:, 0, 0]
            self._tb = comp.t_boxes[:, 0, 1]

    # region probabilities --------------------------------------------------
    def probs(self, m):
        comp = self.comp
        K = comp.n_unique
        if self.univariate:
            cum = np.concatenate([[0.0], np.cumsum(m)])
            pc = cum[self._cb] - cum[self._ca]
            pt = np.zeros(K)
            if self.has_trunc:
                np.add.at(pt, comp.t_owner, cum[self._tb] - cum[self._ta])
            return pc, pt
        pref = prefix_sum(m)
        pc = np.bincount(comp.c_owner, weights=box_sums(pref, comp.c_boxes), minlength=K)
        pt = np.zeros(K)
        if self.has_trunc:
            pt = np.bincount(comp.t_owner, weights=box_sums(pref, comp.t_boxes), minlength=K)
        return pc, pt

    def _scatter(self, boxes, owner, w):
        if self.univariate:
            M = self.shape[0]
            diff = (np.bincount(boxes[:, 0, 0], weights=w[owner], minlength=M + 1)
                    - np.bincount(boxes[:, 0, 1], weights=w[owner], minlength=M + 1))
            return np.cumsum(diff[:M])
        return box_scatter(self.shape, boxes, w[owner])

    def step(self, m, record_flags=True):
        comp, cfg = self.comp, self.cfg
        pc, pt = self.probs(m)
        pt = np.clip(pt, 0.0, 1.0)
        cap = 1.0 - cfg.trunc_guard
        over = pt > cap
        if over.any():
            if record_flags:
                for k in np.flatnonzero(over):
                    self.flags.update(comp.members[k])
            pt = np.minimum(pt, cap)
        small = pc < cfg.eps_cond
        cnt = comp.counts
        if cfg.variant is Variant.EQ20:
            wc = np.where(small, 0.0, cnt / np.where(small, 1.0, pc))
            wt = cnt / (1.0 - pt)
        else:
            wc = np.where(small, 0.0, cnt * (1.0 - pt) / np.where(small, 1.0, pc))
            wt = cnt
        g = self._scatter(comp.c_boxes, comp.c_owner, wc)
        if self.has_trunc:
            g = g + self._scatter(comp.t_boxes, comp.t_owner, wt)
        new = m * g.reshape(self.shape)
        if small.any():
            if cfg.variant is Variant.EQ20:
                wf = np.where(small, cnt / np.maximum(comp.c_cells, 1), 0.0)
            else:
                wf = np.where(small, cnt * (1.0 - pt) / np.maximum(comp.c_cells, 1), 0.0)
            new = new + self.mask * self._scatter(comp.c_boxes, comp.c_owner, wf).reshape(self.shape)
        new = np.maximum(new, 0.0) * self.mask
        return new / new.sum()

    def adjusted_n(self, m) -> float:
        _, pt = self.probs(m)
        pt = np.minimum(np.clip(pt, 0, 1), 1.0 - self.cfg.trunc_guard)
        return float(np.sum(self.comp.counts / (1.0 - pt)))


def _initial_mass(grid: Grid, cfg: EstimatorConfig) -> np.ndarray:
    if isinstance(cfg.init, str):
        return MassFunction.uniform(grid).mass
    init = cfg.init.mass if isinstance(cfg.init, MassFunction) else np.asarray(cfg.init, float)
    m = np.asarray(init, float).reshape(grid.shape) * grid.mask
    if np.any(m < 0) or m.sum() <= 0:
        raise ValueError("custom init must be nonnegative with positive total")
    return m / m.sum()


def _resolve(obs, grid):
    if grid is None or (isinstance(grid, str) and grid == "auto"):
        grid = default_grid(obs)
    elif isinstance(grid, str) and grid == "compact":
        grid = compact_grid(obs)
    return compile_observations(obs, grid)


def adjusted_sample_size(p: MassFunction, obs, cfg: EstimatorConfig | None = None) -> float:
    """Sum of ``1 / (1 - P(T_k))``.

    Raises
    ------
    DegenerateTruncation
        If some ``P(T_k) >= 1 - trunc_guard``.
    """
    cfg = cfg or EstimatorConfig()
    comp = compile_observations(obs, p.grid)
    eng = _Engine(comp, cfg)
    _, pt = eng.probs(p.mass)
    bad = np.flatnonzero(pt >= 1.0 - cfg.trunc_guard)
    if len(bad):
        k = bad[0]
        raise DegenerateTruncation(comp.members[k][0], float(pt[k]))
    return float(np.sum(comp.counts / (1.0 - pt)))


def iterate_once(p: MassFunction, obs, cfg: EstimatorConfig | None = None) -> MassFunction:
    """One application of the fixed-point map."""
    cfg = cfg or EstimatorConfig()
    comp = compile_observations(obs, p.grid)
    eng = _Engine(comp, cfg)
    if cfg.variant is Variant.EQ20:
        _, pt = eng.probs(p.mass)
        bad = np.flatnonzero(pt >= 1.0 - cfg.trunc_guard)
        if len(bad):
            raise DegenerateTruncation(comp.members[bad[0]][0], float(pt[bad[0]]))
    return MassFunction(p.grid, eng.step(p.mass), check=False)


def self_consistency_residual(p: MassFunction, obs, cfg: EstimatorConfig | None = None) -> float:
    """L-infinity distance between ``p`` and its image under the map."""
    q = iterate_once(p, obs, cfg)
    return float(np.max(np.abs(q.mass - p.mass)))


def fit(obs, grid: Grid | str | None = "auto", cfg: EstimatorConfig | None = None) -> FitResult:
    """Iterate the fixed-point map to convergence.

    Parameters
    ----------
    obs : sequence of Observation or IntervalSample
    grid : Grid, "auto" (default_grid) or "compact" (compact_grid)
    cfg : EstimatorConfig

    Returns
    -------
    FitResult
        Non-convergence and degenerate truncation are reported through
        ``converged`` and ``degenerate_flags`` rather than raised.
    """
    cfg = cfg or EstimatorConfig()
    comp = _resolve(obs, grid)
    eng = _Engine(comp, cfg)
    m = _initial_mass(comp.grid, cfg)
    m, it, res, conv = _iterate(eng, m, cfg)
    est = MassFunction(comp.grid, m, check=False)
    return FitResult(est, it, res, eng.adjusted_n(m), sorted(eng.flags), conv, comp.n)


def _iterate(eng: _Engine, m, cfg: EstimatorConfig):
    """Plain or SQUAREM-accelerated iteration; returns (m, iterations, residual, converged)."""
    it = 0
    res = np.inf
    if not cfg.accelerate:
        while it < cfg.max_iter:
            new = eng.step(m)
            it += 1
            res = float(np.max(np.abs(new - m)))
            m = new
            if res < cfg.tol:
                return m, it, res, True
        return m, it, res, False
    # SQUAREM (Varadhan & Roland, scheme S3) with a plain step as the
    # convergence check; each cycle counts as three map evaluations.
    while it < cfg.max_iter:
        m1 = eng.step(m)
        it += 1
        r = m1 - m
        res = float(np.max(np.abs(r)))
        if res < cfg.tol:
            return m1, it, res, True
        m2 = eng.step(m1, record_flags=False)
        it += 1
        v = (m2 - m1) - r
        vn = float(np.sqrt(np.sum(v * v)))
        if vn == 0.0:
            m = m2
            continue
        alpha = -float(np.sqrt(np.sum(r * r))) / vn
        alpha = min(alpha, -1.0)
        cand = m - 2 * alpha * r + alpha * alpha * v
        while alpha < -1.0 and np.any(cand < 0):
            # shrink toward alpha = -1, which is exactly m2
            alpha = (alpha - 1.0) / 2.0 if alpha < -1.01 else -1.0
            cand = m - 2 * alpha * r + alpha * alpha * v
        cand = np.maximum(cand, 0.0)
        s = cand.sum()
        if not np.isfinite(s) or s <= 0:
            m = m2
            continue
        cand = cand / s
        # stabilizing plain step after the jump
        m = eng.step(cand, record_flags=False)
        it += 1
    return m, it, res, False


def empirical(values) -> MassFunction:
    """Empirical distribution of a univariate sample."""
    return MassFunction.from_points(values)
