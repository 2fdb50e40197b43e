"""Regions, grids and discrete mass functions.

Every set used by the estimators is a finite union of axis-aligned boxes whose
bounds may be infinite.  Probability questions are answered on a grid of
atoms: a mass function carries point masses on the cartesian product of
per-dimension atom coordinates, and a region's probability is the total mass
of the atoms it contains.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

INF = float("inf")

#: Scheme tags for univariate observations, in the order used for tables.
OBSERVATION_TYPES = (
    "Complete and Nontruncated",
    "Right-Censored and Nontruncated",
    "Left-Censored and Nontruncated",
    "Interval-Censored and Nontruncated",
    "Complete and Left-Truncated",
    "Right-Censored and Left-Truncated",
    "Interval-Censored and Left-Truncated",
    "Complete and Right-Truncated",
    "Left-Censored and Right-Truncated",
    "Interval-Censored and Right-Truncated",
    "Complete and Doubly Truncated",
    "Interval-Censored and Doubly Truncated",
)
GENERAL = "general"


class DimensionError(ValueError):
    """Raised when regions, points and grids disagree on dimension."""


def as_bound(value) -> float:
    """Coerce a bound to an extended real (accepts 'inf', '-inf', numbers)."""
    v = float(value)
    if np.isnan(v):
        raise ValueError("bound must not be NaN")
    return v


# --------------------------------------------------------------------------- #
# Boxes
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``lo_j (<|<=) x_j (<|<=) hi_j`` for every dimension.

    ``lo_closed[j]`` / ``hi_closed[j]`` give the openness of each edge.
    Infinite edges are treated as open regardless of their flag.
    """

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    lo_closed: tuple[bool, ...]
    hi_closed: tuple[bool, ...]

    def __post_init__(self):
        d = len(self.lo)
        if not (len(self.hi) == len(self.lo_closed) == len(self.hi_closed) == d):
            raise DimensionError("box edge tuples have different lengths")
        object.__setattr__(self, "lo", tuple(as_bound(v) for v in self.lo))
        object.__setattr__(self, "hi", tuple(as_bound(v) for v in self.hi))
        object.__setattr__(self, "lo_closed", tuple(bool(v) for v in self.lo_closed))
        object.__setattr__(self, "hi_closed", tuple(bool(v) for v in self.hi_closed))

    @classmethod
    def make(cls, lo, hi, lo_closed=False, hi_closed=False) -> "Box":
        lo = tuple(np.atleast_1d(np.asarray(lo, dtype=float)).tolist())
        hi = tuple(np.atleast_1d(np.asarray(hi, dtype=float)).tolist())
        d = len(lo)
        if isinstance(lo_closed, bool):
            lo_closed = (lo_closed,) * d
        if isinstance(hi_closed, bool):
            hi_closed = (hi_closed,) * d
        return cls(lo, hi, tuple(lo_closed), tuple(hi_closed))

    @classmethod
    def point(cls, x) -> "Box":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cls.make(x, x, True, True)

    @classmethod
    def full(cls, dim: int) -> "Box":
        return cls.make([-INF] * dim, [INF] * dim)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def is_empty(self) -> bool:
        for lo, hi, lc, hc in zip(self.lo, self.hi, self.lo_closed, self.hi_closed):
            if lo > hi:
                return True
            if lo == hi and (not (lc and hc) or np.isinf(lo)):
                return True
        return False

    def contains(self, points) -> np.ndarray:
        """Membership of each row of ``points`` (shape ``(P, d)``)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise DimensionError(f"points have dim {pts.shape[1]}, box has {self.dim}")
        out = np.ones(len(pts), dtype=bool)
        for j in range(self.dim):
            x = pts[:, j]
            out &= (x >= self.lo[j]) if self.lo_closed[j] else (x > self.lo[j])
            out &= (x <= self.hi[j]) if self.hi_closed[j] else (x < self.hi[j])
        return out

    def intersect(self, other: "Box") -> "Box":
        if other.dim != self.dim:
            raise DimensionError("cannot intersect boxes of different dimension")
        lo, hi, lc, hc = [], [], [], []
        for j in range(self.dim):
            a, b = self.lo[j], other.lo[j]
            if a > b:
                lo.append(a); lc.append(self.lo_closed[j])
            elif b > a:
                lo.append(b); lc.append(other.lo_closed[j])
            else:
                lo.append(a); lc.append(self.lo_closed[j] and other.lo_closed[j])
            a, b = self.hi[j], other.hi[j]
            if a < b:
                hi.append(a); hc.append(self.hi_closed[j])
            elif b < a:
                hi.append(b); hc.append(other.hi_closed[j])
            else:
                hi.append(a); hc.append(self.hi_closed[j] and other.hi_closed[j])
        return Box(tuple(lo), tuple(hi), tuple(lc), tuple(hc))

    def complement(self) -> list["Box"]:
        """Disjoint boxes covering ``R^d`` minus this box."""
        pieces = []
        d = self.dim
        for j in range(d):
            # dims < j inside the box, dim j outside, dims > j free
            inner_lo = list(self.lo[:j]) + [None] + [-INF] * (d - j - 1)
            inner_hi = list(self.hi[:j]) + [None] + [INF] * (d - j - 1)
            ilc = list(self.lo_closed[:j]) + [None] + [False] * (d - j - 1)
            ihc = list(self.hi_closed[:j]) + [None] + [False] * (d - j - 1)
            if self.lo[j] > -INF:
                lo, hi = inner_lo.copy(), inner_hi.copy()
                lc, hc = ilc.copy(), ihc.copy()
                lo[j], hi[j] = -INF, self.lo[j]
                lc[j], hc[j] = False, not self.lo_closed[j]
                pieces.append(Box(tuple(lo), tuple(hi), tuple(lc), tuple(hc)))
            if self.hi[j] < INF:
                lo, hi = inner_lo.copy(), inner_hi.copy()
                lc, hc = ilc.copy(), ihc.copy()
                lo[j], hi[j] = self.hi[j], INF
                lc[j], hc[j] = not self.hi_closed[j], False
                pieces.append(Box(tuple(lo), tuple(hi), tuple(lc), tuple(hc)))
        return [p for p in pieces if not p.is_empty()]

    def to_json(self) -> dict:
        return {
            "lo": [_json_bound(v) for v in self.lo],
            "hi": [_json_bound(v) for v in self.hi],
            "lo_closed": list(self.lo_closed),
            "hi_closed": list(self.hi_closed),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Box":
        return cls(
            tuple(as_bound(v) for v in obj["lo"]),
            tuple(as_bound(v) for v in obj["hi"]),
            tuple(obj.get("lo_closed", [False] * len(obj["lo"]))),
            tuple(obj.get("hi_closed", [False] * len(obj["hi"]))),
        )


def _json_bound(v: float):
    if v == INF:
        return "inf"
    if v == -INF:
        return "-inf"
    return v


# --------------------------------------------------------------------------- #
# Regions
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Region:
    """A finite union of boxes of a common dimension."""

    boxes: tuple[Box, ...]
    dim: int

    def __post_init__(self):
        boxes = tuple(b for b in self.boxes if not b.is_empty())
        for b in boxes:
            if b.dim != self.dim:
                raise DimensionError(f"box of dim {b.dim} in region of dim {self.dim}")
        object.__setattr__(self, "boxes", boxes)

    @classmethod
    def of(cls, *boxes: Box, dim: int | None = None) -> "Region":
        if dim is None:
            if not boxes:
                raise DimensionError("dimension required for an empty region")
            dim = boxes[0].dim
        return cls(tuple(boxes), dim)

    @classmethod
    def empty(cls, dim: int = 1) -> "Region":
        return cls((), dim)

    @classmethod
    def full(cls, dim: int = 1) -> "Region":
        return cls((Box.full(dim),), dim)

    @classmethod
    def point(cls, x) -> "Region":
        b = Box.point(x)
        return cls((b,), b.dim)

    @classmethod
    def interval(cls, lo, hi, lo_closed=False, hi_closed=False) -> "Region":
        """Univariate interval; ``interval(a, a, True, True)`` is a singleton."""
        return cls((Box.make([lo], [hi], lo_closed, hi_closed),), 1)

    @classmethod
    def lower_orthant(cls, t, closed=True) -> "Region":
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return cls((Box.make([-INF] * len(t), t, False, closed),), len(t))

    def is_empty(self) -> bool:
        return not self.boxes

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.dim == 1 and pts.shape[0] == 1 and pts.shape[1] != 1:
            pts = pts.T
        if pts.shape[1] != self.dim:
            raise DimensionError(f"points have dim {pts.shape[1]}, region has {self.dim}")
        out = np.zeros(len(pts), dtype=bool)
        for b in self.boxes:
            out |= b.contains(pts)
        return out

    def _check(self, other: "Region"):
        if other.dim != self.dim:
            raise DimensionError(f"region dims differ: {self.dim} vs {other.dim}")

    def union(self, other: "Region") -> "Region":
        self._check(other)
        return Region(self.boxes + other.boxes, self.dim)

    __or__ = union

    def intersect(self, other: "Region") -> "Region":
        self._check(other)
        return Region(tuple(a.intersect(b) for a in self.boxes for b in other.boxes), self.dim)

    __and__ = intersect

    def complement(self) -> "Region":
        """Complement within ``R^d`` (the domain of every grid)."""
        out = Region.full(self.dim)
        for b in self.boxes:
            out = out.intersect(Region(tuple(b.complement()), self.dim))
        return out

    def difference(self, other: "Region") -> "Region":
        return self.intersect(other.complement())

    def finite_bounds(self) -> list[set[float]]:
        """Per-dimension set of every finite box edge."""
        out = [set() for _ in range(self.dim)]
        for b in self.boxes:
            for j in range(self.dim):
                for v in (b.lo[j], b.hi[j]):
                    if np.isfinite(v):
                        out[j].add(v)
        return out

    def to_json(self) -> dict:
        return {"dim": self.dim, "boxes": [b.to_json() for b in self.boxes]}

    @classmethod
    def from_json(cls, obj: dict) -> "Region":
        return cls(tuple(Box.from_json(b) for b in obj["boxes"]), int(obj["dim"]))


# --------------------------------------------------------------------------- #
# Grids and index boxes
# --------------------------------------------------------------------------- #


@dataclass(frozen=True, eq=False)
class Grid:
    """Cartesian product of per-dimension atoms, optionally masked.

    ``constraint`` receives an array of points (shape ``(P, d)``) and returns a
    boolean array; cells where it is False carry no mass.
    """

    atoms: tuple[np.ndarray, ...]
    constraint: Callable[[np.ndarray], np.ndarray] | None = None
    mask: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        atoms = tuple(np.asarray(a, dtype=float).ravel() for a in self.atoms)
        for a in atoms:
            if a.size == 0:
                raise ValueError("every grid dimension needs at least one atom")
            if not np.all(np.isfinite(a)):
                raise ValueError("grid atoms must be finite")
            if np.any(np.diff(a) <= 0):
                raise ValueError("grid atoms must be strictly increasing")
        object.__setattr__(self, "atoms", atoms)
        if self.constraint is None:
            mask = np.ones(self.shape, dtype=bool)
        else:
            mask = np.asarray(self.constraint(self.points), dtype=bool).reshape(self.shape)
            if not mask.any():
                raise ValueError("grid constraint excludes every cell")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_atoms(cls, *atoms, constraint=None) -> "Grid":
        return cls(tuple(np.unique(np.asarray(a, dtype=float)) for a in atoms), constraint)

    @property
    def dim(self) -> int:
        return len(self.atoms)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.atoms)

    @property
    def n_cells(self) -> int:
        return int(self.mask.sum())

    @property
    def points(self) -> np.ndarray:
        """Coordinates of every product cell, C order, shape ``(prod(shape), d)``."""
        mesh = np.meshgrid(*self.atoms, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def index_range(self, j: int, lo: float, hi: float, lo_closed: bool, hi_closed: bool):
        """Half-open atom index range ``[a, b)`` of atoms in an interval of dim j."""
        atoms = self.atoms[j]
        a = np.searchsorted(atoms, lo, side="left" if lo_closed else "right")
        b = np.searchsorted(atoms, hi, side="right" if hi_closed else "left")
        return int(a), int(max(a, b))

    def index_boxes(self, region: Region) -> np.ndarray:
        """Disjoint half-open index boxes covering the atoms of ``region``.

        Returns an int array of shape ``(k, d, 2)``.
        """
        if region.dim != self.dim:
            raise DimensionError(f"region dim {region.dim} != grid dim {self.dim}")
        raw = []
        for b in region.boxes:
            rng = [self.index_range(j, b.lo[j], b.hi[j], b.lo_closed[j], b.hi_closed[j])
                   for j in range(self.dim)]
            if all(r[1] > r[0] for r in rng):
                raw.append(rng)
        return _disjoint_index_boxes(raw, self.dim)


def _subtract_index_box(a, b):
    """Pieces of integer box ``a`` not in ``b`` (both lists of (lo, hi))."""
    inter = [(max(x[0], y[0]), min(x[1], y[1])) for x, y in zip(a, b)]
    if any(lo >= hi for lo, hi in inter):
        return [a]
    pieces = []
    rest = list(a)
    for j, (lo, hi) in enumerate(inter):
        if rest[j][0] < lo:
            p = list(rest); p[j] = (rest[j][0], lo); pieces.append(p)
        if hi < rest[j][1]:
            p = list(rest); p[j] = (hi, rest[j][1]); pieces.append(p)
        rest[j] = (lo, hi)
    return pieces


def _disjoint_index_boxes(raw, dim):
    out: list = []
    for box in raw:
        pieces = [box]
        for kept in out:
            pieces = [q for p in pieces for q in _subtract_index_box(p, kept)]
            if not pieces:
                break
        out.extend(pieces)
    if not out:
        return np.zeros((0, dim, 2), dtype=np.int64)
    return np.asarray(out, dtype=np.int64)


def box_sums(prefix: np.ndarray, boxes: np.ndarray) -> np.ndarray:
    """Sum of the underlying array over each index box via inclusion-exclusion.

    ``prefix`` is the zero-padded cumulative sum along every axis, so that
    ``prefix[i1, ..., id]`` is the total over cells with indices below ``i``.
    """
    if len(boxes) == 0:
        return np.zeros(0)
    d = boxes.shape[1]
    total = np.zeros(len(boxes))
    for corner in itertools.product((0, 1), repeat=d):
        idx = tuple(boxes[:, j, 1 - c] for j, c in enumerate(corner))
        sign = -1.0 if sum(corner) % 2 else 1.0
        total += sign * prefix[idx]
    return total


def prefix_sum(values: np.ndarray) -> np.ndarray:
    out = np.pad(values, [(1, 0)] * values.ndim)
    for axis in range(values.ndim):
        np.cumsum(out, axis=axis, out=out)
    return out


def box_scatter(shape: tuple[int, ...], boxes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Array over cells where each cell holds the summed weight of boxes covering it."""
    d = len(shape)
    ext = tuple(s + 1 for s in shape)
    diff = np.zeros(int(np.prod(ext)))
    if len(boxes):
        for corner in itertools.product((0, 1), repeat=d):
            idx = tuple(boxes[:, j, c] for j, c in enumerate(corner))
            flat = np.ravel_multi_index(idx, ext)
            sign = -1.0 if sum(corner) % 2 else 1.0
            diff += sign * np.bincount(flat, weights=weights, minlength=diff.size)
    diff = diff.reshape(ext)
    for axis in range(d):
        np.cumsum(diff, axis=axis, out=diff)
    return diff[tuple(slice(0, s) for s in shape)]


# --------------------------------------------------------------------------- #
# Mass functions and probability queries
# --------------------------------------------------------------------------- #


class MassFunction:
    """Point masses on the cells of a grid."""

    def __init__(self, grid: Grid, mass, *, check: bool = True):
        mass = np.array(mass, dtype=float).reshape(grid.shape)
        if check:
            if np.any(mass < 0):
                raise ValueError("masses must be nonnegative")
            if np.any(mass[~grid.mask] != 0):
                raise ValueError("mass on cells excluded by the grid constraint")
            if abs(mass.sum() - 1.0) > 1e-12:
                raise ValueError(f"masses sum to {mass.sum():.15g}, not 1")
        self.grid = grid
        self.mass = mass

    @classmethod
    def uniform(cls, grid: Grid) -> "MassFunction":
        m = grid.mask.astype(float)
        return cls(grid, m / m.sum())

    @classmethod
    def from_points(cls, values, weights=None) -> "MassFunction":
        """Univariate mass function from (possibly repeated) support points."""
        values = np.asarray(values, dtype=float).ravel()
        w = np.ones_like(values) if weights is None else np.asarray(weights, dtype=float)
        atoms, inv = np.unique(values, return_inverse=True)
        mass = np.bincount(inv, weights=w, minlength=len(atoms))
        return cls(Grid((atoms,)), mass / mass.sum())

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def atoms(self) -> tuple[np.ndarray, ...]:
        return self.grid.atoms

    def marginal(self, dim: int = 0) -> np.ndarray:
        axes = tuple(j for j in range(self.dim) if j != dim)
        return self.mass.sum(axis=axes) if axes else self.mass

    def cdf(self, t) -> np.ndarray:
        """Vectorized univariate ``P(X <= t)``; see :func:`cdf_eval` for d > 1."""
        if self.dim != 1:
            raise DimensionError("MassFunction.cdf is univariate; use cdf_eval")
        cum = np.concatenate([[0.0], np.cumsum(self.mass)])
        idx = np.searchsorted(self.atoms[0], np.asarray(t, dtype=float), side="right")
        return np.minimum(cum[idx], 1.0)

    def copy(self) -> "MassFunction":
        return MassFunction(self.grid, self.mass.copy(), check=False)

    def __repr__(self):
        return f"MassFunction(shape={self.grid.shape}, cells={self.grid.n_cells})"


def measure(p: MassFunction, r: Region) -> float:
    """Probability of region ``r`` under ``p``."""
    if r.dim != p.dim:
        raise DimensionError(f"region dim {r.dim} != mass function dim {p.dim}")
    if r.is_empty():
        return 0.0
    boxes = p.grid.index_boxes(r)
    return float(min(1.0, box_sums(prefix_sum(p.mass), boxes).sum()))


def n_cells(grid: Grid, r: Region) -> int:
    """Number of unmasked grid cells whose atoms lie in ``r``."""
    boxes = grid.index_boxes(r)
    return int(round(box_sums(prefix_sum(grid.mask.astype(float)), boxes).sum()))


def conditional(p: MassFunction, b: Region, c: Region, eps_cond: float = 1e-12) -> float:
    """``P(b | c)``; falls back to mass spread uniformly on the cells of ``c``.

    The fallback applies when ``P(c) < eps_cond``.
    """
    if n_cells(p.grid, c) == 0:
        raise ValueError("conditioning region contains no grid cell")
    pc = measure(p, c)
    if pc >= eps_cond:
        return min(1.0, measure(p, b & c) / pc)
    return n_cells(p.grid, b & c) / n_cells(p.grid, c)


def cdf_eval(p: MassFunction, t) -> float:
    """``P(X_j <= t_j for all j)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if len(t) != p.dim:
        raise DimensionError(f"point dim {len(t)} != mass function dim {p.dim}")
    return measure(p, Region.lower_orthant(t))


def quantile(p: MassFunction, q: float, dim: int = 0) -> float:
    """Smallest atom whose marginal CDF reaches ``q``."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")
    cum = np.cumsum(p.marginal(dim))
    i = int(np.searchsorted(cum, q - 1e-12, side="left"))
    return float(p.atoms[dim][min(i, len(cum) - 1)])


# --------------------------------------------------------------------------- #
# Observations
# --------------------------------------------------------------------------- #


@dataclass(frozen=True)
class Observation:
    """One sample element: the censoring set that holds the latent value and
    the truncation set it was conditioned to avoid."""

    censor: Region
    trunc: Region
    label: str = GENERAL

    def __post_init__(self):
        if self.censor.dim != self.trunc.dim:
            raise DimensionError("censor and truncation regions differ in dimension")
        if self.censor.is_empty():
            raise ValueError("censoring region is empty")
        if self.label not in OBSERVATION_TYPES and self.label != GENERAL:
            raise ValueError(f"unknown observation label {self.label!r}")

    @property
    def dim(self) -> int:
        return self.censor.dim

    @property
    def is_exact(self) -> bool:
        if len(self.censor.boxes) != 1:
            return False
        b = self.censor.boxes[0]
        return all(lo == hi for lo, hi in zip(b.lo, b.hi))

    @property
    def is_truncated(self) -> bool:
        return not self.trunc.is_empty()


def observation_1d(c_lo, c_hi, t_lo=-INF, t_hi=INF, label: str | None = None) -> Observation:
    """Univariate observation with ``C = (c_lo, c_hi)`` and
    ``T = (-inf, t_lo) U (t_hi, inf)``; ``c_lo == c_hi`` means exact."""
    c_lo, c_hi, t_lo, t_hi = map(as_bound, (c_lo, c_hi, t_lo, t_hi))
    if not (t_lo <= c_lo <= c_hi <= t_hi):
        raise ValueError(f"bounds violate t_lo <= c_lo <= c_hi <= t_hi: {(t_lo, c_lo, c_hi, t_hi)}")
    if c_lo == c_hi:
        censor = Region.point(c_lo)
    else:
        censor = Region.interval(c_lo, c_hi)
    boxes = []
    if t_lo > -INF:
        boxes.append(Box.make([-INF], [t_lo]))
    if t_hi < INF:
        boxes.append(Box.make([t_hi], [INF]))
    trunc = Region(tuple(boxes), 1)
    if label is None:
        label = classify_1d(c_lo, c_hi, t_lo, t_hi)
    return Observation(censor, trunc, label)


def classify_1d(c_lo, c_hi, t_lo, t_hi) -> str:
    """Scheme tag of a univariate observation from its bounds."""
    if c_lo == c_hi:
        cens = "Complete"
    elif c_lo == -INF and c_hi == INF:
        return GENERAL
    elif c_hi == INF:
        cens = "Right-Censored"
    elif c_lo == -INF:
        cens = "Left-Censored"
    else:
        cens = "Interval-Censored"
    lt, rt = t_lo > -INF, t_hi < INF
    trunc = {(False, False): "Nontruncated", (True, False): "Left-Truncated",
             (False, True): "Right-Truncated", (True, True): "Doubly Truncated"}[(lt, rt)]
    label = f"{cens} and {trunc}"
    return label if label in OBSERVATION_TYPES else GENERAL


@dataclass
class IntervalSample:
    """Columnar univariate sample with the same semantics as
    :func:`observation_1d`, used where thousands of observations are built."""

    c_lo: np.ndarray
    c_hi: np.ndarray
    t_lo: np.ndarray
    t_hi: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(a, dtype=float).ravel() for a in (self.c_lo, self.c_hi, self.t_lo, self.t_hi)]
        if len({len(a) for a in arrs}) != 1:
            raise ValueError("column lengths differ")
        self.c_lo, self.c_hi, self.t_lo, self.t_hi = arrs
        if np.any(np.isnan(np.concatenate(arrs))):
            raise ValueError("bounds must not be NaN")
        bad = ~((self.t_lo <= self.c_lo) & (self.c_lo <= self.c_hi) & (self.c_hi <= self.t_hi))
        if bad.any():
            raise ValueError(f"bound ordering violated at rows {np.flatnonzero(bad)[:10].tolist()}")
        if np.any((self.c_lo == self.c_hi) & ~np.isfinite(self.c_lo)):
            raise ValueError("exact values must be finite")

    def __len__(self):
        return len(self.c_lo)

    @property
    def exact(self) -> np.ndarray:
        return self.c_lo == self.c_hi

    @property
    def truncated(self) -> np.ndarray:
        return (self.t_lo > -INF) | (self.t_hi < INF)

    def labels(self) -> list[str]:
        return [classify_1d(*row) for row in zip(self.c_lo, self.c_hi, self.t_lo, self.t_hi)]

    def observations(self) -> list[Observation]:
        return [observation_1d(*row) for row in zip(self.c_lo, self.c_hi, self.t_lo, self.t_hi)]

    @classmethod
    def from_observations(cls, obs: Sequence[Observation]) -> "IntervalSample":
        rows = [_interval_row(o) for o in obs]
        return cls(*map(np.asarray, zip(*rows)))

    @classmethod
    def exact_values(cls, x) -> "IntervalSample":
        x = np.asarray(x, dtype=float).ravel()
        return cls(x, x, np.full_like(x, -INF), np.full_like(x, INF))


def _interval_row(o: Observation):
    if o.dim != 1 or len(o.censor.boxes) != 1:
        raise ValueError("observation is not a univariate interval observation")
    b = o.censor.boxes[0]
    lo, hi = b.lo[0], b.hi[0]
    if lo != hi and (b.lo_closed[0] and np.isfinite(lo) or b.hi_closed[0] and np.isfinite(hi)):
        raise ValueError("interval observations use open censoring intervals")
    t_lo, t_hi = -INF, INF
    for tb in o.trunc.boxes:
        if tb.lo[0] == -INF and tb.hi[0] < INF and not tb.hi_closed[0]:
            t_lo = max(t_lo, tb.hi[0])
        elif tb.hi[0] == INF and tb.lo[0] > -INF and not tb.lo_closed[0]:
            t_hi = min(t_hi, tb.lo[0])
        else:
            raise ValueError("truncation set is not of the form (-inf, a) U (b, inf)")
    return lo, hi, t_lo, t_hi


def finite_bounds(obs: Iterable[Observation], dim: int) -> list[np.ndarray]:
    out = [set() for _ in range(dim)]
    for o in obs:
        for r in (o.censor, o.trunc):
            for j, s in enumerate(r.finite_bounds()):
                out[j] |= s
    return [np.array(sorted(s)) for s in out]
