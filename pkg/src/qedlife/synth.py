"""Synthetic truncated-censored samples.

A sample element has one of twelve types: a censoring kind (complete, right,
left, interval) crossed with a truncation kind (none, left, right, double),
minus the combinations where the censoring ray would run into the truncation
set (right-censored + right-truncated, left-censored + left-truncated, and
one-sided censoring with double truncation).

Two placement mechanisms are provided.

``anchored`` (default)
    Bounds are stacked outward from the latent value X.  A lower bound is
    uniform between the support's lower edge and its anchor (X for a
    censoring bound, the censoring bound or X for a truncation bound); upper
    bounds mirror this towards an upper edge ``ppf(upper_q)``.  ``*_reach``
    shrinks the stretch a bound may travel.  The observation process then
    depends on X, which is what produces the systematic median shifts seen
    for one-sided censoring and truncation.
``independent``
    Truncation points are drawn in quantile space independently of X and X is
    redrawn until it falls inside the window.  Censoring bounds are drawn
    independently too and only censor when they cut X.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
from scipy import optimize, special, stats

from .core import INF, OBSERVATION_TYPES, IntervalSample, classify_1d

# Short codes for the twelve valid observation types.
SCHEME_CODES = {
    "CN": OBSERVATION_TYPES[0], "RCN": OBSERVATION_TYPES[1], "LCN": OBSERVATION_TYPES[2],
    "ICN": OBSERVATION_TYPES[3], "CLT": OBSERVATION_TYPES[4], "RCLT": OBSERVATION_TYPES[5],
    "ICLT": OBSERVATION_TYPES[6], "CRT": OBSERVATION_TYPES[7], "LCRT": OBSERVATION_TYPES[8],
    "ICRT": OBSERVATION_TYPES[9], "CDT": OBSERVATION_TYPES[10], "ICDT": OBSERVATION_TYPES[11],
}
CODE_OF = {v: k for k, v in SCHEME_CODES.items()}

_CENSOR = {"C": 0, "RC": 1, "LC": 2, "IC": 3}
_TRUNC = {"N": 0, "LT": 1, "RT": 2, "DT": 3}
INVALID_COMBINATIONS = {("RC", "RT"), ("LC", "LT"), ("RC", "DT"), ("LC", "DT")}


def split_code(code: str) -> tuple[str, str]:
    for t in ("LT", "RT", "DT", "N"):
        if code.endswith(t):
            return code[: -len(t)], t
    raise ValueError(f"bad scheme code {code!r}")


def scheme_code(name: str) -> str:
    """Accept either a short code ("RCLT") or the full type name."""
    if name in SCHEME_CODES:
        return name
    if name in CODE_OF:
        return CODE_OF[name]
    parts = name.replace(" ", "").upper().split("/")
    if len(parts) == 2:
        cens, trunc = parts
        if (cens, trunc) in INVALID_COMBINATIONS:
            raise ValueError(f"{name}: this censoring/truncation combination is not valid")
        code = ("" if cens == "C" else cens) + trunc
        code = "C" + trunc if cens == "C" else code
        if code in SCHEME_CODES:
            return code
    raise ValueError(f"unknown or invalid observation type {name!r}")


# --------------------------------------------------------------------------- #
# Distributions
# --------------------------------------------------------------------------- #


class Family(str, enum.Enum):
    GAMMA = "gamma"
    LOGNORMAL = "lognormal"
    WEIBULL = "weibull"
    TWEEDIE = "tweedie"


class Tweedie:
    """Tweedie law with index ``1 < p < 2`` as a compound Poisson-Gamma sum."""

    def __init__(self, p: float, mu: float, phi: float):
        if not 1.0 < p < 2.0:
            raise NotImplementedError("Tweedie sampling is supported only for 1 < p < 2")
        if mu <= 0 or phi <= 0:
            raise ValueError("Tweedie mu and phi must be positive")
        self.p, self.mu, self.phi = p, mu, phi
        self.lam = mu ** (2 - p) / (phi * (2 - p))
        self.alpha = (2 - p) / (p - 1)
        self.theta = phi * (p - 1) * mu ** (p - 1)
        jmax = int(self.lam + 30 * np.sqrt(self.lam) + 40)
        self._j = np.arange(1, jmax + 1)
        self._w = stats.poisson.pmf(self._j, self.lam)

    @property
    def p_zero(self) -> float:
        return float(np.exp(-self.lam))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).ravel()
        out = np.zeros(flat.shape)
        pos = flat >= 0
        if pos.any():
            g = special.gammainc(self._j[None, :] * self.alpha, flat[pos, None] / self.theta)
            out[pos] = self.p_zero + g @ self._w
        return np.minimum(out, 1.0).reshape(x.shape)

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        flat = np.atleast_1d(q).ravel()
        out = np.zeros(flat.shape)
        hi = self.mu * 50 + 50
        for i, qi in enumerate(flat):
            if qi <= self.p_zero:
                out[i] = 0.0
            else:
                out[i] = optimize.brentq(lambda v: float(self.cdf(v)) - qi, 0.0, hi, xtol=1e-12)
        return out.reshape(q.shape)

    def rvs(self, size, rng):
        counts = rng.poisson(self.lam, size=size)
        out = np.zeros(size)
        pos = counts > 0
        out[pos] = rng.gamma(counts[pos] * self.alpha, self.theta)
        return out


@dataclass(frozen=True)
class DistSpec:
    """A lifetime law with exact CDF, quantile function and sampler.

    ``params``: gamma (shape a, scale), lognormal (theta = log-mean, sigma),
    weibull (shape a, scale), tweedie (p, mu, phi).
    """

    family: Family
    params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        need = {Family.GAMMA: 2, Family.LOGNORMAL: 2, Family.WEIBULL: 2, Family.TWEEDIE: 3}
        if len(self.params) != need[self.family]:
            raise ValueError(f"{self.family.value} needs {need[self.family]} parameters")
        if self.family is Family.TWEEDIE:
            p = self.params[0]
            if not 1.0 < p < 2.0:
                raise NotImplementedError(f"Tweedie index p={p} unsupported; need 1 < p < 2")
        elif self.family is Family.LOGNORMAL:
            if self.params[1] <= 0:
                raise ValueError("lognormal sigma must be positive")
        elif min(self.params) <= 0:
            raise ValueError(f"{self.family.value} parameters must be positive")
        object.__setattr__(self, "_law", self._build())

    @classmethod
    def gamma(cls, a=4.0, scale=1.7):
        return cls(Family.GAMMA, (a, scale))

    @classmethod
    def lognormal(cls, theta=0.0, sigma=1.2):
        return cls(Family.LOGNORMAL, (theta, sigma))

    @classmethod
    def weibull(cls, a=5.0, scale=10.0):
        return cls(Family.WEIBULL, (a, scale))

    @classmethod
    def tweedie(cls, p=1.7, mu=1.0, phi=1.0):
        return cls(Family.TWEEDIE, (p, mu, phi))

    @classmethod
    def from_json(cls, obj) -> "DistSpec":
        return cls(Family(obj["family"]), tuple(obj["params"]))

    def to_json(self) -> dict:
        return {"family": self.family.value, "params": list(self.params)}

    def _build(self):
        a, b, *rest = self.params
        if self.family is Family.GAMMA:
            return stats.gamma(a, scale=b)
        if self.family is Family.LOGNORMAL:
            return stats.lognorm(b, scale=np.exp(a))
        if self.family is Family.WEIBULL:
            return stats.weibull_min(a, scale=b)
        return Tweedie(a, b, rest[0])

    @property
    def lower(self) -> float:
        """Lower edge of the support."""
        return 0.0

    def cdf(self, x):
        return self._law.cdf(x)

    def ppf(self, q):
        return self._law.ppf(q)

    def cdf_left(self, x):
        """``P(X < x)``; differs from cdf only at the Tweedie atom at 0."""
        x = np.asarray(x, dtype=float)
        if self.family is Family.TWEEDIE:
            return np.where(x <= 0, 0.0, self.cdf(x))
        return self.cdf(x)

    @property
    def median(self) -> float:
        return float(self.ppf(0.5))

    def sample(self, rng: np.random.Generator, size: int | None = None):
        n = 1 if size is None else size
        if self.family is Family.TWEEDIE:
            out = self._law.rvs(n, rng)
        elif self.family is Family.GAMMA:
            out = rng.gamma(self.params[0], self.params[1], n)
        elif self.family is Family.LOGNORMAL:
            out = rng.lognormal(self.params[0], self.params[1], n)
        else:
            out = self.params[1] * rng.weibull(self.params[0], n)
        return float(out[0]) if size is None else out

    def label(self) -> str:
        return f"{self.family.value}({', '.join(f'{v:g}' for v in self.params)})"


def sample_variate(spec: DistSpec, rng: np.random.Generator, size: int | None = None):
    """Draw from ``spec`` (a float when size is None)."""
    return spec.sample(rng, size)


# --------------------------------------------------------------------------- #
# Scheme mixes
# --------------------------------------------------------------------------- #


class Placement(str, enum.Enum):
    ANCHORED = "anchored"
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class SchemeMix:
    """Fractions over the twelve observation types plus window settings.

    Parameters
    ----------
    fractions : mapping code -> fraction (codes as in ``SCHEME_CODES``)
    placement : "anchored" or "independent"
    censor_rate, trunc_rate : float in [0, 1]
        Probability that a drawn type's censoring / truncation is applied;
        otherwise that part is dropped.  Calibration tunes these.
    censor_reach, trunc_reach : float in (0, 1]
        Fraction of the available stretch a bound may move from its anchor.
    trunc_gap : float in [0, trunc_reach)
        Fraction of the stretch next to the anchor that truncation points
        avoid; raising it truncates less.
    upper_q : float
        Quantile of the true law used as upper window edge.
    """

    fractions: Mapping[str, float]
    placement: Placement = Placement.ANCHORED
    censor_rate: float = 1.0
    trunc_rate: float = 1.0
    censor_reach: float = 1.0
    trunc_reach: float = 1.0
    trunc_gap: float = 0.0
    upper_q: float = 0.995

    def __post_init__(self):
        fr = {}
        for k, v in dict(self.fractions).items():
            v = float(v)
            if v < 0:
                raise ValueError(f"negative fraction for {k}")
            if v > 0:
                fr[scheme_code(k)] = fr.get(scheme_code(k), 0.0) + v
        total = sum(fr.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"scheme fractions sum to {total}, not 1")
        object.__setattr__(self, "fractions", {k: fr[k] for k in SCHEME_CODES if k in fr})
        object.__setattr__(self, "placement", Placement(self.placement))
        for name in ("censor_rate", "trunc_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("censor_reach", "trunc_reach"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        if not 0.0 <= self.trunc_gap < self.trunc_reach:
            raise ValueError("trunc_gap must lie in [0, trunc_reach)")
        if not 0.5 < self.upper_q < 1.0:
            raise ValueError("upper_q must lie in (0.5, 1)")

    @classmethod
    def single(cls, code: str, share: float = 1.0, **kw) -> "SchemeMix":
        """``share`` of one type, the rest complete and nontruncated."""
        code = scheme_code(code)
        fr = {code: share}
        if share < 1.0:
            fr["CN"] = fr.get("CN", 0.0) + 1.0 - share
        return cls(fr, **kw)

    def codes(self) -> list[str]:
        return list(self.fractions)

    def nominal_degrees(self) -> tuple[float, float]:
        cens = sum(v for k, v in self.fractions.items() if split_code(k)[0] != "C")
        trunc = sum(v for k, v in self.fractions.items() if split_code(k)[1] != "N")
        return cens, trunc

    def with_(self, **kw) -> "SchemeMix":
        return replace(self, **kw)

    def to_json(self) -> dict:
        return {"fractions": dict(self.fractions), "placement": self.placement.value,
                "censor_rate": self.censor_rate, "trunc_rate": self.trunc_rate,
                "censor_reach": self.censor_reach, "trunc_reach": self.trunc_reach,
                "trunc_gap": self.trunc_gap, "upper_q": self.upper_q}

    @classmethod
    def from_json(cls, obj) -> "SchemeMix":
        return cls(**obj)


#: Mix of the Weibull sample-size study: 80% censored, 55% truncated.
SIZE_MIX = {"RCN": .15, "LCN": .15, "ICN": .15, "CLT": .10, "RCLT": .10, "ICLT": .10,
            "CRT": .05, "LCRT": .05, "ICRT": .05, "CDT": .05, "ICDT": .05}
#: Mix of the estimator comparison study: 60% censored, 70% truncated.
COMPARISON_MIX = {"CN": .10, "RCN": .10, "LCN": .10, "CLT": .10, "RCLT": .10, "ICLT": .10,
                  "CRT": .10, "LCRT": .10, "CDT": .10, "ICDT": .10}
#: The twelve single-type schemes of the Gamma accuracy table, in table order.
TABLE_SCHEMES = tuple(SCHEME_CODES)


# --------------------------------------------------------------------------- #
# Generation
# --------------------------------------------------------------------------- #


@dataclass
class SynthSample:
    data: IntervalSample
    truths: np.ndarray
    drawn: list[str]                 # type code drawn from the mix
    accepted: int
    rejected: int
    inflation: float                 # mean 1 / (1 - F(T_k)) under the true law
    spec: DistSpec | None = None
    mix: SchemeMix | None = None

    def __len__(self):
        return len(self.truths)

    @property
    def observations(self):
        return self.data.observations()

    @property
    def labels(self) -> list[str]:
        return self.data.labels()

    @property
    def realized_degrees(self) -> tuple[float, float]:
        return float(np.mean(~self.data.exact)), float(np.mean(self.data.truncated))


def _trunc_prob(spec: DistSpec, t_lo, t_hi) -> np.ndarray:
    p = np.zeros(len(t_lo))
    lo = np.isfinite(t_lo)
    hi = np.isfinite(t_hi)
    if lo.any():
        p[lo] += spec.cdf_left(t_lo[lo])
    if hi.any():
        p[hi] += 1.0 - spec.cdf(t_hi[hi])
    return np.minimum(p, 1.0)


def generate_sample(spec: DistSpec, mix: SchemeMix, n: int, rng: np.random.Generator) -> SynthSample:
    """Draw ``n`` observations of the given mix.

    Every element contains its truth in the censoring interval and outside
    the truncation set, and satisfies ``t_lo <= c_lo <= c_hi <= t_hi``.
    A part of the type that would be degenerate for the drawn X (e.g. a
    right-censoring bound at X = 0) is dropped, so realized labels may differ
    from the drawn type.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    codes = mix.codes()
    probs = np.array([mix.fractions[c] for c in codes])
    pick = rng.choice(len(codes), size=n, p=probs / probs.sum())
    cens = np.array([_CENSOR[split_code(c)[0]] for c in codes])[pick]
    trunc = np.array([_TRUNC[split_code(c)[1]] for c in codes])[pick]
    fire_c = rng.random(n) < mix.censor_rate
    fire_t = rng.random(n) < mix.trunc_rate
    cens = np.where(fire_c, cens, 0)
    trunc = np.where(fire_t, trunc, 0)
    if mix.placement is Placement.ANCHORED:
        x, cols, rejected = _anchored(spec, mix, cens, trunc, rng)
    else:
        x, cols, rejected = _independent(spec, mix, cens, trunc, rng)
    data = IntervalSample(*cols)
    infl = float(np.mean(1.0 / np.maximum(1.0 - _trunc_prob(spec, data.t_lo, data.t_hi), 1e-300)))
    return SynthSample(data, x, [codes[i] for i in pick], n, rejected, infl, spec, mix)


def _anchored(spec, mix, cens, trunc, rng):
    n = len(cens)
    x = spec.sample(rng, n)
    lo_edge = spec.lower
    hi_edge = np.maximum(float(spec.ppf(mix.upper_q)), x)
    u = rng.random((n, 4))
    sc = mix.censor_reach
    gap, span = mix.trunc_gap, mix.trunc_reach - mix.trunc_gap
    c_lo = x.copy()
    c_hi = x.copy()
    lower_c = (cens == 1) | (cens == 3)
    upper_c = (cens == 2) | (cens == 3)
    c_lo = np.where(lower_c, x - u[:, 0] * sc * (x - lo_edge), c_lo)
    c_hi = np.where(upper_c, x + u[:, 1] * sc * (hi_edge - x), c_hi)
    # drop a censoring side that collapsed onto X
    c_lo = np.where(lower_c & (c_lo >= x), x, c_lo)
    c_hi = np.where(upper_c & (c_hi <= x), x, c_hi)
    lower_ok = lower_c & (c_lo < x)
    upper_ok = upper_c & (c_hi > x)
    c_hi = np.where((cens == 1) & lower_ok, INF, c_hi)
    c_lo = np.where((cens == 2) & upper_ok, -INF, c_lo)
    # interval censoring that lost one side becomes a one-sided ray
    c_lo = np.where((cens == 3) & upper_ok & ~lower_ok, -INF, c_lo)
    c_hi = np.where((cens == 3) & lower_ok & ~upper_ok, INF, c_hi)
    lower_t = (trunc == 1) | (trunc == 3)
    upper_t = (trunc == 2) | (trunc == 3)
    base_lo = np.where(np.isfinite(c_lo), c_lo, x)
    base_hi = np.where(np.isfinite(c_hi), c_hi, x)
    t_lo = np.where(lower_t, base_lo - (gap + u[:, 2] * span) * (base_lo - lo_edge), -INF)
    t_hi = np.where(upper_t, base_hi + (gap + u[:, 3] * span) * (hi_edge - base_hi), INF)
    # a truncation point at or beyond the support edge truncates nothing
    t_lo = np.where(t_lo <= lo_edge, -INF, t_lo)
    t_hi = np.where(t_hi <= base_hi, INF, t_hi)
    # one-sided censoring rays must not run into truncation
    t_lo = np.where(c_lo == -INF, -INF, t_lo)
    t_hi = np.where(c_hi == INF, INF, t_hi)
    t_lo, t_hi = _keep_window_mass(spec, t_lo, t_hi, 1.0 - mix.upper_q)
    return x, (c_lo, c_hi, t_lo, t_hi), 0


def _keep_window_mass(spec, t_lo, t_hi, eps):
    """Widen windows ``[t_lo, t_hi]`` holding less than ``eps`` of the law.

    Anchored truncation points may sit arbitrarily close to X in a tail, and
    then 1 / (1 - P(T)) has no finite mean.  Only bounds move, outward, so
    the censoring interval stays inside the window.
    """
    t_lo, t_hi = t_lo.copy(), t_hi.copy()
    fin_lo, fin_hi = np.isfinite(t_lo), np.isfinite(t_hi)
    f_lo = np.zeros(len(t_lo))
    f_hi = np.ones(len(t_hi))
    f_lo[fin_lo] = spec.cdf_left(t_lo[fin_lo])
    f_hi[fin_hi] = spec.cdf(t_hi[fin_hi])
    short = (f_hi - f_lo) < eps
    move_lo = short & fin_lo & (f_hi > eps)
    if move_lo.any():
        t_lo[move_lo] = np.minimum(t_lo[move_lo], spec.ppf(np.clip(f_hi[move_lo] - eps, 1e-12, 1.0)))
    move_hi = short & ~move_lo
    if move_hi.any():
        t_hi[move_hi] = np.maximum(t_hi[move_hi], spec.ppf(np.minimum(f_lo[move_hi] + eps, 1 - 1e-12)))
    t_lo = np.where(t_lo <= spec.lower, -INF, t_lo)
    return t_lo, t_hi


def _independent(spec, mix, cens, trunc, rng):
    n = len(cens)
    w = mix.trunc_reach
    lower_t = (trunc == 1) | (trunc == 3)
    upper_t = (trunc == 2) | (trunc == 3)
    q_lo = np.where(lower_t, rng.random(n) * w, 0.0)
    q_hi = np.where(upper_t, 1.0 - rng.random(n) * w * (1.0 - q_lo), 1.0)
    t_lo = np.where(lower_t, spec.ppf(np.clip(q_lo, 1e-12, None)), -INF)
    t_hi = np.where(upper_t, spec.ppf(np.clip(q_hi, None, 1 - 1e-12)), INF)
    # draw X until it avoids T
    x = np.full(n, np.nan)
    todo = np.arange(n)
    rejected = 0
    while len(todo):
        draw = spec.sample(rng, len(todo))
        ok = (draw >= t_lo[todo]) & (draw <= t_hi[todo])
        x[todo[ok]] = draw[ok]
        rejected += int((~ok).sum())
        todo = todo[~ok]
    sc = mix.censor_reach
    u = rng.random((n, 3))
    c_lo, c_hi = x.copy(), x.copy()
    bound = spec.ppf(u[:, 0])
    rc = (cens == 1) & (bound < x)
    c_lo = np.where(rc, np.maximum(bound, np.where(np.isfinite(t_lo), t_lo, -INF)), c_lo)
    c_hi = np.where(rc, INF, c_hi)
    lc = (cens == 2) & (bound > x)
    c_hi = np.where(lc, np.minimum(bound, t_hi), c_hi)
    c_lo = np.where(lc, -INF, c_lo)
    ic = cens == 3
    ux = spec.cdf(x)
    width = u[:, 1] * sc
    qa = np.clip(ux - u[:, 2] * width, 1e-12, 1 - 1e-12)
    qb = np.clip(qa + width, 1e-12, 1 - 1e-12)
    a = np.maximum(spec.ppf(qa), np.where(np.isfinite(t_lo), t_lo, -INF))
    b = np.minimum(spec.ppf(qb), t_hi)
    ic = ic & (a < x) & (b > x)
    c_lo = np.where(ic, a, c_lo)
    c_hi = np.where(ic, b, c_hi)
    # one-sided rays must not meet truncation
    t_lo = np.where(c_lo == -INF, -INF, t_lo)
    t_hi = np.where(c_hi == INF, INF, t_hi)
    return x, (c_lo, c_hi, t_lo, t_hi), rejected


# --------------------------------------------------------------------------- #
# Calibration
# --------------------------------------------------------------------------- #


@dataclass
class CalibrationTargets:
    censoring: float | None = None
    truncation: float | None = None
    inflation: float | None = None        # target N / n
    tol: float = 0.03
    pilot: int = 10_000
    # N/n averages 1/(1 - F(T_k)), which has a heavy right tail
    inflation_pilot: int = 200_000

    def __post_init__(self):
        for name in ("censoring", "truncation"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 0.9:
                raise ValueError(f"{name} target {v} outside the supported range [0, 0.9]")
        if self.inflation is not None and self.inflation < 1.0:
            raise ValueError("inflation target must be >= 1")


class CalibrationError(ValueError):
    pass


def _bisect(measure, lo, hi, target, tol, name, increasing=True, iters=30):
    f_lo, f_hi = measure(lo), measure(hi)
    a, b = (f_lo, f_hi) if increasing else (f_hi, f_lo)
    if not a - tol <= target <= b + tol:
        raise CalibrationError(f"{name} target {target:.3f} not achievable; "
                               f"range is [{min(a, b):.3f}, {max(a, b):.3f}]")
    # an end of the bracket that hits the target exactly (a zero degree, say) wins
    if f_lo == target:
        return lo
    if f_hi == target:
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        f = measure(mid)
        if abs(f - target) <= tol / 4:
            return mid
        if (f < target) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def calibrate_mix(spec: DistSpec, mix: SchemeMix, targets: CalibrationTargets,
                  rng: np.random.Generator | int = 0) -> SchemeMix:
    """Tune rates (for degrees) and truncation reach (for N/n) by bisection.

    Pilot samples reuse one seed so every evaluation sees common random
    numbers and the measured curves are monotone.
    """
    seed = int(rng.integers(2**63)) if isinstance(rng, np.random.Generator) else int(rng)

    def pilot(m, size=targets.pilot):
        return generate_sample(spec, m, size, np.random.default_rng(seed))

    tol = targets.tol
    if targets.censoring is not None:
        mix = mix.with_(censor_rate=_bisect(
            lambda r: pilot(mix.with_(censor_rate=r)).realized_degrees[0],
            0.0, 1.0, targets.censoring, tol, "censoring"))
    if targets.truncation is not None:
        mix = mix.with_(trunc_rate=_bisect(
            lambda r: pilot(mix.with_(trunc_rate=r)).realized_degrees[1],
            0.0, 1.0, targets.truncation, tol, "truncation"))
    if targets.inflation is not None:
        big = targets.inflation_pilot
        if mix.placement is Placement.INDEPENDENT:
            reach = _bisect(lambda r: pilot(mix.with_(trunc_reach=r), big).inflation,
                            1e-3, 0.999, targets.inflation, tol, "inflation")
            return mix.with_(trunc_reach=reach)
        full = mix.with_(trunc_reach=1.0, trunc_gap=0.0)
        if pilot(full, big).inflation > targets.inflation:
            # less truncation than full reach: keep points away from anchors
            gap = _bisect(lambda g: pilot(full.with_(trunc_gap=g), big).inflation,
                          0.0, 0.999, targets.inflation, tol, "inflation", increasing=False)
            return full.with_(trunc_gap=gap)
        reach = _bisect(lambda r: pilot(full.with_(trunc_reach=r), big).inflation,
                        1e-3, 1.0, targets.inflation, tol, "inflation", increasing=False)
        mix = full.with_(trunc_reach=reach)
    return mix
