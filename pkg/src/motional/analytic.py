"""Closed-form and quadrature coherence: free decay, collision formulas, regimes."""

from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np
from scipy import optimize

from . import distributions as dists
from .distributions import StableLaw, StudentT, TruncatedDistribution
from .errors import ParameterDomainError

# round-off allowance before a curve value is treated as out of [0, 1]
CURVE_TOL = 1e-9


class Regime(str, Enum):
    NARROWING = "narrowing"
    INVARIANT = "invariant"
    BROADENING = "broadening"


@dataclass(frozen=True)
class CollisionSchedule:
    """Reset times ``0 = t_0 < t_1 < ... < t_n = T`` stored as boundaries."""

    boundaries: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=np.float64)
        if b.ndim != 1 or b.size < 2:
            raise ValueError("a schedule needs at least the boundaries 0 and T")
        if b[0] != 0.0:
            raise ValueError("schedule must start at t = 0")
        if not np.all(np.diff(b) > 0):
            raise ValueError("schedule boundaries must be strictly increasing")
        b.setflags(write=False)
        object.__setattr__(self, "boundaries", b)

    @classmethod
    def from_intervals(cls, intervals):
        dt = np.asarray(intervals, dtype=np.float64)
        return cls(np.concatenate(([0.0], np.cumsum(dt))))

    @classmethod
    def equal(cls, T, n):
        b = np.linspace(0.0, T, int(n) + 1)
        b[-1] = T
        return cls(b)

    @classmethod
    def fixed(cls, T, dt):
        """Resets every ``dt`` up to ``T``; the last interval may be shorter."""
        if not (T > 0 and dt > 0):
            raise ValueError("T and dt must be positive")
        k = int(math.floor(T / dt * (1 + 1e-12)))
        b = np.arange(k + 1) * dt
        if T - b[-1] > 1e-12 * T:
            b = np.append(b, T)
        b[-1] = T
        return cls(b)

    @classmethod
    def random(cls, T, n, rng):
        """``n`` intervals with uniformly scattered interior resets."""
        inner = np.sort(rng.uniform(0.0, T, int(n) - 1))
        return cls(np.concatenate(([0.0], inner, [T])))

    @property
    def T(self):
        return float(self.boundaries[-1])

    @property
    def n(self):
        return self.boundaries.size - 1

    @property
    def intervals(self):
        return np.diff(self.boundaries)

    @property
    def fractions(self):
        return self.intervals / self.T

    @property
    def tau_max(self):
        return float(self.fractions.max())


@dataclass(frozen=True)
class CoherenceCurve:
    """Coherence magnitude R(T) on a time grid plus provenance metadata."""

    times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if t.size and (t[0] < 0 or np.any(np.diff(t) <= 0)):
            raise ValueError("times must be non-negative and strictly increasing")
        if np.any(v < -CURVE_TOL) or np.any(v > 1 + CURVE_TOL) or np.any(np.isnan(v)):
            raise ValueError("coherence values must lie in [0, 1]")
        v = np.clip(v, 0.0, 1.0)
        if t.size and t[0] == 0.0 and abs(v[0] - 1.0) > CURVE_TOL:
            raise ValueError(f"R(0) must equal 1, got {v[0]}")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def at(self, T):
        """Value at a grid time (exact match required)."""
        idx = np.flatnonzero(np.isclose(self.times, T, rtol=1e-12, atol=0.0))
        if idx.size == 0:
            raise KeyError(f"T={T} is not on the grid")
        return float(self.values[idx[0]])


def coherence_free(dist, times):
    """Fluctuation-free coherence R0(T) = |<exp(i delta T)>| on ``times``."""
    times = np.asarray(times, dtype=np.float64)
    if np.any(times < 0) or np.any(np.diff(times) <= 0):
        raise ValueError("times must be non-negative and increasing")
    values = dists.char_magnitude(dist, times)
    return CoherenceCurve(times, values, {"engine": "analytic", "distribution": dist.to_dict(),
                                          "process": {"type": "none"}})


def coherence_stable_with_collisions(law, schedule):
    """Exact coherence at T for a stable law: exp(-c * sum dt_j**alpha)."""
    if not isinstance(law, StableLaw):
        raise TypeError("the closed collision formula holds for stable laws only")
    return math.exp(-law.scale_c * float(np.sum(schedule.intervals ** law.alpha)))


def collision_exponent(alpha, schedule):
    """sum tau_j**alpha, the power that maps R0(T) to R(T) for stable laws."""
    return float(np.sum(schedule.fractions ** alpha))


def zeno_product(dist, schedule):
    """prod_l R0(dt_l): coherence at T for one realised reset schedule."""
    dt = schedule.intervals
    if isinstance(dist, TruncatedDistribution):
        return float(np.prod(dists.char_magnitude(dist, dt)))
    return math.exp(float(np.sum(dists.log_char_magnitude(dist, dt))))


def classify_regime(alpha):
    if not (0 < alpha <= 2):
        raise ParameterDomainError(f"alpha must satisfy 0 < alpha <= 2, got {alpha}")
    if alpha > 1:
        return Regime.NARROWING
    if alpha < 1:
        return Regime.BROADENING
    return Regime.INVARIANT


def fixed_interval_decay_rate(law, t_coll):
    """Decay rate c * t_coll**(alpha - 1) for equally spaced resets."""
    if t_coll <= 0:
        raise ValueError("t_coll must be positive")
    return law.scale_c * t_coll ** (law.alpha - 1.0)


def decay_time(dist, level=1e-3):
    """Time at which R0 first drops to ``level`` (untruncated laws)."""
    target = math.log(level)
    if isinstance(dist, StableLaw):
        return (-target / dist.scale_c) ** (1.0 / dist.alpha)
    if isinstance(dist, StudentT):
        f = lambda T: float(dists.log_char_magnitude(dist, T)) - target
        hi = 1.0 / dist.delta0
        while f(hi) > 0:
            hi *= 2.0
        return optimize.brentq(f, 0.0, hi, xtol=1e-12)
    raise ValueError("no analytic decay time for truncated laws; supply a grid")


def default_time_grid(dist, points=512, t_max=None):
    """Uniform grid on [0, T_max] with R0(T_max) < 1e-3 unless given."""
    if t_max is None:
        t_max = decay_time(dist, 1e-3) * 1.0001
    return np.linspace(0.0, t_max, int(points))
