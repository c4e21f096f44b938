"""Ensemble simulation of phase accumulation with resetting detunings.

Two estimators share the same per-particle reset schedules:

``phase``
    draws a detuning per interval and averages exp(i phi(T)) directly;
    this is the plain simulation and works for every law.
``conditional``
    averages prod_j R0(dt_j) over the sampled schedules, i.e. the
    detuning expectation is taken exactly and only the reset times are
    random.  Same mean, far smaller variance; needs 0 < R0 < 1 on the time
    range, which truncated laws satisfy only for short enough times.
"""

from dataclasses import dataclass, field
import functools
import math

import numpy as np
from scipy import interpolate, optimize, stats

from . import distributions as dists
from . import kernels
from .analytic import CoherenceCurve, CollisionSchedule
from .distributions import StableLaw, TruncatedDistribution
from .errors import (
    IllConditionedRatioError,
    RateTooHighError,
    UnsupportedEvaluationError,
)
from .rng import TAG_CONDITIONAL, TAG_ENSEMBLE, TAG_PHASE_CHECK, RandomStream, seed_key

DEFAULT_N = 10_000
MAX_EVENTS = 1e9
MIN_REFERENCE = 1e-6
ESTIMATORS = ("phase", "conditional")
TABLE_POINTS = 4096
TRUNCATED_TABLE_POINTS = 257


@dataclass(frozen=True)
class CollisionProcess:
    """Reset process: ``none``, ``poisson`` (rate) or ``fixed`` (interval)."""

    kind: str = "none"
    rate: float = 0.0
    interval: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "poisson", "fixed"):
            raise ValueError(f"unknown process kind {self.kind!r}")
        if self.kind == "poisson" and not (self.rate >= 0 and math.isfinite(self.rate)):
            raise ValueError(f"Poisson rate must be finite and >= 0, got {self.rate}")
        if self.kind == "fixed" and not (self.interval > 0 and math.isfinite(self.interval)):
            raise ValueError(f"fixed interval must be finite and > 0, got {self.interval}")

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def poisson(cls, rate):
        return cls("poisson", rate=float(rate))

    @classmethod
    def fixed(cls, interval):
        return cls("fixed", interval=float(interval))

    def kernel_args(self):
        if self.kind == "poisson" and self.rate > 0:
            return kernels.PROCESS_POISSON, self.rate
        if self.kind == "fixed":
            return kernels.PROCESS_FIXED, self.interval
        return kernels.PROCESS_NONE, 0.0

    def expected_events(self, T):
        if self.kind == "poisson":
            return self.rate * T
        if self.kind == "fixed":
            return T / self.interval
        return 0.0

    def to_dict(self):
        if self.kind == "poisson":
            return {"type": "poisson", "rate": self.rate}
        if self.kind == "fixed":
            return {"type": "fixed", "interval": self.interval}
        return {"type": "none"}


@dataclass(frozen=True)
class SimulationConfig:
    dist: object
    process: CollisionProcess
    times: np.ndarray
    ensemble_size: int = DEFAULT_N
    seed: int = 0
    estimator: str = "phase"

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if t.ndim != 1 or t.size < 1 or t[0] != 0.0:
            raise ValueError("times must be a 1-d grid starting at 0")
        if np.any(np.diff(t) <= 0) or not np.all(np.isfinite(t)):
            raise ValueError("times must be finite and strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        if int(self.ensemble_size) < 2:
            raise ValueError("ensemble_size must be >= 2")
        object.__setattr__(self, "ensemble_size", int(self.ensemble_size))
        seed_key(self.seed)
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")
        if not isinstance(self.dist, dists.DetuningDistribution):
            raise TypeError(f"not a detuning distribution: {self.dist!r}")


@dataclass(frozen=True)
class EnsembleResult:
    curve: CoherenceCurve
    stderr: np.ndarray
    mean_collisions: float
    collisions_stderr: float
    meta: dict = field(default_factory=dict)

    @property
    def times(self):
        return self.curve.times

    @property
    def values(self):
        return self.curve.values


@dataclass(frozen=True)
class RatioResult:
    """R(T) / R0(T) at one reference time, with its propagated error."""

    ratio: float
    stderr: float
    coherence: float
    reference: float
    T: float


@dataclass(frozen=True)
class PhaseCheck:
    statistic: float
    pvalue: float
    n: int


def _phase_estimate(sums, n):
    c, s = sums[0] / n, sums[1] / n
    var_c = np.maximum(sums[2] / n - c * c, 0.0) * n / (n - 1)
    var_s = np.maximum(sums[3] / n - s * s, 0.0) * n / (n - 1)
    cov = (sums[4] / n - c * s) * n / (n - 1)
    R = np.hypot(c, s)
    safe = np.where(R > 0, R, 1.0)
    uc = np.where(R > 0, c / safe, 1.0 / math.sqrt(2.0))
    us = np.where(R > 0, s / safe, 1.0 / math.sqrt(2.0))
    # delta method along the direction of the mean
    var = uc * uc * var_c + us * us * var_s + 2 * uc * us * cov
    return R, np.sqrt(np.maximum(var, 0.0) / n)


@functools.lru_cache(maxsize=32)
def log_r0_table(dist, t_max, points=TABLE_POINTS):
    """Table y = log(-log R0(t)) on a uniform grid in log t.

    The lower end is where -log R0 reaches 1e-6, below which the kernels
    extend the first segment as a power law.
    """
    if isinstance(dist, StableLaw):
        # exact: y = log c + alpha x
        x0, dx = 0.0, 1.0
        return x0, dx, _frozen(np.array([math.log(dist.scale_c),
                                          math.log(dist.scale_c) + dist.alpha]))
    f = lambda lt: math.log(-float(dists.log_char_magnitude(dist, math.exp(lt)))) - math.log(1e-6)
    truncated = isinstance(dist, TruncatedDistribution)
    hi = 0.0
    while f(hi) < 0:
        hi += 2.0
    lo = hi - 2.0
    while f(lo) > 0:
        lo -= 2.0
    x0 = optimize.brentq(f, lo, hi, xtol=1e-12)
    x1 = max(math.log(t_max), x0 + 1.0)
    x = np.linspace(x0, x1, points)
    if not truncated:
        y = np.log(-dists.log_char_magnitude(dist, np.exp(x)))
        return x0, x[1] - x[0], _frozen(y)
    # quadrature is costly: tabulate coarsely and refine with a spline
    xc = np.linspace(x0, x1, TRUNCATED_TABLE_POINTS)
    logabs, sign = dists.truncated_log_char(dist, np.exp(xc))
    if np.any(sign <= 0) or np.any(logabs >= 0):
        raise UnsupportedEvaluationError(
            "R0 of this truncated law is not positive below 1 up to the last grid time; "
            "the conditional estimator needs 0 < R0 < 1")
    y = interpolate.CubicSpline(xc, np.log(-logabs))(x)
    return x0, x[1] - x[0], _frozen(y)


def _frozen(a):
    a.setflags(write=False)
    return a


def _check_rate(config):
    T = float(config.times[-1])
    expected = config.process.expected_events(T)
    if expected > MAX_EVENTS:
        raise RateTooHighError(
            f"about {expected:.3g} resets per particle exceed the limit {MAX_EVENTS:.0g}")


def simulate(config, backend=None, chunk=kernels.CHUNK):
    """Run the ensemble and return R(T) with standard errors.

    The result depends only on (config, seed); the thread count and the
    backend do not change it.
    """
    _check_rate(config)
    key0, key1 = seed_key(config.seed)
    process, param = config.process.kernel_args()
    n = config.ensemble_size
    times = config.times
    if config.estimator == "phase":
        family, p1, p2, dcut = dists.kernel_params(config.dist)
        acc = dists.acceptance_probability(config.dist)
        if acc < dists.MIN_ACCEPTANCE:
            raise dists.DegenerateTruncationError(
                f"cutoff keeps probability {acc:.3g}; rejection sampling would stall")
        sums, coll = kernels.phase_sums(family, p1, p2, dcut, process, param, times,
                                        key0, key1, TAG_ENSEMBLE, n, chunk, backend)
        R, err = _phase_estimate(sums, n)
    else:
        x0, dx, ytab = log_r0_table(config.dist, float(times[-1]))
        sums, coll = kernels.conditional_sums(process, param, times, x0, dx, ytab,
                                              key0, key1, TAG_CONDITIONAL, n, chunk, backend)
        mean = sums[0] / n
        var = np.maximum(sums[1] / n - mean * mean, 0.0) * n / (n - 1)
        R, err = np.abs(mean), np.sqrt(var / n)
    R = np.minimum(R, 1.0)
    m = coll[0] / n
    m_var = max(coll[1] / n - m * m, 0.0) * n / (n - 1)
    meta = {"engine": "monte_carlo", "estimator": config.estimator,
            "distribution": config.dist.to_dict(), "process": config.process.to_dict(),
            "ensemble_size": n, "seed": int(config.seed)}
    return EnsembleResult(CoherenceCurve(times, R, meta), err, float(m),
                          float(math.sqrt(m_var / n)), meta)


def replay_particle(config, index, t_max=None):
    """Reset times and detunings of one particle of the phase estimator.

    Re-reads the particle's stream in the kernels' consumption order
    (detuning, then gap, per interval) without touching the kernels.
    Returns ``(event_times, detunings)`` where ``detunings[j]`` holds on
    ``[event_times[j-1], event_times[j])`` with event_times[-1] = 0.
    """
    t_max = float(config.times[-1]) if t_max is None else float(t_max)
    family, p1, p2, dcut = dists.kernel_params(config.dist)
    process, param = config.process.kernel_args()
    stream = RandomStream(config.seed, index, TAG_ENSEMBLE)

    def detuning():
        while True:
            u1, u2 = stream.uniforms(2)
            d = float(dists._transform(family, p1, p2, u1, u2))
            if not abs(d) > dcut:
                return d

    def gap():
        if process == kernels.PROCESS_POISSON:
            return -math.log(stream.uniforms(1)[0]) / param
        if process == kernels.PROCESS_FIXED:
            return param
        return math.inf

    times = config.times

    def snap(t):
        # same rule as the kernels: resets next to an output time land on it
        j = min(int(np.searchsorted(times, t)), times.size - 1)
        for T in times[max(j - 1, 0):j + 1]:
            if T * (1.0 - kernels.EVENT_SNAP) <= t <= T * (1.0 + kernels.EVENT_SNAP):
                return float(T)
        return t

    events, deltas = [], [detuning()]
    t = snap(gap())
    while t <= t_max:
        events.append(t)
        deltas.append(detuning())
        t = snap(t + gap())
    return np.array(events), np.array(deltas)


def simulate_normalized_coherence(config, reference_T, backend=None):
    """R(T) / R0(T) at ``reference_T`` (a point of the time grid)."""
    idx = np.flatnonzero(np.isclose(config.times, reference_T, rtol=1e-12, atol=0.0))
    if idx.size == 0:
        raise ValueError(f"reference_T={reference_T} is not on the time grid")
    R0 = float(dists.char_magnitude(config.dist, np.array([float(reference_T)]))[0])
    if R0 < MIN_REFERENCE:
        raise IllConditionedRatioError(
            f"R0({reference_T:g}) = {R0:.3g} is below {MIN_REFERENCE:g}")
    res = simulate(config, backend=backend)
    k = idx[0]
    R = float(res.values[k])
    return RatioResult(R / R0, float(res.stderr[k]) / R0, R, R0, float(reference_T))


def phase_distribution_check(law, schedule, n, seed=0):
    """Two-sample KS test of phi(T) = sum dt_j delta_j against its stable rescaling.

    One side sums independent draws over the schedule; the other scales a
    single draw by (sum tau_j**alpha)**(1/alpha) * T.  A stable law passes
    for every schedule.
    """
    if not isinstance(law, StableLaw):
        raise TypeError("the rescaling identity holds for stable laws only")
    if not isinstance(schedule, CollisionSchedule):
        raise TypeError("schedule must be a CollisionSchedule")
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    dt = schedule.intervals
    lhs = dists.sample(law, RandomStream(seed, 0, TAG_PHASE_CHECK), n * dt.size)
    phi = lhs.reshape(n, dt.size) @ dt
    scale = np.sum(schedule.fractions ** law.alpha) ** (1.0 / law.alpha) * schedule.T
    rhs = scale * dists.sample(law, RandomStream(seed, 1, TAG_PHASE_CHECK), n)
    res = stats.ks_2samp(phi, rhs)
    return PhaseCheck(float(res.statistic), float(res.pvalue), n)
