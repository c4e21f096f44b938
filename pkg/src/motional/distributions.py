"""Detuning distributions: symmetric stable laws, Student's t, truncations.

All three are immutable value objects.  Sampling consumes uniforms from a
:class:`~motional.rng.RandomStream` in ``(u1, u2)`` pairs, exactly as the
ensemble kernels do per particle.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate, special, stats

from .errors import (
    DegenerateTruncationError,
    IntegrationError,
    ParameterDomainError,
    UnsupportedEvaluationError,
)
from .kernels import formulas

QUAD_TOL = 1e-8
MIN_ACCEPTANCE = 1e-6
_SMALL_PHASE = 30.0


def _check_positive(name, value):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value)
            and value > 0):
        raise ParameterDomainError(f"{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class StableLaw:
    """Symmetric alpha-stable law with ``|phi(t)| = exp(-scale_c * |t|**alpha)``."""

    alpha: float
    scale_c: float

    family = "stable"

    def __post_init__(self):
        _check_positive("alpha", self.alpha)
        if self.alpha > 2:
            raise ParameterDomainError(f"alpha must satisfy 0 < alpha <= 2, got {self.alpha}")
        _check_positive("scale_c", self.scale_c)

    @property
    def width(self):
        """Scale of the unit-law variate, ``scale_c ** (1/alpha)``."""
        return self.scale_c ** (1.0 / self.alpha)

    def to_dict(self):
        return {"family": "stable", "alpha": float(self.alpha), "c": float(self.scale_c)}


@dataclass(frozen=True)
class StudentT:
    """Student's t with shape ``r`` and scale ``delta0``."""

    r: float
    delta0: float = 1.0

    family = "student_t"

    def __post_init__(self):
        _check_positive("r", self.r)
        _check_positive("delta0", self.delta0)

    @property
    def normalization(self):
        """Peak density Gamma((r+1)/2) / (Gamma(r/2) delta0 sqrt(r pi))."""
        return math.exp(math.lgamma((self.r + 1) / 2) - math.lgamma(self.r / 2)) / (
            self.delta0 * math.sqrt(self.r * math.pi))

    def to_dict(self):
        return {"family": "student_t", "r": float(self.r), "delta0": float(self.delta0)}


@dataclass(frozen=True)
class TruncatedDistribution:
    """``inner`` restricted to ``|delta| <= delta_c`` and renormalised."""

    inner: object
    delta_c: float

    family = "truncated"

    def __post_init__(self):
        if not isinstance(self.inner, (StableLaw, StudentT)):
            raise ParameterDomainError("inner distribution must be a StableLaw or StudentT")
        _check_positive("delta_c", self.delta_c)

    @property
    def mass(self):
        """Probability that the inner law lands inside the cutoff."""
        return 1.0 - 2.0 * _sf(self.inner, self.delta_c)

    def to_dict(self):
        d = self.inner.to_dict()
        d["delta_c"] = float(self.delta_c)
        return d


DetuningDistribution = (StableLaw, StudentT, TruncatedDistribution)


def _validate(dist):
    if not isinstance(dist, DetuningDistribution):
        raise TypeError(f"not a detuning distribution: {dist!r}")


def kernel_params(dist):
    """(family code, shape, scale, cutoff) tuple consumed by the kernels."""
    dcut = math.inf
    if isinstance(dist, TruncatedDistribution):
        dcut = float(dist.delta_c)
        dist = dist.inner
    if isinstance(dist, StableLaw):
        return formulas.FAMILY_STABLE, float(dist.alpha), float(dist.width), dcut
    return formulas.FAMILY_STUDENT, float(dist.r), float(dist.delta0), dcut


def _transform(family, p1, p2, u1, u2):
    if family == formulas.FAMILY_STABLE:
        return formulas.stable_transform(u1, u2, p1, p2)
    return formulas.student_transform(u1, u2, p1, p2)


def acceptance_probability(dist):
    if isinstance(dist, TruncatedDistribution):
        return dist.mass
    return 1.0


def sample(dist, rng_stream, n):
    """Draw ``n`` i.i.d. detunings.

    Truncated laws use rejection; each round draws a batch sized from the
    known acceptance rate, so the result is a deterministic function of the
    stream position.
    """
    _validate(dist)
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    family, p1, p2, dcut = kernel_params(dist)
    acc = acceptance_probability(dist)
    if acc < MIN_ACCEPTANCE:
        raise DegenerateTruncationError(
            f"cutoff keeps probability {acc:.3g} < {MIN_ACCEPTANCE:g}; rejection sampling "
            "would not terminate in reasonable time")
    out = np.empty(n)
    filled = 0
    while filled < n:
        need = n - filled
        batch = need if acc == 1.0 else int(need / acc * 1.1) + 16
        u = rng_stream.uniforms(2 * batch)
        d = _transform(family, p1, p2, u[0::2], u[1::2])
        if dcut < math.inf:
            d = d[np.abs(d) <= dcut]
        take = min(need, d.size)
        out[filled:filled + take] = d[:take]
        filled += take
    return out


def _sf(dist, x):
    """Survival function P(delta > x) of an untruncated law."""
    if isinstance(dist, StudentT):
        return stats.t.sf(x / dist.delta0, dist.r)
    if dist.alpha == 1.0:
        return stats.cauchy.sf(x, scale=dist.scale_c)
    if dist.alpha == 2.0:
        return stats.norm.sf(x, scale=math.sqrt(2 * dist.scale_c))
    return stats.levy_stable.sf(x, dist.alpha, 0.0, scale=dist.width)


def cdf(dist, x):
    """Cumulative distribution function (vectorised)."""
    _validate(dist)
    x = np.asarray(x, dtype=np.float64)
    if isinstance(dist, TruncatedDistribution):
        inner = cdf(dist.inner, np.clip(x, -dist.delta_c, dist.delta_c))
        lo = _sf(dist.inner, dist.delta_c)
        return np.clip((inner - lo) / dist.mass, 0.0, 1.0)
    if isinstance(dist, StudentT):
        return stats.t.cdf(x / dist.delta0, dist.r)
    if dist.alpha == 1.0:
        return stats.cauchy.cdf(x, scale=dist.scale_c)
    if dist.alpha == 2.0:
        return stats.norm.cdf(x, scale=math.sqrt(2 * dist.scale_c))
    return stats.levy_stable.cdf(x, dist.alpha, 0.0, scale=dist.width)


def density(dist, delta):
    """Probability density P0(delta) (vectorised).

    Closed forms exist for Student's t and for stable laws with alpha in
    {1, 2}; other stable exponents raise :class:`UnsupportedEvaluationError`.
    """
    _validate(dist)
    delta = np.asarray(delta, dtype=np.float64)
    if not np.all(np.isfinite(delta)):
        raise ValueError("density requires finite detunings")
    if isinstance(dist, TruncatedDistribution):
        inside = np.abs(delta) <= dist.delta_c
        return np.where(inside, density(dist.inner, delta), 0.0) / dist.mass
    if isinstance(dist, StudentT):
        x = delta / dist.delta0
        return dist.normalization * (1.0 + x * x / dist.r) ** (-(1.0 + dist.r) / 2.0)
    if dist.alpha == 1.0:
        c = dist.scale_c
        return c / (math.pi * (c * c + delta * delta))
    if dist.alpha == 2.0:
        c = dist.scale_c
        return np.exp(-delta * delta / (4 * c)) / math.sqrt(4 * math.pi * c)
    raise UnsupportedEvaluationError(
        f"no closed-form density for a stable law with alpha={dist.alpha}")


def _zk(mu, z):
    """z**mu * K_mu(z) * exp(z) for complex z off the negative real axis."""
    z = np.asarray(z, dtype=np.complex128)
    big = np.abs(z) > 1e6
    zs = np.where(big, 1.0, z)
    with np.errstate(all="ignore"):
        small = zs ** mu * special.kve(mu, zs)
    zb = np.where(big, z, 1.0)
    m4 = 4.0 * mu * mu
    series = 1.0 + (m4 - 1.0) / (8.0 * zb) + (m4 - 1.0) * (m4 - 9.0) / (128.0 * zb * zb)
    asym = zb ** mu * np.sqrt(np.pi / (2.0 * zb)) * series
    return np.where(big, asym, small)


def student_log_char(r, delta0, t):
    """log of the Student-t characteristic function at (complex) ``t``.

    Uses the modified-Bessel closed form; ``t`` may be complex with
    ``|arg t| < pi``, which is what analytic continuation of Laplace
    integrals needs.
    """
    mu = 0.5 * r
    t = np.asarray(t, dtype=np.complex128)
    z = math.sqrt(r) * delta0 * t
    with np.errstate(all="ignore"):
        val = ((1.0 - mu) * math.log(2.0) - math.lgamma(mu)) + np.log(_zk(mu, z)) - z
    # z -> 0 limits; for mu > 1 the Bessel factor overflows only where phi == 1
    return np.where((z == 0) | ~np.isfinite(val), 0.0, val)


def _quad_char(dist, t):
    """R0(t) = 2 * int_0^inf P0(d) cos(d t) dd, split at the first zero."""
    if isinstance(dist, TruncatedDistribution):
        inner = dist.inner
        if isinstance(inner, StableLaw) and inner.alpha not in (1.0, 2.0):
            raise UnsupportedEvaluationError(
                "truncated stable law needs a density; only alpha in {1, 2} is supported")
        dc = dist.delta_c
        pdf = lambda d: float(density(inner, d))
        val, err = integrate.quad(pdf, 0.0, dc, weight="cos", wvar=t, limit=2000,
                                  epsabs=QUAD_TOL / 4)
        return 2.0 * val / dist.mass, 2.0 * err / dist.mass
    pdf = lambda d: float(density(dist, d))
    split = 0.5 * math.pi / t
    head, e1 = integrate.quad(lambda d: pdf(d) * math.cos(d * t), 0.0, split,
                              epsabs=QUAD_TOL / 4, epsrel=1e-12, limit=200)
    tail, e2 = integrate.quad(pdf, split, np.inf, weight="cos", wvar=t, limlst=200,
                              epsabs=QUAD_TOL / 4)
    return 2.0 * (head + tail), 2.0 * (e1 + e2)


def char_magnitude(dist, t, method="auto"):
    """|<exp(-i t delta)>| for ``t >= 0`` (vectorised over ``t``).

    ``method='auto'`` uses closed forms (stable laws, Student's t via the
    Bessel form) and quadrature otherwise; ``method='quad'`` forces the
    quadrature path for Student's t.  Quadrature raises
    :class:`IntegrationError` when its error estimate exceeds 1e-8.
    """
    _validate(dist)
    if method not in ("auto", "quad"):
        raise ValueError(f"unknown method {method!r}")
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("char_magnitude requires finite t >= 0")
    if isinstance(dist, StableLaw):
        return np.exp(-dist.scale_c * t ** dist.alpha)
    if isinstance(dist, StudentT) and method == "auto":
        return np.exp(student_log_char(dist.r, dist.delta0, t).real)
    flat = t.ravel()
    out = np.empty(flat.shape)
    for i, ti in enumerate(flat):
        if ti == 0.0:
            out[i] = 1.0
            continue
        val, err = _quad_char(dist, float(ti))
        if err > QUAD_TOL:
            raise IntegrationError(f"characteristic function quadrature at t={ti:g}", err)
        out[i] = abs(val)
    return out.reshape(t.shape)


def truncated_log_char(dist, t):
    """(log |R0(t)|, sign R0(t)) for a truncated law.

    For t * delta_c below ``_SMALL_PHASE`` the deficit 1 - R0 is integrated
    directly from the non-negative integrand 2 sin^2(d t / 2), which keeps
    full relative accuracy as R0 -> 1.
    """
    inner, dc = dist.inner, dist.delta_c
    if isinstance(inner, StableLaw) and inner.alpha not in (1.0, 2.0):
        raise UnsupportedEvaluationError(
            "truncated stable law needs a density; only alpha in {1, 2} is supported")
    pdf = lambda d: float(density(inner, d))
    t = np.asarray(t, dtype=np.float64)
    flat = t.ravel()
    logabs = np.empty(flat.shape)
    sign = np.ones(flat.shape)
    for i, ti in enumerate(flat):
        if ti == 0.0:
            logabs[i] = 0.0
        elif ti * dc <= _SMALL_PHASE:
            scale = 1.0 / ti
            pts = [p for p in (scale, 10 * scale) if p < dc] or None
            D, err = integrate.quad(lambda d: pdf(d) * 2.0 * math.sin(0.5 * d * ti) ** 2, 0.0, dc,
                                    points=pts, limit=2000, epsabs=0.0, epsrel=1e-11)
            logabs[i] = math.log1p(-2.0 * D / dist.mass)
        else:
            val, err = _quad_char(dist, float(ti))
            if err > QUAD_TOL:
                raise IntegrationError(f"characteristic function quadrature at t={ti:g}", err)
            sign[i] = 1.0 if val > 0 else -1.0
            logabs[i] = math.log(abs(val)) if val != 0 else -math.inf
    return logabs.reshape(t.shape), sign.reshape(t.shape)


def log_char_magnitude(dist, t):
    """log R0(t), accurate where R0 underflows or sits close to 1."""
    t = np.asarray(t, dtype=np.float64)
    if isinstance(dist, StableLaw):
        return -dist.scale_c * t ** dist.alpha
    if isinstance(dist, StudentT):
        return student_log_char(dist.r, dist.delta0, t).real
    return truncated_log_char(dist, t)[0]


def truncated_second_moment(dist):
    """<delta^2> of a truncated law (finite for any cutoff)."""
    inner = dist.inner
    val, _ = integrate.quad(lambda d: d * d * float(density(inner, d)), 0.0, dist.delta_c,
                            limit=500, epsrel=1e-12)
    return 2.0 * val / dist.mass


def from_dict(spec):
    """Build a distribution from a plain mapping (as produced by ``to_dict``)."""
    spec = dict(spec)
    family = spec.pop("family")
    delta_c = spec.pop("delta_c", None)
    if family == "stable":
        dist = StableLaw(alpha=spec["alpha"], scale_c=spec["c"])
    elif family == "student_t":
        dist = StudentT(r=spec["r"], delta0=spec.get("delta0", 1.0))
    else:
        raise ParameterDomainError(f"unknown family {family!r}")
    if delta_c is not None:
        dist = TruncatedDistribution(dist, delta_c)
    return dist


__all__ = [
    "StableLaw", "StudentT", "TruncatedDistribution", "DetuningDistribution",
    "sample", "density", "cdf", "char_magnitude", "log_char_magnitude",
    "acceptance_probability", "kernel_params", "from_dict",
]
