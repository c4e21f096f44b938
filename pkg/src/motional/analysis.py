"""Quantities extracted from curves and spectra: widths, decay rates, scaling fits."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy import optimize

from .errors import (
    FitFailureError,
    FitWindowError,
    GridTooNarrowError,
    NoiseFloorError,
    ScanRangeError,
)

WINDOW_START = 10.0  # fit window opens at WINDOW_START / Gamma
NOISE_FLOOR = 5.0    # points need R > NOISE_FLOOR * stderr
ALPHA_STARTS = tuple(np.arange(1, 9) * 0.25)


@dataclass(frozen=True)
class DecayFit:
    gamma: float
    amplitude: float
    fit_window: tuple
    residual_rms: float
    r_squared: float
    gamma_stderr: float
    n_points: int
    n_dropped: int

    def to_dict(self):
        return {"gamma": self.gamma, "amplitude": self.amplitude,
                "fit_window": list(self.fit_window), "residual_rms": self.residual_rms,
                "r_squared": self.r_squared, "gamma_stderr": self.gamma_stderr,
                "n_points": self.n_points, "n_dropped": self.n_dropped}


@dataclass(frozen=True)
class ScalingFit:
    a: float
    alpha_bar: float
    b: float
    covariance: np.ndarray
    converged: bool
    cost: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def gamma0(self):
        """gamma0 implied by a = gamma0**alpha_bar."""
        return self.a ** (1.0 / self.alpha_bar) if self.a > 0 else float("nan")

    @property
    def stderr(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def predict(self, gammas):
        return self.a * np.asarray(gammas, dtype=float) ** (1.0 - self.alpha_bar) + self.b

    def to_dict(self):
        return {"a": self.a, "alpha_bar": self.alpha_bar, "b": self.b,
                "gamma0": self.gamma0, "stderr": {k: float(v) for k, v in
                                                  zip(("a", "alpha_bar", "b"), self.stderr)},
                "covariance": np.asarray(self.covariance).tolist(),
                "converged": self.converged, "cost": self.cost, **self.diagnostics}


@dataclass(frozen=True)
class CrossoverResult:
    gamma_star: float
    predicted_scale: float
    index: int

    def to_dict(self):
        return {"gamma_star": self.gamma_star, "predicted_scale": self.predicted_scale,
                "index": self.index}


def fwhm(omegas, values=None):
    """Full width at half maximum of a sampled single-peaked curve.

    Accepts either a spectrum-like object with ``omegas`` and ``values`` or
    the two arrays.  The peak height is refined by a 3-point parabola and the
    half-maximum crossings are linearly interpolated.
    """
    if values is None:
        omegas, values = omegas.omegas, omegas.values
    w = np.asarray(omegas, dtype=float)
    v = np.asarray(values, dtype=float)
    if w.shape != v.shape or w.ndim != 1 or w.size < 3:
        raise ValueError("need matching 1-d arrays with at least 3 points")
    i = int(np.argmax(v))
    peak = v[i]
    if 0 < i < w.size - 1:
        peak = max(peak, _parabola_vertex(w[i - 1:i + 2], v[i - 1:i + 2])[1])
    half = 0.5 * peak
    if not peak > 0:
        raise ValueError("curve has no positive peak")

    def crossing(step):
        j = i
        while 0 <= j + step < w.size:
            k = j + step
            if v[k] < half:
                return w[j] + (half - v[j]) * (w[k] - w[j]) / (v[k] - v[j])
            j = k
        raise GridTooNarrowError("half maximum not crossed on both sides of the peak")

    return float(crossing(1) - crossing(-1))


def _parabola_vertex(x, y):
    """Vertex (x, y) of the parabola through three points."""
    x0, x1, x2 = x
    y0, y1, y2 = y
    d = (x0 - x1) * (x0 - x2) * (x1 - x2)
    A = (x2 * (y1 - y0) + x1 * (y0 - y2) + x0 * (y2 - y1)) / d
    B = (x2 * x2 * (y0 - y1) + x1 * x1 * (y2 - y0) + x0 * x0 * (y1 - y2)) / d
    C = (x1 * x2 * (x1 - x2) * y0 + x2 * x0 * (x2 - x0) * y1 + x0 * x1 * (x0 - x1) * y2) / d
    if A == 0:
        return x1, y1
    xv = -B / (2 * A)
    return xv, C - B * B / (4 * A)


def fit_exponential_tail(result, gamma_fluct, window_start=None):
    """Weighted fit of log R = log A - gamma T for T >= 10 / Gamma.

    ``result`` is an ensemble result (``curve`` and ``stderr``) or a plain
    curve, in which case all points get equal weight.  The window closes at
    the last point with R above the noise floor; points inside the window
    that fall below the floor are dropped.
    """
    curve = getattr(result, "curve", result)
    T = np.asarray(curve.times, dtype=float)
    R = np.asarray(curve.values, dtype=float)
    err = getattr(result, "stderr", None)
    err = np.zeros_like(R) if err is None else np.asarray(err, dtype=float)
    if window_start is None:
        if gamma_fluct <= 0:
            raise ValueError("gamma_fluct must be positive")
        window_start = WINDOW_START / gamma_fluct
    above = R > NOISE_FLOOR * err
    above &= R > 0
    ok = np.flatnonzero(above & (T >= window_start))
    if ok.size == 0:
        raise FitWindowError(f"no point above the noise floor beyond T = {window_start:g}")
    T_hi = T[ok[-1]]
    inside = (T >= window_start) & (T <= T_hi)
    n_in = int(inside.sum())
    keep = inside & above
    n_keep = int(keep.sum())
    if n_in - n_keep > 0.5 * n_in:
        raise NoiseFloorError(f"{n_in - n_keep} of {n_in} window points lie below the noise floor")
    if n_keep < 3:
        raise FitWindowError(f"only {n_keep} usable points in [{window_start:g}, {T_hi:g}]")
    t, y = T[keep], np.log(R[keep])
    e = err[keep]
    w = (R[keep] / e) ** 2 if np.all(e > 0) else np.ones_like(t)
    X = np.column_stack((np.ones_like(t), -t))
    XtW = X.T * w
    cov = np.linalg.inv(XtW @ X)
    logA, gam = cov @ (XtW @ y)
    res = y - X @ np.array([logA, gam])
    ybar = np.sum(w * y) / np.sum(w)
    ss_tot = float(np.sum(w * (y - ybar) ** 2))
    ss_res = float(np.sum(w * res ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    if not np.all(e > 0):
        cov = cov * (ss_res / max(n_keep - 2, 1))
    return DecayFit(gamma=float(gam), amplitude=float(math.exp(logA)),
                    fit_window=(float(window_start), float(T_hi)),
                    residual_rms=float(np.sqrt(np.mean(res ** 2))), r_squared=float(r2),
                    gamma_stderr=float(math.sqrt(max(cov[1, 1], 0.0))),
                    n_points=n_keep, n_dropped=n_in - n_keep)


def fit_scaling_law(rates, sigma=None):
    """Fit gamma = a * Gamma**(1 - alpha_bar) + b to (Gamma, gamma) pairs.

    Restarts from alpha_bar in {0.25, 0.5, ..., 2.0} with b started at
    min(gamma); ``a`` is fitted through its logarithm.  The lowest final
    residual wins.
    """
    data = np.asarray(rates, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError("rates must be a sequence of (Gamma, gamma) pairs")
    G, g = data[:, 0], data[:, 1]
    if np.unique(G).size < 4 or G.min() <= 0 or G.max() / G.min() < 10.0:
        raise ValueError("need at least 4 distinct positive Gamma values spanning a decade")
    s = np.ones_like(g) if sigma is None else np.asarray(sigma, dtype=float)
    lG = np.log(G)

    def resid(p):
        la, ab, b = p
        return (np.exp(la + (1.0 - ab) * lG) + b - g) / s

    b0 = float(g.min())
    best, tried = None, []
    for ab0 in ALPHA_STARTS:
        base = np.exp((1.0 - ab0) * lG)
        a0 = float(np.median((g - b0) / base))
        if not a0 > 0:
            a0 = float(np.mean(g) / np.mean(base))
        x0 = np.array([math.log(a0), min(ab0, 2.0 - 1e-9), b0])
        try:
            sol = optimize.least_squares(resid, x0, bounds=([-np.inf, 1e-6, -np.inf],
                                                            [np.inf, 2.0, np.inf]),
                                         x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                                         max_nfev=5000)
        except (ValueError, FloatingPointError) as exc:
            tried.append({"start": ab0, "error": str(exc)})
            continue
        tried.append({"start": ab0, "cost": float(sol.cost), "status": int(sol.status)})
        if sol.status > 0 and np.all(np.isfinite(sol.x)) and (best is None or sol.cost < best.cost):
            best = sol
    if best is None:
        raise FitFailureError(f"scaling fit did not converge from any start: {tried}")
    la, ab, b = best.x
    a = math.exp(la)
    # covariance in (a, alpha_bar, b) via the chain rule on log a
    J = best.jac * np.array([1.0 / a, 1.0, 1.0])
    dof = max(G.size - 3, 1)
    scale = 2.0 * best.cost / dof if sigma is None else 1.0
    try:
        cov = np.linalg.pinv(J.T @ J) * scale
    except np.linalg.LinAlgError:
        cov = np.full((3, 3), np.nan)
    return ScalingFit(a=a, alpha_bar=float(ab), b=float(b), covariance=cov, converged=True,
                      cost=float(best.cost), diagnostics={"restarts": tried})


def find_crossover(gammas, values, delta_c=None, alpha=None, T=None, delta0=1.0):
    """Rate of the interior minimum of a normalised-coherence scan.

    The discrete minimum is refined by a parabola in log Gamma.  If
    ``delta_c``, ``alpha`` and ``T`` are given the predicted scale
    (delta_c / delta0)**alpha / T is attached.
    """
    G = np.asarray(gammas, dtype=float)
    v = np.asarray(values, dtype=float)
    if G.shape != v.shape or G.size < 5:
        raise ValueError("need at least 5 (Gamma, value) points")
    if np.any(G <= 0) or np.any(np.diff(G) <= 0):
        raise ValueError("Gamma values must be positive and increasing")
    i = int(np.argmin(v))
    if i == 0 or i == G.size - 1:
        raise ScanRangeError(f"minimum at the scan boundary (Gamma = {G[i]:g})")
    x = np.log(G[i - 1:i + 2])
    xv, _ = _parabola_vertex(x, v[i - 1:i + 2])
    xv = min(max(xv, x[0]), x[2])
    pred = float("nan")
    if delta_c is not None and alpha is not None and T is not None:
        pred = (delta_c / delta0) ** alpha / T
    return CrossoverResult(gamma_star=float(math.exp(xv)), predicted_scale=float(pred), index=i)
