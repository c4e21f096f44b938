import math

import numpy as np
import pytest

from motional.analysis import find_crossover, fit_exponential_tail, fit_scaling_law, fwhm
from motional.analytic import CoherenceCurve
from motional.distributions import StableLaw, StudentT
from motional.errors import (
    FitWindowError, GridTooNarrowError, NoiseFloorError, ScanRangeError,
)
from motional.montecarlo import CollisionProcess, SimulationConfig, simulate
from motional.poisson import spectrum


class _Result:
    """Minimal stand-in for an ensemble result."""

    def __init__(self, t, R, err):
        self.curve = CoherenceCurve(t, R)
        self.stderr = np.asarray(err, dtype=float)


# --- fwhm -----------------------------------------------------------------------

def test_lorentzian_width():
    w = np.linspace(-50, 50, 20001)
    g = 0.7
    assert fwhm(w, 1 / (w * w + g * g)) == pytest.approx(2 * g, rel=1e-3)


def test_triangle_width_exact():
    w = np.linspace(-3, 3, 601)
    tri = np.clip(1 - np.abs(w) / 2, 0, None)
    assert fwhm(w, tri) == pytest.approx(2.0, abs=1e-12)


def test_fwhm_accepts_spectrum_object():
    sp = spectrum(StudentT(1.0), 0.0)
    assert fwhm(sp) == sp.fwhm


def test_fwhm_not_bracketed():
    w = np.linspace(-1, 1, 101)
    with pytest.raises(GridTooNarrowError):
        fwhm(w, 1 / (w * w + 4.0))


@pytest.mark.parametrize("k", [0.5, 2.0, 3.7])
def test_fwhm_scale_covariance(k):
    w = np.linspace(-40, 40, 4001)
    S = lambda x: 1 / (1 + x * x) ** 1.5
    assert fwhm(w, S(k * w)) == pytest.approx(fwhm(w, S(w)) / k, rel=5e-3)


def test_broadening_ratio_above_one():
    d = StudentT(0.5)
    assert spectrum(d, 10.0).fwhm / spectrum(d, 0.0).fwhm > 1


@pytest.mark.parametrize("dist", [StudentT(0.5), StudentT(1.5), StableLaw(2.0, 0.5)])
def test_normalized_fwhm_continuous_at_zero(dist):
    assert spectrum(dist, 1e-3).fwhm / spectrum(dist, 0.0).fwhm == pytest.approx(1.0, rel=0.01)


# --- exponential tail -----------------------------------------------------------

def test_exact_exponential():
    t = np.linspace(0, 40, 401)
    fit = fit_exponential_tail(CoherenceCurve(t, np.exp(-0.3 * t)), 1.0)
    assert fit.gamma == pytest.approx(0.3, abs=1e-12)
    assert fit.amplitude == pytest.approx(1.0, abs=1e-10)
    assert fit.fit_window == (10.0, 40.0)
    assert fit.r_squared == pytest.approx(1.0)


def test_rescaling_invariance():
    t = np.linspace(0, 10, 101)
    rng = np.random.default_rng(0)
    R = np.exp(-0.8 * t) * (1 + 0.01 * rng.standard_normal(t.size))
    R[0] = 1.0
    err = 0.01 * np.exp(-0.8 * t)
    a = fit_exponential_tail(_Result(t, R, err), 5.0)
    # rescaling R -> cR (with its errors) changes only the amplitude
    Rc = np.concatenate(([1.0], 0.3 * R[1:]))
    b = fit_exponential_tail(_Result(t, Rc, 0.3 * err), 5.0)
    assert b.gamma == pytest.approx(a.gamma, rel=1e-12)
    assert b.amplitude == pytest.approx(0.3 * a.amplitude, rel=1e-12)


def test_window_errors():
    t = np.linspace(0, 1, 11)
    with pytest.raises(FitWindowError):
        fit_exponential_tail(CoherenceCurve(t, np.exp(-t)), 1.0)  # window starts at 10
    with pytest.raises(ValueError):
        fit_exponential_tail(CoherenceCurve(t, np.exp(-t)), 0.0)


def test_noise_floor_error():
    t = np.linspace(0, 20, 21)
    R = np.exp(-t)
    R[0] = 1.0
    err = np.full(t.size, 1e-3)
    R[10:] = 1e-5  # buried under the 5-sigma floor
    R[12::3] = 5e-2  # except a few points that keep the window open
    with pytest.raises(NoiseFloorError):
        fit_exponential_tail(_Result(t, R, err), 1.0)


def test_fixed_interval_gaussian_rate():
    law, dt = StableLaw(2.0, 1.0), 0.1
    t = np.linspace(0, 15, 151)
    res = simulate(SimulationConfig(law, CollisionProcess.fixed(dt), t, 10_000, seed=1))
    fit = fit_exponential_tail(res, 1 / dt)
    assert abs(fit.gamma - 0.1) < 3 * fit.gamma_stderr + 1e-3


# --- scaling law ----------------------------------------------------------------

G = np.array([2.0, 5.0, 10.0, 20.0, 50.0])


@pytest.mark.parametrize("alpha", [0.5, 0.75, 1.5, 2.0])
def test_noiseless_scaling_recovery(alpha):
    a, b = 1.3, 0.4 if alpha < 2 else 0.0
    g = a * G ** (1 - alpha) + b
    fit = fit_scaling_law(np.column_stack((G, g)))
    assert fit.converged
    assert fit.alpha_bar == pytest.approx(alpha, rel=1e-6)
    assert fit.a == pytest.approx(a, rel=1e-6)
    assert fit.b == pytest.approx(b, abs=1e-6)


def test_gaussian_one_over_gamma():
    g0 = 1.5
    fit = fit_scaling_law(np.column_stack((G, g0 ** 2 / G)))
    assert fit.alpha_bar == pytest.approx(2.0, abs=1e-6)
    assert fit.b == pytest.approx(0.0, abs=1e-6)
    assert fit.gamma0 == pytest.approx(g0, rel=1e-6)


def test_scaling_fit_preconditions():
    with pytest.raises(ValueError):
        fit_scaling_law([[1, 1], [2, 2], [3, 3], [5, 4]])  # less than a decade
    with pytest.raises(ValueError):
        fit_scaling_law([[1, 1], [10, 2], [100, 3]])  # fewer than 4 rates


def test_scaling_fit_serializes():
    fit = fit_scaling_law(np.column_stack((G, G ** 0.5)))
    d = fit.to_dict()
    assert set(d["stderr"]) == {"a", "alpha_bar", "b"}
    assert len(d["restarts"]) == 8


# --- crossover ------------------------------------------------------------------

def test_crossover_v_shape():
    g = np.logspace(-1, 3, 41)
    v = 1 - 0.2 * np.exp(-np.abs(np.log(g / 7.0)))
    res = find_crossover(g, v, delta_c=100.0, alpha=0.5, T=0.5)
    assert res.gamma_star == pytest.approx(7.0, rel=0.05)
    assert res.predicted_scale == pytest.approx(20.0)


def test_crossover_parabola_exact():
    g = np.logspace(0, 2, 9)
    v = (np.log(g) - math.log(13.0)) ** 2
    assert find_crossover(g, v).gamma_star == pytest.approx(13.0, rel=1e-10)


def test_crossover_boundary():
    g = np.logspace(0, 2, 9)
    with pytest.raises(ScanRangeError):
        find_crossover(g, -np.log(g))
    with pytest.raises(ValueError):
        find_crossover(g[:4], g[:4])
