import math

import numpy as np
import pytest
from scipy import integrate, special

from motional.distributions import StableLaw, StudentT, TruncatedDistribution, char_magnitude
from motional.errors import (
    GridTooNarrowError, InversionError, LaplaceDomainError, PoleError,
)
from motional.poisson import (
    LaplaceEvaluator, _apply_relation, default_frequency_grid, invert_laplace,
    laplace_R, laplace_R0, spectrum,
)

from conftest import ORACLES

CAUCHY = StudentT(1.0)


def _c(pair):
    return complex(*pair)


# --- transforms -----------------------------------------------------------------

@pytest.mark.parametrize("s", [1.0, 0.3 + 2j, 2.0 - 5j, 1e-3 + 40j])
def test_cauchy_transform(s):
    assert laplace_R0(StableLaw(1.0, 1.0), s) == pytest.approx(1 / (s + 1), rel=1e-12)
    assert laplace_R0(CAUCHY, s) == pytest.approx(1 / (s + 1), rel=1e-9)


@pytest.mark.parametrize("case", ORACLES["gaussian_laplace"], ids=str)
def test_gaussian_transform_oracle(case):
    d = StableLaw(2.0, case["c"])
    assert laplace_R0(d, _c(case["s"])) == pytest.approx(_c(case["value"]), abs=1e-12)


def test_gaussian_transform_erfcx_form():
    # R~0(s) = sqrt(pi / (4c)) * erfcx(s / (2 sqrt c)) at s = delta0, c = delta0^2 / 2
    c, s = 0.5, 1.0
    want = math.sqrt(math.pi / (4 * c)) * special.erfcx(s / (2 * math.sqrt(c)))
    assert laplace_R0(StableLaw(2.0, c), s).real == pytest.approx(want, abs=1e-8)


def test_gaussian_transform_on_imaginary_axis():
    v = laplace_R0(StableLaw(2.0, 1.0), 3j)
    assert np.isfinite(v)
    re = integrate.quad(lambda T: math.exp(-T * T) * math.cos(3 * T), 0, np.inf)[0]
    assert v.real == pytest.approx(re, abs=1e-9)


@pytest.mark.parametrize("case", ORACLES["student_laplace"], ids=str)
def test_student_transform_oracle(case):
    v = laplace_R0(StudentT(case["r"]), _c(case["u"]))
    assert v == pytest.approx(_c(case["value"]), rel=1e-9)


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_stable_transform_vs_quadrature(alpha):
    s = 0.7 + 1.3j
    f = lambda T, part: part(np.exp(-s * T - T ** alpha))
    want = complex(integrate.quad(f, 0, np.inf, args=(np.real,), limit=400)[0],
                   integrate.quad(f, 0, np.inf, args=(np.imag,), limit=400)[0])
    assert laplace_R0(StableLaw(alpha, 1.0), s) == pytest.approx(want, abs=1e-9)


def test_truncated_transform_vs_quadrature():
    d = TruncatedDistribution(StudentT(0.5), 10.0)
    want = integrate.quad(lambda T: math.exp(-2 * T) * float(char_magnitude(d, T)), 0, 40, limit=400)[0]
    assert laplace_R0(d, 2.0).real == pytest.approx(want, abs=1e-7)


def test_domain_errors():
    with pytest.raises(LaplaceDomainError):
        laplace_R0(StudentT(0.5), -0.1)
    with pytest.raises(LaplaceDomainError):
        laplace_R0(TruncatedDistribution(StudentT(0.5), 10.0), 0.5j)
    with pytest.raises(LaplaceDomainError):
        laplace_R(StudentT(0.5), 1.0, -1.5)
    # Gaussian R0 decays faster than any exponential: the transform is entire
    assert np.isfinite(laplace_R0(StableLaw(2.0, 1.0), -1.0))


def test_pole_error():
    with pytest.raises(PoleError):
        _apply_relation(np.array([0.5]), 2.0)


def test_gamma_zero_reduces():
    s = np.array([0.5, 1 + 1j, 3 - 2j])
    np.testing.assert_allclose(laplace_R(StudentT(0.5), 0.0, s), laplace_R0(StudentT(0.5), s))


@pytest.mark.parametrize("gamma", [0.0, 0.1, 1.0, 10.0, 100.0])
def test_cauchy_fluctuation_invariant(gamma):
    s = np.array([0.2, 1 + 3j, 5 - 1j])
    np.testing.assert_allclose(laplace_R(StableLaw(1.0, 1.0), gamma, s), 1 / (s + 1), rtol=1e-12)


def test_relation_against_series():
    # R~ = sum_k gamma^k R~0(s+gamma)^(k+1): geometric series check at small gamma
    d, g, s = StudentT(0.5), 0.05, 1.0
    r0 = laplace_R0(d, s + g)
    series = sum(g ** k * r0 ** (k + 1) for k in range(60))
    assert laplace_R(d, g, s) == pytest.approx(series, rel=1e-12)


# --- spectra --------------------------------------------------------------------

def test_lorentzian_fwhm():
    sp = spectrum(StableLaw(1.0, 1.0), 0.0)
    assert sp.fwhm == pytest.approx(2.0, rel=1e-4)
    assert sp.values.max() == pytest.approx(1.0)
    assert np.all(sp.values >= 0)


@pytest.mark.parametrize("gamma", [0.1, 1.0, 10.0])
def test_cauchy_fwhm_gamma_independent(gamma):
    base = spectrum(CAUCHY, 0.0).fwhm
    assert spectrum(CAUCHY, gamma).fwhm == pytest.approx(base, rel=1e-6)


@pytest.mark.parametrize("dist,gamma", [(StudentT(0.5), 10.0), (StudentT(1.5), 1.0),
                                        (StableLaw(2.0, 0.5), 3.0)])
def test_spectrum_symmetry(dist, gamma):
    sp = spectrum(dist, gamma)
    assert np.max(np.abs(sp.values - sp.values[::-1])) <= 1e-8


@pytest.mark.parametrize("r", [0.5, 1.5, 3.0])
def test_spectrum_gamma0_matches_one_sided_transform(r):
    d = StudentT(r)
    sp = spectrum(d, 0.0)
    eps = sp.meta["eps"]
    R0 = lambda T: float(char_magnitude(d, T)) * math.exp(-eps * T)
    for w in (0.0, 0.37, 1.1, 4.0):
        if w == 0.0:
            re, im = integrate.quad(R0, 0, np.inf, limit=500)[0], 0.0
        else:
            re = integrate.quad(R0, 0, np.inf, weight="cos", wvar=w, limlst=200)[0]
            im = integrate.quad(R0, 0, np.inf, weight="sin", wvar=w, limlst=200)[0]
        raw = abs(laplace_R0(d, eps - 1j * w)) ** 2
        assert raw == pytest.approx(re * re + im * im, rel=1e-6)
    # the normalised grid values carry the same raw transform
    raw_grid = sp.values * sp.meta["peak_raw"]
    w = sp.omegas[700]
    assert raw_grid[700] == pytest.approx(abs(laplace_R0(d, eps - 1j * w)) ** 2, rel=1e-12)


def test_fig1_directions():
    ladder = [0.0, 0.1, 1.0, 10.0, 100.0]
    broad = [spectrum(StudentT(0.5), g).fwhm for g in ladder]
    narrow = [spectrum(StudentT(1.5), g).fwhm for g in ladder]
    assert np.all(np.diff(broad) > 0)
    assert np.all(np.diff(narrow) < 0)


def test_explicit_grid_too_narrow():
    with pytest.raises(GridTooNarrowError):
        spectrum(StudentT(0.5), 10.0, omegas=np.linspace(-0.5, 0.5, 101))


def test_auto_grid_widens():
    d = StableLaw(2.0, 400.0)  # scale 20 but broad line
    sp = spectrum(d, 0.0)
    assert sp.omegas[-1] >= default_frequency_grid(d)[-1]
    assert sp.fwhm > 0


def test_asymmetric_grid_rejected():
    with pytest.raises(ValueError):
        spectrum(CAUCHY, 0.0, omegas=np.linspace(-1, 2, 50))


# --- inversion ------------------------------------------------------------------

T = np.linspace(0.05, 6.0, 40)


@pytest.mark.parametrize("gamma", [0.0, 1.0, 10.0])
def test_invert_cauchy(gamma):
    c = invert_laplace(LaplaceEvaluator(StableLaw(1.0, 1.0), gamma), T)
    np.testing.assert_allclose(c.values, np.exp(-T), atol=1e-6)
    assert c.meta["contour"] == "talbot"


def test_invert_gaussian():
    c = invert_laplace(LaplaceEvaluator(StableLaw(2.0, 0.5)), T)
    np.testing.assert_allclose(c.values, np.exp(-0.5 * T ** 2), atol=1e-6)
    assert c.meta["contour"] == "hyperbola"


@pytest.mark.parametrize("dist", [StableLaw(0.5, 1.0), StudentT(0.5), StudentT(3.0)])
def test_invert_free_decay(dist):
    c = invert_laplace(LaplaceEvaluator(dist), T)
    np.testing.assert_allclose(c.values, char_magnitude(dist, T), atol=1e-6)


def test_invert_student_with_resets_bounds():
    # the no-reset path alone contributes e^(-gamma T) R0(T), and R must decrease
    d, g = StudentT(0.5), 10.0
    c = invert_laplace(LaplaceEvaluator(d, g), T)
    assert np.all(np.diff(c.values) < 0)
    assert np.all(c.values >= np.exp(-g * T) * char_magnitude(d, T) - 1e-9)


def test_invert_unsupported():
    with pytest.raises(InversionError):
        invert_laplace(LaplaceEvaluator(TruncatedDistribution(StudentT(0.5), 10.0)), T)
    with pytest.raises(InversionError):
        invert_laplace(LaplaceEvaluator(StableLaw(1.5, 1.0)), T)
    with pytest.raises(ValueError):
        invert_laplace(LaplaceEvaluator(CAUCHY), [0.0, 1.0])
