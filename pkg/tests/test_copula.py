import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize, stats

from sisecrecy.copula import (
    CopulaError,
    CopulaSpec,
    Family,
    conditional_cdf,
    conditional_quantile,
    copula_cdf,
    copula_density,
    pearson_rho,
    sample_pair,
    sample_pairs,
    scalar_density,
)

ALL_SPECS = [
    CopulaSpec.fgm(-1.0), CopulaSpec.fgm(0.0), CopulaSpec.fgm(0.4), CopulaSpec.fgm(1.0),
    CopulaSpec.frank(-35.0), CopulaSpec.frank(-5.0), CopulaSpec.frank(1e-3), CopulaSpec.frank(5.0),
    CopulaSpec.frank(35.0), CopulaSpec.frank(700.0), CopulaSpec.independence(),
    CopulaSpec.frechet_lower(), CopulaSpec.frechet_upper(),
]
DENSITY_SPECS = [s for s in ALL_SPECS if s.has_density]

unit = st.floats(min_value=0.0, max_value=1.0)
interior = st.floats(min_value=1e-3, max_value=1.0 - 1e-3)


def frank_oracle_cdf(z, u, v):
    with mpmath.workdps(50):
        z, u, v = mpmath.mpf(z), mpmath.mpf(u), mpmath.mpf(v)
        return float(-mpmath.log(1 + mpmath.expm1(-z * u) * mpmath.expm1(-z * v) / mpmath.expm1(-z)) / z)


def frank_oracle_density(z, u, v):
    with mpmath.workdps(50):
        z, u, v = mpmath.mpf(z), mpmath.mpf(u), mpmath.mpf(v)
        num = z * (1 - mpmath.exp(-z)) * mpmath.exp(-z * (u + v))
        den = ((1 - mpmath.exp(-z)) - (1 - mpmath.exp(-z * u)) * (1 - mpmath.exp(-z * v))) ** 2
        return float(num / den)


# --- specification examples -----------------------------------------------------

def test_fgm_cdf_example():
    assert copula_cdf(CopulaSpec.fgm(1.0), 0.5, 0.5) == pytest.approx(0.3125, abs=1e-15)


def test_independence_and_bounds_examples():
    assert copula_cdf(CopulaSpec.independence(), 0.3, 0.7) == pytest.approx(0.21, abs=1e-15)
    assert copula_cdf(CopulaSpec.frechet_upper(), 0.3, 0.7) == 0.3
    assert copula_cdf(CopulaSpec.frechet_lower(), 0.3, 0.7) == 0.0
    assert copula_cdf(CopulaSpec.frechet_lower(), 0.6, 0.7) == pytest.approx(0.3)


def test_fgm_density_example():
    assert copula_density(CopulaSpec.fgm(1.0), 0.0, 0.0) == 2.0
    assert copula_density(CopulaSpec.fgm(-1.0), 0.0, 1.0) == 2.0


@pytest.mark.parametrize("z", [-35.0, -5.0, -0.1, 0.1, 5.0, 35.0])
@pytest.mark.parametrize("u, v", [(0.1, 0.2), (0.5, 0.5), (0.9, 0.3), (0.99, 0.999), (0.01, 0.97)])
def test_frank_matches_high_precision_formula(z, u, v):
    assert copula_cdf(CopulaSpec.frank(z), u, v) == pytest.approx(frank_oracle_cdf(z, u, v), rel=1e-11, abs=1e-15)
    assert copula_density(CopulaSpec.frank(z), u, v) == pytest.approx(
        frank_oracle_density(z, u, v) if z > 0 else frank_oracle_density(-z, u, 1 - v), rel=1e-10)


def test_frank_negative_density_matches_formula_directly():
    # the reflection identity must reproduce the textbook density for z < 0
    for u, v in [(0.2, 0.3), (0.7, 0.6)]:
        assert copula_density(CopulaSpec.frank(-5.0), u, v) == pytest.approx(
            frank_oracle_density(-5.0, u, v), rel=1e-10)


def test_parameter_validation():
    with pytest.raises(CopulaError):
        CopulaSpec.fgm(1.5)
    with pytest.raises(CopulaError):
        CopulaSpec.frank(0.0)
    with pytest.raises(CopulaError):
        CopulaSpec.frank(701.0)
    with pytest.raises(CopulaError):
        CopulaSpec.frank(math.nan)
    assert CopulaSpec.independence().param is None
    assert CopulaSpec("fgm", 0.5).family is Family.FGM


def test_out_of_unit_interval_rejected():
    with pytest.raises(ValueError):
        copula_cdf(CopulaSpec.fgm(0.5), 1.2, 0.5)
    with pytest.raises(ValueError):
        conditional_quantile(CopulaSpec.fgm(0.5), 0.5, -0.1)


@pytest.mark.parametrize("spec", [CopulaSpec.frechet_lower(), CopulaSpec.frechet_upper()])
def test_frechet_density_rejected(spec):
    with pytest.raises(CopulaError):
        copula_density(spec, 0.5, 0.5)
    with pytest.raises(CopulaError):
        scalar_density(spec)


# --- invariants -------------------------------------------------------------------

@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.label)
def test_frechet_ordering_on_grid(spec):
    g = np.linspace(0.0, 1.0, 101)
    u, v = np.meshgrid(g, g)
    c = copula_cdf(spec, u, v)
    assert np.all(c >= np.maximum(u + v - 1.0, 0.0) - 1e-15)
    assert np.all(c <= np.minimum(u, v) + 1e-15)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.label)
def test_uniform_margins_and_groundedness(spec):
    g = np.linspace(0.0, 1.0, 41)
    np.testing.assert_allclose(copula_cdf(spec, g, 1.0), g, atol=1e-14)
    np.testing.assert_allclose(copula_cdf(spec, 1.0, g), g, atol=1e-14)
    np.testing.assert_allclose(copula_cdf(spec, g, 0.0), 0.0, atol=1e-14)


@pytest.mark.parametrize(
    "spec",
    [CopulaSpec.fgm(t) for t in (-1.0, 0.0, 1.0)] + [CopulaSpec.frank(z) for z in (-35.0, -5.0, 5.0, 35.0)],
    ids=lambda s: s.label,
)
def test_density_normalisation(spec):
    c = scalar_density(spec)
    pts = np.linspace(0.0, 1.0, 9)[1:-1]
    total = 0.0
    # split the square so the Frank ridge along a diagonal is resolved
    for v0, v1 in zip(np.r_[0.0, pts], np.r_[pts, 1.0]):
        total += integrate.dblquad(lambda u, v: c(u, v), v0, v1, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12)[0]
    assert total == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("spec", [s for s in DENSITY_SPECS if abs(s.param or 0.0) <= 35.0],
                         ids=lambda s: s.label)
def test_density_is_mixed_derivative_of_cdf(spec):
    h = 1e-4
    g = np.linspace(0.1, 0.9, 9)
    u, v = np.meshgrid(g, g)
    fd = (copula_cdf(spec, u + h, v + h) - copula_cdf(spec, u + h, v - h)
          - copula_cdf(spec, u - h, v + h) + copula_cdf(spec, u - h, v - h)) / (4 * h * h)
    dens = copula_density(spec, u, v)
    np.testing.assert_allclose(fd, dens, rtol=1e-4, atol=1e-4 * max(1.0, float(np.max(dens))))


@pytest.mark.parametrize("spec", DENSITY_SPECS, ids=lambda s: s.label)
def test_scalar_density_matches_vectorised(spec):
    c = scalar_density(spec)
    for u, v in [(0.1, 0.2), (0.5, 0.5), (0.93, 0.07), (1e-9, 1.0 - 1e-9)]:
        assert c(u, v) == pytest.approx(copula_density(spec, u, v), rel=1e-12)


def test_frank_tends_to_independence():
    g = np.linspace(0.0, 1.0, 51)
    u, v = np.meshgrid(g, g)
    np.testing.assert_allclose(copula_cdf(CopulaSpec.frank(1e-8), u, v), u * v, atol=1e-6)
    np.testing.assert_allclose(copula_cdf(CopulaSpec.frank(-1e-8), u, v), u * v, atol=1e-6)


def test_frank_extreme_parameter_approaches_bounds():
    g = np.linspace(0.0, 1.0, 21)
    u, v = np.meshgrid(g, g)
    hi = copula_cdf(CopulaSpec.frank(700.0), u, v)
    lo = copula_cdf(CopulaSpec.frank(-700.0), u, v)
    assert np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))
    np.testing.assert_allclose(hi, np.minimum(u, v), atol=0.01)
    np.testing.assert_allclose(lo, np.maximum(u + v - 1.0, 0.0), atol=0.01)


# --- conditional distribution ------------------------------------------------------

@pytest.mark.parametrize("spec", ALL_SPECS[:-2], ids=lambda s: s.label)
def test_conditional_cdf_is_partial_derivative(spec):
    h = 1e-6
    for u, v in [(0.2, 0.3), (0.5, 0.8), (0.85, 0.4)]:
        fd = (copula_cdf(spec, u + h, v) - copula_cdf(spec, u - h, v)) / (2 * h)
        assert conditional_cdf(spec, u, v) == pytest.approx(fd, abs=1e-6)


@pytest.mark.parametrize("spec", ALL_SPECS[:-2], ids=lambda s: s.label)
def test_conditional_quantile_matches_bisection(spec):
    for u in (0.05, 0.3, 0.5, 0.77, 0.999):
        for p in (0.01, 0.25, 0.5, 0.9, 0.999):
            ref = optimize.brentq(lambda v: conditional_cdf(spec, u, v) - p, 0.0, 1.0, xtol=1e-14)
            assert conditional_quantile(spec, u, p) == pytest.approx(ref, abs=1e-9)


@settings(max_examples=200)
@given(theta=st.floats(min_value=-1.0, max_value=1.0), u=unit, p=unit)
def test_fgm_inverse_round_trip(theta, u, p):
    spec = CopulaSpec.fgm(theta)
    v = conditional_quantile(spec, u, p)
    assert 0.0 <= v <= 1.0
    assert conditional_cdf(spec, u, v) == pytest.approx(p, abs=1e-10)


def test_fgm_inverse_near_zero_slope():
    # a = theta (1 - 2 u) tiny exercises the series branch
    spec = CopulaSpec.fgm(1e-10)
    v = conditional_quantile(spec, 0.3, 0.4)
    assert conditional_cdf(spec, 0.3, v) == pytest.approx(0.4, abs=1e-15)
    assert conditional_quantile(CopulaSpec.fgm(-1.0), 1.0, 0.0) == 0.0


@settings(max_examples=200)
@given(z=st.floats(min_value=-700.0, max_value=700.0).filter(lambda z: abs(z) > 1e-6), u=interior, p=interior)
def test_frank_inverse_round_trip(z, u, p):
    spec = CopulaSpec.frank(z)
    v = conditional_quantile(spec, u, p)
    assert 0.0 <= v <= 1.0
    # the conditional CDF can be very steep for large |z|; compare in v
    ref = optimize.brentq(lambda w: conditional_cdf(spec, u, w) - p, 0.0, 1.0, xtol=1e-15)
    assert v == pytest.approx(ref, abs=1e-8)


@settings(max_examples=100)
@given(t=st.floats(min_value=-1.0, max_value=1.0), u=unit, v=unit)
def test_fgm_symmetry(t, u, v):
    spec = CopulaSpec.fgm(t)
    assert copula_cdf(spec, u, v) == pytest.approx(copula_cdf(spec, v, u), abs=1e-15)


@settings(max_examples=100)
@given(z=st.floats(min_value=-50.0, max_value=50.0).filter(lambda z: abs(z) > 1e-3), u=unit, v=unit)
def test_frank_symmetry_and_bounds(z, u, v):
    spec = CopulaSpec.frank(z)
    c = copula_cdf(spec, u, v)
    assert c == pytest.approx(copula_cdf(spec, v, u), abs=1e-12)
    assert max(u + v - 1.0, 0.0) - 1e-15 <= c <= min(u, v) + 1e-15


@settings(max_examples=50)
@given(z1=st.floats(min_value=-30.0, max_value=30.0), dz=st.floats(min_value=0.5, max_value=10.0),
       u=interior, v=interior)
def test_frank_concordance_ordering(z1, dz, u, v):
    # larger parameter, pointwise larger CDF
    if abs(z1) < 1e-3 or abs(z1 + dz) < 1e-3:
        return
    assert copula_cdf(CopulaSpec.frank(z1), u, v) <= copula_cdf(CopulaSpec.frank(z1 + dz), u, v) + 1e-14


# --- sampling -------------------------------------------------------------------------

@pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.label)
def test_sampled_margins_uniform(spec):
    u1, u2 = sample_pairs(spec, np.random.default_rng(7), 20000)
    assert stats.kstest(u1, "uniform").pvalue > 1e-3
    assert stats.kstest(u2, "uniform").pvalue > 1e-3


@pytest.mark.parametrize("spec", [CopulaSpec.fgm(1.0), CopulaSpec.frank(-5.0), CopulaSpec.frank(35.0)],
                         ids=lambda s: s.label)
def test_sampled_joint_cdf(spec):
    n = 200000
    u1, u2 = sample_pairs(spec, np.random.default_rng(11), n)
    for a, b in [(0.3, 0.3), (0.5, 0.7), (0.8, 0.2), (0.9, 0.9)]:
        emp = np.mean((u1 <= a) & (u2 <= b))
        c = copula_cdf(spec, a, b)
        se = math.sqrt(c * (1 - c) / n)
        assert abs(emp - c) <= 4 * se


def test_frechet_samples_on_their_curves():
    u1, u2 = sample_pairs(CopulaSpec.frechet_upper(), np.random.default_rng(3), 100)
    np.testing.assert_array_equal(u1, u2)
    u1, u2 = sample_pairs(CopulaSpec.frechet_lower(), np.random.default_rng(3), 100)
    np.testing.assert_allclose(u1 + u2, 1.0)


def test_sampling_is_seed_reproducible():
    spec = CopulaSpec.frank(5.0)
    a = sample_pairs(spec, np.random.default_rng(99), 1000)
    b = sample_pairs(spec, np.random.default_rng(99), 1000)
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    u, v = sample_pair(spec, np.random.default_rng(99))
    one = sample_pairs(spec, np.random.default_rng(99), 1)
    assert (u, v) == (one[0][0], one[1][0])


# --- Pearson correlation ----------------------------------------------------------------

@pytest.mark.parametrize("theta", [-1.0, -0.5, 0.5, 1.0])
def test_fgm_rho_is_quarter_theta(theta):
    # Hoeffding with exponential margins gives exactly theta / 4
    assert pearson_rho(CopulaSpec.fgm(theta)).value == pytest.approx(theta / 4.0, abs=1e-7)


def test_rho_reference_values():
    assert pearson_rho(CopulaSpec.fgm(1.0)).value == pytest.approx(0.25, abs=0.005)
    assert pearson_rho(CopulaSpec.fgm(-1.0)).value == pytest.approx(-0.25, abs=0.005)
    assert 0.91 <= pearson_rho(CopulaSpec.frank(35.0)).value <= 0.93
    assert -0.64 <= pearson_rho(CopulaSpec.frank(-35.0)).value <= -0.62


def test_independence_rho_mc():
    est = pearson_rho(CopulaSpec.independence(), method="mc", n=10**6, seed=1)
    assert abs(est.value) <= 3 * est.std_error


@pytest.mark.parametrize("spec", [CopulaSpec.fgm(1.0), CopulaSpec.frank(35.0), CopulaSpec.frank(-35.0)],
                         ids=lambda s: s.label)
def test_rho_quadrature_agrees_with_mc(spec):
    quad = pearson_rho(spec, method="quadrature")
    mc = pearson_rho(spec, method="mc", n=2 * 10**6, seed=5)
    assert abs(quad.value - mc.value) <= 4 * mc.std_error


def test_rho_is_mean_invariant():
    spec = CopulaSpec.frank(5.0)
    assert pearson_rho(spec, 3.0, 0.2).value == pytest.approx(pearson_rho(spec).value, abs=1e-12)


def test_rho_frechet():
    with pytest.raises(CopulaError):
        pearson_rho(CopulaSpec.frechet_upper(), method="quadrature")
    up = pearson_rho(CopulaSpec.frechet_upper(), n=10**5)
    lo = pearson_rho(CopulaSpec.frechet_lower(), n=10**5)
    assert up.value == pytest.approx(1.0, abs=1e-12)
    # countermonotone exponentials: rho = 1 - pi^2/6
    assert lo.value == pytest.approx(1.0 - math.pi**2 / 6.0, abs=0.02)
