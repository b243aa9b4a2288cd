"""Average secrecy capacity (ASC) and secrecy outage probability (SOP).

Each metric is available three ways:

* ``*_closed_form`` - exact expressions for FGM-coupled Rayleigh fading,
  built only from ``exp(x) E1(x)`` so nothing overflows at small SNR;
* ``*_quadrature`` - nested adaptive quadrature of the defining double
  integral against any density-bearing copula;
* ``*_monte_carlo`` - sample means over copula-coupled SNR draws.

The quadrature and Monte-Carlo routes never call the closed-form helpers,
so the three agree only if all of them are right.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate

from .channel import sample_snr_pairs
from .copula import CopulaError, CopulaSpec, Family, scalar_density
from .secrecy import SecrecyRegime
from .specfun import exp_e1_scaled

LN2 = math.log(2.0)
MC_CHUNK = 1 << 18

VALID = "ok"
GTH_NEGATIVE = "gth_negative"


class Method(str, Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class MetricEstimate:
    """A metric value together with how it was obtained.

    ``error_bound`` is 0 for closed forms, the integrator's error estimate
    for quadrature and the standard error of the mean for Monte-Carlo.
    """

    value: float
    method: Method
    error_bound: float = 0.0
    n_samples: int | None = None
    seed: int | None = None
    validity_flag: str = VALID
    notes: tuple = field(default=())


def _check_rate(R_s):
    if not (math.isfinite(R_s) and R_s > 0):
        raise ValueError(f"target secrecy rate must be positive, got {R_s!r}")
    return float(R_s)


def _check_theta(theta):
    if isinstance(theta, CopulaSpec):
        if theta.family is Family.INDEPENDENCE:
            return 0.0
        if theta.family is not Family.FGM:
            raise CopulaError("closed forms exist only for the FGM copula")
        return theta.param
    theta = float(theta)
    if not -1.0 <= theta <= 1.0:
        raise CopulaError(f"FGM parameter must lie in [-1, 1], got {theta}")
    return theta


# --- integral identities used by the closed forms -----------------------------

def laplace_log1p(zeta):
    """``int_0^inf exp(-zeta t) ln(1 + t) dt = exp(zeta) E1(zeta) / zeta``."""
    return exp_e1_scaled(zeta) / zeta


def laplace_log_shift(zeta, kappa):
    """``int_0^inf exp(-zeta t) ln(1 + kappa + t) dt``."""
    k1 = 1.0 + kappa
    return (exp_e1_scaled(zeta * k1) + math.log(k1)) / zeta


def log_shift_antiderivative(t, zeta, kappa):
    """An antiderivative in ``t`` of ``exp(-zeta t) ln(1 + kappa + t)``.

    Written with the scaled E1, so ``exp(zeta (1+kappa)) E1(zeta (1+kappa+t))``
    becomes ``exp(-zeta t) * exp_e1_scaled(zeta (1+kappa+t))``.
    """
    x = 1.0 + kappa + t
    return -math.exp(-zeta * t) * (exp_e1_scaled(zeta * x) + math.log(x)) / zeta


def laplace_e1_affine(zeta, delta, nu):
    """``int_0^inf exp(-zeta t) E1(delta + nu t) dt`` for positive arguments."""
    # exp(zeta delta/nu) E1(delta (zeta+nu)/nu) == exp(-delta) * scaled(delta (zeta+nu)/nu)
    return math.exp(-delta) * (exp_e1_scaled(delta) - exp_e1_scaled(delta * (zeta + nu) / nu)) / zeta


# --- ASC closed form -----------------------------------------------------------

def _ratio_block(p, q, K, L):
    """``p q * iint_{gamma_e < gamma_m + K - L} ln((K+gm)/(L+ge)) e^{-p gm - q ge}``.

    Uses ``ln(x/y) = int_y^x dt/t`` and swaps the order of integration,
    which leaves only one-dimensional exponential integrals.
    """
    if K <= L:
        return math.exp(-p * (L - K)) * (exp_e1_scaled(p * L) - exp_e1_scaled((p + q) * L))
    shrink = math.exp(-q * (K - L))
    return (
        math.log(K / L)
        - exp_e1_scaled(q * L)
        + shrink * exp_e1_scaled(q * K)
        + exp_e1_scaled(p * K)
        - shrink * exp_e1_scaled((p + q) * K)
    )


def _fgm_combine(block, a, b, theta):
    # FGM density = ab e^{-a x - b y} [(1+t) - 2t e^{-a x} - 2t e^{-b y} + 4t e^{-a x - b y}];
    # each block is normalised by p q, hence the reduced weights.
    return (1.0 + theta) * block(a, b) - theta * (block(2 * a, b) + block(a, 2 * b) - block(2 * a, 2 * b))


def asc_closed_form(params, theta, regime):
    """Exact ASC in bits for FGM-coupled Rayleigh fading.

    ``COROLLARY1`` gives ``exp(1/gbar_m) E1(1/gbar_m) / ln 2``, free of the
    dependence parameter and all SI terms. ``COROLLARY2`` integrates the
    positive part of the ratio capacity over the FGM density.
    """
    regime = SecrecyRegime(regime)
    theta = _check_theta(theta)
    a = 1.0 / params.gbar_m
    if regime is SecrecyRegime.COROLLARY1:
        return MetricEstimate(exp_e1_scaled(a) / LN2, Method.CLOSED_FORM)
    b = 1.0 / params.gbar_e
    K, L = 1.0 + params.gbar_ms, 1.0 + params.gbar_es
    value = _fgm_combine(lambda p, q: _ratio_block(p, q, K, L), a, b, theta) / LN2
    return MetricEstimate(max(value, 0.0), Method.CLOSED_FORM)


# --- SOP closed form -----------------------------------------------------------

def gamma_threshold(params, R_s):
    """Constant ``2^R_s (1 + gbar_es) - (1 + gbar_ms)`` of the ratio-form SOP."""
    return 2.0 ** R_s * (1.0 + params.gbar_es) - (1.0 + params.gbar_ms)


def _sop_block_piecewise(p, q, g, c):
    # p q * iint_{x > max(0, g + c y)} e^{-p x - q y}; g < 0 splits at y0 = -g/c
    y0 = -g / c
    ey = math.exp(-q * y0)
    return (1.0 - ey) + q * ey / (q + p * c)


def sop_closed_form(params, theta, R_s, regime, *, piecewise=False):
    """Exact SOP for FGM-coupled Rayleigh fading.

    The ratio-form expression assumes the threshold ``gamma_threshold``
    is nonnegative. When it is negative the estimate carries
    ``validity_flag == "gth_negative"``; with ``piecewise=True`` the
    threshold is clamped at zero inside the integral instead, which is
    exact in that regime too.
    """
    regime = SecrecyRegime(regime)
    theta = _check_theta(theta)
    R_s = _check_rate(R_s)
    gm, ge = params.gbar_m, params.gbar_e
    if regime is SecrecyRegime.COROLLARY1:
        return MetricEstimate(-math.expm1(-(2.0 ** R_s - 1.0) / gm), Method.CLOSED_FORM)

    c = 2.0 ** R_s
    g = gamma_threshold(params, R_s)
    if g < 0 and piecewise:
        a, b = 1.0 / gm, 1.0 / ge
        success = _fgm_combine(lambda p, q: _sop_block_piecewise(p, q, g, c), a, b, theta)
        value = 1.0 - success
        flag = VALID
    else:
        e1 = math.exp(-g / gm)
        e2 = math.exp(-2.0 * g / gm)
        t1 = gm * e1 / (gm + c * ge)
        success = t1 + theta * (
            t1
            - gm * e2 / (gm + 2.0 * c * ge)
            - 2.0 * gm * e1 / (2.0 * gm + c * ge)
            + gm * e2 / (gm + c * ge)
        )
        value = 1.0 - success
        flag = GTH_NEGATIVE if g < 0 else VALID
    notes = ("threshold constant is negative; expression outside its derivation domain",) if flag != VALID else ()
    if not 0.0 <= value <= 1.0:
        notes += (f"raw value {value!r} clipped to [0, 1]",)
        value = min(max(value, 0.0), 1.0)
    return MetricEstimate(value, Method.CLOSED_FORM, validity_flag=flag, notes=notes)


# --- quadrature ------------------------------------------------------------------

def _density_fn(params, spec):
    """Scalar joint density ``f_m f_e c(F_m, F_e)`` for the quadrature integrands."""
    if not spec.has_density:
        raise CopulaError(f"quadrature needs a density; {spec.family.value} is singular")
    a, b = 1.0 / params.gbar_m, 1.0 / params.gbar_e
    c = scalar_density(spec)

    def f(x, y):
        em, ee = math.exp(-a * x), math.exp(-b * y)
        return a * b * em * ee * c(1.0 - em, 1.0 - ee)
    return f


def _semi_infinite(fn, start, scale, tol, points=None):
    """``int_start^inf fn`` via ``x = start + scale t/(1-t)`` on ``[0, 1)``."""
    def g(t):
        if t >= 1.0:
            return 0.0
        om = 1.0 - t
        val = fn(start + scale * t / om)
        return val * scale / (om * om) if val else 0.0

    mapped = None
    if points:
        mapped = [p / (p + scale) for p in (q - start for q in points) if p > 0]
    val, err = integrate.quad(g, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=400, points=mapped)
    return val, err


def asc_quadrature(params, spec, regime, tol=1e-8):
    """ASC in bits by nested adaptive quadrature of its defining integral.

    ``COROLLARY2`` integrates over ``gamma_e < gamma_m + gbar_ms - gbar_es``,
    which is exactly the set where the ratio capacity is positive.
    """
    regime = SecrecyRegime(regime)
    f = _density_fn(params, spec)
    inner_tol = tol / 10.0
    errs = []

    if regime is SecrecyRegime.COROLLARY1:
        def outer(x):
            mass, e = _semi_infinite(lambda y: f(x, y), 0.0, params.gbar_e, inner_tol)
            errs.append(e)
            return math.log1p(x) / LN2 * mass
        val, err = _semi_infinite(outer, 0.0, params.gbar_m, tol)
    else:
        K, L = 1.0 + params.gbar_ms, 1.0 + params.gbar_es
        d = params.gbar_ms - params.gbar_es

        def outer(x):
            upper = x + d
            if upper <= 0.0:
                return 0.0
            lk = math.log(K + x)

            def integrand(y):
                return (lk - math.log(L + y)) * f(x, y)
            # the density lives on the gbar_e scale; a long interval hides it from QUADPACK
            pts = [k * params.gbar_e for k in (1.0, 8.0, 40.0) if k * params.gbar_e < upper] or None
            v, e = integrate.quad(integrand, 0.0, upper, epsabs=inner_tol, epsrel=inner_tol,
                                  limit=200, points=pts)
            errs.append(e)
            return v / LN2
        val, err = _semi_infinite(outer, max(0.0, -d), params.gbar_m, tol)
    return MetricEstimate(max(val, 0.0), Method.QUADRATURE, error_bound=err + (max(errs) if errs else 0.0))


def sop_quadrature(params, spec, R_s, regime, tol=1e-9):
    """SOP as ``1 - P(gamma_m > threshold(gamma_e))`` by nested quadrature."""
    regime = SecrecyRegime(regime)
    R_s = _check_rate(R_s)
    f = _density_fn(params, spec)
    c = 2.0 ** R_s
    inner_tol = tol / 10.0
    errs = []
    if regime is SecrecyRegime.COROLLARY1:
        def threshold(y):
            return c - 1.0
        kink = None
    else:
        K, L = 1.0 + params.gbar_ms, 1.0 + params.gbar_es

        def threshold(y):
            return max(0.0, c * (L + y) - K)
        g = c * L - K
        kink = [-g / c] if g < 0 else None

    def outer(y):
        v, e = _semi_infinite(lambda x: f(x, y), threshold(y), params.gbar_m, inner_tol)
        errs.append(e)
        return v

    success, err = _semi_infinite(outer, 0.0, params.gbar_e, tol, points=kink)
    value = min(max(1.0 - success, 0.0), 1.0)
    return MetricEstimate(value, Method.QUADRATURE, error_bound=err + (max(errs) if errs else 0.0))


# --- Monte-Carlo -------------------------------------------------------------------

def chunk_rng(seed, index):
    """Generator for chunk ``index``; fixed so results ignore the worker count."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _mc_moments(sample_fn, n, seed, workers):
    sizes = [min(MC_CHUNK, n - start) for start in range(0, n, MC_CHUNK)]

    def run(i):
        vals = sample_fn(chunk_rng(seed, i), sizes[i])
        return float(np.sum(vals)), float(np.sum(vals * vals))

    if workers and workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s1 / n
    if n > 1:
        var = max(s2 - n * mean * mean, 0.0) / (n - 1)
        se = math.sqrt(var / n)
    else:
        se = math.inf
    return mean, se


def _check_n(n):
    n = int(n)
    if n < 1:
        raise ValueError("Monte-Carlo sample size must be >= 1")
    return n


def asc_monte_carlo(params, spec, regime, n=10**6, seed=0, workers=1):
    """ASC in bits as the mean of ``max(0, C_s)`` over ``n`` copula draws."""
    regime = SecrecyRegime(regime)
    n = _check_n(n)
    K, L = 1.0 + params.gbar_ms, 1.0 + params.gbar_es

    def draw(rng, size):
        gm, ge = sample_snr_pairs(params, spec, rng, size)
        if regime is SecrecyRegime.COROLLARY1:
            return np.log1p(gm) / LN2
        return np.maximum(np.log(K + gm) - np.log(L + ge), 0.0) / LN2

    mean, se = _mc_moments(draw, n, seed, workers)
    return MetricEstimate(mean, Method.MONTE_CARLO, error_bound=se, n_samples=n, seed=seed)


def sop_monte_carlo(params, spec, R_s, regime, n=10**6, seed=0, workers=1):
    """SOP as the fraction of draws with ``C_s <= R_s``; binomial standard error."""
    regime = SecrecyRegime(regime)
    R_s = _check_rate(R_s)
    n = _check_n(n)
    c = 2.0 ** R_s
    K, L = 1.0 + params.gbar_ms, 1.0 + params.gbar_es

    def draw(rng, size):
        gm, ge = sample_snr_pairs(params, spec, rng, size)
        # C_s <= R_s rewritten without logs
        if regime is SecrecyRegime.COROLLARY1:
            return (1.0 + gm <= c).astype(float)
        return (K + gm <= c * (L + ge)).astype(float)

    p, _ = _mc_moments(draw, n, seed, workers)
    se = math.sqrt(p * (1.0 - p) / n) if n > 1 else math.inf
    return MetricEstimate(p, Method.MONTE_CARLO, error_bound=se, n_samples=n, seed=seed)


# --- dispatch helpers used by the sweep runner --------------------------------------

def evaluate(metric, method, params, spec, regime, *, R_s=None, tol=1e-8, n=10**6, seed=0):
    """Dispatch one ``(metric, method)`` evaluation; ``metric`` is ``"asc"`` or ``"sop"``."""
    method = Method(method)
    metric = metric.lower()
    if metric not in ("asc", "sop"):
        raise ValueError(f"unknown metric {metric!r}")
    if method is Method.CLOSED_FORM:
        if metric == "asc":
            return asc_closed_form(params, spec, regime)
        return sop_closed_form(params, spec, R_s, regime)
    if method is Method.QUADRATURE:
        if metric == "asc":
            return asc_quadrature(params, spec, regime, tol)
        return sop_quadrature(params, spec, R_s, regime, tol)
    if metric == "asc":
        return asc_monte_carlo(params, spec, regime, n, seed)
    return sop_monte_carlo(params, spec, R_s, regime, n, seed)

