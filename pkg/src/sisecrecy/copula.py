"""Bivariate copulas: CDF, density, conditional inverse and sampling.

Supported families are FGM, Frank, independence and the two
Frechet-Hoeffding bounds. Every evaluation function broadcasts over numpy
arrays. Frank is evaluated for a positive parameter only; negative
parameters go through the reflection ``C_z(u, v) = u - C_{-z}(u, 1 - v)``,
which keeps all exponentials bounded by one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

FRANK_MAX_PARAM = 700.0


class Family(str, Enum):
    FGM = "fgm"
    FRANK = "frank"
    INDEPENDENCE = "independence"
    FRECHET_LOWER = "frechet_lower"
    FRECHET_UPPER = "frechet_upper"


class CopulaError(ValueError):
    """Invalid copula parameter or an operation the family does not support."""


@dataclass(frozen=True)
class CopulaSpec:
    """Dependence family plus its scalar parameter.

    ``param`` is ``theta`` for FGM and ``zeta`` for Frank; it is ignored
    (and normalised to ``None``) for the parameter-free families.
    """

    family: Family
    param: float | None = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        if fam is Family.FGM:
            if self.param is None or not -1.0 <= float(self.param) <= 1.0:
                raise CopulaError(f"FGM parameter must lie in [-1, 1], got {self.param!r}")
            object.__setattr__(self, "param", float(self.param))
        elif fam is Family.FRANK:
            if self.param is None or not np.isfinite(self.param) or self.param == 0:
                raise CopulaError(f"Frank parameter must be nonzero and finite, got {self.param!r}")
            if abs(self.param) > FRANK_MAX_PARAM:
                raise CopulaError(f"|Frank parameter| is capped at {FRANK_MAX_PARAM}")
            object.__setattr__(self, "param", float(self.param))
        else:
            object.__setattr__(self, "param", None)

    @classmethod
    def fgm(cls, theta):
        return cls(Family.FGM, theta)

    @classmethod
    def frank(cls, zeta):
        return cls(Family.FRANK, zeta)

    @classmethod
    def independence(cls):
        return cls(Family.INDEPENDENCE)

    @classmethod
    def frechet_lower(cls):
        return cls(Family.FRECHET_LOWER)

    @classmethod
    def frechet_upper(cls):
        return cls(Family.FRECHET_UPPER)

    @property
    def has_density(self):
        return self.family not in (Family.FRECHET_LOWER, Family.FRECHET_UPPER)

    @property
    def label(self):
        if self.param is None:
            return self.family.value
        return f"{self.family.value}({self.param:g})"


def _unit(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError(f"{name} must lie in [0, 1]")
    return x


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


# --- Frank, positive parameter ------------------------------------------------

def _frank_log_d(z, u, v):
    # D = (1-e^-z) - (1-e^-zu)(1-e^-zv), written as a sum of two
    # nonnegative terms so that it never cancels: D = e^-zu (1-e^-zv) + e^-zv (1-e^-z(1-v))
    with np.errstate(divide="ignore"):
        t1 = -z * u + np.log(-np.expm1(-z * v))
        t2 = -z * v + np.log(-np.expm1(-z * (1.0 - v)))
    return np.logaddexp(t1, t2)


def _frank_cdf_pos(z, u, v):
    a = np.expm1(-z * u) * np.expm1(-z * v) / np.expm1(-z)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = -np.log1p(np.maximum(a, -1.0)) / z
        stable = -(_frank_log_d(z, u, v) - np.log(-np.expm1(-z))) / z
    # log1p loses accuracy as a -> -1 (large z near the upper corner)
    out = np.where(a > -0.5, direct, stable)
    return np.clip(out, 0.0, np.minimum(u, v))


def _frank_density_pos(z, u, v):
    with np.errstate(divide="ignore"):
        log_c = np.log(z) + np.log(-np.expm1(-z)) - z * (u + v) - 2.0 * _frank_log_d(z, u, v)
    return np.exp(log_c)


def _frank_hinv_pos(z, u, p):
    # v = -(1/z) [ log((1-p) e^-zu + p e^-z) - log(p + (1-p) e^-zu) ]
    with np.errstate(divide="ignore"):
        lp, lq = np.log(p), np.log1p(-p)
        num = np.logaddexp(lq - z * u, lp - z)
        den = np.logaddexp(lp, lq - z * u)
    return np.clip(-(num - den) / z, 0.0, 1.0)


# --- public API ---------------------------------------------------------------

def copula_cdf(spec, u1, u2):
    """Copula CDF ``C(u1, u2)``; broadcasts over array inputs."""
    u1, u2 = _unit(u1, "u1"), _unit(u2, "u2")
    fam = spec.family
    if fam is Family.INDEPENDENCE:
        out = u1 * u2
    elif fam is Family.FGM:
        out = u1 * u2 * (1.0 + spec.param * (1.0 - u1) * (1.0 - u2))
    elif fam is Family.FRANK:
        z = spec.param
        if z > 0:
            out = _frank_cdf_pos(z, u1, u2)
        else:
            out = u1 - _frank_cdf_pos(-z, u1, 1.0 - u2)
            out = np.clip(out, np.maximum(u1 + u2 - 1.0, 0.0), np.minimum(u1, u2))
    elif fam is Family.FRECHET_UPPER:
        out = np.minimum(u1, u2)
    else:
        out = np.maximum(u1 + u2 - 1.0, 0.0)
    return _scalar_or_array(out)


def copula_density(spec, u1, u2):
    """Copula density ``d^2 C / du1 du2``.

    Raises
    ------
    CopulaError
        For the Frechet bounds, whose mass sits on a curve.
    """
    if not spec.has_density:
        raise CopulaError(f"{spec.family.value} is singular and has no density")
    u1, u2 = _unit(u1, "u1"), _unit(u2, "u2")
    fam = spec.family
    if fam is Family.INDEPENDENCE:
        out = np.ones(np.broadcast(u1, u2).shape)
    elif fam is Family.FGM:
        out = 1.0 + spec.param * (1.0 - 2.0 * u1) * (1.0 - 2.0 * u2)
    else:
        z = spec.param
        out = _frank_density_pos(z, u1, u2) if z > 0 else _frank_density_pos(-z, u1, 1.0 - u2)
    return _scalar_or_array(out)


def _log_sum(x, y):
    if x == -math.inf:
        return y
    if y == -math.inf:
        return x
    m = max(x, y)
    return m + math.log1p(math.exp(-abs(x - y)))


def _log_one_minus_exp(t):
    # log(1 - e^-t) for t >= 0
    return math.log(-math.expm1(-t)) if t > 0 else -math.inf


def scalar_density(spec):
    """Return a plain-float closure ``c(u1, u2)``, for use inside quadrature.

    Same values as :func:`copula_density` without numpy's per-call overhead.
    """
    if not spec.has_density:
        raise CopulaError(f"{spec.family.value} is singular and has no density")
    if spec.family is Family.INDEPENDENCE:
        return lambda u, v: 1.0
    if spec.family is Family.FGM:
        th = spec.param
        return lambda u, v: 1.0 + th * (1.0 - 2.0 * u) * (1.0 - 2.0 * v)
    z = abs(spec.param)
    flip = spec.param < 0
    head = math.log(z) + _log_one_minus_exp(z)

    def c(u, v):
        if flip:
            v = 1.0 - v
        log_d = _log_sum(-z * u + _log_one_minus_exp(z * v), -z * v + _log_one_minus_exp(z * (1.0 - v)))
        return math.exp(head - z * (u + v) - 2.0 * log_d)
    return c


def conditional_cdf(spec, u1, u2):
    """``dC(u1, u2)/du1``, the CDF of ``U2`` given ``U1 = u1``."""
    u1, u2 = _unit(u1, "u1"), _unit(u2, "u2")
    fam = spec.family
    if fam is Family.INDEPENDENCE:
        out = u2 * np.ones_like(u1)
    elif fam is Family.FGM:
        out = u2 * (1.0 + spec.param * (1.0 - 2.0 * u1) * (1.0 - u2))
    elif fam is Family.FRANK:
        z = abs(spec.param)
        v = u2 if spec.param > 0 else 1.0 - u2
        # h(v|u) = e^-zu (1 - e^-zv) / D
        with np.errstate(divide="ignore"):
            log_h = -z * u1 + np.log(-np.expm1(-z * v)) - _frank_log_d(z, u1, v)
        h = np.exp(log_h)
        out = h if spec.param > 0 else 1.0 - h
    elif fam is Family.FRECHET_UPPER:
        out = (u2 >= u1).astype(float)
    else:
        out = (u2 >= 1.0 - u1).astype(float)
    return _scalar_or_array(np.clip(out, 0.0, 1.0))


def _fgm_hinv(theta, u1, p):
    a = theta * (1.0 - 2.0 * u1)
    # root in [0, 1] of a v^2 - (1 + a) v + p = 0, written in the
    # cancellation-free form 2p / ((1+a) + sqrt((1+a)^2 - 4ap))
    disc = (1.0 + a) ** 2 - 4.0 * a * p
    if np.any(disc < -1e-12):
        raise CopulaError("FGM conditional inverse has no real root")
    denom = (1.0 + a) + np.sqrt(np.maximum(disc, 0.0))
    # denom vanishes only for a = -1, p = 0, where the root is 0
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.where(denom > 0, 2.0 * p / np.where(denom > 0, denom, 1.0), 0.0)
    small = np.abs(a) < 1e-9
    if np.any(small):
        # second-order expansion around a = 0
        q = p * (1.0 - p)
        series = p - a * q + a * a * q * (1.0 - 2.0 * p)
        root = np.where(small, series, root)
    if np.any(root < -1e-12) or np.any(root > 1.0 + 1e-12):
        raise CopulaError("FGM conditional inverse left the unit interval")
    return np.clip(root, 0.0, 1.0)


def conditional_quantile(spec, u1, p):
    """Solve ``dC(u1, u2)/du1 = p`` for ``u2``; broadcasts over arrays."""
    u1, p = _unit(u1, "u1"), _unit(p, "p")
    fam = spec.family
    if fam is Family.INDEPENDENCE:
        out = p * np.ones_like(u1)
    elif fam is Family.FGM:
        out = _fgm_hinv(spec.param, u1, p)
    elif fam is Family.FRANK:
        z = spec.param
        if z > 0:
            out = _frank_hinv_pos(z, u1, p)
        else:
            out = 1.0 - _frank_hinv_pos(-z, u1, 1.0 - p)
    elif fam is Family.FRECHET_UPPER:
        out = u1 * np.ones_like(p)
    else:
        out = (1.0 - u1) * np.ones_like(p)
    return _scalar_or_array(out)


def sample_pairs(spec, rng, size):
    """Draw ``size`` pairs ``(u1, u2)`` by conditional inversion.

    ``rng`` is a :class:`numpy.random.Generator`; the same seed gives the
    same stream. Returns two arrays of length ``size``.
    """
    u1 = rng.random(size)
    p = rng.random(size)
    return u1, np.asarray(conditional_quantile(spec, u1, p), dtype=float)


def sample_pair(spec, rng):
    """Draw a single pair ``(u1, u2)``."""
    u1, u2 = sample_pairs(spec, rng, 1)
    return float(u1[0]), float(u2[0])


# --- Pearson correlation of exponential margins --------------------------------

@dataclass(frozen=True)
class RhoEstimate:
    value: float
    std_error: float
    method: str


def _rho_quadrature(spec, tol):
    # Hoeffding: cov = iint [C(F1, F2) - F1 F2] dx dy. With exponential
    # margins, dx = mean / (1 - u) du and var = mean^2, so the means cancel.
    def inner(v):
        def f(u):
            return (copula_cdf(spec, u, v) - u * v) / ((1.0 - u) * (1.0 - v))
        pts = [v] if 0.0 < v < 1.0 else None
        return integrate.quad(f, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200, points=pts)[0]

    val, err = integrate.quad(inner, 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200)
    return RhoEstimate(float(val), float(err), "quadrature")


def _rho_monte_carlo(spec, n, seed, n_batches=100):
    rng = np.random.default_rng(seed)
    u1, u2 = sample_pairs(spec, rng, n)
    x = -np.log1p(-u1)
    y = -np.log1p(-u2)
    rho = float(np.corrcoef(x, y)[0, 1])
    if n >= 2 * n_batches:
        m = n // n_batches
        xb = x[: m * n_batches].reshape(n_batches, m)
        yb = y[: m * n_batches].reshape(n_batches, m)
        xc = xb - xb.mean(axis=1, keepdims=True)
        yc = yb - yb.mean(axis=1, keepdims=True)
        rb = (xc * yc).sum(1) / np.sqrt((xc**2).sum(1) * (yc**2).sum(1))
        se = float(rb.std(ddof=1) / np.sqrt(n_batches))
    else:
        se = float("nan")
    return RhoEstimate(rho, se, "monte_carlo")


def pearson_rho(spec, mean_1=1.0, mean_2=1.0, method="auto", *, tol=1e-8, n=10**7, seed=0):
    """Pearson correlation between two exponential variates coupled by ``spec``.

    The result does not depend on the exponential means (they only scale
    each variate), but they are validated for the caller's benefit.

    Parameters
    ----------
    method : {"auto", "quadrature", "mc"}
        ``"auto"`` integrates Hoeffding's covariance identity when the
        family has a density and falls back to Monte-Carlo otherwise.
    tol : float
        Absolute/relative tolerance of the nested quadrature.
    n, seed : int
        Monte-Carlo sample size and seed; the estimate carries a
        batch-means standard error.
    """
    if mean_1 <= 0 or mean_2 <= 0:
        raise ValueError("exponential means must be positive")
    if method == "auto":
        method = "quadrature" if spec.has_density else "mc"
    if method == "quadrature":
        if not spec.has_density:
            raise CopulaError("quadrature rho is not supported for Frechet bounds")
        if spec.family is Family.INDEPENDENCE:
            return RhoEstimate(0.0, 0.0, "quadrature")
        return _rho_quadrature(spec, tol)
    if method == "mc":
        return _rho_monte_carlo(spec, int(n), seed)
    raise ValueError(f"unknown method {method!r}")
