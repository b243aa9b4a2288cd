"""Wiretap channel parameters, exponential SNR marginals and the joint SNR law.

Everything is in linear units; :func:`db_to_linear` is the one place dB
enters. Fading coefficients are never materialised, only the SNRs they
induce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .copula import CopulaError, CopulaSpec, Family, copula_density, sample_pairs


def db_to_linear(db):
    out = 10.0 ** (np.asarray(db, dtype=float) / 10.0)
    return float(out) if out.ndim == 0 else out


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class WiretapParams:
    """Linear-scale parameters of the wiretap channel with side information.

    ``gbar_m``/``gbar_e`` are the average Bob/Eve SNRs and ``gbar_ms``/
    ``gbar_es`` the side-information-to-noise ratios ``Q/N_m`` and
    ``Q/N_e``. The physical fields (``P``, ``Q``, ``N_m``, ``N_e``) are
    optional; they are only needed by the mutual-information helpers.
    """

    gbar_m: float
    gbar_e: float
    gbar_ms: float = 0.0
    gbar_es: float = 0.0
    P: float | None = None
    Q: float | None = None
    N_m: float | None = None
    N_e: float | None = None

    def __post_init__(self):
        for name in ("gbar_m", "gbar_e"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v!r}")
        for name in ("gbar_ms", "gbar_es"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be nonnegative and finite, got {v!r}")
        for name in ("N_m", "N_e", "P"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")
        if self.Q is not None and self.Q < 0:
            raise ValueError(f"Q must be nonnegative, got {self.Q!r}")

    @classmethod
    def from_db(cls, gbar_m_db, gbar_e_db, gbar_ms_db=None, gbar_es_db=None):
        """Build from dB values; ``None`` for an SI ratio means no side information."""
        return cls(
            gbar_m=db_to_linear(gbar_m_db),
            gbar_e=db_to_linear(gbar_e_db),
            gbar_ms=0.0 if gbar_ms_db is None else db_to_linear(gbar_ms_db),
            gbar_es=0.0 if gbar_es_db is None else db_to_linear(gbar_es_db),
        )

    def without_si(self):
        return WiretapParams(self.gbar_m, self.gbar_e)


def params_from_physical(P, Q, N_m, N_e, mean_gain_m=1.0, mean_gain_e=1.0):
    """Derive the SNR parameters from transmit power, SI variance and noises."""
    if not (P > 0 and mean_gain_m > 0 and mean_gain_e > 0):
        raise ValueError("P and the mean channel gains must be positive")
    if not (N_m > 0 and N_e > 0):
        raise ValueError("noise variances must be positive")
    if Q < 0:
        raise ValueError("SI variance Q must be nonnegative")
    return WiretapParams(
        gbar_m=P * mean_gain_m / N_m,
        gbar_e=P * mean_gain_e / N_e,
        gbar_ms=Q / N_m,
        gbar_es=Q / N_e,
        P=P,
        Q=Q,
        N_m=N_m,
        N_e=N_e,
    )


def _check_gbar(gbar):
    if not gbar > 0:
        raise ValueError(f"average SNR must be positive, got {gbar!r}")


def snr_marginal_pdf(gbar, gamma):
    """Exponential density with mean ``gbar``."""
    _check_gbar(gbar)
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("SNR must be nonnegative")
    out = np.exp(-g / gbar) / gbar
    return float(out) if out.ndim == 0 else out


def snr_marginal_cdf(gbar, gamma):
    _check_gbar(gbar)
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("SNR must be nonnegative")
    out = -np.expm1(-g / gbar)
    return float(out) if out.ndim == 0 else out


def joint_snr_pdf(params, spec, gamma_m, gamma_e):
    """Joint density of ``(gamma_m, gamma_e)`` under the copula ``spec``.

    FGM uses its explicit product form; every other density-bearing family
    goes through ``f_m f_e c(F_m, F_e)``.
    """
    if not spec.has_density:
        raise CopulaError(f"{spec.family.value} has no joint density")
    gm = np.asarray(gamma_m, dtype=float)
    ge = np.asarray(gamma_e, dtype=float)
    if np.any(gm < 0) or np.any(ge < 0):
        raise ValueError("SNRs must be nonnegative")
    a, b = 1.0 / params.gbar_m, 1.0 / params.gbar_e
    em, ee = np.exp(-a * gm), np.exp(-b * ge)
    if spec.family is Family.FGM:
        out = a * b * em * ee * (1.0 + spec.param * (1.0 - 2.0 * em) * (1.0 - 2.0 * ee))
    else:
        out = generic_joint_pdf(params, spec, gm, ge)
    return float(out) if np.ndim(out) == 0 else out


def generic_joint_pdf(params, spec, gamma_m, gamma_e):
    """Marginal product times copula density; the route valid for any family."""
    fm = snr_marginal_pdf(params.gbar_m, gamma_m)
    fe = snr_marginal_pdf(params.gbar_e, gamma_e)
    c = copula_density(spec, snr_marginal_cdf(params.gbar_m, gamma_m), snr_marginal_cdf(params.gbar_e, gamma_e))
    return fm * fe * c


def sample_snr_pairs(params, spec, rng, size):
    """Draw ``size`` correlated SNR pairs by inverse-CDF of copula samples."""
    u1, u2 = sample_pairs(spec, rng, size)
    return -params.gbar_m * np.log1p(-u1), -params.gbar_e * np.log1p(-u2)


def sample_snr_pair(params, spec, rng):
    gm, ge = sample_snr_pairs(params, spec, rng, 1)
    return float(gm[0]), float(ge[0])
