"""Instantaneous secrecy capacity and the Gaussian dirty-paper rate functions.

Rates are computed in nats internally; :func:`secrecy_capacity` returns
bits. The auxiliary variable is ``U = X + alpha S`` with ``X ~ N(0, P)``
and ``S ~ N(0, Q)``.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy import optimize


class SecrecyRegime(str, Enum):
    """Which capacity expression applies.

    ``COROLLARY1``: secrecy capacity equals the main-channel capacity
    ``log2(1 + gamma_m)``. ``COROLLARY2``: it equals the ratio form
    ``log2((1 + gbar_ms + gamma_m) / (1 + gbar_es + gamma_e))``.
    """

    COROLLARY1 = "corollary1"
    COROLLARY2 = "corollary2"


class AlphaThresholds(NamedTuple):
    alpha_neg0: float
    alpha_0: float


def _require_positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise ValueError(f"{k} must be positive, got {v!r}")


def _require_nonneg(**kw):
    for k, v in kw.items():
        if not v >= 0:
            raise ValueError(f"{k} must be nonnegative, got {v!r}")


def alpha_thresholds(P, Q, N_e):
    """Roots in ``alpha`` of ``I(U;S) = I(U;Y_e)``.

    ``I(U;S) >= I(U;Y_e)`` holds outside ``(alpha_neg0, alpha_0)`` and the
    reverse strict inequality inside it. The thresholds are the roots of
    ``Q (P + N_e) alpha^2 - 2 P Q alpha - P^2``. Without side information
    (``Q = 0``) ``I(U;S) = 0 < I(U;Y_e)`` for every ``alpha``, so the
    interval is the whole real line.
    """
    _require_positive(P=P, N_e=N_e)
    _require_nonneg(Q=Q)
    if Q == 0:
        return AlphaThresholds(-math.inf, math.inf)
    scale = P / (P + N_e)
    root = math.sqrt((P + Q + N_e) / Q)
    return AlphaThresholds(scale * (1.0 - root), scale * (1.0 + root))


def classify_alpha(alpha, P, Q, N_e):
    """Regime whose side condition ``alpha`` satisfies.

    Outside the open threshold interval ``I(U;S) >= I(U;Y_e)`` and the
    main-channel corollary applies; inside it the ratio corollary does.
    """
    lo, hi = alpha_thresholds(P, Q, N_e)
    return SecrecyRegime.COROLLARY2 if lo < alpha < hi else SecrecyRegime.COROLLARY1


def mi_u_s(alpha, P, Q):
    """``I(U;S) = ln((P + alpha^2 Q) / P)`` in nats."""
    _require_positive(P=P)
    _require_nonneg(Q=Q)
    return math.log1p(alpha * alpha * Q / P)


def mi_u_ye(alpha, P, Q, N_e):
    """``I(U;Y_e)`` in nats for the unfaded eavesdropper output ``X + S + Z_e``."""
    _require_positive(P=P, N_e=N_e)
    _require_nonneg(Q=Q)
    pa = P + alpha * alpha * Q
    return math.log((P + Q + N_e) * pa / (P * Q * (1.0 - alpha) ** 2 + N_e * pa))


def _gain_amplitude(gamma, N, P):
    # |h| recovered from gamma = P |h|^2 / N
    return math.sqrt(gamma * N / P)


def _dpc_denominator(alpha, h, P, Q, N):
    return P * Q * (1.0 - h * alpha) ** 2 + N * (P + alpha * alpha * Q)


def cm_alpha(alpha, gamma_m, P, Q, N_m):
    """Main-channel rate ``I(U;Y_m) - I(U;S)`` for a given ``alpha`` (nats)."""
    _require_positive(P=P, N_m=N_m)
    _require_nonneg(Q=Q, gamma_m=gamma_m)
    h = _gain_amplitude(gamma_m, N_m, P)
    return math.log(P * (h * h * P + Q + N_m) / _dpc_denominator(alpha, h, P, Q, N_m))


def re_alpha(alpha, gamma_m, gamma_e, P, Q, N_m, N_e):
    """Ancillary secrecy rate ``I(U;Y_m) - I(U;Y_e)`` for a given ``alpha`` (nats)."""
    _require_positive(P=P, N_m=N_m, N_e=N_e)
    _require_nonneg(Q=Q, gamma_m=gamma_m, gamma_e=gamma_e)
    hm = _gain_amplitude(gamma_m, N_m, P)
    he = _gain_amplitude(gamma_e, N_e, P)
    num = (hm * hm * P + Q + N_m) * _dpc_denominator(alpha, he, P, Q, N_e)
    den = (he * he * P + Q + N_e) * _dpc_denominator(alpha, hm, P, Q, N_m)
    return math.log(num / den)


def maximize_over_alpha(fn, center=0.0, half_width=10.0, grid=2001):
    """Maximise a scalar function of ``alpha`` on ``[center - w, center + w]``.

    A dense grid locates the basin, then bounded Brent refines it.
    Returns ``(alpha_star, value)``.
    """
    alphas = np.linspace(center - half_width, center + half_width, grid)
    vals = np.array([fn(a) for a in alphas])
    k = int(np.argmax(vals))
    step = alphas[1] - alphas[0]
    lo, hi = alphas[max(k - 1, 0)], alphas[min(k + 1, grid - 1)]
    if hi - lo < step:
        return float(alphas[k]), float(vals[k])
    res = optimize.minimize_scalar(lambda a: -fn(a), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12})
    if -res.fun >= vals[k]:
        return float(res.x), float(-res.fun)
    return float(alphas[k]), float(vals[k])


def secrecy_capacity(regime, gamma_m, gamma_e, gbar_ms=0.0, gbar_es=0.0):
    """Instantaneous secrecy capacity in bits; broadcasts over arrays.

    The ratio form may be negative; callers clamp where the context calls
    for the positive part.
    """
    regime = SecrecyRegime(regime)
    gm = np.asarray(gamma_m, dtype=float)
    ge = np.asarray(gamma_e, dtype=float)
    if np.any(gm < 0) or np.any(ge < 0):
        raise ValueError("SNRs must be nonnegative")
    _require_nonneg(gbar_ms=gbar_ms, gbar_es=gbar_es)
    if regime is SecrecyRegime.COROLLARY1:
        out = np.log1p(gm) / math.log(2.0)
    else:
        out = (np.log1p(gbar_ms + gm) - np.log1p(gbar_es + ge)) / math.log(2.0)
    return float(out) if out.ndim == 0 else out
