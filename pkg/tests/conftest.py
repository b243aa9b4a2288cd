"""Shared oracles for the test suite.

Oracles here are deliberately independent of the package: mpmath
quadrature for E1 and plain scipy ``dblquad`` for copula integrals.
"""

import math

import mpmath
import numpy as np
import pytest


def e1_oracle(x, dps=40):
    """``E1(x) = int_x^inf e^{-z}/z dz`` by mpmath quadrature.

    Shifted to ``e^{-x} int_0^inf e^{-t}/(x+t) dt`` so the integrand has
    no scale of its own; the split at ``x`` keeps the endpoint layer
    resolved for tiny ``x``.
    """
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        f = lambda t: mpmath.exp(-t) / (xm + t)
        pts = [0, xm, 1, mpmath.inf] if xm < 1 else [0, 1, mpmath.inf]
        return float(mpmath.exp(-xm) * mpmath.quad(f, pts))


def mc_close(value, reference, se, k=3.0, n=None):
    """``|value - reference| <= k se``; a ``1/n`` floor keeps se = 0 estimates honest."""
    floor = 1.0 / n if n else 0.0
    return abs(value - reference) <= k * max(se, floor)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def log_grid(lo, hi, n):
    return np.logspace(math.log10(lo), math.log10(hi), n)
