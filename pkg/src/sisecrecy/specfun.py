"""Exponential integral E1 and its exponentially scaled form.

Power series below ``x = 1``, modified Lentz continued fraction above.
The continued fraction yields ``exp(x) * E1(x)`` directly, which is the
quantity every closed-form secrecy metric actually needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EULER_GAMMA = 0.57721566490153286061

_SWITCH = 1.0
_TINY = 1e-300


@dataclass(frozen=True)
class PrecisionBudget:
    """Stopping rule for the series and continued-fraction loops."""

    rel_tol: float = 1e-16
    max_terms: int = 500

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_BUDGET = PrecisionBudget()


def _check_arg(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"E1 argument must be finite, got {x!r}")
    if x <= 0:
        raise ValueError(f"E1 is only defined here for x > 0, got {x!r}")
    return x


def _series(x, budget):
    # E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, budget.max_terms + 1):
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) <= budget.rel_tol * abs(total):
            return -EULER_GAMMA - math.log(x) - total
    raise ArithmeticError(f"E1 series did not converge at x={x}")


def _continued_fraction(x, budget):
    # returns exp(x) * E1(x)
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, budget.max_terms + 1):
        an = -float(i * i)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = c * d
        h *= delta
        if abs(delta - 1.0) <= budget.rel_tol:
            return h
    raise ArithmeticError(f"E1 continued fraction did not converge at x={x}")


def exp_integral_e1(x, budget=DEFAULT_BUDGET):
    """Exponential integral ``E1(x) = int_x^inf exp(-z)/z dz`` for ``x > 0``.

    Raises
    ------
    ValueError
        If ``x`` is not positive or not finite.
    """
    x = _check_arg(x)
    if x <= _SWITCH:
        return _series(x, budget)
    return math.exp(-x) * _continued_fraction(x, budget)


def exp_e1_scaled(x, budget=DEFAULT_BUDGET):
    """Return ``exp(x) * E1(x)`` without forming ``exp(x)``.

    Bounded by ``1/(x+1) < exp(x) E1(x) < 1/x``; safe for any positive
    double including ``x`` far beyond the overflow point of ``exp``.
    """
    x = _check_arg(x)
    if x <= _SWITCH:
        return math.exp(x) * _series(x, budget)
    return _continued_fraction(x, budget)
