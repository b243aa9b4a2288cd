"""Secrecy performance of correlated Rayleigh wiretap channels with
non-causal side information at the transmitter."""

__version__ = "0.1.0"

from .channel import WiretapParams, db_to_linear, params_from_physical  # noqa: E402
from .copula import CopulaSpec, Family, pearson_rho  # noqa: E402
from .metrics import (  # noqa: E402
    Method,
    MetricEstimate,
    asc_closed_form,
    asc_monte_carlo,
    asc_quadrature,
    sop_closed_form,
    sop_monte_carlo,
    sop_quadrature,
)
from .secrecy import SecrecyRegime, secrecy_capacity  # noqa: E402
from .specfun import exp_e1_scaled, exp_integral_e1  # noqa: E402
