"""Outage probability and average BER of a dual-hop decode-and-forward
free-space-optical link over K-distributed turbulence with pointing error.

Closed-form Meijer-G expressions, an independent quadrature route and a
seeded Monte-Carlo oracle for every metric; see the ``cli`` module (or the
``fsolink`` console script) for the command-line surface.
"""

from .special import (
    ContourPolicy,
    ConvergenceError,
    DomainError,
    MeijerGSpec,
    PoleSeparationError,
    bessel_k,
    erf,
    gamma_q,
    laplace_g_integral,
    laplace_product_g_integral,
    ln_gamma,
    meijer_g,
)
from .channel import (
    HopParams,
    PointingParams,
    SnrPoint,
    combined_pdf,
    k_pdf,
    pointing_geometry,
    snr_cdf,
    snr_cdf_mixture,
    snr_pdf,
)
from .dualhop import (
    LinkConfig,
    Modulation,
    OutageRequest,
    avg_ber,
    ber_conditional,
    modulation_params,
    outage_probability,
)
from .montecarlo import EstimateReport, SimPlan, estimate_ber, estimate_outage, sample_channel_gain
from .validate import ValidationReport, run_validation

__version__ = "0.1.0"

__all__ = [
    "ContourPolicy",
    "ConvergenceError",
    "DomainError",
    "MeijerGSpec",
    "PoleSeparationError",
    "bessel_k",
    "erf",
    "gamma_q",
    "laplace_g_integral",
    "laplace_product_g_integral",
    "ln_gamma",
    "meijer_g",
    "HopParams",
    "PointingParams",
    "SnrPoint",
    "combined_pdf",
    "k_pdf",
    "pointing_geometry",
    "snr_cdf",
    "snr_cdf_mixture",
    "snr_pdf",
    "LinkConfig",
    "Modulation",
    "OutageRequest",
    "avg_ber",
    "ber_conditional",
    "modulation_params",
    "outage_probability",
    "EstimateReport",
    "SimPlan",
    "estimate_ber",
    "estimate_outage",
    "sample_channel_gain",
    "ValidationReport",
    "run_validation",
    "__version__",
]
