"""Secrecy outage analysis of a pinching-antenna link with pinch-position error.

The package builds the exact marginal laws of Bob's and Eve's SNRs, couples
them with a Gaussian copula, evaluates the secrecy outage probability by
Gauss-Chebyshev and adaptive quadrature, and checks everything against a
direct Monte Carlo simulation of the geometry.
"""

from .copula import (CopulaModel, conditional_cdf, estimate_rho, sample_copula,
                     std_normal_cdf, std_normal_quantile)
from .errors import (ConfigError, ConvergenceError, DomainError, InsufficientDataError,
                     NormalizationError)
from .geometry import (SystemGeometry, UserRealization, db_to_linear, dbm_to_watts,
                       effective_snr, linear_to_db, sample_realization, snr_bob, snr_eve)
from .marginals import (SnrMarginals, numeric_convolution, pdf_gamma_bob, pdf_gamma_eve,
                        pdf_s, pdf_w, snr_marginals)
from .montecarlo import McEstimate, mc_pairs, mc_sop
from .sop import (SopRequest, SopResult, chebyshev_nodes, sop_adaptive_reference,
                  sop_chebyshev, sop_independence, wiretap_threshold)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConvergenceError", "CopulaModel", "DomainError", "InsufficientDataError",
    "McEstimate", "NormalizationError", "SnrMarginals", "SopRequest", "SopResult",
    "SystemGeometry", "UserRealization", "chebyshev_nodes", "conditional_cdf",
    "db_to_linear", "dbm_to_watts", "effective_snr", "estimate_rho", "linear_to_db",
    "mc_pairs", "mc_sop", "numeric_convolution", "pdf_gamma_bob", "pdf_gamma_eve", "pdf_s",
    "pdf_w", "sample_copula", "sample_realization", "snr_bob", "snr_eve", "snr_marginals",
    "sop_adaptive_reference", "sop_chebyshev", "sop_independence", "std_normal_cdf",
    "std_normal_quantile", "wiretap_threshold",
]
