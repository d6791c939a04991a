"""Secrecy outage probability from the copula-coupled SNR marginals.

Three evaluators share one integrand over Eve's SNR ``y``::

    P_out = int F_{B|E}(g(y) | y) f_E(y) dy,   g(y) = 2^R (1 + y) - 1

``sop_chebyshev`` uses an N-node Gauss-Chebyshev rule of the first kind
after an affine map of Eve's support to [-1, 1]; ``sop_adaptive_reference``
integrates the same integrand adaptively; ``sop_independence`` drops the
copula (``F_{B|E} = F_B``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .copula import CopulaModel
from .errors import ConvergenceError, DomainError
from .geometry import SystemGeometry
from .marginals import SnrMarginals, snr_marginals

METHODS = ("chebyshev", "adaptive-reference", "independence")
DEFAULT_NODES = 200
ADAPTIVE_TOL = 1e-8
CLAMP_SLACK = 1e-9


def wiretap_threshold(gamma_e, rth: float):
    """Smallest Bob SNR that supports secrecy rate ``rth`` against Eve at ``gamma_e``."""
    if rth < 0:
        raise DomainError(f"rate threshold must be >= 0, got {rth!r}")
    return 2.0 ** rth * (1.0 + np.asarray(gamma_e, dtype=float)) - 1.0


def chebyshev_nodes(N: int) -> np.ndarray:
    """First-kind Chebyshev nodes ``cos((2n-1) pi / 2N)``, n = 1..N (decreasing)."""
    if int(N) != N or N < 1:
        raise DomainError(f"node count must be a positive integer, got {N!r}")
    n = np.arange(1, int(N) + 1)
    return np.cos((2 * n - 1) * np.pi / (2 * int(N)))


@dataclass(frozen=True)
class SopRequest:
    geometry: SystemGeometry | None
    rate_threshold_rth: float
    rho: float = 0.0
    node_count_N: int = DEFAULT_NODES
    method: str = "chebyshev"

    def __post_init__(self):
        if not (math.isfinite(self.rate_threshold_rth) and self.rate_threshold_rth >= 0):
            raise DomainError(f"rate_threshold_rth must be >= 0, got {self.rate_threshold_rth!r}")
        if int(self.node_count_N) != self.node_count_N or self.node_count_N < 1:
            raise DomainError(f"node_count_N must be a positive integer, got {self.node_count_N!r}")
        if not (math.isfinite(self.rho) and abs(self.rho) < 1):
            raise DomainError(f"rho must satisfy |rho| < 1, got {self.rho!r}")
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}, got {self.method!r}")


@dataclass(frozen=True)
class SopResult:
    probability: float
    method: str
    node_count: int | None = None
    error_estimate: float | None = None
    diagnostics: tuple[str, ...] = field(default_factory=tuple)


def _marginals(req: SopRequest, marginals: SnrMarginals | None) -> SnrMarginals:
    if marginals is not None:
        return marginals
    if req.geometry is None:
        raise DomainError("request has no geometry and no marginals were supplied")
    return snr_marginals(req.geometry)


def _certain(marg: SnrMarginals, rth: float):
    """Exact SOP when the supports alone decide the outcome, else None."""
    b_lo, b_hi = marg.bob_support
    e_lo, e_hi = marg.eve_support
    if wiretap_threshold(e_lo, rth) >= b_hi:
        return 1.0, "certain-outage"
    if wiretap_threshold(e_hi, rth) <= b_lo:
        return 0.0, "no-outage"
    return None


def _clamp(p: float, diags: list[str]) -> float:
    if p < 0.0 or p > 1.0:
        over = -p if p < 0 else p - 1.0
        if over > CLAMP_SLACK:
            diags.append(f"clamped:{over:.3e}")
        p = min(max(p, 0.0), 1.0)
    return float(p)


def _integrand(marg: SnrMarginals, rth: float, copula: CopulaModel | None):
    def f(y):
        y = np.asarray(y, dtype=float)
        fb = marg.bob_cdf(wiretap_threshold(y, rth))
        cond = fb if copula is None else copula.conditional_cdf(fb, marg.eve_cdf(y))
        return cond * marg.eve_pdf(y)
    return f


def sop_chebyshev(req: SopRequest, marginals: SnrMarginals | None = None,
                  copula: CopulaModel | None = None) -> SopResult:
    """N-node Gauss-Chebyshev approximation of the copula SOP integral."""
    marg = _marginals(req, marginals)
    copula = copula or CopulaModel(req.rho)
    diags = list(marg.diagnostics)
    N = int(req.node_count_N)
    known = _certain(marg, req.rate_threshold_rth)
    if known is not None:
        return SopResult(known[0], "chebyshev", N, 0.0, tuple(diags + [known[1]]))

    e_lo, e_hi = marg.eve_support
    half = (e_hi - e_lo) / 2
    xi = chebyshev_nodes(N)
    y = half * xi + (e_hi + e_lo) / 2
    gamma = _integrand(marg, req.rate_threshold_rth, copula)(y) * half
    p = math.pi / N * float(np.sum(np.sqrt(1 - xi * xi) * gamma))
    return SopResult(_clamp(p, diags), "chebyshev", N, None, tuple(diags))


def _breakpoints(marg: SnrMarginals, rth: float) -> list[float]:
    e_lo, e_hi = marg.eve_support
    pts = set(marg.eve_knots)
    # Eve SNRs at which the threshold crosses a kink of Bob's CDF
    scale = 2.0 ** rth
    pts.update((b + 1) / scale - 1 for b in marg.bob_knots)
    # merge points a rounding error apart; slivers stall the adaptive rule
    gap = 1e-9 * (e_hi - e_lo)
    out: list[float] = []
    for p in sorted(float(p) for p in pts):
        if e_lo + gap < p < e_hi - gap and (not out or p - out[-1] > gap):
            out.append(p)
    return out


def _adaptive(marg: SnrMarginals, rth: float, copula: CopulaModel | None,
              tol: float, limit: int = 1000):
    f = _integrand(marg, rth, copula)
    e_lo, e_hi = marg.eve_support
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(lambda y: float(f(y)), e_lo, e_hi,
                                  points=_breakpoints(marg, rth) or None,
                                  epsabs=tol, epsrel=0.0, limit=limit)
    if not err <= tol:
        raise ConvergenceError(
            f"adaptive SOP quadrature reached error {err:.3e} > {tol:.1e}", val, err)
    return val, err


def sop_adaptive_reference(req: SopRequest, marginals: SnrMarginals | None = None,
                           copula: CopulaModel | None = None,
                           tol: float = ADAPTIVE_TOL) -> SopResult:
    """Adaptive quadrature of the copula SOP integral (reference for the Chebyshev rule)."""
    marg = _marginals(req, marginals)
    copula = copula or CopulaModel(req.rho)
    diags = list(marg.diagnostics)
    known = _certain(marg, req.rate_threshold_rth)
    if known is not None:
        return SopResult(known[0], "adaptive-reference", None, 0.0, tuple(diags + [known[1]]))
    val, err = _adaptive(marg, req.rate_threshold_rth, copula, tol)
    return SopResult(_clamp(val, diags), "adaptive-reference", None, err, tuple(diags))


def sop_independence(req: SopRequest, marginals: SnrMarginals | None = None,
                     tol: float = ADAPTIVE_TOL) -> SopResult:
    """SOP treating Bob's and Eve's SNRs as independent."""
    marg = _marginals(req, marginals)
    diags = list(marg.diagnostics)
    known = _certain(marg, req.rate_threshold_rth)
    if known is not None:
        return SopResult(known[0], "independence", None, 0.0, tuple(diags + [known[1]]))
    val, err = _adaptive(marg, req.rate_threshold_rth, None, tol)
    return SopResult(_clamp(val, diags), "independence", None, err, tuple(diags))


def evaluate(req: SopRequest, marginals: SnrMarginals | None = None) -> SopResult:
    if req.method == "chebyshev":
        return sop_chebyshev(req, marginals)
    if req.method == "adaptive-reference":
        return sop_adaptive_reference(req, marginals)
    return sop_independence(req, marginals)
