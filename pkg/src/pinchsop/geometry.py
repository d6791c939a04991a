"""Physical scenario of the pinching-antenna downlink and its instantaneous SNRs.

The waveguide runs along the x-axis at height ``h``. Bob and Eve sit on the
ground inside a ``D x D`` square centred on the origin. The pinch is meant
to be activated right above Bob but lands at ``x1 + E`` with
``E ~ Unif[-delta, delta]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def effective_snr(antenna_gain_eta: float, transmit_power_ps: float,
                  noise_power_sigma2: float) -> float:
    """Effective transmit SNR ``eta * Ps / sigma^2`` (all linear, powers in W)."""
    for name, val in (("antenna_gain_eta", antenna_gain_eta),
                      ("transmit_power_ps", transmit_power_ps),
                      ("noise_power_sigma2", noise_power_sigma2)):
        if not (val > 0 and math.isfinite(val)):
            raise DomainError(f"{name} must be positive and finite, got {val!r}")
    return antenna_gain_eta * transmit_power_ps / noise_power_sigma2


@dataclass(frozen=True)
class SystemGeometry:
    """Scenario parameters: lengths in metres, ``gamma_bar`` linear.

    ``delta = 0`` is accepted as the perfectly-aligned limit; every other
    value must satisfy ``0 < delta <= D/2``.
    """

    side_length_D: float
    height_h: float
    error_halfwidth_delta: float
    effective_snr_gamma_bar: float

    def __post_init__(self):
        D, h, delta, gb = (self.side_length_D, self.height_h,
                           self.error_halfwidth_delta, self.effective_snr_gamma_bar)
        for name, val in (("side_length_D", D), ("height_h", h),
                          ("effective_snr_gamma_bar", gb)):
            if not (math.isfinite(val) and val > 0):
                raise DomainError(f"{name} must be positive and finite, got {val!r}")
        if not math.isfinite(delta) or delta < 0:
            raise DomainError(f"error_halfwidth_delta must be >= 0, got {delta!r}")
        if delta > D / 2:
            raise DomainError(
                f"error_halfwidth_delta={delta!r} violates delta <= D/2 = {D / 2!r}")

    # short aliases used throughout the numerics
    @property
    def D(self) -> float:
        return self.side_length_D

    @property
    def h(self) -> float:
        return self.height_h

    @property
    def delta(self) -> float:
        return self.error_halfwidth_delta

    @property
    def gamma_bar(self) -> float:
        return self.effective_snr_gamma_bar

    @property
    def is_aligned_limit(self) -> bool:
        return self.error_halfwidth_delta == 0.0

    def with_gamma_bar(self, gamma_bar: float) -> SystemGeometry:
        return SystemGeometry(self.D, self.h, self.delta, gamma_bar)

    @property
    def w_max(self) -> float:
        """Largest squared Bob-to-pinch ground distance, ``delta^2 + D^2/4``."""
        return self.delta ** 2 + self.D ** 2 / 4

    @property
    def s_max(self) -> float:
        """Largest squared Eve-to-pinch ground distance, ``(D+delta)^2 + D^2/4``."""
        return (self.D + self.delta) ** 2 + self.D ** 2 / 4

    @property
    def gamma_b_min(self) -> float:
        return self.gamma_bar / (self.h ** 2 + self.w_max)

    @property
    def gamma_b_max(self) -> float:
        return self.gamma_bar / self.h ** 2

    @property
    def gamma_e_min(self) -> float:
        return self.gamma_bar / (self.h ** 2 + self.s_max)

    @property
    def gamma_e_max(self) -> float:
        return self.gamma_bar / self.h ** 2


@dataclass(frozen=True)
class UserRealization:
    """One draw of user positions and pinching error (metres).

    Fields may also hold equal-length numpy arrays for batched use.
    """

    x1: float
    y1: float
    x2: float
    y2: float
    error_e: float


def draw_arrays(geom: SystemGeometry, rng: np.random.Generator, n: int):
    """Draw ``n`` independent realizations as arrays ``(x1, y1, x2, y2, e)``.

    The draw order is fixed so that any two callers sharing a generator
    state see the same user positions.
    """
    half = geom.D / 2
    x1 = rng.uniform(-half, half, n)
    y1 = rng.uniform(-half, half, n)
    x2 = rng.uniform(-half, half, n)
    y2 = rng.uniform(-half, half, n)
    if geom.delta > 0:
        e = rng.uniform(-geom.delta, geom.delta, n)
    else:
        e = np.zeros(n)
    return x1, y1, x2, y2, e


def sample_realization(geom: SystemGeometry, rng_seed: int) -> UserRealization:
    rng = np.random.default_rng(rng_seed)
    x1, y1, x2, y2, e = (float(a[0]) for a in draw_arrays(geom, rng, 1))
    return UserRealization(x1, y1, x2, y2, e)


def snr_bob(geom: SystemGeometry, r: UserRealization):
    """Bob's SNR; depends only on the pinching error and Bob's y-coordinate."""
    return geom.gamma_bar / (np.square(r.error_e) + np.square(r.y1) + geom.h ** 2)


def snr_eve(geom: SystemGeometry, r: UserRealization):
    """Eve's SNR from the (misplaced) pinch at ``x1 + E``."""
    dx = r.x1 + r.error_e - r.x2
    return geom.gamma_bar / (np.square(dx) + np.square(r.y2) + geom.h ** 2)
