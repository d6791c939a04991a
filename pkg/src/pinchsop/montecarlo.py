"""Monte Carlo simulation of the physical model.

Samples are drawn in fixed-size batches, each with its own generator
spawned from the master seed, so results do not depend on how many
workers process the batches.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import SystemGeometry, draw_arrays
from .sop import wiretap_threshold

MODES = ("pinching", "fixed-antenna", "forced-independent")
BATCH_SIZE = 1 << 16
MIN_SOP_SAMPLES = 1000
MIN_PAIR_SAMPLES = 100
DEFAULT_SAMPLES = 10_000


@dataclass(frozen=True)
class McEstimate:
    sop: float
    samples: int
    std_error: float
    seed: int
    mode: str


def _batches(samples: int, seed: int, batch_size: int):
    n_batches = -(-samples // batch_size)
    children = np.random.SeedSequence(seed).spawn(n_batches)
    sizes = [batch_size] * (n_batches - 1) + [samples - batch_size * (n_batches - 1)]
    return list(zip(children, sizes))


def _map_batches(fn, jobs, workers: int | None):
    if workers is None or workers <= 1 or len(jobs) == 1:
        return [fn(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _snr_pair(geom: SystemGeometry, rng: np.random.Generator, n: int, mode: str,
              fixed_position: tuple[float, float]):
    x1, y1, x2, y2, e = draw_arrays(geom, rng, n)
    gb, h2 = geom.gamma_bar, geom.h ** 2
    if mode == "fixed-antenna":
        x0, y0 = fixed_position
        g_b = gb / ((x1 - x0) ** 2 + (y1 - y0) ** 2 + h2)
        g_e = gb / ((x2 - x0) ** 2 + (y2 - y0) ** 2 + h2)
        return g_b, g_e
    g_b = gb / (e ** 2 + y1 ** 2 + h2)
    if mode == "forced-independent":
        # Eve sees her own position and error draw; only x1 is shared, and
        # Bob's SNR does not depend on x1
        _, _, x2, y2, e = draw_arrays(geom, rng, n)
    g_e = gb / ((x1 + e - x2) ** 2 + y2 ** 2 + h2)
    return g_b, g_e


def mc_sop(geom: SystemGeometry, rth: float, samples: int = DEFAULT_SAMPLES, seed: int = 0,
           mode: str = "pinching", workers: int | None = None,
           fixed_position: tuple[float, float] = (0.0, 0.0),
           batch_size: int = BATCH_SIZE) -> McEstimate:
    """Fraction of realizations with ``gamma_B < g(gamma_E)``.

    ``fixed_position`` is the ground projection of the static radiator used
    in ``fixed-antenna`` mode (the radiator sits at height ``h`` above it).
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if samples < MIN_SOP_SAMPLES:
        raise ValueError(f"need at least {MIN_SOP_SAMPLES} samples, got {samples}")

    def run(job):
        child, n = job
        g_b, g_e = _snr_pair(geom, np.random.default_rng(child), n, mode, fixed_position)
        return int(np.count_nonzero(g_b < wiretap_threshold(g_e, rth)))

    outages = sum(_map_batches(run, _batches(samples, seed, batch_size), workers))
    p = outages / samples
    return McEstimate(p, samples, math.sqrt(p * (1 - p) / samples), seed, mode)


def mc_pairs(geom: SystemGeometry, samples: int, seed: int = 0, workers: int | None = None,
             batch_size: int = BATCH_SIZE) -> np.ndarray:
    """``(samples, 2)`` array of ``(gamma_B, gamma_E)`` from shared realizations."""
    if samples < MIN_PAIR_SAMPLES:
        raise ValueError(f"need at least {MIN_PAIR_SAMPLES} samples, got {samples}")

    def run(job):
        child, n = job
        return np.column_stack(_snr_pair(geom, np.random.default_rng(child), n,
                                         "pinching", (0.0, 0.0)))

    return np.concatenate(_map_batches(run, _batches(samples, seed, batch_size), workers))
