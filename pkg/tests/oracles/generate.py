"""Independent oracles for the frozen reference values in ``tests/oracle_values.py``.

Nothing here calls the density or quadrature code under test: densities are
rebuilt from the raw uniform laws with ``scipy.integrate.quad``, normal
quantiles come from bisection on a Taylor series of erf, and the SOP
reference is a 10^6-sample simulation written out longhand.

Run ``python3 tests/oracles/generate.py`` and paste the output over
``tests/oracle_values.py``.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

D, H, DELTA = 20.0, 5.0, 1.0
Q = D * D / 4


def quad(f, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13, limit=500, **kw)[0]


def f_v(v):
    """Density of y^2 for y ~ U[-D/2, D/2]."""
    return 1.0 / (D * math.sqrt(v)) if 0 < v <= Q else 0.0


def f_w(w):
    # W = E^2 + y^2; with u = t^2 the error density 1/(2 delta sqrt(u)) du becomes dt/delta
    t0, t1 = math.sqrt(max(0.0, w - Q)), min(DELTA, math.sqrt(w))
    if t1 <= t0:
        return 0.0
    return quad(lambda t: f_v(w - t * t), t0, t1) / DELTA


def f_x(x):
    return max(0.0, (D - abs(x)) / (D * D))


def f_z(z):
    # Z = X + E with E uniform on [-delta, delta]
    return quad(f_x, z - DELTA, z + DELTA, points=[0.0]) / (2 * DELTA)


def f_s(s):
    # S = Z^2 + y^2 = sum over z of f_Z(z) f_V(s - z^2)
    hi = math.sqrt(s)
    lo = math.sqrt(max(0.0, s - Q))
    g = lambda z: (f_z(z) + f_z(-z)) * f_v(s - z * z)  # noqa: E731
    return quad(g, lo, hi)


def erf_series(x):
    terms, n, term = [], 0, x
    while True:
        val = term / (2 * n + 1)
        terms.append(val)
        if abs(val) < 1e-20:
            break
        n += 1
        term *= -x * x / n
    return 2 / math.sqrt(math.pi) * math.fsum(terms)


def phi_series(z):
    return 0.5 * (1 + erf_series(z / math.sqrt(2)))


def quantile_bisect(p, lo=-8.0, hi=8.0):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if phi_series(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def conditional_gl(u, v, rho, n=400):
    """P(Z1 <= a | Z2 = b) by Gauss-Legendre over the bivariate normal density slice."""
    a, b = quantile_bisect(u), quantile_bisect(v)
    x, w = np.polynomial.legendre.leggauss(n)
    lo = -12.0
    xs = lo + (a - lo) * (x + 1) / 2
    det = 1 - rho * rho
    dens = np.exp(-(xs * xs - 2 * rho * xs * b + b * b) / (2 * det)) / (2 * math.pi * math.sqrt(det))
    num = (a - lo) / 2 * float(np.sum(w * dens))
    return num / (math.exp(-b * b / 2) / math.sqrt(2 * math.pi))


def mc_reference(gamma_bar_db, rth, samples, seed, independent=False):
    """Pinching-mode SOP from raw draws (no package code)."""
    rng = np.random.default_rng(seed)
    gb = 10 ** (gamma_bar_db / 10)
    x1, y1, x2, y2 = (rng.uniform(-D / 2, D / 2, samples) for _ in range(4))
    e = rng.uniform(-DELTA, DELTA, samples)
    g_b = gb / (e * e + y1 * y1 + H * H)
    if independent:
        x2, y2 = rng.uniform(-D / 2, D / 2, samples), rng.uniform(-D / 2, D / 2, samples)
        e = rng.uniform(-DELTA, DELTA, samples)
    g_e = gb / ((x1 + e - x2) ** 2 + y2 * y2 + H * H)
    p = float(np.mean(g_b < 2 ** rth * (1 + g_e) - 1))
    return p, math.sqrt(p * (1 - p) / samples)


def main():
    out = {
        "W_POINTS": {w: f_w(w) for w in (0.25, 0.75, 1.0, 10.0, 60.0, 100.0, 100.5, 100.99)},
        "S_POINTS": {s: f_s(s) for s in (0.5, 0.99, 1.5, 50.0, 99.0, 100.5, 150.0, 250.0, 420.0)},
        "QUANTILE_0975": quantile_bisect(0.975),
        "CONDITIONAL_RHO05_U09_V09": conditional_gl(0.9, 0.9, 0.5),
        "MC_PINCHING_15DB_R05": mc_reference(15.0, 0.5, 10**6, 7),
        "MC_INDEPENDENT_15DB_R05": mc_reference(15.0, 0.5, 10**6, 8, independent=True),
        "MC_PINCHING_30DB_R05": mc_reference(30.0, 0.5, 10**6, 9),
        "MC_INDEPENDENT_30DB_R05": mc_reference(30.0, 0.5, 10**6, 10, independent=True),
    }
    print('"""Frozen oracle values; regenerate with ``tests/oracles/generate.py``."""\n')
    print(f"D, H, DELTA = {D!r}, {H!r}, {DELTA!r}\n")
    for k, v in out.items():
        if isinstance(v, dict):
            print(f"{k} = {{")
            for a, b in v.items():
                print(f"    {a!r}: {b!r},")
            print("}")
        else:
            print(f"{k} = {v!r}")


if __name__ == "__main__":
    main()
