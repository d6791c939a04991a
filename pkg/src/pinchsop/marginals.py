"""Exact marginal densities of Bob's and Eve's SNR.

Bob's SNR is ``gamma_bar / (W + h^2)`` with ``W = E^2 + y1^2``; Eve's is
``gamma_bar / (S + h^2)`` with ``S = (X + E)^2 + y2^2`` and ``X = x1 - x2``.
Densities of ``W`` and ``S`` are built as convolutions of squared uniform
and triangular laws. Closed-form branches are checked at construction
against a direct numerical convolution and replaced by the tabulated
convolution if they disagree. The top branch of ``S`` has no closed form
here and is always tabulated.

Branches are evaluated on half-open intervals ``[lo, hi)``; the last branch
of a density also owns its upper endpoint.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import NormalizationError
from .geometry import SystemGeometry
from .quadrature import cell_integrals, clustered_grid, gauss_legendre

ORACLE_MISMATCH_TOL = 1e-3
S3_GRID_SIZE = 4096


def _asin(x):
    return np.arcsin(np.clip(x, -1.0, 1.0))


def _sqrt0(x):
    return np.sqrt(np.maximum(x, 0.0))


@dataclass(frozen=True)
class Branch:
    lo: float
    hi: float
    func: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    knots: tuple[float, ...] = ()
    tabulated: bool = False


class Tabulated:
    """Non-negative function tabulated between knots.

    Inside each piece ``[lo, hi]`` the abscissa is written as
    ``lo + (hi - lo) (1 - cos t) / 2`` and the values are splined in ``t``.
    Square-root behaviour at a knot is analytic in ``t``, so the
    interpolant keeps fourth-order accuracy right up to the kinks.
    """

    def __init__(self, func: Callable, knots, count: int, min_per_piece: int = 64):
        knots = np.unique(np.asarray(knots, dtype=float))
        total = knots[-1] - knots[0]
        self.knots = knots
        self._splines = []
        grids, values = [], []
        for lo, hi in zip(knots[:-1], knots[1:]):
            k = max(min_per_piece, int(round(count * (hi - lo) / total)))
            theta = np.linspace(0.0, np.pi, k + 1)
            x = lo + (hi - lo) * (1 - np.cos(theta)) / 2
            x[0], x[-1] = lo, hi
            with np.errstate(divide="ignore", invalid="ignore"):
                y = np.asarray(func(x), dtype=float)
            self._splines.append(CubicSpline(theta, y))
            grids.append(x[:-1])
            values.append(y[:-1])
        self.grid = np.concatenate(grids + [knots[-1:]])
        self.values = np.concatenate(values + [y[-1:]])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        piece = np.searchsorted(self.knots, x, side="right") - 1
        piece = np.where(x == self.knots[-1], len(self._splines) - 1, piece)
        for i, spline in enumerate(self._splines):
            mask = piece == i
            if np.any(mask):
                lo, hi = self.knots[i], self.knots[i + 1]
                c = np.clip(1 - 2 * (x[mask] - lo) / (hi - lo), -1.0, 1.0)
                out[mask] = spline(np.arccos(c))
        return np.maximum(out, 0.0)

    def integral(self) -> float:
        return float(np.sum(cell_integrals(self, self.knots, 48)))


class PiecewisePdf:
    """A probability density made of consecutive branches.

    Construction checks that the branches tile the support, that the
    density is non-negative on a dense grid and that it integrates to one
    within ``tol``.
    """

    def __init__(self, branches: Sequence[Branch], name: str = "",
                 tol: float = 1e-6, diagnostics: Sequence[str] = (),
                 singular_points: Sequence[float] = ()):
        branches = sorted((b for b in branches if b.hi > b.lo), key=lambda b: b.lo)
        if not branches:
            raise NormalizationError(f"{name}: density has empty support")
        for left, right in zip(branches[:-1], branches[1:]):
            if not math.isclose(left.hi, right.lo, rel_tol=1e-12, abs_tol=1e-300):
                raise ValueError(f"{name}: branches {left.label!r} and {right.label!r} "
                                 f"do not tile ({left.hi!r} != {right.lo!r})")
        self.branches = tuple(branches)
        self.name = name
        self.support_min = branches[0].lo
        self.support_max = branches[-1].hi
        self.diagnostics = tuple(diagnostics)
        # points where the density is unbounded; used to steer quadrature
        self.singular_points = tuple(float(p) for p in singular_points)

        grid = clustered_grid(self.knots, 2048, min_per_piece=16)
        with np.errstate(divide="ignore", invalid="ignore"):
            dens = self(grid)
        scale = np.max(dens[np.isfinite(dens)], initial=0.0)
        if np.any(np.isnan(dens)) or np.any(dens < -1e-12 * scale):
            raise NormalizationError(f"{name}: density negative or NaN on its support")
        self.mass = self.integral()
        self.normalization_residual = self.mass - 1.0
        if abs(self.normalization_residual) > tol:
            raise NormalizationError(
                f"{name}: integrates to {self.mass!r}, tolerance {tol:g}")

    @property
    def knots(self) -> np.ndarray:
        pts = [self.support_min]
        for b in self.branches:
            pts.extend(k for k in b.knots if b.lo < k < b.hi)
            pts.append(b.hi)
        return np.unique(pts)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        last = len(self.branches) - 1
        for i, b in enumerate(self.branches):
            mask = (x >= b.lo) & ((x <= b.hi) if i == last else (x < b.hi))
            if np.any(mask):
                out[mask] = b.func(x[mask])
        # rounding at branch edges can leave values like -1e-18
        return np.maximum(out, 0.0)

    def integral(self, n: int = 12, cells: int = 4096) -> float:
        edges = clustered_grid(self.knots, cells)
        with np.errstate(divide="ignore", invalid="ignore"):
            return float(np.sum(cell_integrals(self, edges, n)))

    def branch_labels(self) -> list[str]:
        return [b.label for b in self.branches]


@dataclass(frozen=True)
class TabulatedCdf:
    """Monotone interpolant of a cumulative distribution on a grid."""

    grid: np.ndarray
    values: np.ndarray
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise ValueError("CDF grid must be strictly increasing")
        if np.any(np.diff(values) < 0):
            raise ValueError("CDF values must be non-decreasing")
        if abs(values[0]) > 1e-9 or abs(values[-1] - 1.0) > 1e-9:
            raise ValueError("CDF must run from 0 to 1")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_interp", PchipInterpolator(grid, values))

    @property
    def support_min(self) -> float:
        return float(self.grid[0])

    @property
    def support_max(self) -> float:
        return float(self.grid[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, self.grid[0], self.grid[-1])
        out = np.clip(self._interp(inside), 0.0, 1.0)
        out = np.where(x <= self.grid[0], 0.0, out)
        return np.where(x >= self.grid[-1], 1.0, out)


def cdf_of(pdf: PiecewisePdf, grid_size: int = 4096) -> TabulatedCdf:
    """Tabulate the CDF of ``pdf`` by exact cell-wise quadrature."""
    grid = clustered_grid(pdf.knots, grid_size)
    with np.errstate(divide="ignore", invalid="ignore"):
        cells = cell_integrals(pdf, grid, 12)
    cum = np.concatenate([[0.0], np.cumsum(np.maximum(cells, 0.0))])
    cum /= cum[-1]
    cum = np.maximum.accumulate(np.clip(cum, 0.0, 1.0))
    cum[-1] = 1.0
    return TabulatedCdf(grid, cum)


# --- numerical convolution -------------------------------------------------

def convolution_density(f_a: PiecewisePdf, f_b: PiecewisePdf, s, n: int = 24) -> np.ndarray:
    """Density of ``A + B`` at points ``s`` by direct quadrature.

    The overlap is split at every knot of ``f_a`` and every shifted knot of
    ``f_b`` so each piece is analytic inside. Each half-piece is integrated
    in ``t = sqrt(|x - anchor|)``. The anchor is the piece end itself unless
    a declared singular point of either density lies within one piece
    length beyond that end, in which case the substitution is centred there.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    ka, kb = f_a.knots, f_b.knots
    sa = np.asarray(f_a.singular_points, dtype=float)
    sb = np.asarray(f_b.singular_points, dtype=float)
    rows = []  # (index, lo, hi, left anchor, right anchor)
    for i, si in enumerate(s):
        lo = max(f_a.support_min, si - f_b.support_max)
        hi = min(f_a.support_max, si - f_b.support_min)
        if hi <= lo:
            continue
        kk = np.concatenate([ka, si - kb])
        cuts = np.unique(np.concatenate([[lo, hi], kk[(kk > lo) & (kk < hi)]]))
        sing = np.sort(np.concatenate([sa, si - sb]))
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b <= a:
                continue
            L = b - a
            below = sing[(sing <= a) & (sing >= a - L)]
            above = sing[(sing >= b) & (sing <= b + L)]
            left = below.max() if below.size else a
            right = above.min() if above.size else b
            rows.append((i, a, b, left, right))
    out = np.zeros(s.size)
    if not rows:
        return out
    idx, a, b, al, ar = (np.asarray(c) for c in zip(*rows))
    idx = idx.astype(int)
    tq, wq = gauss_legendre(n)
    m = 0.5 * (a + b)
    # left half: x = al + t^2 for t in [sqrt(a - al), sqrt(m - al)]
    t0, t1 = np.sqrt(a - al)[:, None], np.sqrt(m - al)[:, None]
    tl = t0 + (t1 - t0) * tq[None, :]
    wl = 2 * tl * (t1 - t0) * wq[None, :]
    xl = al[:, None] + tl * tl
    yl = (s[idx] - al)[:, None] - tl * tl
    # right half: x = ar - t^2 for t in [sqrt(ar - b), sqrt(ar - m)]
    r0, r1 = np.sqrt(ar - b)[:, None], np.sqrt(ar - m)[:, None]
    tr = r0 + (r1 - r0) * tq[None, :]
    wr = 2 * tr * (r1 - r0) * wq[None, :]
    xr = ar[:, None] - tr * tr
    yr = (s[idx] - ar)[:, None] + tr * tr
    x = np.concatenate([xl, xr], axis=1)
    y = np.concatenate([yl, yr], axis=1)
    w = np.concatenate([wl, wr], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = f_a(x.ravel()).reshape(x.shape) * f_b(y.ravel()).reshape(y.shape)
    np.add.at(out, idx, np.sum(vals * w, axis=1))
    return out


def _sum_knots(f_a: PiecewisePdf, f_b: PiecewisePdf) -> np.ndarray:
    return np.unique(np.add.outer(f_a.knots, f_b.knots).ravel())


def tabulate_convolution(f_a: PiecewisePdf, f_b: PiecewisePdf, lo: float, hi: float,
                         grid_size: int) -> Tabulated:
    knots = _sum_knots(f_a, f_b)
    knots = np.concatenate([[lo, hi], knots[(knots > lo) & (knots < hi)]])
    # the overlap is empty exactly at the support ends; take one-sided limits
    eps = 1e-13 * (hi - lo)
    return Tabulated(lambda x: convolution_density(f_a, f_b, np.clip(x, lo + eps, hi - eps)),
                     knots, grid_size)


def numeric_convolution(f_a: PiecewisePdf, f_b: PiecewisePdf,
                        grid_size: int = 4096) -> PiecewisePdf:
    """Tabulated density of the sum of two independent variables."""
    for f in (f_a, f_b):
        if not isinstance(f, PiecewisePdf):
            raise TypeError("numeric_convolution needs PiecewisePdf inputs")
        if not (math.isfinite(f.support_min) and math.isfinite(f.support_max)):
            raise NormalizationError(f"{f.name}: support must be finite")
    lo = f_a.support_min + f_b.support_min
    hi = f_a.support_max + f_b.support_max
    tab = tabulate_convolution(f_a, f_b, lo, hi, grid_size)
    mass = tab.integral()
    if not abs(mass - 1.0) <= 1e-3:
        raise NormalizationError(f"convolution integrates to {mass!r}; inputs not normalizable")
    knots = tuple(k for k in _sum_knots(f_a, f_b) if lo < k < hi)
    name = f"{f_a.name}*{f_b.name}"
    return PiecewisePdf([Branch(lo, hi, lambda x: tab(x) / mass, "tabulated", knots, True)],
                        name=name)


# --- validation against the oracle ---------------------------------------

def _check_points(lo: float, hi: float, n: int = 48) -> np.ndarray:
    k = np.arange(1, n + 1)
    return lo + (hi - lo) * (1 - np.cos((k - 0.5) * np.pi / n)) / 2


def validate_branches(branches: Sequence[Branch], oracle: Callable, name: str,
                      tol: float = ORACLE_MISMATCH_TOL,
                      fallback: Callable[[Branch], Branch] | None = None):
    """Compare closed-form branches with ``oracle``; swap in ``fallback`` on mismatch.

    Returns the (possibly replaced) branches, a list of diagnostic flags and
    a mapping from branch label to relative mismatch.
    """
    out, flags, mismatch = [], [], {}
    for b in branches:
        if b.tabulated or b.hi <= b.lo:
            out.append(b)
            continue
        pts = _check_points(b.lo, b.hi)
        ref = oracle(pts)
        with np.errstate(divide="ignore", invalid="ignore"):
            got = b.func(pts)
        scale = max(float(np.max(np.abs(ref))), 1e-300)
        err = float(np.max(np.abs(got - ref))) / scale
        if not math.isfinite(err):
            err = math.inf
        mismatch[b.label] = err
        if err > tol and fallback is not None:
            flags.append(f"fallback:{name}:{b.label}")
            out.append(fallback(b))
        else:
            out.append(b)
    return out, flags, mismatch


# --- building blocks in squared-distance space ---------------------------

def _x_sep(D: float, x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= D, (D - np.abs(x)) / D ** 2, 0.0)


def _z_density(D: float, delta: float, z):
    z = np.abs(np.asarray(z, dtype=float))
    if delta == 0:
        return _x_sep(D, z)
    d = delta
    return np.select(
        [z <= d, z <= D - d, z <= D + d],
        [(2 * D * d - d ** 2 - z ** 2) / (2 * d * D ** 2),
         (D - z) / D ** 2,
         (D + d - z) ** 2 / (4 * d * D ** 2)],
        0.0)


def pdf_x_separation(geom: SystemGeometry, x):
    """Triangular density of the horizontal Bob-Eve separation ``x1 - x2``."""
    return _x_sep(geom.D, x)


def pdf_z(geom: SystemGeometry, z):
    """Density of ``x1 - x2 + E`` (triangular convolved with the error law)."""
    return _z_density(geom.D, geom.delta, z)


@lru_cache(maxsize=None)
def squared_error_density(delta: float) -> PiecewisePdf:
    """``U = E^2`` for ``E ~ Unif[-delta, delta]``."""
    return PiecewisePdf([Branch(0.0, delta ** 2, lambda u: 1 / (2 * delta * np.sqrt(u)), "u")],
                        name="f_U", singular_points=(0.0,))


@lru_cache(maxsize=None)
def squared_coordinate_density(D: float) -> PiecewisePdf:
    """``V = y^2`` for ``y ~ Unif[-D/2, D/2]``."""
    return PiecewisePdf([Branch(0.0, D ** 2 / 4, lambda v: 1 / (D * np.sqrt(v)), "v")],
                        name="f_V", singular_points=(0.0,))


@lru_cache(maxsize=None)
def squared_offset_density(D: float, delta: float) -> PiecewisePdf:
    """``U_Z = Z^2``; by symmetry ``f(u) = f_Z(sqrt u) / sqrt u``."""
    if delta == 0:
        edges = [0.0, D ** 2]
    else:
        edges = [0.0, delta ** 2, (D - delta) ** 2, (D + delta) ** 2]

    def f(u):
        r = np.sqrt(u)
        return _z_density(D, delta, r) / r

    branches = [Branch(lo, hi, f, f"uz{i + 1}") for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:]))]
    return PiecewisePdf(branches, name="f_UZ", singular_points=(0.0,))


def _w_closed_branches(D: float, delta: float) -> list[Branch]:
    if delta == 0:
        return [Branch(0.0, D ** 2 / 4, lambda w: 1 / (D * np.sqrt(w)), "w-aligned")]
    d = delta
    q = D ** 2 / 4
    return [
        Branch(0.0, d ** 2, lambda w: np.full_like(np.asarray(w, float), np.pi / (2 * d * D)), "w1"),
        Branch(d ** 2, q, lambda w: _asin(d / np.sqrt(w)) / (d * D), "w2"),
        Branch(q, d ** 2 + q,
               lambda w: (_asin(d / np.sqrt(w)) - _asin(_sqrt0(1 - q / w))) / (d * D), "w3"),
    ]


def _s_closed_branches(D: float, delta: float) -> list[Branch]:
    q = D ** 2 / 4
    if delta == 0:
        return [Branch(0.0, q, lambda s: (np.pi * D - 2 * np.sqrt(s)) / D ** 3, "s-aligned")]
    d = delta
    return [
        Branch(0.0, d ** 2, lambda s: np.pi / (2 * d * D ** 3) * (2 * D * d - d ** 2 - s / 2), "s1"),
        Branch(d ** 2, q,
               lambda s: (2 * d * D * np.pi - (2 * d ** 2 + s) * _asin(d / np.sqrt(s))
                          - 3 * d * _sqrt0(s - d ** 2)) / (2 * d * D ** 3), "s2"),
    ]


@dataclass(frozen=True)
class DistanceLaws:
    """Validated densities and CDFs of ``W`` and ``S`` for one ``(D, delta)``."""

    D: float
    delta: float
    w: PiecewisePdf
    s: PiecewisePdf
    w_cdf: TabulatedCdf
    s_cdf: TabulatedCdf
    s3: Tabulated
    flags: tuple[str, ...]
    mismatch: dict


def _tabulated_fallback(f_a, f_b, grid_size=1024):
    def make(b: Branch) -> Branch:
        tab = tabulate_convolution(f_a, f_b, b.lo, b.hi, grid_size)
        return Branch(b.lo, b.hi, tab, b.label + "-oracle", b.knots, True)
    return make


def w_oracle_inputs(D: float, delta: float):
    return squared_error_density(delta), squared_coordinate_density(D)


def s_oracle_inputs(D: float, delta: float):
    return squared_offset_density(D, delta), squared_coordinate_density(D)


@lru_cache(maxsize=64)
def distance_laws(D: float, delta: float, s3_grid_size: int = S3_GRID_SIZE,
                  cdf_grid_size: int = 4096) -> DistanceLaws:
    q = D ** 2 / 4
    flags: list[str] = []
    mismatch: dict = {}

    w_branches = _w_closed_branches(D, delta)
    if delta > 0:
        fu, fv = w_oracle_inputs(D, delta)
        w_branches, fl, mm = validate_branches(
            w_branches, lambda x: convolution_density(fu, fv, x), "f_W",
            fallback=_tabulated_fallback(fu, fv))
        flags += fl
        mismatch.update(mm)
    w = PiecewisePdf(w_branches, name="f_W", diagnostics=flags)

    fuz, fv2 = s_oracle_inputs(D, delta)
    s_branches = _s_closed_branches(D, delta)
    s_branches, fl, mm = validate_branches(
        s_branches, lambda x: convolution_density(fuz, fv2, x), "f_S",
        fallback=_tabulated_fallback(fuz, fv2))
    flags += fl
    mismatch.update(mm)
    s_max = (D + delta) ** 2 + q
    s3 = tabulate_convolution(fuz, fv2, q, s_max, s3_grid_size)
    s3_knots = tuple(k for k in _sum_knots(fuz, fv2) if q < k < s_max)
    s_branches.append(Branch(q, s_max, s3, "s3", s3_knots, True))
    s = PiecewisePdf(s_branches, name="f_S", tol=1e-5, diagnostics=flags)

    return DistanceLaws(D, delta, w, s, cdf_of(w, cdf_grid_size), cdf_of(s, cdf_grid_size),
                        s3, tuple(flags), mismatch)


def laws_for(geom: SystemGeometry) -> DistanceLaws:
    return distance_laws(float(geom.D), float(geom.delta))


def pdf_w(geom: SystemGeometry, w):
    """Density of ``E^2 + y1^2`` (squared Bob-to-pinch ground distance)."""
    return laws_for(geom).w(w)


def pdf_s(geom: SystemGeometry, s):
    """Density of ``(x1 + E - x2)^2 + y2^2`` (squared Eve-to-pinch ground distance)."""
    return laws_for(geom).s(s)


# --- SNR space -----------------------------------------------------------

def _bob_gamma_branches(geom: SystemGeometry) -> list[Branch]:
    D, h, d, gb = geom.D, geom.h, geom.delta, geom.gamma_bar
    q = D ** 2 / 4
    g_top = gb / h ** 2
    g_d = gb / (h ** 2 + d ** 2)
    g_q = gb / (h ** 2 + q)
    g_min = gb / (h ** 2 + d ** 2 + q)

    def w_of(g):
        return np.maximum(gb / g - h ** 2, 0.0)

    if d == 0:
        return [Branch(g_q, g_top, lambda g: gb / g ** 2 / (D * np.sqrt(w_of(g))), "bob-aligned")]
    return [
        Branch(g_d, g_top, lambda g: np.pi / (2 * d * D) * gb / g ** 2, "bob1"),
        Branch(g_q, g_d, lambda g: gb / (d * D * g ** 2) * _asin(d / np.sqrt(w_of(g))), "bob2"),
        Branch(g_min, g_q,
               lambda g: gb / (d * D * g ** 2) * (_asin(d / np.sqrt(w_of(g)))
                                                  - _asin(_sqrt0(1 - q / w_of(g)))), "bob3"),
    ]


def _eve_gamma_branches(geom: SystemGeometry, s3: Callable) -> list[Branch]:
    D, h, d, gb = geom.D, geom.h, geom.delta, geom.gamma_bar
    q = D ** 2 / 4
    g_top = gb / h ** 2
    g_d = gb / (h ** 2 + d ** 2)
    g_q = gb / (h ** 2 + q)
    g_min = gb / (h ** 2 + (D + d) ** 2 + q)

    def s_of(g):
        return np.maximum(gb / g - h ** 2, 0.0)

    s3_knots = tuple(gb / (h ** 2 + k) for k in
                     ((D - d) ** 2, (D + d) ** 2, d ** 2 + q, (D - d) ** 2 + q))
    b3 = Branch(g_min, g_q, lambda g: gb / g ** 2 * s3(s_of(g)), "eve3", s3_knots, True)
    if d == 0:
        return [Branch(g_q, g_top,
                       lambda g: gb / g ** 2 * (np.pi * D - 2 * np.sqrt(s_of(g))) / D ** 3,
                       "eve-aligned"), b3]
    return [
        Branch(g_d, g_top,
               lambda g: gb / g ** 2 * np.pi / (2 * d * D ** 3)
               * (2 * D * d - d ** 2 - s_of(g) / 2), "eve1"),
        Branch(g_q, g_d,
               lambda g: gb / g ** 2 / (2 * d * D ** 3)
               * (2 * d * D * np.pi - (2 * d ** 2 + s_of(g)) * _asin(d / np.sqrt(s_of(g)))
                  - 3 * d * _sqrt0(s_of(g) - d ** 2)), "eve2"),
        b3,
    ]


def _mapped(dist_pdf: Callable, geom: SystemGeometry) -> Callable:
    gb, h2 = geom.gamma_bar, geom.h ** 2

    def f(g):
        g = np.asarray(g, dtype=float)
        return gb / g ** 2 * dist_pdf(np.maximum(gb / g - h2, 0.0))
    return f


def _mapped_fallback(dist_pdf, geom):
    f = _mapped(dist_pdf, geom)

    def make(b: Branch) -> Branch:
        return Branch(b.lo, b.hi, f, b.label + "-oracle", b.knots, True)
    return make


@lru_cache(maxsize=256)
def bob_density(geom: SystemGeometry) -> PiecewisePdf:
    """Density of Bob's SNR, branch by branch in closed form."""
    laws = laws_for(geom)
    branches, flags, _ = validate_branches(
        _bob_gamma_branches(geom), _mapped(laws.w, geom), "f_gamma_B",
        fallback=_mapped_fallback(laws.w, geom))
    return PiecewisePdf(branches, name="f_gamma_B", diagnostics=laws.flags + tuple(flags))


@lru_cache(maxsize=256)
def eve_density(geom: SystemGeometry) -> PiecewisePdf:
    """Density of Eve's SNR; the lowest-SNR branch comes from the tabulated convolution."""
    laws = laws_for(geom)
    branches, flags, _ = validate_branches(
        _eve_gamma_branches(geom, laws.s3), _mapped(laws.s, geom), "f_gamma_E",
        fallback=_mapped_fallback(laws.s, geom))
    return PiecewisePdf(branches, name="f_gamma_E", tol=1e-5,
                        diagnostics=laws.flags + tuple(flags))


def pdf_gamma_bob(geom: SystemGeometry, gamma):
    return bob_density(geom)(gamma)


def pdf_gamma_eve(geom: SystemGeometry, gamma):
    return eve_density(geom)(gamma)


class MappedCdf:
    """CDF of ``gamma_bar / (X + h^2)`` from the CDF of ``X``."""

    def __init__(self, dist_cdf: TabulatedCdf, gamma_bar: float, h: float):
        self.dist_cdf = dist_cdf
        self.gamma_bar = gamma_bar
        self.h2 = h * h
        self.support_min = gamma_bar / (self.h2 + dist_cdf.support_max)
        self.support_max = gamma_bar / (self.h2 + dist_cdf.support_min)

    def __call__(self, gamma):
        g = np.asarray(gamma, dtype=float)
        with np.errstate(divide="ignore"):
            x = np.where(g > 0, self.gamma_bar / np.where(g > 0, g, 1.0) - self.h2, np.inf)
        return 1.0 - self.dist_cdf(x)


@dataclass(frozen=True)
class SnrMarginals:
    """Marginal densities and CDFs of both SNRs, as consumed by the SOP routines."""

    bob_pdf: Callable
    bob_cdf: Callable
    eve_pdf: Callable
    eve_cdf: Callable
    bob_support: tuple[float, float]
    eve_support: tuple[float, float]
    eve_knots: tuple[float, ...] = ()
    bob_knots: tuple[float, ...] = ()
    diagnostics: tuple[str, ...] = ()

    @classmethod
    def from_pdfs(cls, bob: PiecewisePdf, eve: PiecewisePdf, grid_size: int = 4096):
        return cls(bob, cdf_of(bob, grid_size), eve, cdf_of(eve, grid_size),
                   (bob.support_min, bob.support_max), (eve.support_min, eve.support_max),
                   tuple(eve.knots), tuple(bob.knots),
                   tuple(dict.fromkeys(bob.diagnostics + eve.diagnostics)))


@lru_cache(maxsize=256)
def snr_marginals(geom: SystemGeometry) -> SnrMarginals:
    """Marginals for ``geom``; CDFs are mapped from the distance-space tables."""
    laws = laws_for(geom)
    bob, eve = bob_density(geom), eve_density(geom)
    diags = tuple(dict.fromkeys(bob.diagnostics + eve.diagnostics))
    return SnrMarginals(
        bob, MappedCdf(laws.w_cdf, geom.gamma_bar, geom.h),
        eve, MappedCdf(laws.s_cdf, geom.gamma_bar, geom.h),
        (geom.gamma_b_min, geom.gamma_b_max), (geom.gamma_e_min, geom.gamma_e_max),
        tuple(eve.knots), tuple(bob.knots), diags)


def dump_csv(func: Callable, lo: float, hi: float, out, n: int = 1001,
             header=("value", "density")) -> None:
    """Write ``func`` sampled on ``n`` points of ``[lo, hi]`` to the text stream ``out``."""
    x = np.linspace(lo, hi, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.asarray(func(x), dtype=float)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for a, b in zip(x, y):
        writer.writerow([repr(float(a)), repr(float(b))])
