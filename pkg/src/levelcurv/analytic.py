"""Closed-form Gaussian-curvature density on the nodal surface ``f = 0``.

For ``K <= 0`` the density is ``A / (a - b K)^3`` with
``A = 2 a^2 b sqrt(c) / sqrt(b + c)``; for ``K > 0`` an algebraic term in
``sqrt(K)`` is added. Both pieces have a triple pole at ``K = a/b`` that
cancels in their sum; near that point the sum is evaluated through the
Cauchy integral of its analytic continuation instead.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, optimize
from scipy.integrate import simpson

from .gamma import GammaSet, gamma_set
from .spectrum import SpectralMoments

__all__ = [
    "CurvatureDistribution",
    "pdf_nodal",
    "pdf_nodal_naive",
    "tail_coefficients",
    "mean_nodal",
    "cdf_nodal",
    "quantile_nodal",
    "integrate_density",
    "nodal_normalization",
    "nodal_mean_numeric",
    "truncated_second_moment",
    "tabulate",
    "curvature_scale",
]



def _quad(*args, **kwargs):
    # Results are checked by the callers against independent totals; the
    # roundoff warnings QUADPACK raises deep in the |K|^-3 tails are noise.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(*args, **kwargs)


# Switch to the contour evaluation when |a - bK| < STABLE_BAND * a.
STABLE_BAND = 1e-2
_CONTOUR_RADIUS = 0.25
_CONTOUR_NODES = 64
# Grid nodes are uniform in asinh(K / (GRID_GRADING / a)).
GRID_GRADING = 1e-3


def _left_amplitude(gs: GammaSet) -> float:
    return 2.0 * gs.a**2 * gs.b * math.sqrt(gs.c) / math.sqrt(gs.b + gs.c)


def _naive(K, gs: GammaSet):
    """Two-term formula; accepts complex ``K`` (principal square roots)."""
    a, b, c = gs.a, gs.b, gs.c
    A = _left_amplitude(gs)
    d3 = (a - b * K) ** 3
    poly = -15 * a * a + 10 * a * (b - 2 * c) * K + (-3 * b * b + 4 * b * c - 8 * c * c) * K * K
    s = a + K * c
    root_term = a * a * b * math.sqrt(c) * np.sqrt(K) * poly / (4.0 * d3 * s * s * np.sqrt(s))
    return root_term + A / d3


def pdf_nodal_naive(K, gs: GammaSet):
    """Direct evaluation of the two-piece formula, without the stable path."""
    K = np.asarray(K, dtype=float)
    left = _left_amplitude(gs) / (gs.a - gs.b * K) ** 3
    with np.errstate(invalid="ignore"):
        right = _naive(np.maximum(K, 0.0), gs)
    out = np.where(K > 0, right, left)
    return out[()] if out.ndim == 0 else out


def _contour(K, gs: GammaSet):
    K0 = gs.a / gs.b
    r = _CONTOUR_RADIUS * K0
    theta = 2 * np.pi * np.arange(_CONTOUR_NODES) / _CONTOUR_NODES
    z = K0 + r * np.exp(1j * theta)
    fz = _naive(z, gs)
    K = np.asarray(K, dtype=float)[..., None]
    return np.real(np.mean(fz * (z - K0) / (z - K), axis=-1))


def pdf_nodal(K, gs: GammaSet):
    """Probability density of Gaussian curvature on the nodal surface.

    Parameters
    ----------
    K : float or array_like
        Curvature values (wavenumber^2).
    gs : GammaSet

    Returns
    -------
    float or ndarray
        Density in units of 1/wavenumber^2.
    """
    K = np.asarray(K, dtype=float)
    a, b = gs.a, gs.b
    out = np.empty(K.shape)
    neg = K <= 0
    out[neg] = _left_amplitude(gs) / (a - b * K[neg]) ** 3
    pos = ~neg
    near = pos & (np.abs(a - b * K) < STABLE_BAND * a)
    far = pos & ~near
    if far.any():
        out[far] = _naive(K[far], gs)
    if near.any():
        out[near] = _contour(K[near], gs)
    return out[()] if out.ndim == 0 else out


def tail_coefficients(gs: GammaSet) -> tuple[float, float]:
    """Coefficients ``(C_left, C_right)`` of ``P(K) ~ C |K|^-3``."""
    a, b, c = gs.a, gs.b, gs.c
    A = _left_amplitude(gs)
    left = A / b**3
    right = a * a * math.sqrt(c) * (3 * b * b - 4 * b * c + 8 * c * c) / (4 * b * b * c**2.5) - left
    return left, right


def curvature_scale(gs: GammaSet) -> float:
    """Natural curvature unit ``1/a`` (= 2 k2bar / 3)."""
    return 1.0 / gs.a


def mean_nodal(m: SpectralMoments) -> float:
    """Mean Gaussian curvature of the nodal surface, ``-k2bar / 6``."""
    return -m.k2bar / 6.0


def _segments(scale: float, L: float, extra=()):
    """Breakpoints in [-L, L], graded logarithmically away from zero."""
    pts = {0.0, L, -L}
    x = 1e-3 * scale
    while x < L:
        pts.update((x, -x))
        x *= 10.0
    pts.update(p for p in extra if -L < p < L)
    return sorted(pts)


def integrate_density(fn: Callable[[float], float], scale: float, L: float,
                      tails: tuple[float, float] = (0.0, 0.0), power: int = 0,
                      extra_points=(), epsrel: float = 1e-11) -> float:
    """``int K^power fn(K) dK`` over the real line.

    Quadrature covers ``[-L, L]`` on logarithmically graded pieces; beyond
    that the leading ``C |K|^-3`` tail is integrated analytically.
    """
    pts = _segments(scale, L, extra_points)
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _ = _quad(lambda k: k**power * fn(k), lo, hi,
                                epsabs=0.0, epsrel=epsrel, limit=200)
        total += val
    cl, cr = tails
    n = 2 - power
    total += (cr + (-1) ** power * cl) / (n * L**n)
    return total


def _tail_cutoff(gs: GammaSet) -> float:
    return 1e4 * curvature_scale(gs)


def nodal_normalization(gs: GammaSet) -> float:
    """``int P(K) dK``, quadrature plus analytic tails."""
    return integrate_density(lambda k: float(pdf_nodal(k, gs)), curvature_scale(gs),
                             _tail_cutoff(gs), tail_coefficients(gs), 0, (gs.a / gs.b,))


def nodal_mean_numeric(gs: GammaSet) -> float:
    """``int K P(K) dK``, quadrature plus analytic tails."""
    return integrate_density(lambda k: float(pdf_nodal(k, gs)), curvature_scale(gs),
                             _tail_cutoff(gs), tail_coefficients(gs), 1, (gs.a / gs.b,))


def truncated_second_moment(gs: GammaSet, cutoff: float) -> tuple[float, float]:
    """Truncated second moment and its logarithmic growth rate.

    Returns ``(M2(cutoff), (M2(10 cutoff) - M2(cutoff)) / ln 10)`` where
    ``M2(L) = int_{-L}^{L} K^2 P(K) dK``. Because ``P`` decays as
    ``|K|^-3`` the second moment diverges logarithmically and the growth
    rate tends to ``C_left + C_right``.
    """
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")

    def m2(L):
        return integrate_density(lambda k: k * k * float(pdf_nodal(k, gs)),
                                 curvature_scale(gs), L, extra_points=(gs.a / gs.b,))

    lo = m2(cutoff)
    hi = m2(10.0 * cutoff)
    return lo, (hi - lo) / math.log(10.0)


def cdf_nodal(K: float, gs: GammaSet) -> float:
    """Cumulative distribution; exact for ``K <= 0``, quadrature above."""
    a, b = gs.a, gs.b
    A = _left_amplitude(gs)
    if K <= 0:
        return A / (2 * b * (a - b * K) ** 2)
    base = A / (2 * b * a * a)
    pts = [p for p in _segments(curvature_scale(gs), K, (a / b,)) if p >= 0]
    acc = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        acc += _quad(lambda k: float(pdf_nodal(k, gs)), lo, hi,
                              epsabs=0.0, epsrel=1e-11, limit=200)[0]
    return base + acc


def _right_tail_mass(K: float, gs: GammaSet) -> float:
    L = max(_tail_cutoff(gs), 10 * K)
    pts = [K] + [p for p in _segments(curvature_scale(gs), L, (gs.a / gs.b,)) if p > K]
    acc = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        acc += _quad(lambda k: float(pdf_nodal(k, gs)), lo, hi,
                              epsabs=0.0, epsrel=1e-11, limit=200)[0]
    return acc + tail_coefficients(gs)[1] / (2 * L * L)


def _right_tail_first_moment(K: float, gs: GammaSet) -> float:
    L = max(_tail_cutoff(gs), 10 * K)
    pts = [K] + [p for p in _segments(curvature_scale(gs), L, (gs.a / gs.b,)) if p > K]
    acc = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        acc += _quad(lambda k: k * float(pdf_nodal(k, gs)), lo, hi,
                              epsabs=0.0, epsrel=1e-11, limit=200)[0]
    return acc + tail_coefficients(gs)[1] / L


def quantile_nodal(q: float, gs: GammaSet) -> float:
    """Inverse of :func:`cdf_nodal`."""
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    a, b = gs.a, gs.b
    A = _left_amplitude(gs)
    F0 = A / (2 * b * a * a)
    if q <= F0:
        return (a - math.sqrt(A / (2 * b * q))) / b
    tail = 1.0 - q
    hi = curvature_scale(gs)
    while _right_tail_mass(hi, gs) > tail:
        hi *= 4.0
    return optimize.brentq(lambda k: _right_tail_mass(k, gs) - tail, 0.0, hi,
                           xtol=1e-14 * hi, rtol=1e-12)


@dataclass
class CurvatureDistribution:
    """Tabulated curvature density on a level surface.

    ``tail_mass`` and ``tail_moment`` hold the probability mass and first
    moment beyond the ends of the grid (left, right), so that the grid
    integrals can be completed.
    """

    level: float
    K: np.ndarray
    density: np.ndarray
    metadata: dict
    source: str
    tail_mass: tuple[float, float] = (0.0, 0.0)
    tail_moment: tuple[float, float] = (0.0, 0.0)
    density_fn: Callable | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        if self.K.shape != self.density.shape or self.K.ndim != 1:
            raise ValueError("K and density must be 1-d arrays of equal length")
        if np.any(np.diff(self.K) <= 0):
            raise ValueError("grid must be strictly increasing")

    def density_at(self, K):
        """Density at arbitrary ``K``: exact if a callable is attached."""
        if self.density_fn is not None:
            return self.density_fn(K)
        return np.interp(K, self.K, self.density, left=0.0, right=0.0)

    def _grid_integral(self, y) -> float:
        # The density has a sqrt(K) kink at 0; integrate each side separately.
        i = int(np.searchsorted(self.K, 0.0))
        if 0 < i < len(self.K) - 1 and self.K[i] == 0.0:
            return float(simpson(y[: i + 1], x=self.K[: i + 1]) + simpson(y[i:], x=self.K[i:]))
        return float(simpson(y, x=self.K))

    def normalization(self) -> float:
        """Grid integral (Simpson on each side of 0) plus tail masses."""
        return self._grid_integral(self.density) + sum(self.tail_mass)

    def mean(self) -> float:
        return self._grid_integral(self.K * self.density) + sum(self.tail_moment)

    def peak(self) -> tuple[float, float]:
        i = int(np.argmax(self.density))
        return float(self.K[i]), float(self.density[i])


def graded_grid(K_lo: float, K_hi: float, n_points: int, scale: float) -> np.ndarray:
    """Monotone grid on ``[K_lo, K_hi]`` containing 0, dense near 0.

    Nodes are uniform in ``asinh(K / scale)``.
    """
    if not K_lo < 0 < K_hi:
        raise ValueError("need K_lo < 0 < K_hi")
    if n_points < 3:
        return np.array([K_lo, 0.0, K_hi])
    ulo, uhi = math.asinh(K_lo / scale), math.asinh(K_hi / scale)
    n_left = min(max(1, round((n_points - 1) * -ulo / (uhi - ulo))), n_points - 2)
    n_right = n_points - 1 - n_left
    left = scale * np.sinh(np.linspace(ulo, 0.0, n_left + 1))
    right = scale * np.sinh(np.linspace(0.0, uhi, n_right + 1))
    grid = np.concatenate([left, right[1:]])
    grid[0], grid[-1], grid[n_left] = K_lo, K_hi, 0.0
    return grid


def default_range(gs: GammaSet, tail: float = 1e-4) -> tuple[float, float]:
    """Range leaving at most ``tail`` probability mass beyond each end."""
    lo = quantile_nodal(tail, gs)
    hi = quantile_nodal(1.0 - tail, gs) if cdf_nodal(0.0, gs) < 1.0 - tail else curvature_scale(gs)
    return lo, hi


def tabulate(gs: GammaSet, K_lo: float | None = None, K_hi: float | None = None,
             n_points: int = 2001, moments: SpectralMoments | None = None) -> CurvatureDistribution:
    """Tabulate the nodal density on a graded grid.

    The range always covers the default range (at most 1e-4 of the mass
    omitted per side); a narrower user range is widened to it.
    """
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if K_lo is not None and K_hi is not None and not K_lo < 0 < K_hi:
        raise ValueError("need K_lo < 0 < K_hi")
    dlo, dhi = default_range(gs)
    lo = dlo if K_lo is None else min(K_lo, dlo)
    hi = dhi if K_hi is None else max(K_hi, dhi)
    grid = graded_grid(lo, hi, n_points, GRID_GRADING * curvature_scale(gs))
    A = _left_amplitude(gs)
    a, b = gs.a, gs.b
    tail_mass = (A / (2 * b * (a - b * lo) ** 2), _right_tail_mass(hi, gs))
    # int_{-inf}^{lo} K A/(a-bK)^3 dK with u = a - bK
    u = a - b * lo
    left_moment = A / b**2 * (a / (2 * u * u) - 1.0 / u)
    tail_moment = (left_moment, _right_tail_first_moment(hi, gs))
    meta = {"source": "closed-form", "F": 0.0, **gs_metadata(gs, moments)}
    return CurvatureDistribution(0.0, grid, pdf_nodal(grid, gs), meta, "closed-form",
                                 tail_mass, tail_moment, lambda k: pdf_nodal(k, gs))


def gs_metadata(gs: GammaSet, moments: SpectralMoments | None) -> dict:
    meta = {"a": gs.a, "b": gs.b, "c": gs.c}
    if moments is not None:
        meta.update(rho=moments.rho, k2bar=moments.k2bar, k4bar=moments.k4bar,
                    variance=moments.variance)
    return meta


def nodal_distribution(m: SpectralMoments, **kwargs) -> CurvatureDistribution:
    """Shortcut: tabulate the nodal density for spectral moments ``m``."""
    return tabulate(gamma_set(m), moments=m, **kwargs)
