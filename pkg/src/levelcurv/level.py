"""Curvature density on a general level surface ``f = F``.

There is no closed form away from ``F = 0``; the density is a single
complex line integral over the Fourier variable ``gamma``, evaluated here by
adaptive Gauss-Kronrod quadrature (QUADPACK via scipy).

The ``F``-dependent factor used here is
``exp(-(F G0xx)^2 i gamma / (s (s + i gamma)))`` with ``s = Gxxxx + Gxxyy``.
It equals 1 at ``gamma = 0``, which keeps the density normalised for every
``F`` and reproduces the known level-``F`` mean.
"""

from __future__ import annotations

import cmath
import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .analytic import (CurvatureDistribution, curvature_scale, graded_grid, gs_metadata,
                       integrate_density, pdf_nodal)
from .gamma import GammaSet, gamma_set
from .spectrum import SpectralMoments

__all__ = [
    "QuadratureError",
    "LevelQuadratureOptions",
    "integrand_level",
    "level_integral",
    "pdf_level",
    "prefactor_level",
    "calibration_constant",
    "mean_level",
    "level_tail_coefficients",
    "level_normalization",
    "level_mean_numeric",
    "tabulate_level",
]


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class LevelQuadratureOptions:
    """Controls for the ``gamma`` quadrature.

    ``tail_start`` multiplies the largest finite scale of the integrand
    (pole and branch-point distances) to give the point beyond which the
    infinite-range rule takes over.
    """

    rel_tol: float = 1e-10
    max_subdivisions: int = 200
    tail_start: float = 10.0

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-2:
            raise ValueError("rel_tol must lie in (0, 1e-2]")
        if self.max_subdivisions < 64:
            raise ValueError("max_subdivisions must be >= 64")
        if not self.tail_start > 0:
            raise ValueError("tail_start must be positive")


DEFAULT_OPTIONS = LevelQuadratureOptions()


def _consts(K: float, F: float, gs: GammaSet):
    s = gs.Gxxxx + gs.Gxxyy
    if not s > 0:
        raise ValueError("branch radicand must have positive real part on the path")
    return 0.5 * gs.Gammazz, gs.Gxxxx - gs.Gxxyy, s, (F * gs.Gamma0xx) ** 2 / s


def integrand_level(gamma, K: float, F: float, gs: GammaSet):
    """Integrand of the level-surface curvature density, complex-valued.

    ``gamma`` is in inverse-Gamma units. The principal square root is used;
    its radicand has positive real part ``Gxxxx + Gxxyy`` for all real
    ``gamma``. Satisfies ``integrand(-gamma) = conj(integrand(gamma))``.
    """
    h, d, s, q = _consts(K, F, gs)
    g = np.asarray(gamma, dtype=float)
    ig = 1j * g
    out = np.exp(-q * ig / (s + ig)) / ((h - ig * K) ** 3 * (d - ig) * np.sqrt(s + ig))
    return out[()] if out.ndim == 0 else out


def _breakpoints(K, gs, opts):
    h, d, s, _ = _consts(K, 0.0, gs)
    scales = [d, s]
    if K != 0:
        scales.append(h / abs(K))
    pts = sorted(set(scales))
    pts.append(opts.tail_start * pts[-1])
    # Decade breakpoints across wide gaps (small |K| puts a pole far out).
    filled = [pts[0]]
    for p in pts[1:]:
        x = filled[-1] * 10.0
        while x < 0.5 * p:
            filled.append(x)
            x *= 10.0
        filled.append(p)
    return [0.0] + filled


def _quad(fn, lo, hi, opts):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info, *_ = integrate.quad(fn, lo, hi, epsabs=0.0, epsrel=opts.rel_tol,
                                            limit=opts.max_subdivisions, full_output=1)
    return val, err


def _half_line(part, K, F, gs, opts, sign=1.0):
    """``int_0^inf part(integrand(sign * gamma)) d gamma``."""
    h, d, s, q = _consts(K, F, gs)

    def f(g):
        ig = 1j * sign * g
        z = cmath.exp(-q * ig / (s + ig)) / ((h - ig * K) ** 3 * (d - ig) * cmath.sqrt(s + ig))
        return z.real if part == "re" else z.imag

    pts = _breakpoints(K, gs, opts)
    total, err = 0.0, 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, e = _quad(f, lo, hi, opts)
        total += v
        err += e
    v, e = _quad(f, pts[-1], np.inf, opts)
    return total + v, err + e


def level_integral(K: float, F: float, gs: GammaSet,
                   opts: LevelQuadratureOptions = DEFAULT_OPTIONS,
                   full_line: bool = False) -> complex:
    """``int integrand_level d gamma`` over the real line.

    By conjugate symmetry the result is real and equal to twice the real
    half-line integral. With ``full_line=True`` both half-lines are
    integrated separately for real and imaginary parts, which exposes the
    (vanishing) imaginary part as a diagnostic.
    """
    K, F = float(K), float(F)
    re_pos, err = _half_line("re", K, F, gs, opts)
    if not full_line:
        val = 2.0 * re_pos
        _check(val, 2 * err, opts, gs)
        return complex(val, 0.0)
    re_neg, e2 = _half_line("re", K, F, gs, opts, -1.0)
    im_pos, e3 = _half_line("im", K, F, gs, opts)
    im_neg, e4 = _half_line("im", K, F, gs, opts, -1.0)
    val = complex(re_pos + re_neg, im_pos + im_neg)
    _check(val.real, err + e2, opts, gs)
    return val


def _check(val, err, opts, gs):
    # Far-tail values come from cancellation: accept sqrt(rel_tol) relative
    # accuracy, or rel_tol relative to the K = 0 magnitude of the integral.
    h, _, s, _ = _consts(0.0, 0.0, gs)
    floor = opts.rel_tol / (h**3 * math.sqrt(s))
    if not math.isfinite(val) or err > max(math.sqrt(opts.rel_tol) * abs(val), floor):
        raise QuadratureError(
            f"gamma quadrature did not converge: estimate {val:.6e}, error {err:.2e}",
            val, err)


def prefactor_level(gs: GammaSet) -> float:
    """Constant prefactor of the line integral before calibration.

    Collects ``(Gzz/2)^2 / sqrt(G00 / 2pi)``, ``sqrt(det Gamma / (2pi)^3)``,
    the ``2!`` from the ``f_z`` moment and ``sqrt(Gxyxy / 2)``.
    """
    det3 = float(np.linalg.det(gs.Gamma3))
    return ((0.5 * gs.Gammazz) ** 2 / math.sqrt(gs.Gamma00 / (2 * math.pi))
            * math.sqrt(det3 / (2 * math.pi) ** 3) * 2.0 * math.sqrt(0.5 * gs.Gammaxyxy))


_CALIBRATION_RHO = 1.0
_CALIBRATION_K = -0.3


@functools.cache
def calibration_constant() -> float:
    """Universal factor fixing the overall normalisation.

    Determined once by matching the ``F = 0`` line integral to the closed
    form at a single reference point. The constant is independent of ``K``,
    ``F`` and the spectrum; it comes out as 1 to rounding.
    """
    gs = gamma_set(SpectralMoments.from_rho(_CALIBRATION_RHO))
    raw = prefactor_level(gs) * level_integral(_CALIBRATION_K, 0.0, gs).real
    return float(pdf_nodal(_CALIBRATION_K, gs)) / raw


def pdf_level(K, F: float, gs: GammaSet, moments: SpectralMoments | None = None,
              opts: LevelQuadratureOptions = DEFAULT_OPTIONS):
    """Curvature density on the level surface ``f = F``.

    ``moments`` is accepted for interface symmetry; every constant needed is
    already in ``gs``. Depends on ``F`` only through ``F**2``.
    """
    scale = calibration_constant() * prefactor_level(gs)
    K = np.asarray(K, dtype=float)
    out = np.array([scale * level_integral(k, F, gs, opts).real for k in K.ravel()])
    out = out.reshape(K.shape)
    return out[()] if out.ndim == 0 else out


def mean_level(F: float, m: SpectralMoments) -> float:
    """Mean Gaussian curvature on ``f = F``: ``k2bar (F^2/<f^2> - 1) / 6``."""
    return m.k2bar * (F * F / m.variance - 1.0) / 6.0


def level_tail_coefficients(F: float, gs: GammaSet) -> tuple[float, float]:
    """Coefficients ``(C_left, C_right)`` of ``P_F(K) ~ C |K|^-3``.

    Large ``|K|`` comes from small ``f_z``, giving
    ``C_pm = E[D^2; pm D > 0] / (4 sigma_z^4)`` where ``D`` is the Hessian
    determinant in the tangent plane. Writing ``D = S - E`` with
    ``S = (f_xx + f_yy)^2 / 4`` and ``E`` exponential, both expectations are
    closed-form Gaussian integrals.
    """
    s_gamma = gs.Gxxxx + gs.Gxxyy
    var_s = 1.0 / s_gamma                          # Var((f_xx + f_yy)/sqrt 2 | F)
    mean_sq = 2.0 * (F * gs.Gamma0xx / s_gamma) ** 2
    lam = 0.5 * gs.Gammaxyxy                       # rate of E
    t = 0.5 * lam
    denom = 1.0 + 2.0 * t * var_s
    neg = 2.0 / lam**2 * math.exp(-t * mean_sq / denom) / math.sqrt(denom)
    e_s = 0.5 * (mean_sq + var_s)
    e_s2 = 0.25 * (mean_sq**2 + 6 * mean_sq * var_s + 3 * var_s**2)
    total = e_s2 - 2.0 * e_s / lam + 2.0 / lam**2
    k = 0.25 * gs.Gammazz**2
    return k * neg, k * (total - neg)


def _level_cutoff(gs: GammaSet) -> float:
    return 1e3 * curvature_scale(gs)


def level_normalization(F: float, gs: GammaSet,
                        opts: LevelQuadratureOptions = DEFAULT_OPTIONS) -> float:
    """``int P_F(K) dK``: quadrature on ``[-L, L]`` plus analytic tails."""
    return integrate_density(lambda k: float(pdf_level(k, F, gs, opts=opts)),
                             curvature_scale(gs), _level_cutoff(gs),
                             level_tail_coefficients(F, gs), 0, epsrel=1e-8)


def level_mean_numeric(F: float, gs: GammaSet,
                       opts: LevelQuadratureOptions = DEFAULT_OPTIONS) -> float:
    """``int K P_F(K) dK``: quadrature on ``[-L, L]`` plus analytic tails."""
    return integrate_density(lambda k: float(pdf_level(k, F, gs, opts=opts)),
                             curvature_scale(gs), _level_cutoff(gs),
                             level_tail_coefficients(F, gs), 1, epsrel=1e-8)


def tabulate_level(gs: GammaSet, F: float, K_lo: float | None = None,
                   K_hi: float | None = None, n_points: int = 401,
                   moments: SpectralMoments | None = None,
                   opts: LevelQuadratureOptions = DEFAULT_OPTIONS) -> CurvatureDistribution:
    """Tabulate ``P_F`` on a graded grid; tails use the ``|K|^-3`` asymptote.

    The default range puts about 1e-4 of the mass beyond each end according
    to the tail asymptote, widened to cover the bulk for large ``|F|``.
    """
    cl, cr = level_tail_coefficients(F, gs)
    unit = curvature_scale(gs)
    bulk = 4.0 * unit * (1.0 + (F * F * gs.Gamma00))
    lo = -max(math.sqrt(cl / 2e-4), bulk) if K_lo is None else K_lo
    hi = max(math.sqrt(cr / 2e-4), bulk) if K_hi is None else K_hi
    if not lo < 0 < hi or n_points < 2:
        raise ValueError("need K_lo < 0 < K_hi and n_points >= 2")
    grid = graded_grid(lo, hi, n_points, 1e-2 * unit)
    dens = pdf_level(grid, F, gs, opts=opts)
    tail_mass = (cl / (2 * lo * lo), cr / (2 * hi * hi))
    tail_moment = (cl / lo, cr / hi)
    meta = {"source": "quadrature", "F": float(F), **gs_metadata(gs, moments)}
    return CurvatureDistribution(float(F), grid, dens, meta, "quadrature",
                                 tail_mass, tail_moment)
