"""Inverse pair-moment matrices and the constants a, b, c.

The joint law of ``(f, f_xx, f_yy)`` at a point is Gaussian with covariance
``M``; its inverse, and the inverse of the conditional covariance of
``(f_xx, f_yy)`` given ``f``, supply every constant of the curvature law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectrum import SpectralMoments, pair_derivative_moments

__all__ = [
    "DegenerateMomentsError",
    "GammaSet",
    "pair_moment_matrix",
    "gamma_set",
    "closed_form_gammas",
    "branch_identity_residual",
    "gamma_0xx",
]


class DegenerateMomentsError(np.linalg.LinAlgError):
    """The pair-moment matrix is not positive definite."""


@dataclass(frozen=True)
class GammaSet:
    """Inverse-moment constants for a given spectrum.

    ``a`` has units of length^2; ``b`` and ``c`` length^4. All three are
    positive for every valid spectrum.
    """

    Gamma00: float
    Gammazz: float
    Gammaxyxy: float
    Gamma3: np.ndarray
    GammaPrime: np.ndarray
    Gamma0xx: float
    a: float
    b: float
    c: float

    @property
    def Gxxxx(self) -> float:
        return float(self.GammaPrime[0, 0])

    @property
    def Gxxyy(self) -> float:
        return float(self.GammaPrime[0, 1])

    def as_dict(self) -> dict:
        return {
            "Gamma00": self.Gamma00,
            "Gammazz": self.Gammazz,
            "Gammaxyxy": self.Gammaxyxy,
            "Gammaxxxx": self.Gxxxx,
            "Gammaxxyy": self.Gxxyy,
            "Gamma0xx": self.Gamma0xx,
            "Gamma3": self.Gamma3.tolist(),
            "GammaPrime": self.GammaPrime.tolist(),
            "a": self.a,
            "b": self.b,
            "c": self.c,
        }


UNITS = {
    "Gamma00": "1/<f^2>",
    "Gammazz": "1/(<f^2> k^2)",
    "Gammaxyxy": "1/(<f^2> k^4)",
    "Gammaxxxx": "1/(<f^2> k^4)",
    "Gammaxxyy": "1/(<f^2> k^4)",
    "Gamma0xx": "1/(<f^2> k^2)",
    "a": "length^2",
    "b": "length^4",
    "c": "length^4",
}


def pair_moment_matrix(m: SpectralMoments) -> np.ndarray:
    """Covariance of ``(f, f_xx, f_yy)``; symmetric 3x3."""
    d = pair_derivative_moments(m)
    return np.array([
        [d.f2, d.ffxx, d.ffxx],
        [d.ffxx, d.fxx2, d.fxxfyy],
        [d.ffxx, d.fxxfyy, d.fxx2],
    ])


def _check_minors(M: np.ndarray):
    names = ("<f^2>", "2x2 leading minor (f, f_xx)", "det M")
    for n, name in zip((1, 2, 3), names):
        minor = np.linalg.det(M[:n, :n])
        scale = np.prod(np.diag(M)[:n])
        if not minor > 1e-13 * scale:
            raise DegenerateMomentsError(
                f"pair-moment matrix is singular: {name} = {minor:.3e}")


def gamma_set(m: SpectralMoments) -> GammaSet:
    """Invert the pair-moment matrices and derive ``a``, ``b``, ``c``.

    ``Gamma3`` is the direct inverse of the 3x3 matrix; ``GammaPrime`` is the
    inverse of the conditional covariance of ``(f_xx, f_yy)`` given ``f``,
    which coincides with the lower-right 2x2 block of ``Gamma3``.
    """
    d = pair_derivative_moments(m)
    M = pair_moment_matrix(m)
    _check_minors(M)
    G3 = np.linalg.inv(M)
    G3 = 0.5 * (G3 + G3.T)
    cond = M[1:, 1:] - np.outer(M[0, 1:], M[0, 1:]) / M[0, 0]
    Gp = np.linalg.inv(cond)
    Gp = 0.5 * (Gp + Gp.T)
    G00 = 1.0 / d.f2
    Gzz = 1.0 / d.fx2
    Gxyxy = 1.0 / d.fxy2
    return GammaSet(
        Gamma00=G00,
        Gammazz=Gzz,
        Gammaxyxy=Gxyxy,
        Gamma3=G3,
        GammaPrime=Gp,
        Gamma0xx=float(G3[0, 1]),
        a=0.5 * Gzz / G00,
        b=(Gp[0, 0] - Gp[0, 1]) / G00,
        c=(Gp[0, 0] + Gp[0, 1]) / G00,
    )


def closed_form_gammas(m: SpectralMoments) -> dict:
    """Closed-form spectral expressions for the scalar Gammas.

    Used as an independent cross-check of :func:`gamma_set`.
    """
    v, k2, k4, rho = m.variance, m.k2bar, m.k4bar, m.rho
    base = 15.0 / (4.0 * k4 * v)
    return {
        "Gammazz": 3.0 / (v * math.sqrt(k4 * rho)),
        "Gammaxxxx": base * (9 - 5 * rho) / (6 - 5 * rho),
        "Gammaxxyy": base * (-3 + 5 * rho) / (6 - 5 * rho),
        "Gamma0xx": k2 / (v * k4 * (4.0 / 5.0 - 2.0 * rho / 3.0)),
    }


def branch_identity_residual(gs: GammaSet) -> float:
    """Relative residual of ``Gxxxx - Gxxyy = Gxyxy / 2``.

    The equality makes two branch points of the curvature integrand
    coincide; it holds for every isotropic spectrum.
    """
    half = 0.5 * gs.Gammaxyxy
    return abs(gs.Gxxxx - gs.Gxxyy - half) / half


def gamma_0xx(m: SpectralMoments) -> float:
    """The ``(f, f_xx)`` entry of the inverse pair-moment matrix."""
    return gamma_set(m).Gamma0xx
