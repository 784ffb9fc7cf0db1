"""Finite superpositions of random plane waves and their 2-jets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectrum import SpectrumModel, moments, sample_wavenumbers

__all__ = [
    "NearCriticalPointError",
    "WaveField",
    "FieldJet2",
    "synthesize",
    "eval_jet",
    "eval_value",
    "gaussian_curvature",
    "random_unit_vectors",
]


class NearCriticalPointError(ValueError):
    """Gradient too small for a well-defined level-surface normal."""


@dataclass(frozen=True)
class WaveField:
    """``f(r) = amplitude * sum_j cos(k_j . r + phi_j)``.

    The amplitude ``sqrt(2 <f^2> / N)`` gives ensemble variance ``<f^2>``
    for every ``N``.
    """

    wavevectors: np.ndarray
    phases: np.ndarray
    amplitude: float
    seed: int | None
    spectrum: SpectrumModel | None = field(default=None, compare=False)

    @property
    def n_waves(self) -> int:
        return len(self.phases)

    @property
    def k_max(self) -> float:
        return float(np.max(np.linalg.norm(self.wavevectors, axis=1)))

    def describe(self) -> dict:
        """Parameters sufficient to regenerate the field bit-exactly."""
        return {
            "n_waves": self.n_waves,
            "seed": self.seed,
            "spectrum": None if self.spectrum is None else self.spectrum.describe(),
        }


@dataclass(frozen=True)
class FieldJet2:
    """Value, gradient and Hessian; arrays may carry a leading batch axis."""

    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray


def random_unit_vectors(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def synthesize(spectrum: SpectrumModel, n_waves: int, seed: int | None = None) -> WaveField:
    """Draw a random plane-wave field from ``spectrum``.

    Directions are uniform on the sphere, magnitudes follow the radial
    measure, phases are uniform on ``[0, 2 pi)``. Deterministic in ``seed``.
    """
    if n_waves < 1:
        raise ValueError("n_waves must be >= 1")
    rng = np.random.default_rng(seed)
    dirs = random_unit_vectors(n_waves, rng)
    k = sample_wavenumbers(spectrum, n_waves, rng)
    phases = rng.uniform(0.0, 2 * np.pi, n_waves)
    amp = float(np.sqrt(2.0 * spectrum.field_variance / n_waves))
    return WaveField(dirs * k[:, None], phases, amp, seed, spectrum)


def field_from_description(desc: dict) -> WaveField:
    spec = desc["spectrum"]
    model = SpectrumModel(spec["variant"], tuple(spec["wavenumbers"]), tuple(spec["weights"]),
                          spec["field_variance"])
    return synthesize(model, int(desc["n_waves"]), desc["seed"])


def eval_value(field: WaveField, points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return field.amplitude * np.cos(pts @ field.wavevectors.T + field.phases).sum(axis=1)


def eval_jet(field: WaveField, points) -> FieldJet2:
    """Exact value, gradient and Hessian at ``points`` (shape ``(3,)`` or ``(n, 3)``)."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    kv = field.wavevectors
    phase = pts @ kv.T + field.phases
    c = field.amplitude * np.cos(phase)
    s = field.amplitude * np.sin(phase)
    value = c.sum(axis=1)
    grad = -s @ kv
    kk = (kv[:, :, None] * kv[:, None, :]).reshape(len(kv), 9)
    hess = -(c @ kk).reshape(-1, 3, 3)
    if single:
        return FieldJet2(value[0], grad[0], hess[0])
    return FieldJet2(value, grad, hess)


def _adjugate_sym(H):
    a, b, c = H[..., 0, 0], H[..., 0, 1], H[..., 0, 2]
    d, e = H[..., 1, 1], H[..., 1, 2]
    f = H[..., 2, 2]
    adj = np.empty(H.shape)
    adj[..., 0, 0] = d * f - e * e
    adj[..., 1, 1] = a * f - c * c
    adj[..., 2, 2] = a * d - b * b
    adj[..., 0, 1] = adj[..., 1, 0] = c * e - b * f
    adj[..., 0, 2] = adj[..., 2, 0] = b * e - c * d
    adj[..., 1, 2] = adj[..., 2, 1] = b * c - a * e
    return adj


def gaussian_curvature(jet: FieldJet2, threshold: float = 0.0):
    """Gaussian curvature of the level surface through each jet's point.

    ``K = g . adj(H) . g / |g|^4``; independent of the sign of ``g``.
    Raises :class:`NearCriticalPointError` when any ``|g| <= threshold``.
    """
    g = np.asarray(jet.gradient, dtype=float)
    H = np.asarray(jet.hessian, dtype=float)
    H = 0.5 * (H + np.swapaxes(H, -1, -2))
    g2 = np.sum(g * g, axis=-1)
    if np.any(np.sqrt(g2) <= threshold) or np.any(g2 == 0):
        raise NearCriticalPointError("gradient vanishes (or is below threshold) at a sample")
    num = np.einsum("...i,...ij,...j->...", g, _adjugate_sym(H), g)
    return num / (g2 * g2)


def gradient_threshold(spectrum: SpectrumModel, rel: float = 1e-12) -> float:
    """Default near-critical cutoff ``rel * sqrt(k2bar <f^2>)``."""
    m = moments(spectrum)
    return rel * float(np.sqrt(m.k2bar * m.variance))
