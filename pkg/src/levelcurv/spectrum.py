"""Isotropic radial power spectra and their moments.

A spectrum is a radial measure over wavenumber ``k``: the spectral power
carried by the shell ``[k, k + dk]``. Every downstream quantity depends on
the spectrum only through the field variance and the two moments
``k2bar = <k^2>`` and ``k4bar = <k^4>`` of this measure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "InvalidSpectrumError",
    "SpectrumModel",
    "SpectralMoments",
    "DerivativeMoments",
    "moments",
    "pair_derivative_moments",
    "parse_spectrum",
    "sample_wavenumbers",
]

MIN_TABLE_NODES = 256


class InvalidSpectrumError(ValueError):
    """Raised for spectra violating positivity or normalisability."""


@dataclass(frozen=True)
class SpectrumModel:
    """Radial power spectrum of an isotropic field.

    Parameters
    ----------
    variant : {"mono", "shells", "ball", "table"}
        ``mono`` is a single shell at ``wavenumbers[0]``; ``shells`` a finite
        mixture with ``weights``; ``ball`` the uniform solid ball of radius
        ``wavenumbers[0]`` (radial density proportional to ``k**2``);
        ``table`` a sampled radial density given by ``wavenumbers`` (nodes)
        and ``weights`` (density values at the nodes).
    wavenumbers, weights : tuple of float
    field_variance : float
        ``<f^2>``.
    """

    variant: str
    wavenumbers: tuple[float, ...]
    weights: tuple[float, ...] = ()
    field_variance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "wavenumbers", tuple(float(k) for k in self.wavenumbers))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        _validate(self)

    @classmethod
    def mono(cls, k0=1.0, field_variance=1.0):
        return cls("mono", (k0,), (1.0,), field_variance)

    @classmethod
    def shells(cls, wavenumbers: Sequence[float], weights: Sequence[float] | None = None,
               field_variance=1.0):
        if weights is None:
            weights = [1.0] * len(wavenumbers)
        return cls("shells", tuple(wavenumbers), tuple(weights), field_variance)

    @classmethod
    def ball(cls, k_max=1.0, field_variance=1.0):
        return cls("ball", (k_max,), (), field_variance)

    @classmethod
    def table(cls, wavenumbers: Sequence[float], density: Sequence[float], field_variance=1.0):
        return cls("table", tuple(wavenumbers), tuple(density), field_variance)

    def scaled(self, s: float) -> "SpectrumModel":
        """Return the spectrum with every wavenumber multiplied by ``s``."""
        return SpectrumModel(self.variant, tuple(s * k for k in self.wavenumbers),
                             self.weights, self.field_variance)

    def describe(self) -> dict:
        return {
            "variant": self.variant,
            "wavenumbers": list(self.wavenumbers),
            "weights": list(self.weights),
            "field_variance": self.field_variance,
        }

    @property
    def k_max(self) -> float:
        return max(self.wavenumbers)


def _validate(spec: SpectrumModel):
    if spec.variant not in ("mono", "shells", "ball", "table"):
        raise InvalidSpectrumError(f"unknown spectrum variant {spec.variant!r}")
    if not spec.wavenumbers:
        raise InvalidSpectrumError("spectrum needs at least one wavenumber")
    if not all(math.isfinite(k) for k in spec.wavenumbers):
        raise InvalidSpectrumError("wavenumbers must be finite")
    if not (spec.field_variance > 0 and math.isfinite(spec.field_variance)):
        raise InvalidSpectrumError("field_variance must be positive")
    if spec.variant in ("mono", "ball") and len(spec.wavenumbers) != 1:
        raise InvalidSpectrumError(f"{spec.variant} spectrum takes exactly one wavenumber")
    if spec.variant == "table":
        k = np.asarray(spec.wavenumbers)
        if len(k) < 2 or np.any(np.diff(k) <= 0):
            raise InvalidSpectrumError("table nodes must be strictly increasing, at least two")
        if k[0] < 0:
            raise InvalidSpectrumError("table nodes must be non-negative")
        if k[-1] <= 0:
            raise InvalidSpectrumError("all wavenumbers must be > 0")
    elif any(k <= 0 for k in spec.wavenumbers):
        raise InvalidSpectrumError("all wavenumbers must be > 0")
    if spec.variant in ("shells", "table"):
        if len(spec.weights) != len(spec.wavenumbers):
            raise InvalidSpectrumError("weights and wavenumbers differ in length")
        if any(w < 0 or not math.isfinite(w) for w in spec.weights):
            raise InvalidSpectrumError("weights must be finite and >= 0")
        if not any(w > 0 for w in spec.weights):
            raise InvalidSpectrumError("zero total spectral weight")


@dataclass(frozen=True)
class SpectralMoments:
    """Field variance and the radial-measure moments ``<k^2>``, ``<k^4>``."""

    variance: float
    k2bar: float
    k4bar: float
    rho: float = field(init=False)

    def __post_init__(self):
        if not (self.variance > 0 and self.k2bar > 0 and self.k4bar > 0):
            raise InvalidSpectrumError("variance, k2bar and k4bar must be positive")
        rho = self.k2bar**2 / self.k4bar
        # Cauchy-Schwarz; allow roundoff above 1 and clip.
        if rho > 1.0 + 1e-12:
            raise InvalidSpectrumError(f"rho = {rho} exceeds 1; moments are inconsistent")
        object.__setattr__(self, "rho", min(rho, 1.0))

    @classmethod
    def from_rho(cls, rho: float, k4bar: float = 1.0, variance: float = 1.0) -> "SpectralMoments":
        """Moments with prescribed shape parameter ``rho`` and fourth moment."""
        if not 0 < rho <= 1:
            raise InvalidSpectrumError("rho must lie in (0, 1]")
        return cls(variance, math.sqrt(rho * k4bar), k4bar)

    def scaled(self, s: float) -> "SpectralMoments":
        return SpectralMoments(self.variance, self.k2bar * s**2, self.k4bar * s**4)

    def as_dict(self) -> dict:
        return {"variance": self.variance, "k2bar": self.k2bar,
                "k4bar": self.k4bar, "rho": self.rho}


@dataclass(frozen=True)
class DerivativeMoments:
    """Pair averages of the field and its first two derivatives at one point."""

    f2: float        # <f^2>
    fx2: float       # <f_x^2> = -<f f_xx>
    fxx2: float      # <f_xx^2>
    fxxfyy: float    # <f_xx f_yy> = <f_xy^2>
    ffxx: float      # <f f_xx>

    @property
    def fxy2(self) -> float:
        return self.fxxfyy


def _table_nodes(spec: SpectrumModel):
    k = np.asarray(spec.wavenumbers)
    p = np.asarray(spec.weights)
    n = max(MIN_TABLE_NODES, len(k))
    kk = np.unique(np.concatenate([np.linspace(k[0], k[-1], n), k]))
    return kk, np.interp(kk, k, p)


def moments(spectrum: SpectrumModel) -> SpectralMoments:
    """Compute ``<f^2>``, ``k2bar``, ``k4bar`` and ``rho`` for a spectrum.

    The tabulated variant is integrated with the trapezoid rule on at least
    256 nodes (the linear interpolant of the table), so its moments are exact
    for piecewise-linear densities and second-order accurate otherwise.
    """
    v = spectrum.field_variance
    if spectrum.variant == "mono":
        k0 = spectrum.wavenumbers[0]
        return SpectralMoments(v, k0**2, k0**4)
    if spectrum.variant == "shells":
        k = np.asarray(spectrum.wavenumbers)
        w = np.asarray(spectrum.weights)
        w = w / w.sum()
        return SpectralMoments(v, float(w @ k**2), float(w @ k**4))
    if spectrum.variant == "ball":
        km = spectrum.wavenumbers[0]
        # int k^{2+n} dk / int k^2 dk over [0, km]
        return SpectralMoments(v, 3.0 / 5.0 * km**2, 3.0 / 7.0 * km**4)
    kk, pp = _table_nodes(spectrum)
    norm = np.trapezoid(pp, kk)
    if not norm > 0:
        raise InvalidSpectrumError("zero total spectral weight")
    return SpectralMoments(v, float(np.trapezoid(pp * kk**2, kk) / norm),
                           float(np.trapezoid(pp * kk**4, kk) / norm))


def pair_derivative_moments(m: SpectralMoments) -> DerivativeMoments:
    """Pair averages implied by isotropy.

    Angular averages of ``cos^2``, ``cos^4`` and ``cos^2 sin^2`` products over
    the sphere give the factors 1/3, 1/5 and 1/15.
    """
    fx2 = m.variance * m.k2bar / 3.0
    return DerivativeMoments(
        f2=m.variance,
        fx2=fx2,
        fxx2=m.variance * m.k4bar / 5.0,
        fxxfyy=m.variance * m.k4bar / 15.0,
        ffxx=-fx2,
    )


def sample_wavenumbers(spectrum: SpectrumModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` wavenumber magnitudes from the radial measure (inverse CDF)."""
    u = rng.random(n)
    if spectrum.variant == "mono":
        return np.full(n, spectrum.wavenumbers[0])
    if spectrum.variant == "shells":
        w = np.asarray(spectrum.weights)
        cdf = np.cumsum(w) / w.sum()
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(w) - 1)
        return np.asarray(spectrum.wavenumbers)[idx]
    if spectrum.variant == "ball":
        return spectrum.wavenumbers[0] * np.cbrt(u)
    kk, pp = _table_nodes(spectrum)
    # Piecewise-linear density: invert the piecewise-quadratic CDF per cell.
    seg = 0.5 * (pp[1:] + pp[:-1]) * np.diff(kk)
    cdf = np.concatenate([[0.0], np.cumsum(seg)])
    target = u * cdf[-1]
    i = np.clip(np.searchsorted(cdf, target, side="right") - 1, 0, len(seg) - 1)
    h = kk[i + 1] - kk[i]
    p0 = pp[i]
    slope = (pp[i + 1] - p0) / h
    r = target - cdf[i]
    disc = np.sqrt(np.maximum(p0**2 + 2 * slope * r, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(np.abs(slope) > 1e-14 * np.maximum(p0, 1e-300),
                     (disc - p0) / slope, r / np.where(p0 > 0, p0, 1.0))
    return np.clip(kk[i] + t, kk[i], kk[i + 1])


# -- parsing ---------------------------------------------------------------

def _parse_pairs(text: str):
    ks, ws = [], []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            k, w = item.split(":", 1)
        else:
            k, w = item, "1"
        ks.append(float(k))
        ws.append(float(w))
    return ks, ws


def parse_spectrum(text: str, field_variance: float | None = None):
    """Resolve a preset string or config-file path.

    Presets: ``mono:<k0>``, ``ball:<kmax>``, ``shells:<k1:w1,k2:w2,...>`` and
    ``rho:<rho>[,<k4bar>]``. The last one has no wavenumber content and
    returns :class:`SpectralMoments` directly; every other form returns a
    :class:`SpectrumModel`.

    Config files are JSON (``.json``) or ``key = value`` lines with keys
    ``variant``, ``k0``, ``kmax``, ``shells``, ``table`` (a two-column CSV
    path, relative to the config file) and ``field_variance``.
    """
    v = 1.0 if field_variance is None else float(field_variance)
    head, _, rest = text.partition(":")
    try:
        if head == "mono" and rest:
            return SpectrumModel.mono(float(rest), v)
        if head == "ball" and rest:
            return SpectrumModel.ball(float(rest), v)
        if head == "shells" and rest:
            ks, ws = _parse_pairs(rest)
            return SpectrumModel.shells(ks, ws, v)
        if head == "rho" and rest:
            parts = [float(x) for x in rest.split(",")]
            k4 = parts[1] if len(parts) > 1 else 1.0
            return SpectralMoments.from_rho(parts[0], k4, v)
    except ValueError as exc:
        if isinstance(exc, InvalidSpectrumError):
            raise
        raise InvalidSpectrumError(f"malformed spectrum preset {text!r}") from exc
    path = Path(text)
    if not path.is_file():
        raise InvalidSpectrumError(f"{text!r} is neither a preset nor a spectrum file")
    return _load_config(path, field_variance)


def _load_config(path: Path, field_variance):
    raw = path.read_text()
    if path.suffix == ".json":
        cfg = {str(k): v for k, v in json.loads(raw).items()}
    else:
        cfg = {}
        for line in raw.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidSpectrumError(f"bad config line {line!r} in {path}")
            key, val = line.split("=", 1)
            cfg[key.strip()] = val.strip()
    v = float(cfg.get("field_variance", 1.0)) if field_variance is None else field_variance
    variant = str(cfg.get("variant", "")).strip()
    if variant == "mono":
        return SpectrumModel.mono(float(cfg["k0"]), v)
    if variant == "ball":
        return SpectrumModel.ball(float(cfg["kmax"]), v)
    if variant == "shells":
        val = cfg["shells"]
        if isinstance(val, list):
            ks = [float(p[0]) for p in val]
            ws = [float(p[1]) for p in val]
        else:
            ks, ws = _parse_pairs(str(val))
        return SpectrumModel.shells(ks, ws, v)
    if variant == "table":
        tab = np.loadtxt(path.parent / str(cfg["table"]), delimiter=",", ndmin=2, comments="#")
        return SpectrumModel.table(tab[:, 0], tab[:, 1], v)
    raise InvalidSpectrumError(f"unknown or missing variant in {path}")
