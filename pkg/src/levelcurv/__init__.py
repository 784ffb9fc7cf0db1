"""Gaussian curvature statistics of level surfaces of isotropic Gaussian random fields."""

__version__ = "0.1.0"

from .spectrum import (  # noqa: E402
    InvalidSpectrumError,
    SpectralMoments,
    SpectrumModel,
    moments,
    parse_spectrum,
)
from .gamma import DegenerateMomentsError, GammaSet, gamma_set  # noqa: E402
from .analytic import CurvatureDistribution, pdf_nodal, tabulate  # noqa: E402
from .level import QuadratureError, pdf_level, tabulate_level  # noqa: E402
from .wavefield import NearCriticalPointError, WaveField, synthesize  # noqa: E402

__all__ = [
    "__version__",
    "InvalidSpectrumError",
    "SpectralMoments",
    "SpectrumModel",
    "moments",
    "parse_spectrum",
    "DegenerateMomentsError",
    "GammaSet",
    "gamma_set",
    "CurvatureDistribution",
    "pdf_nodal",
    "tabulate",
    "QuadratureError",
    "pdf_level",
    "tabulate_level",
    "NearCriticalPointError",
    "WaveField",
    "synthesize",
]
