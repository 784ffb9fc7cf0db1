"""scikit-learn style density estimator over Gaussian curvature values.

The curvature law has no parameters beyond the spectrum, so ``fit`` either
resolves a given spectrum or, with ``estimate="mle"``, fits the spectral
moments ``(rho, k4bar)`` to observed nodal-surface curvatures.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize
from sklearn.base import BaseEstimator, DensityMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from . import analytic, level, sampler
from .gamma import gamma_set
from .spectrum import SpectralMoments, SpectrumModel, moments, parse_spectrum


class CurvatureDensity(DensityMixin, BaseEstimator):
    """Density of Gaussian curvature on the level surface ``f = level``.

    Parameters
    ----------
    spectrum : str, SpectrumModel or SpectralMoments, default="mono:1"
        Preset string or config path as accepted by :func:`parse_spectrum`.
    level : float, default=0.0
    variance : float or None
        Overrides the field variance of ``spectrum``.
    estimate : {None, "mle"}, default=None
        ``"mle"`` fits ``rho`` and ``k4bar`` to the samples passed to
        :meth:`fit` (nodal surface only); ``spectrum`` is then the start point.
    n_points : int, default=2001
        Size of the tabulation stored in ``distribution_``.

    Attributes
    ----------
    moments_ : SpectralMoments
    gamma_ : GammaSet
    distribution_ : CurvatureDistribution
    mean_ : float
    """

    def __init__(self, spectrum="mono:1", level=0.0, variance=None, estimate=None,
                 n_points=2001):
        self.spectrum = spectrum
        self.level = level
        self.variance = variance
        self.estimate = estimate
        self.n_points = n_points

    def _resolve(self) -> SpectralMoments:
        spec = self.spectrum
        if isinstance(spec, str):
            spec = parse_spectrum(spec, self.variance)
        elif isinstance(spec, SpectrumModel) and self.variance is not None:
            spec = SpectrumModel(spec.variant, spec.wavenumbers, spec.weights, self.variance)
        if isinstance(spec, SpectrumModel):
            return moments(spec)
        if isinstance(spec, SpectralMoments):
            if self.variance is not None:
                return SpectralMoments(float(self.variance), spec.k2bar, spec.k4bar)
            return spec
        raise TypeError(f"unsupported spectrum type {type(spec).__name__}")

    def fit(self, X=None, y=None, sample_weight=None):
        """Resolve the spectrum, or fit it by maximum likelihood when ``estimate="mle"``."""
        m = self._resolve()
        if X is not None:
            X = check_array(X, ensure_2d=True, dtype=float)
            if X.shape[1] != 1:
                raise ValueError(f"expected one feature (K), got {X.shape[1]}")
            self.n_features_in_ = 1
        if self.estimate == "mle":
            if X is None:
                raise ValueError('estimate="mle" needs curvature samples')
            if self.level != 0:
                raise ValueError("maximum-likelihood fitting is implemented for the nodal surface")
            m = self._mle(X[:, 0], m, sample_weight)
        elif self.estimate is not None:
            raise ValueError(f"unknown estimate {self.estimate!r}")
        self.moments_ = m
        self.gamma_ = gamma_set(m)
        if self.level == 0:
            self.distribution_ = analytic.tabulate(self.gamma_, n_points=self.n_points, moments=m)
            self.mean_ = analytic.mean_nodal(m)
        else:
            self.distribution_ = level.tabulate_level(self.gamma_, float(self.level),
                                                      n_points=min(self.n_points, 401), moments=m)
            self.mean_ = level.mean_level(float(self.level), m)
        return self

    @staticmethod
    def _mle(K, start: SpectralMoments, sample_weight):
        w = np.ones_like(K) if sample_weight is None else np.asarray(sample_weight, dtype=float)

        def nll(theta):
            rho = 1.0 / (1.0 + math.exp(-theta[0]))
            m = SpectralMoments.from_rho(rho, math.exp(theta[1]), start.variance)
            p = analytic.pdf_nodal(K, gamma_set(m))
            return -float(np.dot(w, np.log(np.maximum(p, 1e-300)))) / w.sum()

        r0 = min(start.rho, 1 - 1e-3)
        x0 = [math.log(r0 / (1 - r0)), math.log(start.k4bar)]
        res = optimize.minimize(nll, x0, method="Nelder-Mead",
                                options={"xatol": 1e-6, "fatol": 1e-10, "maxiter": 2000})
        rho = 1.0 / (1.0 + math.exp(-res.x[0]))
        return SpectralMoments.from_rho(rho, math.exp(res.x[1]), start.variance)

    def _density(self, K):
        if self.level == 0:
            return analytic.pdf_nodal(K, self.gamma_)
        return level.pdf_level(K, float(self.level), self.gamma_)

    def score_samples(self, X):
        """Log density of each curvature value in ``X`` (shape ``(n, 1)``)."""
        check_is_fitted(self, "gamma_")
        X = check_array(X, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(self._density(X[:, 0]))

    def score(self, X, y=None):
        """Total log-likelihood of ``X``."""
        return float(np.sum(self.score_samples(X)))

    def sample(self, n_samples=1, random_state=None):
        """Draw curvatures from the joint-Gaussian oracle by weighted resampling."""
        check_is_fitted(self, "gamma_")
        rng = check_random_state(random_state)
        seed = int(rng.randint(0, 2**31 - 1))
        pool = max(4 * n_samples, 1024)
        samples = sampler.joint_oracle_samples(self.moments_, float(self.level), pool, seed, workers=1)
        p = samples.weights / samples.weights.sum()
        idx = rng.choice(len(p), size=n_samples, p=p)
        return samples.K[idx][:, None]
