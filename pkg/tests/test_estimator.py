import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from levelcurv.estimator import CurvatureDensity
from levelcurv.spectrum import SpectralMoments, SpectrumModel


def test_params_roundtrip_and_clone():
    est = CurvatureDensity(spectrum="ball:2", level=0.5, n_points=301)
    params = est.get_params()
    assert params["spectrum"] == "ball:2" and params["level"] == 0.5
    c = clone(est)
    assert c.get_params() == params and not hasattr(c, "gamma_")


def test_not_fitted():
    with pytest.raises(NotFittedError):
        CurvatureDensity().score_samples([[0.0]])


def test_fit_and_score_nodal():
    est = CurvatureDensity("mono:1").fit()
    assert est.mean_ == pytest.approx(-1 / 6)
    ll = est.score_samples(np.array([[0.0], [-1.0]]))
    assert np.exp(ll[0]) == pytest.approx(5 * np.sqrt(3))
    assert est.score([[0.0], [-1.0]]) == pytest.approx(ll.sum())
    assert est.distribution_.normalization() == pytest.approx(1.0, abs=1e-6)


def test_accepts_model_objects_and_variance_override():
    e1 = CurvatureDensity(SpectrumModel.mono(2.0), variance=3.0).fit()
    assert e1.moments_.variance == 3.0 and e1.moments_.k2bar == 4.0
    e2 = CurvatureDensity(SpectralMoments.from_rho(0.5)).fit()
    assert e2.moments_.rho == pytest.approx(0.5)
    with pytest.raises(TypeError):
        CurvatureDensity(spectrum=3.0).fit()


def test_level_surface_density():
    est = CurvatureDensity("mono:1", level=1.0, n_points=101).fit()
    assert est.mean_ == pytest.approx(0.0)
    assert np.all(np.isfinite(est.score_samples([[0.1], [-0.3]])))


def test_sample_is_seeded():
    est = CurvatureDensity("rho:0.5").fit()
    a = est.sample(500, random_state=1)
    b = est.sample(500, random_state=1)
    assert a.shape == (500, 1) and np.array_equal(a, b)


def test_mle_recovers_moments():
    truth = CurvatureDensity("rho:0.4,2").fit()
    X = truth.sample(20_000, random_state=0)
    est = CurvatureDensity("rho:0.9", estimate="mle").fit(X)
    assert est.moments_.rho == pytest.approx(0.4, abs=0.04)
    assert est.moments_.k4bar == pytest.approx(2.0, rel=0.1)
    assert est.n_features_in_ == 1


def test_fit_input_validation():
    with pytest.raises(ValueError):
        CurvatureDensity(estimate="mle").fit()
    with pytest.raises(ValueError):
        CurvatureDensity().fit(np.zeros((4, 2)))
    with pytest.raises(ValueError):
        CurvatureDensity(estimate="bayes").fit([[0.0]])
    with pytest.raises(ValueError):
        CurvatureDensity(level=1.0, estimate="mle").fit([[0.0], [0.1]])
