import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

from levelcurv.spectrum import SpectrumModel, moments
from levelcurv.wavefield import (FieldJet2, NearCriticalPointError, WaveField, eval_jet, eval_value,
                                 field_from_description, gaussian_curvature, gradient_threshold,
                                 synthesize)


def test_jet_matches_finite_differences():
    fld = synthesize(SpectrumModel.ball(2.0), 40, seed=1)
    x = np.array([0.3, -1.1, 0.7])
    jet = eval_jet(fld, x)
    h = 1e-5
    eye = np.eye(3)
    grad_fd = np.array([(eval_value(fld, x + h * e) - eval_value(fld, x - h * e))[0] / (2 * h) for e in eye])
    np.testing.assert_allclose(jet.gradient, grad_fd, rtol=1e-7, atol=1e-9)
    hess_fd = np.array([[(eval_jet(fld, x + h * e).gradient[j] - eval_jet(fld, x - h * e).gradient[j]) / (2 * h)
                         for j in range(3)] for e in eye])
    np.testing.assert_allclose(jet.hessian, hess_fd, rtol=1e-6, atol=1e-8)
    assert jet.value == pytest.approx(eval_value(fld, x)[0])


def test_batched_jet_shapes():
    fld = synthesize(SpectrumModel.mono(1.0), 16, seed=2)
    jet = eval_jet(fld, np.zeros((5, 3)))
    assert jet.value.shape == (5,) and jet.gradient.shape == (5, 3) and jet.hessian.shape == (5, 3, 3)


@pytest.mark.parametrize("R,expected", [(1.0, 1.0), (2.0, 0.25)])
def test_sphere_curvature(R, expected):
    x = np.array([0.0, R, 0.0])
    # f = |x|^2, level R^2
    K = gaussian_curvature(FieldJet2(R * R, 2 * x, 2 * np.eye(3)))
    assert K == pytest.approx(expected, rel=1e-14)


def test_cylinder_and_saddle():
    x = np.array([1.0, 0.0, 5.0])
    assert gaussian_curvature(FieldJet2(1.0, 2 * x * [1, 1, 0], np.diag([2.0, 2.0, 0.0]))) == 0.0
    # z = x y near the origin: K = -1
    K = gaussian_curvature(FieldJet2(0.0, np.array([0.0, 0.0, -1.0]),
                                     np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], float)))
    assert K == pytest.approx(-1.0)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_curvature_is_rotation_and_sign_invariant(seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=3)
    A = rng.normal(size=(3, 3))
    H = A + A.T
    R = Rotation.random(random_state=seed).as_matrix()
    K = gaussian_curvature(FieldJet2(0.0, g, H))
    assert gaussian_curvature(FieldJet2(0.0, R @ g, R @ H @ R.T)) == pytest.approx(K, rel=1e-9, abs=1e-12)
    assert gaussian_curvature(FieldJet2(0.0, -g, -H)) == pytest.approx(K, rel=1e-12, abs=1e-14)


def test_near_critical_point_raises():
    with pytest.raises(NearCriticalPointError):
        gaussian_curvature(FieldJet2(0.0, np.zeros(3), np.eye(3)))
    with pytest.raises(NearCriticalPointError):
        gaussian_curvature(FieldJet2(0.0, np.array([1e-9, 0, 0]), np.eye(3)), threshold=1e-6)
    assert gradient_threshold(SpectrumModel.mono(2.0)) == pytest.approx(2e-12)


def test_seeded_regeneration_from_description():
    spec = SpectrumModel.shells([1.0, 2.0], [1.0, 2.0], 1.5)
    fld = synthesize(spec, 64, seed=99)
    desc = json.loads(json.dumps(fld.describe()))
    again = field_from_description(desc)
    assert np.array_equal(again.wavevectors, fld.wavevectors)
    assert np.array_equal(again.phases, fld.phases)
    assert again.amplitude == fld.amplitude
    assert synthesize(spec, 64, seed=100).phases[0] != fld.phases[0]


def test_ensemble_statistics():
    spec = SpectrumModel.mono(1.0, field_variance=2.0)
    m = moments(spec)
    vals, grads = [], []
    for s in range(200):
        fld = synthesize(spec, 64, seed=s)
        jet = eval_jet(fld, np.zeros(3))
        vals.append(jet.value)
        grads.append(jet.gradient)
    vals, grads = np.array(vals), np.array(grads)
    assert np.var(vals) == pytest.approx(m.variance, rel=0.25)
    assert np.mean(grads**2) == pytest.approx(m.variance * m.k2bar / 3, rel=0.25)


def test_wavevector_magnitudes_follow_spectrum():
    fld = synthesize(SpectrumModel.mono(3.0), 128, seed=0)
    np.testing.assert_allclose(np.linalg.norm(fld.wavevectors, axis=1), 3.0)
    assert fld.n_waves == 128 and fld.k_max == pytest.approx(3.0)
    assert isinstance(fld, WaveField)
    with pytest.raises(ValueError):
        synthesize(SpectrumModel.mono(1.0), 0)
