import math

import numpy as np
import pytest

from levelcurv import analytic, level, sampler
from levelcurv.gamma import gamma_set
from levelcurv.spectrum import SpectralMoments


@pytest.fixture(scope="module")
def gs1():
    return gamma_set(SpectralMoments.from_rho(1.0))


def test_integrand_conjugate_symmetry(gs1):
    g = np.array([0.01, 0.3, 2.0, 40.0])
    a = level.integrand_level(g, 0.2, 0.7, gs1)
    b = level.integrand_level(-g, 0.2, 0.7, gs1)
    np.testing.assert_allclose(a, np.conj(b), rtol=1e-14)


def test_imaginary_part_vanishes(gs1):
    val = level.level_integral(0.15, 1.0, gs1, full_line=True)
    assert abs(val.imag) < 1e-9 * abs(val.real)
    assert val.real == pytest.approx(level.level_integral(0.15, 1.0, gs1).real, rel=1e-9)


def test_calibration_is_unity():
    assert level.calibration_constant() == pytest.approx(1.0, abs=1e-9)


def test_even_in_F(gs1):
    ks = [-0.5, 0.05, 0.4]
    np.testing.assert_allclose(level.pdf_level(ks, 1.3, gs1), level.pdf_level(ks, -1.3, gs1), rtol=1e-12)


@pytest.mark.parametrize("rho", [1.0, 0.3])
def test_reduces_to_nodal(rho):
    gs = gamma_set(SpectralMoments.from_rho(rho))
    ks = np.array([-3.0, -0.2, 0.0, 0.02, gs.a / gs.b, 0.8, 5.0])
    np.testing.assert_allclose(level.pdf_level(ks, 0.0, gs), analytic.pdf_nodal(ks, gs), rtol=1e-8)


@pytest.mark.parametrize("F", [0.5, 2.0])
def test_normalization(F, gs1):
    assert level.level_normalization(F, gs1) == pytest.approx(1.0, abs=1e-6)


def test_tail_coefficients(gs1):
    assert level.level_tail_coefficients(0.0, gs1) == pytest.approx(analytic.tail_coefficients(gs1), rel=1e-12)
    cl, cr = level.level_tail_coefficients(1.2, gs1)
    big = 3e4 / gs1.a
    assert big**3 * level.pdf_level(-big, 1.2, gs1) == pytest.approx(cl, rel=2e-3)
    assert big**3 * level.pdf_level(big, 1.2, gs1) == pytest.approx(cr, rel=2e-3)


def test_high_level_favours_positive_curvature(gs1):
    # Far above the mean the surface wraps local maxima: mean curvature turns positive.
    m = SpectralMoments.from_rho(1.0)
    assert level.mean_level(2.0, m) == pytest.approx(0.5)
    assert level.level_mean_numeric(2.0, gs1) == pytest.approx(0.5, abs=1e-4)


def test_matches_joint_oracle_off_nodal(gs1):
    m = SpectralMoments.from_rho(1.0)
    dist = level.tabulate_level(gs1, 1.0, moments=m)
    assert dist.metadata["F"] == 1.0 and dist.source == "quadrature"
    assert dist.normalization() == pytest.approx(1.0, abs=1e-4)
    edges = np.linspace(-1.5, 1.5, 61)
    hist = sampler.joint_oracle_histogram(m, 1.0, 2_000_000, edges, seed=4)
    rep = sampler.compare(lambda k: level.pdf_level(k, 1.0, gs1), hist, level.mean_level(1.0, m))
    assert rep.tv_distance < 0.01
    assert rep.max_abs_z < 4.5


def test_quadrature_failure_is_reported(gs1, monkeypatch):
    monkeypatch.setattr(level, "_quad", lambda fn, lo, hi, opts: (1.0, 1.0))
    with pytest.raises(level.QuadratureError) as info:
        level.level_integral(0.1, 0.0, gs1)
    assert info.value.estimate is not None and info.value.error is not None


def test_options_validated():
    with pytest.raises(ValueError):
        level.LevelQuadratureOptions(rel_tol=0.0)
    with pytest.raises(ValueError):
        level.LevelQuadratureOptions(max_subdivisions=3)


def test_tabulate_range_validation(gs1):
    with pytest.raises(ValueError):
        level.tabulate_level(gs1, 0.5, 0.1, 1.0)
    assert math.isfinite(float(level.pdf_level(1e-9, 0.5, gs1)))
