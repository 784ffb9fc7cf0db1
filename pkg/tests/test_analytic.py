import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levelcurv import analytic
from levelcurv.gamma import gamma_set
from levelcurv.spectrum import SpectralMoments


def gs_of(rho, k4=1.0):
    return gamma_set(SpectralMoments.from_rho(rho, k4))


def test_scalar_in_scalar_out_and_shape():
    gs = gs_of(1.0)
    assert isinstance(analytic.pdf_nodal(0.1, gs), float)
    assert analytic.pdf_nodal(np.zeros((3, 2)), gs).shape == (3, 2)


def test_peak_at_zero_for_standard_cases():
    assert analytic.pdf_nodal(0.0, gs_of(1.0)) == pytest.approx(5 * math.sqrt(3), rel=1e-14)
    gs = gs_of(1 / 3)
    A = 2 * gs.a**2 * gs.b * math.sqrt(gs.c) / math.sqrt(gs.b + gs.c)
    assert analytic.pdf_nodal(0.0, gs) == pytest.approx(A / gs.a**3, rel=1e-14)


@pytest.mark.parametrize("rho", [1.0, 0.5, 0.1])
def test_continuous_at_zero_and_nonnegative(rho):
    gs = gs_of(rho)
    eps = 1e-12 / gs.a
    assert analytic.pdf_nodal(eps, gs) == pytest.approx(analytic.pdf_nodal(-eps, gs), rel=1e-5)
    K = analytic.graded_grid(-50 / gs.a, 50 / gs.a, 4001, 1e-2 / gs.a)
    assert np.all(analytic.pdf_nodal(K, gs) >= 0)


@pytest.mark.parametrize("rho", [1.0, 1 / 3, 0.84])
def test_tail_asymptotes(rho):
    gs = gs_of(rho)
    cl, cr = analytic.tail_coefficients(gs)
    big = 1e7 / gs.a
    assert big**3 * analytic.pdf_nodal(-big, gs) == pytest.approx(cl, rel=1e-5)
    assert big**3 * analytic.pdf_nodal(big, gs) == pytest.approx(cr, rel=1e-3)


def test_stable_band_is_seamless():
    gs = gs_of(0.84)
    k0 = gs.a / gs.b
    for side in (-1, 1):
        edge = k0 * (1 + side * analytic.STABLE_BAND)
        inside = edge * (1 - side * 1e-9)
        outside = edge * (1 + side * 1e-9)
        assert analytic.pdf_nodal(inside, gs) == pytest.approx(analytic.pdf_nodal(outside, gs), rel=1e-7)


def test_naive_blows_up_where_stable_does_not():
    gs = gs_of(1.0)
    k0 = gs.a / gs.b
    with np.errstate(all="ignore"):
        naive = analytic.pdf_nodal_naive(k0, gs)
    assert not np.isfinite(naive)
    assert np.isfinite(analytic.pdf_nodal(k0, gs))


@given(st.floats(0.05, 1.0), st.floats(0.2, 5.0), st.floats(-3.0, 3.0))
@settings(max_examples=60, deadline=None)
def test_wavenumber_scaling(rho, s, K):
    # k -> s k maps K -> s^2 K and the density by s^-2.
    m = SpectralMoments.from_rho(rho)
    g1, g2 = gamma_set(m), gamma_set(m.scaled(s))
    assert analytic.pdf_nodal(s * s * K, g2) == pytest.approx(analytic.pdf_nodal(K, g1) / s**2, rel=1e-9)


@pytest.mark.parametrize("rho", [1.0, 0.3])
def test_cdf_and_quantile(rho):
    gs = gs_of(rho)
    A = 2 * gs.a**2 * gs.b * math.sqrt(gs.c) / math.sqrt(gs.b + gs.c)
    assert analytic.cdf_nodal(0.0, gs) == pytest.approx(A / (2 * gs.b * gs.a**2), rel=1e-12)
    for q in (1e-4, 0.1, 0.5, 0.9, 0.9999):
        assert analytic.cdf_nodal(analytic.quantile_nodal(q, gs), gs) == pytest.approx(q, rel=1e-8)
    ks = np.linspace(-3, 2, 11)
    cdf = [analytic.cdf_nodal(k, gs) for k in ks]
    assert np.all(np.diff(cdf) > 0)


def test_mean_closed_form():
    m = SpectralMoments.from_rho(0.25, 4.0)
    assert analytic.mean_nodal(m) == pytest.approx(-m.k2bar / 6)


def test_tabulation():
    m = SpectralMoments.from_rho(0.5)
    dist = analytic.nodal_distribution(m, n_points=1001)
    assert 0.0 in dist.K and len(dist.K) == 1001
    assert dist.normalization() == pytest.approx(1.0, abs=1e-6)
    assert dist.mean() == pytest.approx(-math.sqrt(0.5) / 6, abs=1e-5)
    assert dist.metadata["rho"] == pytest.approx(0.5) and dist.source == "closed-form"
    assert dist.peak()[0] == 0.0
    wide = analytic.tabulate(gamma_set(m), -100.0, 100.0, 1001)
    assert wide.K[0] == -100.0 and wide.K[-1] == 100.0


def test_user_range_is_widened_to_default():
    gs = gs_of(1.0)
    dist = analytic.tabulate(gs, -0.1, 0.1, 501)
    lo, hi = analytic.default_range(gs)
    assert dist.K[0] == pytest.approx(lo) and dist.K[-1] == pytest.approx(hi)


def test_grid_and_distribution_validation():
    with pytest.raises(ValueError):
        analytic.graded_grid(0.5, 1.0, 10, 1.0)
    with pytest.raises(ValueError):
        analytic.CurvatureDistribution(0.0, [0, 1, 1], [1, 1, 1], {}, "x")
    g = analytic.graded_grid(-2.0, 3.0, 201, 0.01)
    assert np.all(np.diff(g) > 0) and 0.0 in g and g[0] == -2.0 and g[-1] == 3.0


def test_truncated_second_moment_grows_logarithmically():
    gs = gs_of(1.0)
    m2a, slope = analytic.truncated_second_moment(gs, 1e3)
    m2b, _ = analytic.truncated_second_moment(gs, 1e4)
    assert m2b - m2a == pytest.approx(slope * math.log(10), rel=1e-12)
    assert slope == pytest.approx(sum(analytic.tail_coefficients(gs)), rel=1e-3)
    with pytest.raises(ValueError):
        analytic.truncated_second_moment(gs, 0.0)
