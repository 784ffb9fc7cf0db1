"""Fast invariant suite run by ``levelcurv selftest``."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import analytic, level, sampler
from .gamma import closed_form_gammas, gamma_set, branch_identity_residual
from .spectrum import SpectralMoments, SpectrumModel, moments
from .wavefield import eval_jet, gaussian_curvature, synthesize


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float


def _peak():
    gs = gamma_set(SpectralMoments.from_rho(1.0))
    val = float(analytic.pdf_nodal(0.0, gs))
    return abs(val - 5 * math.sqrt(3)) < 1e-9, f"P(0) = {val:.15g}"


def _mono_moments():
    m = moments(SpectrumModel.mono(2.0))
    ok = abs(m.k2bar - 4) < 1e-14 and abs(m.k4bar - 16) < 1e-13 and abs(m.rho - 1) < 1e-14
    return ok, f"k2bar={m.k2bar}, k4bar={m.k4bar}"


def _identity():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(20):
        n = rng.integers(1, 5)
        spec = SpectrumModel.shells(rng.uniform(0.2, 3.0, n), rng.uniform(0.1, 1.0, n))
        worst = max(worst, branch_identity_residual(gamma_set(moments(spec))))
    return worst < 1e-12, f"max residual {worst:.2e}"


def _closed_forms():
    worst = 0.0
    for rho in (1.0, 0.5, 0.2):
        m = SpectralMoments.from_rho(rho)
        gs, cf = gamma_set(m), closed_form_gammas(m)
        for key, got in (("Gammazz", gs.Gammazz), ("Gammaxxxx", gs.Gxxxx),
                         ("Gammaxxyy", gs.Gxxyy), ("Gamma0xx", gs.Gamma0xx)):
            worst = max(worst, abs(got - cf[key]) / abs(cf[key]))
    return worst < 1e-12, f"max relative deviation {worst:.2e}"


def _normalization_mean():
    worst_n = worst_m = 0.0
    for rho in (1.0, 1 / 3, 1 / 9):
        gs = gamma_set(SpectralMoments.from_rho(rho))
        worst_n = max(worst_n, abs(analytic.nodal_normalization(gs) - 1))
        worst_m = max(worst_m, abs(analytic.nodal_mean_numeric(gs) + math.sqrt(rho) / 6))
    return worst_n < 1e-6 and worst_m < 1e-6, f"norm err {worst_n:.1e}, mean err {worst_m:.1e}"


def _singularity():
    gs = gamma_set(SpectralMoments.from_rho(1.0))
    k0 = gs.a / gs.b
    centre = float(analytic.pdf_nodal(k0, gs))
    # Just outside the band the naive sum is accurate to ~1e-8 and can be
    # checked against the contour evaluation used inside it.
    off = 2 * analytic.STABLE_BAND
    lo, hi = k0 * (1 - off), k0 * (1 + off)
    dev = max(abs(float(analytic._contour(k, gs)) / float(analytic.pdf_nodal_naive(k, gs)) - 1)
              for k in (lo, hi))
    smooth = abs(0.5 * (float(analytic.pdf_nodal(lo, gs)) + float(analytic.pdf_nodal(hi, gs)))
                 / centre - 1)
    return math.isfinite(centre) and dev < 1e-8 and smooth < 1e-2, \
        f"P(a/b) = {centre:.6g}, naive deviation {dev:.1e}"


def _level_consistency():
    gs = gamma_set(SpectralMoments.from_rho(1.0))
    ks = np.array([-2.0, -0.4, -0.05, 0.03, 0.1, 0.25, 1.0])
    ratio = level.pdf_level(ks, 0.0, gs) / analytic.pdf_nodal(ks, gs)
    worst = float(np.max(np.abs(ratio - 1)))
    return worst < 1e-6, f"max relative deviation {worst:.1e}"


def _level_mean():
    m = SpectralMoments.from_rho(1.0)
    gs = gamma_set(m)
    got = level.level_mean_numeric(1.0, gs)
    want = level.mean_level(1.0, m)
    return abs(got - want) < 1e-4 * m.k2bar, f"mean at F=1: {got:.8f} (expected {want:.8f})"


def _oracle():
    m = SpectralMoments.from_rho(1.0)
    dist = analytic.nodal_distribution(m)
    edges = sampler.central_edges(dist, n_bins=50)
    hist = sampler.joint_oracle_histogram(m, 0.0, 200_000, edges, seed=1)
    rep = sampler.compare(dist, hist)
    return rep.tv_distance < 0.02 and rep.max_abs_z < 5, \
        f"TV {rep.tv_distance:.4f}, max |z| {rep.max_abs_z:.2f}"


def _adjugate_curvature():
    # Sphere r = 1 as the level set of |x|^2: K = 1.
    from .wavefield import FieldJet2
    x = np.array([0.6, 0.0, 0.8])
    K = float(gaussian_curvature(FieldJet2(1.0, 2 * x, 2 * np.eye(3))))
    return abs(K - 1) < 1e-14, f"sphere K = {K!r}"


def _field_determinism():
    spec = SpectrumModel.mono(1.0)
    f1, f2 = synthesize(spec, 64, 5), synthesize(spec, 64, 5)
    pts = np.random.default_rng(0).uniform(-5, 5, (10, 3))
    same = np.array_equal(eval_jet(f1, pts).hessian, eval_jet(f2, pts).hessian)
    return same, "bit-identical regeneration" if same else "fields differ"


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("spectrum: monochromatic moments", _mono_moments),
    ("gamma: closed forms", _closed_forms),
    ("gamma: branch-point identity", _identity),
    ("analytic_pdf: peak height", _peak),
    ("analytic_pdf: normalization and mean", _normalization_mean),
    ("analytic_pdf: removable singularity", _singularity),
    ("level_pdf: F = 0 reduces to nodal", _level_consistency),
    ("level_pdf: mean at F = 1", _level_mean),
    ("wavefield: curvature of a sphere", _adjugate_curvature),
    ("wavefield: seeded regeneration", _field_determinism),
    ("sampler: joint oracle vs closed form", _oracle),
]


def run_selftest() -> list[CheckResult]:
    results = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results
