"""Weighted Monte Carlo curvature samples and their comparison to densities.

Two independent sources are provided:

* :func:`sample_level_crossings` finds where random axis-parallel lines
  pierce a level surface of a synthesized :class:`WaveField`. A line family
  along axis ``i`` pierces a surface element at rate ``|n_i|``; with the
  axis drawn uniformly the combined rate is ``sum_i |n_i| / 3``, so the
  weight ``|grad f| / sum_i |f_i|`` makes the self-normalized estimator
  uniform in surface area. The weight lies in ``[1/sqrt(3), 1]``.
* :func:`joint_oracle_samples` draws the point statistics directly from
  their joint Gaussian law at a surface point with normal along ``z``;
  ``|f_z|^3`` is the importance weight that turns a fixed-frame average
  into an area average.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import CurvatureDistribution
from .spectrum import SpectralMoments, SpectrumModel, moments, pair_derivative_moments
from .wavefield import FieldJet2, WaveField, eval_jet, gaussian_curvature, synthesize

__all__ = [
    "WeightedSamples",
    "SurfaceSamples",
    "WeightedHistogram",
    "CompareReport",
    "sample_level_crossings",
    "field_monte_carlo",
    "joint_oracle_samples",
    "joint_oracle_histogram",
    "oracle_conditional_law",
    "empirical_distribution",
    "central_edges",
    "bin_probabilities",
    "compare",
    "default_workers",
]

ORACLE_CHUNK = 1 << 20
MIN_WEIGHT = 1.0 / math.sqrt(3.0)
LINE_GROUPS = 16


def default_workers() -> int:
    """Worker count from ``LEVELCURV_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("LEVELCURV_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items, workers):
    # Results come back in submission order whatever the worker count.
    workers = default_workers() if workers is None else workers
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _child_seeds(seed, n):
    return [int(s.generate_state(1, np.uint64)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass
class WeightedSamples:
    K: np.ndarray
    weights: np.ndarray
    batch: np.ndarray | None = None

    def __len__(self):
        return len(self.K)

    def mean(self) -> float:
        return float(np.sum(self.weights * self.K) / np.sum(self.weights))

    def mean_stderr(self) -> float:
        """Delta-method standard error, treating samples as independent."""
        w, K = self.weights, self.K
        m = self.mean()
        return float(math.sqrt(np.sum(w * w * (K - m) ** 2)) / np.sum(w))

    def batch_mean_stderr(self) -> float:
        """Standard error from the spread of per-batch weighted means."""
        if self.batch is None:
            raise ValueError("samples carry no batch labels")
        labels = np.unique(self.batch)
        if len(labels) < 2:
            raise ValueError("need at least two batches")
        W = np.array([self.weights[self.batch == b].sum() for b in labels])
        S = np.array([(self.weights * self.K)[self.batch == b].sum() for b in labels])
        m = S.sum() / W.sum()
        n = len(labels)
        # Ratio-estimator variance across batches.
        var = n / (n - 1) * np.sum((S - m * W) ** 2) / W.sum() ** 2
        return float(math.sqrt(var))

    def effective_sample_size(self) -> float:
        w = self.weights
        return float(w.sum() ** 2 / np.sum(w * w))


@dataclass
class SurfaceSamples(WeightedSamples):
    """Level-crossing samples with their jets; one row per crossing."""

    positions: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    values: np.ndarray = field(default_factory=lambda: np.empty(0))
    gradients: np.ndarray = field(default_factory=lambda: np.empty((0, 3)))
    hessians: np.ndarray = field(default_factory=lambda: np.empty((0, 3, 3)))
    diagnostics: dict = field(default_factory=dict)


def _empty_surface(diag):
    return SurfaceSamples(np.empty(0), np.empty(0), np.empty(0, dtype=int), diagnostics=diag)


def _line_jet(base, kax, t, amp, F):
    """``f - F`` and its derivative along lines; base, kax: (L, N), t: (M,)."""
    ph = base[:, None, :] + t[None, :, None] * kax[:, None, :]
    g = amp * np.cos(ph).sum(-1) - F
    gp = -amp * np.einsum("lmn,ln->lm", np.sin(ph), kax)
    return g, gp


def _extrema(field, origins, axes, line, lo, hi, sign, F, batch):
    """Locate the extremum of ``f`` along each line segment by bisection on the slope."""
    kv, amp = field.wavevectors, field.amplitude
    tstar = np.empty(len(line))
    gstar = np.empty(len(line))
    for start in range(0, len(line), batch):
        sl = slice(start, start + batch)
        li = line[sl]
        base = origins[li] @ kv.T + field.phases
        kax = kv[:, axes[li]].T
        a, b, sg = lo[sl].copy(), hi[sl].copy(), sign[sl]
        for _ in range(40):
            mid = 0.5 * (a + b)
            slope = -amp * (np.sin(base + mid[:, None] * kax) * kax).sum(-1)
            before = sg * slope < 0
            a = np.where(before, mid, a)
            b = np.where(before, b, mid)
        tstar[sl] = 0.5 * (a + b)
        gstar[sl] = amp * np.cos(base + tstar[sl][:, None] * kax).sum(-1) - F
    return tstar, gstar


def sample_level_crossings(field: WaveField, F: float, box: float, n_lines: int, seed=None,
                           step_fraction: float = 1.0 / 6.0, threshold: float | None = None,
                           line_batch: int = 256, root_batch: int = 4096) -> SurfaceSamples:
    """Crossings of ``f = F`` along random axis-parallel lines in ``[0, box]^3``.

    Each line picks an axis uniformly and a uniform point on the
    perpendicular face. Roots are bracketed by marching with step
    ``step_fraction * 2 pi / k_max``, bisected to ``1e-12`` of a step and
    polished by one Newton step. A step without a sign change whose slope
    turns back toward zero is split at the extremum, so close root pairs on
    grazing lines are not lost. Batch labels group contiguous lines.
    """
    if n_lines < 1:
        raise ValueError("n_lines must be >= 1")
    if not box > 0:
        raise ValueError("box must be positive")
    spec = field.spectrum
    if spec is not None:
        m = moments(spec)
        corr = 2 * math.pi / math.sqrt(m.k2bar)
        if box < 4 * corr:
            warnings.warn(f"box {box:.3g} is smaller than 4 correlation lengths ({4 * corr:.3g})",
                          stacklevel=2)
        if threshold is None:
            threshold = 1e-12 * math.sqrt(m.k2bar * m.variance)
    threshold = 0.0 if threshold is None else threshold

    rng = np.random.default_rng(seed)
    axes = rng.integers(0, 3, n_lines)
    origins = rng.uniform(0.0, box, (n_lines, 3))
    origins[np.arange(n_lines), axes] = 0.0

    step = step_fraction * 2 * math.pi / field.k_max
    n_steps = max(1, int(math.ceil(box / step)))
    t = np.linspace(0.0, box, n_steps + 1)
    h = t[1] - t[0]
    kv, amp = field.wavevectors, field.amplitude

    br_line, br_lo, br_hi = [], [], []
    ext_line, ext_lo, ext_hi, ext_sign = [], [], [], []
    for start in range(0, n_lines, line_batch):
        sl = slice(start, min(start + line_batch, n_lines))
        base = origins[sl] @ kv.T + field.phases
        kax = kv[:, axes[sl]].T
        g, gp = _line_jet(base, kax, t, amp, F)
        pos = g >= 0
        li, ti = np.nonzero(pos[:, 1:] != pos[:, :-1])
        br_line.append(li + start)
        br_lo.append(t[ti])
        br_hi.append(t[ti + 1])
        # No sign change, but the slope turns back toward zero inside the
        # step: a grazing line may cross twice between grid points.
        sgn = np.where(pos[:, :-1], 1.0, -1.0)
        turn = (pos[:, 1:] == pos[:, :-1]) & (sgn * gp[:, :-1] < 0) & (sgn * gp[:, 1:] > 0)
        li, ti = np.nonzero(turn)
        ext_line.append(li + start)
        ext_lo.append(t[ti])
        ext_hi.append(t[ti + 1])
        ext_sign.append(sgn[li, ti])
    br_line, br_lo, br_hi = map(np.concatenate, (br_line, br_lo, br_hi))
    ext_line, ext_lo, ext_hi, ext_sign = map(np.concatenate, (ext_line, ext_lo, ext_hi, ext_sign))
    split = 0
    if len(ext_line):
        tstar, gstar = _extrema(field, origins, axes, ext_line, ext_lo, ext_hi, ext_sign, F,
                                root_batch)
        crossed = np.sign(gstar) != ext_sign
        split = int(np.count_nonzero(crossed))
        li, lo, hi, ts = ext_line[crossed], ext_lo[crossed], ext_hi[crossed], tstar[crossed]
        br_line = np.concatenate([br_line, li, li])
        br_lo = np.concatenate([br_lo, lo, ts])
        br_hi = np.concatenate([br_hi, ts, hi])
    diag = {"n_lines": int(n_lines), "box": float(box), "step": float(h),
            "brackets": int(len(br_line)), "split_pairs": split,
            "threshold": float(threshold), "rejected": 0}
    if len(br_line) == 0:
        diag["note"] = "no crossings found"
        return _empty_surface(diag)
    order = np.lexsort((br_lo, br_line))
    br_line, br_lo, br_hi = br_line[order], br_lo[order], br_hi[order]

    roots = np.empty(len(br_line))
    for start in range(0, len(br_line), root_batch):
        sl = slice(start, start + root_batch)
        li = br_line[sl]
        base = origins[li] @ kv.T + field.phases
        kax = kv[:, axes[li]].T
        lo = br_lo[sl].copy()
        hi = br_hi[sl].copy()

        def fval(x):
            return amp * np.cos(base + x[:, None] * kax).sum(-1) - F

        glo = fval(lo)
        while True:
            mid = 0.5 * (lo + hi)
            gm = fval(mid)
            same = (gm >= 0) == (glo >= 0)
            lo = np.where(same, mid, lo)
            glo = np.where(same, gm, glo)
            hi = np.where(same, hi, mid)
            if np.all(hi - lo <= 1e-12 * h):
                break
        x = 0.5 * (lo + hi)
        gx = fval(x)
        dg = -amp * (np.sin(base + x[:, None] * kax) * kax).sum(-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - gx / dg
        ok = np.isfinite(xn) & (np.abs(xn - x) <= 1e-6 * h)
        roots[sl] = np.where(ok, xn, x)

    positions = origins[br_line].copy()
    positions[np.arange(len(br_line)), axes[br_line]] = roots
    jet = eval_jet(field, positions)
    gnorm = np.linalg.norm(jet.gradient, axis=1)
    keep = gnorm > threshold
    diag["rejected"] = int(np.count_nonzero(~keep))
    positions = positions[keep]
    value, grad, hess = jet.value[keep], jet.gradient[keep], jet.hessian[keep]
    K = gaussian_curvature(FieldJet2(value, grad, hess))
    w = gnorm[keep] / np.abs(grad).sum(axis=1)
    # Contiguous groups of lines serve as batches for a batch-means error.
    groups = min(LINE_GROUPS, n_lines)
    batch = (br_line[keep] * groups) // n_lines
    return SurfaceSamples(K, w, batch, positions, value, grad, hess, diag)


def field_monte_carlo(spectrum: SpectrumModel, n_waves: int, F: float, box: float,
                      n_lines: int, seed=None, n_fields: int = 1, workers: int | None = None,
                      step_fraction: float = 1.0 / 6.0) -> SurfaceSamples:
    """Level-crossing samples pooled over ``n_fields`` independent fields.

    ``n_lines`` lines are cast through each field. Field ``i`` and its line
    stream take seeds from child ``i`` of ``SeedSequence(seed)``, so the
    result does not depend on ``workers``. The batch label is the field index.
    """
    seeds = _child_seeds(seed, 2 * n_fields)

    def run(i):
        fld = synthesize(spectrum, n_waves, seeds[2 * i])
        out = sample_level_crossings(fld, F, box, n_lines, seeds[2 * i + 1],
                                     step_fraction=step_fraction)
        out.batch = np.full(len(out.K), i)
        return out

    parts = _map(run, range(n_fields), workers)
    diag = {"n_fields": n_fields, "n_waves": n_waves, "field_seeds": seeds[0::2],
            "line_seeds": seeds[1::2], "box": float(box), "n_lines_per_field": n_lines,
            "rejected": sum(p.diagnostics.get("rejected", 0) for p in parts),
            "brackets": sum(p.diagnostics.get("brackets", 0) for p in parts)}
    return SurfaceSamples(
        np.concatenate([p.K for p in parts]),
        np.concatenate([p.weights for p in parts]),
        np.concatenate([p.batch for p in parts]),
        np.concatenate([p.positions for p in parts]),
        np.concatenate([p.values for p in parts]),
        np.concatenate([p.gradients for p in parts]),
        np.concatenate([p.hessians for p in parts]),
        diag,
    )


def missed_root_audit(field: WaveField, F: float, box: float, n_lines: int, seed=None) -> float:
    """Fractional excess of crossings found with half the marching step."""
    base = sample_level_crossings(field, F, box, n_lines, seed)
    fine = sample_level_crossings(field, F, box, n_lines, seed, step_fraction=1.0 / 12.0)
    nb, nf = base.diagnostics["brackets"], fine.diagnostics["brackets"]
    return (nf - nb) / max(nf, 1)


# -- joint Gaussian oracle ---------------------------------------------------

@dataclass(frozen=True)
class OracleLaw:
    sigma_z: float
    sigma_xy: float
    mean_xx: float
    cov: np.ndarray


def oracle_conditional_law(m: SpectralMoments, F: float) -> OracleLaw:
    """Law of ``(f_z, f_xy, f_xx, f_yy)`` given ``f = F``.

    Built directly from the pair moments by Gaussian conditioning, without
    the inverse-moment path used by the analytic densities.
    """
    d = pair_derivative_moments(m)
    cov = np.array([[d.fxx2, d.fxxfyy], [d.fxxfyy, d.fxx2]]) - d.ffxx**2 / d.f2
    return OracleLaw(math.sqrt(d.fx2), math.sqrt(d.fxy2), d.ffxx / d.f2 * F, cov)


def _oracle_chunk(law: OracleLaw, n: int, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((4, n))
    fz = law.sigma_z * z[0]
    fxy = law.sigma_xy * z[1]
    L = np.linalg.cholesky(law.cov)
    fxx = law.mean_xx + L[0, 0] * z[2]
    fyy = law.mean_xx + L[1, 0] * z[2] + L[1, 1] * z[3]
    ok = np.abs(fz) > 1e-300
    fz, fxy, fxx, fyy = fz[ok], fxy[ok], fxx[ok], fyy[ok]
    K = (fxx * fyy - fxy * fxy) / (fz * fz)
    return K, np.abs(fz) ** 3


def _chunks(n):
    sizes = [ORACLE_CHUNK] * (n // ORACLE_CHUNK)
    if n % ORACLE_CHUNK:
        sizes.append(n % ORACLE_CHUNK)
    return sizes


def joint_oracle_samples(m: SpectralMoments, F: float, n: int, seed=None,
                         workers: int | None = None) -> WeightedSamples:
    """Weighted curvature samples from the joint Gaussian law.

    ``K = (f_xx f_yy - f_xy^2) / f_z^2`` with weight ``|f_z|^3``. Samples
    are drawn in fixed chunks with seeds spawned from ``seed``, so output is
    identical for every worker count.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    law = oracle_conditional_law(m, F)
    sizes = _chunks(n)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    parts = _map(lambda i: _oracle_chunk(law, sizes[i], seeds[i]), range(len(sizes)), workers)
    K = np.concatenate([p[0] for p in parts])
    w = np.concatenate([p[1] for p in parts])
    batch = np.concatenate([np.full(len(p[0]), i) for i, p in enumerate(parts)])
    return WeightedSamples(K, w, batch)


def joint_oracle_histogram(m: SpectralMoments, F: float, n: int, edges, seed=None,
                           workers: int | None = None) -> "WeightedHistogram":
    """Streamed version of :func:`joint_oracle_samples` binned on ``edges``."""
    law = oracle_conditional_law(m, F)
    sizes = _chunks(n)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(i):
        K, w = _oracle_chunk(law, sizes[i], seeds[i])
        return empirical_distribution(WeightedSamples(K, w), edges)

    hists = _map(run, range(len(sizes)), workers)
    out = hists[0]
    for h in hists[1:]:
        out = out + h
    return out


# -- histograms --------------------------------------------------------------

@dataclass
class WeightedHistogram:
    """Self-normalized weighted histogram with delta-method errors.

    Sums are kept rather than ratios so histograms from independent chunks
    can be added exactly.
    """

    edges: np.ndarray
    weight: np.ndarray          # sum of w per bin
    weight_sq: np.ndarray       # sum of w^2 per bin
    total_weight: float         # including samples outside the edges
    total_weight_sq: float
    n_raw: int
    sum_wk: float = 0.0
    sum_w2k: float = 0.0
    sum_w2k2: float = 0.0

    def __add__(self, other: "WeightedHistogram") -> "WeightedHistogram":
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("histograms have different edges")
        return WeightedHistogram(
            self.edges, self.weight + other.weight, self.weight_sq + other.weight_sq,
            self.total_weight + other.total_weight, self.total_weight_sq + other.total_weight_sq,
            self.n_raw + other.n_raw, self.sum_wk + other.sum_wk,
            self.sum_w2k + other.sum_w2k, self.sum_w2k2 + other.sum_w2k2)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def probabilities(self) -> np.ndarray:
        return self.weight / self.total_weight

    @property
    def density(self) -> np.ndarray:
        return self.probabilities / self.widths

    @property
    def effective_sample_size(self) -> float:
        return self.total_weight**2 / self.total_weight_sq

    @property
    def prob_stderr(self) -> np.ndarray:
        p = self.probabilities
        var = (self.weight_sq * (1 - 2 * p) + p * p * self.total_weight_sq) / self.total_weight**2
        return np.sqrt(np.maximum(var, 0.0))

    @property
    def stderr(self) -> np.ndarray:
        """Standard error of :attr:`density`."""
        return self.prob_stderr / self.widths

    @property
    def mean(self) -> float:
        return self.sum_wk / self.total_weight

    @property
    def mean_stderr(self) -> float:
        m = self.mean
        var = self.sum_w2k2 - 2 * m * self.sum_w2k + m * m * self.total_weight_sq
        return math.sqrt(max(var, 0.0)) / self.total_weight


def empirical_distribution(samples: WeightedSamples, edges) -> WeightedHistogram:
    """Bin weighted samples; weights outside the edges still normalize."""
    edges = np.asarray(edges, dtype=float)
    K, w = np.asarray(samples.K, dtype=float), np.asarray(samples.weights, dtype=float)
    if len(K) == 0:
        raise ValueError("no samples to bin")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing")
    cw, _ = np.histogram(K, edges, weights=w)
    cw2, _ = np.histogram(K, edges, weights=w * w)
    w2 = w * w
    return WeightedHistogram(edges, cw, cw2, float(w.sum()), float(w2.sum()), len(K),
                             float(np.dot(w, K)), float(np.dot(w2, K)), float(np.dot(w2, K * K)))


def histogram_from_table(edges, density, stderr, total_weight: float = 1.0,
                         total_weight_sq: float | None = None, n_raw: int = 0,
                         sums=(0.0, 0.0, 0.0)) -> WeightedHistogram:
    """Rebuild a histogram from its tabulated densities and standard errors.

    Per-bin squared-weight sums are recovered by inverting the delta-method
    variance. Without ``total_weight_sq`` the effective sample size is
    estimated from the bins.
    """
    edges = np.asarray(edges, dtype=float)
    width = np.diff(edges)
    p = np.asarray(density, dtype=float) * width
    pse = np.asarray(stderr, dtype=float) * width
    W = float(total_weight)
    if total_weight_sq is None:
        good = (pse > 0) & (p > 0) & (p < 1)
        ess = float(np.median(p[good] * (1 - p[good]) / pse[good] ** 2)) if good.any() else 1.0
        total_weight_sq = W * W / ess
    denom = 1.0 - 2.0 * p
    safe = np.where(np.abs(denom) > 1e-12, denom, 1.0)
    wsq = (pse**2 * W * W - p * p * total_weight_sq) / safe
    return WeightedHistogram(edges, p * W, np.maximum(wsq, 0.0), W, float(total_weight_sq),
                             int(n_raw), *map(float, sums))


def bin_probabilities(dist, edges, sub: int = 32) -> np.ndarray:
    """Integrate a density over each bin by the trapezoid rule on ``sub`` sub-intervals.

    ``dist`` is a :class:`CurvatureDistribution` or a callable density.
    Bins straddling ``K = 0`` (where the density has a kink) are split there.
    """
    fn = dist.density_at if isinstance(dist, CurvatureDistribution) else dist
    edges = np.asarray(edges, dtype=float)
    out = np.empty(len(edges) - 1)
    frac = np.linspace(0.0, 1.0, sub + 1)
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        parts = [(lo, 0.0), (0.0, hi)] if lo < 0.0 < hi else [(lo, hi)]
        acc = 0.0
        for a, b in parts:
            x = a + (b - a) * frac
            acc += np.trapezoid(np.asarray(fn(x), dtype=float), x)
        out[i] = acc
    return out


def central_edges(dist: CurvatureDistribution, n_bins: int = 200, mass: float = 0.98) -> np.ndarray:
    """Equal-width bins spanning the central ``mass`` of a tabulated density."""
    K, p = dist.K, dist.density
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(K))])
    cdf = cdf + dist.tail_mass[0]
    q = 0.5 * (1.0 - mass)
    lo = float(np.interp(q, cdf, K))
    hi = float(np.interp(1.0 - q, cdf, K))
    return np.linspace(lo, hi, n_bins + 1)


@dataclass(frozen=True)
class CompareReport:
    tv_distance: float
    max_abs_z: float
    mean_difference_se: float
    n_bins: int
    analytic_mean: float
    empirical_mean: float
    empirical_mean_se: float
    effective_sample_size: float

    def as_dict(self) -> dict:
        return {k: float(v) if isinstance(v, (float, np.floating)) else v
                for k, v in self.__dict__.items()}


def compare(dist, hist: WeightedHistogram, analytic_mean: float | None = None) -> CompareReport:
    """Compare a density to a weighted histogram.

    The total-variation distance counts the probability outside the bins as
    one extra cell. Standardized residuals use the delta-method standard
    error of each bin's probability.
    """
    edges = hist.edges
    if isinstance(dist, CurvatureDistribution):
        if edges[-1] <= dist.K[0] or edges[0] >= dist.K[-1]:
            raise ValueError("histogram and distribution supports are disjoint")
        if analytic_mean is None:
            analytic_mean = dist.mean()
    p = bin_probabilities(dist, edges)
    ph = hist.probabilities
    out_a = max(0.0, 1.0 - p.sum())
    out_h = max(0.0, 1.0 - ph.sum())
    tv = 0.5 * (np.abs(ph - p).sum() + abs(out_h - out_a))
    se = hist.prob_stderr
    fallback = np.sqrt(np.maximum(p, 1e-300) / hist.effective_sample_size)
    se = np.where(se > 0, se, fallback)
    z = (ph - p) / se
    emp_mean = hist.mean if hist.sum_wk or hist.sum_w2k2 else float("nan")
    emp_se = hist.mean_stderr if not math.isnan(emp_mean) else float("nan")
    if analytic_mean is None or math.isnan(emp_mean) or emp_se == 0:
        mdiff = float("nan")
    else:
        mdiff = (emp_mean - analytic_mean) / emp_se
    return CompareReport(float(tv), float(np.max(np.abs(z))), float(mdiff), len(p),
                         float("nan") if analytic_mean is None else float(analytic_mean),
                         float(emp_mean), float(emp_se), float(hist.effective_sample_size))
