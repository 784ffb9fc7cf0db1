"""``levelcurv`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analytic, level, sampler
from .gamma import UNITS, DegenerateMomentsError, gamma_set
from .level import QuadratureError
from .output import (DENSITY_COLUMNS, HISTOGRAM_COLUMNS, atomic_write, csv_text,
                     line_plot_svg, read_csv, write_manifest)
from .spectrum import InvalidSpectrumError, SpectralMoments, SpectrumModel, moments, parse_spectrum
from .wavefield import NearCriticalPointError, field_from_description, synthesize

SUBCOMMANDS = ("moments", "gamma", "pdf", "pdf-level", "fig2", "field", "mc-field",
               "mc-oracle", "compare", "selftest")


class UsageError(Exception):
    pass


class NumericFailure(Exception):
    def __init__(self, module: str, message: str):
        super().__init__(f"{module}: {message}")
        self.module = module


# -- shared helpers ----------------------------------------------------------

def _spectrum(args):
    try:
        return parse_spectrum(args.spectrum, args.variance)
    except InvalidSpectrumError as exc:
        raise UsageError(f"spectrum: {exc}") from exc


def _moments_of(spec) -> SpectralMoments:
    return spec if isinstance(spec, SpectralMoments) else moments(spec)


def _needs_waves(spec) -> SpectrumModel:
    if not isinstance(spec, SpectrumModel):
        raise UsageError("this subcommand needs a wavenumber spectrum, not a rho: preset")
    return spec


def _source_tag(args) -> str:
    return args.spectrum


def _header(m: SpectralMoments, F: float, source: str, extra: dict | None = None) -> dict:
    meta = {"rho": m.rho, "k2bar": m.k2bar, "k4bar": m.k4bar, "variance": m.variance,
            "F": float(F), "source": source, "version": __version__}
    meta.update(extra or {})
    return meta


class _Run:
    """Collects artifacts of one invocation and writes the manifest last."""

    def __init__(self, args, subcommand: str):
        self.args = args
        self.sub = subcommand
        self.t0 = time.perf_counter()
        self.outputs: list[Path] = []
        self.seeds: dict = {}

    def write(self, path, text: str) -> Path:
        p = atomic_write(path, text)
        self.outputs.append(p)
        return p

    def finish(self, manifest_path=None):
        if not self.outputs:
            return
        target = Path(manifest_path) if manifest_path else \
            self.outputs[0].with_name(self.outputs[0].name + ".manifest.json")
        params = {k: v for k, v in vars(self.args).items() if k not in ("func",)}
        write_manifest(target, self.sub, params, self.seeds, self.outputs,
                       time.perf_counter() - self.t0)


def _emit_density(run: _Run, dist: analytic.CurvatureDistribution, meta: dict, out, svg,
                  label: str):
    text = csv_text(DENSITY_COLUMNS, zip(dist.K, dist.density), meta)
    if out:
        run.write(out, text)
    else:
        sys.stdout.write(text)
    if svg:
        run.write(svg, line_plot_svg([(label, dist.K, dist.density)], xlim=_plot_window(dist)))


def _plot_window(dist) -> tuple[float, float]:
    lo, hi = dist.K[0], dist.K[-1]
    scale = 1.0 / dist.metadata.get("a", 1.0)
    return max(lo, -1.5 * scale), min(hi, 1.0 * scale)


def _tail_meta(dist) -> dict:
    return {"tail_mass": list(dist.tail_mass), "tail_moment": list(dist.tail_moment)}


def _default_edges(m: SpectralMoments, F: float, n_bins: int, k_min, k_max) -> np.ndarray:
    gs = gamma_set(m)
    if k_min is None or k_max is None:
        cl, cr = level.level_tail_coefficients(F, gs)
        bulk = 2.0 * analytic.curvature_scale(gs)
        # About 1% of the mass beyond each end by the |K|^-3 tail asymptote.
        lo = -max(math.sqrt(cl / 0.02), bulk) if k_min is None else k_min
        hi = max(math.sqrt(cr / 0.02), bulk) if k_max is None else k_max
    else:
        lo, hi = k_min, k_max
    if not lo < hi:
        raise UsageError("need --k-min < --k-max")
    return np.linspace(lo, hi, n_bins + 1)


def _hist_text(hist: sampler.WeightedHistogram, meta: dict) -> str:
    meta = dict(meta)
    meta.update(total_weight=hist.total_weight, total_weight_sq=hist.total_weight_sq,
                n_raw=hist.n_raw, sum_wk=hist.sum_wk, sum_w2k=hist.sum_w2k,
                sum_w2k2=hist.sum_w2k2, mean=hist.mean, mean_stderr=hist.mean_stderr,
                effective_sample_size=hist.effective_sample_size)
    rows = zip(hist.edges[:-1], hist.edges[1:], hist.density, hist.stderr)
    return csv_text(HISTOGRAM_COLUMNS, rows, meta)


# -- subcommands -------------------------------------------------------------

def cmd_moments(args):
    spec = _spectrum(args)
    m = _moments_of(spec)
    doc = {"spectrum": args.spectrum, **m.as_dict()}
    print(json.dumps(doc, indent=2))


def cmd_gamma(args):
    m = _moments_of(_spectrum(args))
    gs = gamma_set(m)
    d = gs.as_dict()
    if args.json:
        print(json.dumps({"spectrum": args.spectrum, "moments": m.as_dict(),
                          "values": d, "units": UNITS}, indent=2))
        return
    for key in ("Gamma00", "Gammazz", "Gammaxyxy", "Gammaxxxx", "Gammaxxyy", "Gamma0xx",
                "a", "b", "c"):
        print(f"{key:10s} {d[key]:.17g}  [{UNITS.get(key, '1/<f^2>')}]")


def cmd_pdf(args):
    run = _Run(args, "pdf")
    m = _moments_of(_spectrum(args))
    gs = gamma_set(m)
    dist = analytic.tabulate(gs, args.k_min, args.k_max, args.points, moments=m)
    meta = _header(m, 0.0, _source_tag(args), {"method": "closed-form",
                                               "mean": analytic.mean_nodal(m), **_tail_meta(dist)})
    _emit_density(run, dist, meta, args.out, args.svg, f"rho={m.rho:.4g}")
    run.finish()


def cmd_pdf_level(args):
    run = _Run(args, "pdf-level")
    m = _moments_of(_spectrum(args))
    gs = gamma_set(m)
    opts = level.LevelQuadratureOptions(rel_tol=args.rel_tol)
    dist = level.tabulate_level(gs, args.level, args.k_min, args.k_max, args.points, m, opts)
    meta = _header(m, args.level, _source_tag(args),
                   {"method": "quadrature", "mean": level.mean_level(args.level, m),
                    "calibration": level.calibration_constant(), **_tail_meta(dist)})
    _emit_density(run, dist, meta, args.out, args.svg, f"F={args.level:g}")
    run.finish()


def cmd_fig2(args):
    run = _Run(args, "fig2")
    out = Path(args.out_dir)
    curves = []
    for tag, rho in (("1", 1.0), ("1_3", 1 / 3), ("1_9", 1 / 9)):
        m = SpectralMoments.from_rho(rho, 1.0, args.variance or 1.0)
        gs = gamma_set(m)
        dist = analytic.tabulate(gs, -3.0, 3.0, args.points, moments=m)
        meta = _header(m, 0.0, f"rho:{rho!r}", {"method": "closed-form",
                                                "mean": analytic.mean_nodal(m), **_tail_meta(dist)})
        run.write(out / f"fig2_rho_{tag}.csv", csv_text(DENSITY_COLUMNS, zip(dist.K, dist.density), meta))
        label = {"1": "rho = 1", "1_3": "rho = 1/3", "1_9": "rho = 1/9"}[tag]
        curves.append((label, dist.K, dist.density))
    run.write(out / "fig2.svg", line_plot_svg(curves, xlim=(-1.5, 1.0), ylim=(0.0, 9.0)))
    run.finish(out / "fig2.manifest.json")


def cmd_field(args):
    run = _Run(args, "field")
    spec = _needs_waves(_spectrum(args))
    fld = synthesize(spec, args.waves, args.seed)
    run.seeds = {"field": args.seed}
    doc = {"kind": "plane-wave-field", "version": __version__, **fld.describe()}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        run.write(args.out, text)
        run.finish()
    else:
        sys.stdout.write(text)


def cmd_mc_field(args):
    run = _Run(args, "mc-field")
    if args.field:
        desc = json.loads(Path(args.field).read_text())
        fld = field_from_description(desc)
        spec, waves = fld.spectrum, fld.n_waves
        m = moments(spec)
        box = args.box if args.box is not None else 8 * 2 * math.pi / math.sqrt(m.k2bar)
        samples = sampler.sample_level_crossings(fld, args.level, box, args.lines, args.seed)
        samples.diagnostics.update(field_seeds=[desc["seed"]], line_seeds=[args.seed])
        n_fields = 1
    else:
        if args.spectrum is None:
            raise UsageError("mc-field needs --spectrum or --field")
        spec = _needs_waves(_spectrum(args))
        waves, n_fields = args.waves, args.fields
        m = moments(spec)
        box = args.box if args.box is not None else 8 * 2 * math.pi / math.sqrt(m.k2bar)
        samples = sampler.field_monte_carlo(spec, waves, args.level, box, args.lines, args.seed,
                                            n_fields=n_fields, workers=args.workers)
    if len(samples.K) == 0:
        raise NumericFailure("sampler", "no level crossings found; enlarge --box or --lines")
    edges = _default_edges(m, args.level, args.bins, args.k_min, args.k_max)
    hist = sampler.empirical_distribution(samples, edges)
    run.seeds = {"root": args.seed, "field_seeds": samples.diagnostics["field_seeds"],
                 "line_seeds": samples.diagnostics["line_seeds"]}
    meta = _header(m, args.level, _source_tag(args) if args.spectrum else args.field,
                   {"method": "field-mc", "n_waves": waves, "box": box, "n_fields": n_fields,
                    "lines_per_field": args.lines,
                    "batch_mean_stderr": samples.batch_mean_stderr(),
                    "brackets": samples.diagnostics["brackets"]})
    text = _hist_text(hist, meta)
    if args.out:
        run.write(args.out, text)
        if args.samples_out:
            rows = zip(samples.K, samples.weights, samples.batch)
            run.write(args.samples_out, csv_text(("K", "weight", "field"), rows, meta))
        run.finish()
    else:
        sys.stdout.write(text)


def cmd_mc_oracle(args):
    run = _Run(args, "mc-oracle")
    m = _moments_of(_spectrum(args))
    edges = _default_edges(m, args.level, args.bins, args.k_min, args.k_max)
    hist = sampler.joint_oracle_histogram(m, args.level, args.samples, edges, args.seed,
                                          workers=args.workers)
    run.seeds = {"root": args.seed, "chunk_size": sampler.ORACLE_CHUNK}
    meta = _header(m, args.level, _source_tag(args), {"method": "joint-oracle",
                                                      "samples": args.samples})
    text = _hist_text(hist, meta)
    if args.out:
        run.write(args.out, text)
        run.finish()
    else:
        sys.stdout.write(text)


def _load_density(path) -> tuple[analytic.CurvatureDistribution, dict]:
    meta, cols, data = read_csv(path)
    if tuple(cols) != DENSITY_COLUMNS:
        raise UsageError(f"{path}: expected columns {','.join(DENSITY_COLUMNS)}")
    dist = analytic.CurvatureDistribution(
        float(meta.get("F", 0.0)), data[:, 0], data[:, 1], meta, str(meta.get("method", "table")),
        tuple(meta.get("tail_mass", (0.0, 0.0))), tuple(meta.get("tail_moment", (0.0, 0.0))))
    return dist, meta


def _load_histogram(path) -> tuple[sampler.WeightedHistogram, dict]:
    meta, cols, data = read_csv(path)
    if tuple(cols) != HISTOGRAM_COLUMNS:
        raise UsageError(f"{path}: expected columns {','.join(HISTOGRAM_COLUMNS)}")
    edges = np.append(data[:, 0], data[-1, 1])
    sums = tuple(float(meta.get(k, 0.0)) for k in ("sum_wk", "sum_w2k", "sum_w2k2"))
    hist = sampler.histogram_from_table(edges, data[:, 2], data[:, 3],
                                        float(meta.get("total_weight", 1.0)),
                                        meta.get("total_weight_sq"), int(meta.get("n_raw", 0)), sums)
    return hist, meta


def cmd_compare(args):
    run = _Run(args, "compare")
    dist, ameta = _load_density(args.analytic)
    hist, emeta = _load_histogram(args.empirical)
    for key in ("rho", "F"):
        if key in ameta and key in emeta and not math.isclose(float(ameta[key]), float(emeta[key]),
                                                              rel_tol=1e-9, abs_tol=1e-12):
            raise UsageError(f"{key} differs between inputs: {ameta[key]} vs {emeta[key]}")
    amean = ameta.get("mean")
    rep = sampler.compare(dist, hist, None if amean is None else float(amean))
    doc = {"analytic": str(args.analytic), "empirical": str(args.empirical), **rep.as_dict()}
    if "batch_mean_stderr" in emeta and not math.isnan(rep.analytic_mean):
        doc["mean_difference_batch_se"] = (rep.empirical_mean - rep.analytic_mean) / float(
            emeta["batch_mean_stderr"])
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.report:
        run.write(args.report, text)
        run.finish()
    else:
        sys.stdout.write(text)


def cmd_selftest(args):
    from .selftest import run_selftest

    results = run_selftest()
    for r in results:
        print(f"[{'PASS' if r.ok else 'FAIL'}] {r.name}: {r.detail} ({r.seconds:.2f} s)")
    failed = [r for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


# -- parser ------------------------------------------------------------------

def _grid_flags(p, points):
    p.add_argument("--k-min", type=float, default=None)
    p.add_argument("--k-max", type=float, default=None)
    p.add_argument("--points", type=int, default=points)
    p.add_argument("--out", default=None, help="CSV path (stdout if omitted)")
    p.add_argument("--svg", default=None, help="also write a line plot")


def _hist_flags(p):
    p.add_argument("--bins", type=int, default=200)
    p.add_argument("--k-min", type=float, default=None)
    p.add_argument("--k-max", type=float, default=None)
    p.add_argument("--out", default=None, help="histogram CSV path (stdout if omitted)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: $LEVELCURV_THREADS, else 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levelcurv", description=__doc__)
    parser.add_argument("--version", action="version", version=f"levelcurv {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{" + ",".join(SUBCOMMANDS) + "}")
    sub.required = True

    def add(name, func, help_, spectrum=True, required=True):
        p = sub.add_parser(name, help=help_)
        if spectrum:
            p.add_argument("--spectrum", required=required,
                           help="preset (mono:k0, ball:kmax, shells:k1:w1,..., rho:r[,k4]) or file")
        p.add_argument("--variance", type=float, default=None, help="override <f^2>")
        p.set_defaults(func=func)
        return p

    add("moments", cmd_moments, "spectral moments k2bar, k4bar, rho")
    p = add("gamma", cmd_gamma, "inverse-moment constants and a, b, c")
    p.add_argument("--json", action="store_true")
    p = add("pdf", cmd_pdf, "closed-form nodal curvature density")
    _grid_flags(p, 2001)
    p = add("pdf-level", cmd_pdf_level, "curvature density on the level surface f = F")
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--rel-tol", type=float, default=1e-10)
    _grid_flags(p, 401)
    p = add("fig2", cmd_fig2, "nodal densities for rho = 1, 1/3, 1/9", spectrum=False)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--points", type=int, default=2001)
    p = add("field", cmd_field, "write a reproducible plane-wave field description")
    p.add_argument("--waves", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    p = add("mc-field", cmd_mc_field, "level-crossing Monte Carlo on synthesized fields",
            required=False)
    p.add_argument("--field", default=None, help="field description written by 'field'")
    p.add_argument("--waves", type=int, default=256)
    p.add_argument("--level", type=float, default=0.0)
    p.add_argument("--box", type=float, default=None)
    p.add_argument("--lines", type=int, required=True, help="lines per field")
    p.add_argument("--fields", type=int, default=1, help="independent field realizations")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--samples-out", default=None, help="also write raw weighted samples")
    _hist_flags(p)
    p = add("mc-oracle", cmd_mc_oracle, "joint-Gaussian Kac-Rice oracle histogram")
    p.add_argument("--level", type=float, default=0.0)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    _hist_flags(p)
    p = add("compare", cmd_compare, "compare a density CSV with a histogram CSV", spectrum=False)
    p.add_argument("--analytic", required=True)
    p.add_argument("--empirical", required=True)
    p.add_argument("--report", default=None, help="JSON report path (stdout if omitted)")
    add("selftest", cmd_selftest, "run the invariant suite", spectrum=False)
    return parser


_MODULE_OF = {
    DegenerateMomentsError: "gamma",
    QuadratureError: "level_pdf",
    NearCriticalPointError: "wavefield",
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code = args.func(args)
        return int(code or 0)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"levelcurv: error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"levelcurv: numeric failure in {exc}", file=sys.stderr)
        return 1
    except tuple(_MODULE_OF) as exc:
        module = next(v for k, v in _MODULE_OF.items() if isinstance(exc, k))
        print(f"levelcurv: numeric failure in {module}: {exc}", file=sys.stderr)
        return 1
    except FloatingPointError as exc:
        print(f"levelcurv: numeric failure: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError) as exc:
        print(f"levelcurv: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
