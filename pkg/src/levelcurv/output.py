"""Artifact writing: atomic files, CSV with metadata headers, run manifests, SVG plots."""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__

DENSITY_COLUMNS = ("K", "density")
HISTOGRAM_COLUMNS = ("K_lo", "K_hi", "density", "stderr")


def atomic_write(path, data: str | bytes) -> Path:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    raw = data.encode() if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(raw)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (list, tuple)):
        return json.dumps([float(v) if isinstance(v, (float, np.floating)) else v for v in x])
    return str(x)


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[float]], meta: dict) -> str:
    """CSV with a ``# key: value`` header block; floats use shortest round-trip repr."""
    lines = [f"# {k}: {_fmt(v)}" for k, v in meta.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def read_csv(path) -> tuple[dict, list[str], np.ndarray]:
    """Inverse of :func:`csv_text`: ``(metadata, columns, data)``."""
    meta, cols, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = _parse_value(val.strip())
        elif cols is None:
            cols = [c.strip() for c in line.split(",")]
        else:
            rows.append([float(x) for x in line.split(",")])
    if cols is None:
        raise ValueError(f"{path}: no column header")
    data = np.array(rows, dtype=float).reshape(-1, len(cols))
    return meta, cols, data


def _parse_value(s: str):
    try:
        return json.loads(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, subcommand: str, params: dict, seeds, outputs: Sequence, wall_clock: float) -> Path:
    """Record everything needed to regenerate ``outputs``; written last, atomically."""
    doc = {
        "subcommand": subcommand,
        "parameters": params,
        "seeds": seeds,
        "version": __version__,
        "wall_clock_seconds": wall_clock,
        "outputs": {str(Path(p).name): sha256_file(p) for p in outputs},
    }
    return atomic_write(path, json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


# -- SVG ---------------------------------------------------------------------

_PALETTE = ("#1f4e9c", "#c23b22", "#2e8b57", "#8a2be2", "#d2691e")


def _nice_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks, t = [], first
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def line_plot_svg(curves: Sequence[tuple[str, np.ndarray, np.ndarray]], xlabel: str = "K",
                  ylabel: str = "P(K)", xlim=None, ylim=None, width: int = 640,
                  height: int = 420) -> str:
    """Polylines with axes, ticks and a legend. ``curves`` is ``[(label, x, y), ...]``."""
    if not curves:
        raise ValueError("nothing to plot")
    xs = np.concatenate([np.asarray(c[1], float) for c in curves])
    ys = np.concatenate([np.asarray(c[2], float) for c in curves])
    x0, x1 = xlim if xlim else (float(xs.min()), float(xs.max()))
    y0, y1 = ylim if ylim else (0.0, float(np.nanmax(ys)) * 1.05)
    ml, mr, mt, mb = 60, 20, 20, 50
    pw, ph = width - ml - mr, height - mt - mb

    def sx(x):
        return ml + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return mt + ph - (y - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in _nice_ticks(x0, x1):
        X = sx(t)
        out.append(f'<line x1="{X:.2f}" y1="{mt + ph}" x2="{X:.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{mt + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _nice_ticks(y0, y1):
        Y = sy(t)
        out.append(f'<line x1="{ml - 5}" y1="{Y:.2f}" x2="{ml}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{Y + 4:.2f}" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="15" y="{mt + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 15 {mt + ph / 2})">{ylabel}</text>')
    out.append(f'<clipPath id="plot"><rect x="{ml}" y="{mt}" width="{pw}" height="{ph}"/></clipPath>')
    for i, (label, x, y) in enumerate(curves):
        x, y = np.asarray(x, float), np.asarray(y, float)
        sel = (x >= x0) & (x <= x1) & np.isfinite(y)
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x[sel], y[sel]))
        color = _PALETTE[i % len(_PALETTE)]
        out.append(f'<polyline clip-path="url(#plot)" fill="none" stroke="{color}" '
                   f'stroke-width="1.5" points="{pts}"/>')
        ly = mt + 15 + 18 * i
        out.append(f'<line x1="{ml + pw - 130}" y1="{ly}" x2="{ml + pw - 105}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{ml + pw - 100}" y="{ly + 4}">{_escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
