import os

import numpy as np
import pytest

from levelcurv.output import atomic_write, csv_text, line_plot_svg, read_csv


def test_csv_roundtrip_is_exact(tmp_path):
    x = np.array([0.1, 1 / 3, -2e-300, 12345.678901234567])
    meta = {"rho": 1 / 3, "source": "mono:1", "tail_mass": [1e-4, 2e-4], "n": 5}
    p = atomic_write(tmp_path / "a.csv", csv_text(("K", "density"), zip(x, x**2), meta))
    m, cols, data = read_csv(p)
    assert cols == ["K", "density"]
    assert np.array_equal(data[:, 0], x) and np.array_equal(data[:, 1], x**2)
    assert m["rho"] == 1 / 3 and m["source"] == "mono:1" and m["tail_mass"] == [1e-4, 2e-4]


def test_atomic_write_leaves_old_file_on_failure(tmp_path, monkeypatch):
    p = tmp_path / "x.txt"
    atomic_write(p, "old")

    def boom(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", boom)
    with pytest.raises(OSError):
        atomic_write(p, "new")
    assert p.read_text() == "old"
    assert [f.name for f in tmp_path.iterdir()] == ["x.txt"]


def test_svg_has_axes_and_legend():
    x = np.linspace(-1, 1, 50)
    svg = line_plot_svg([("a < b", x, x**2), ("two", x, 1 - x**2)])
    assert svg.count("<polyline") == 2
    assert "a &lt; b" in svg and "<line" in svg
    with pytest.raises(ValueError):
        line_plot_svg([])


def test_read_csv_requires_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("# only: metadata\n")
    with pytest.raises(ValueError):
        read_csv(p)
