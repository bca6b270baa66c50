"""Figure rendering. Only smoke-level: files exist and are PNGs."""

import subprocess
import sys

import numpy as np
import pytest

from thzreflect import ErrorCdf, get_material, synthesize_dataset
from thzreflect.subband import fit_empirical_trend, fit_trend
from thzreflect.report import save_cdf_figure, save_trend_figure

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def is_png(path):
    return path.read_bytes()[:8] == PNG_MAGIC


def test_cdf_figure_written(tmp_path):
    rng = np.random.default_rng(1)
    curves = [
        ("model a", ErrorCdf.from_errors(rng.normal(0, 0.01, 200))),
        ("model b", ErrorCdf.from_errors(rng.normal(0, 0.02, 200))),
    ]
    out = tmp_path / "cdf.png"
    save_cdf_figure(curves, out)
    assert is_png(out)


def test_trend_figure_dispersive(tmp_path):
    rec = get_material("Glass")
    ds = synthesize_dataset(rec, f_grid=np.linspace(300, 400, 101))
    result = fit_trend(ds.samples, rec.material_class, rec.thickness_m)
    out = tmp_path / "trend.png"
    save_trend_figure(result, out)
    assert is_png(out)


def test_trend_figure_empirical(tmp_path):
    rec = get_material("Concrete")
    ds = synthesize_dataset(rec, f_grid=np.linspace(300, 400, 101))
    result = fit_empirical_trend(ds.samples, rec.thickness_m)
    out = tmp_path / "baseline.png"
    save_trend_figure(result, out)
    assert is_png(out)


def test_trend_figure_rejects_unknown_trend(tmp_path):
    class Odd:
        trend = object()
        band_fits = ()

    with pytest.raises(TypeError):
        save_trend_figure(Odd(), tmp_path / "x.png")


def test_library_import_stays_free_of_matplotlib():
    code = (
        "import sys\n"
        "import thzreflect\n"
        "sys.exit(1 if 'matplotlib' in sys.modules else 0)\n"
    )
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True)
    assert proc.returncode == 0, proc.stderr.decode()
