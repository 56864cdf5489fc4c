import shutil
import warnings
from pathlib import Path

import pytest

from blochfem_plots.cli import main
from blochfem_plots.io import FormatError, read_band, read_field, read_sweep
from blochfem_plots.render import plot_band, plot_brillouin, plot_field, plot_sweep

SAMPLES = Path(__file__).resolve().parents[1] / "sample_data"


def test_readers_accept_shipped_samples():
    field = read_field(SAMPLES / "field.csv")
    assert set(field) == {"x1", "x2", "re_u", "im_u", "abs_u"}
    side, vals = read_band(SAMPLES / "band.csv")
    assert vals.shape[1] == 7
    rows = read_sweep(SAMPLES / "sweep.csv")
    assert rows.shape[1] == 3


def test_field_plot_renders_refraction_run(tmp_path):
    out = plot_field(SAMPLES / "field.csv", tmp_path / "field.png",
                     report_json=SAMPLES / "report.json")
    assert Path(out).stat().st_size > 0


def test_band_plot_renders(tmp_path):
    out = plot_band(SAMPLES / "band.csv", tmp_path / "band.png",
                    report_json=SAMPLES / "report.json")
    assert Path(out).stat().st_size > 0


def test_brillouin_plot_renders(tmp_path):
    out = plot_brillouin(SAMPLES / "selected.csv", SAMPLES / "report.json",
                         tmp_path / "bz.png", band_csv=SAMPLES / "band.csv")
    assert Path(out).stat().st_size > 0


def test_sweep_plot_renders(tmp_path):
    out = plot_sweep(SAMPLES / "sweep.csv", tmp_path / "sweep.svg")
    assert Path(out).stat().st_size > 0


def test_rendering_is_reproducible_and_readonly(tmp_path):
    before = (SAMPLES / "field.csv").read_bytes()
    a = plot_field(SAMPLES / "field.csv", tmp_path / "a.png", report_json=SAMPLES / "report.json")
    b = plot_field(SAMPLES / "field.csv", tmp_path / "b.png", report_json=SAMPLES / "report.json")
    assert Path(a).read_bytes() == Path(b).read_bytes()
    assert (SAMPLES / "field.csv").read_bytes() == before


def test_empty_selection_warns_but_renders(tmp_path):
    empty = tmp_path / "selected.csv"
    empty.write_text("side,j1,j2,m,mu,P,vg1,vg2\n")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        out = plot_brillouin(empty, SAMPLES / "report.json", tmp_path / "bz.png")
    assert Path(out).exists()
    assert any("no selected modes" in str(w.message) for w in caught)


def test_malformed_inputs_rejected(tmp_path):
    bad = tmp_path / "field.csv"
    bad.write_text("x1,x2,oops\n1,2,3\n")
    with pytest.raises(FormatError):
        read_field(bad)
    empty = tmp_path / "empty_field.csv"
    empty.write_text("")
    with pytest.raises(FormatError):
        read_field(empty)
    header_only = tmp_path / "field2.csv"
    header_only.write_text("x1,x2,re_u,im_u,abs_u\n")
    with pytest.raises(FormatError):
        read_field(header_only)


def test_cli_all_kinds(tmp_path):
    assert main(["field", "--in", str(SAMPLES / "field.csv"), str(SAMPLES / "report.json"),
                 "--out", str(tmp_path / "f.png")]) == 0
    assert main(["band", "--in", str(SAMPLES / "band.csv"), str(SAMPLES / "report.json"),
                 "--out", str(tmp_path / "b.png")]) == 0
    assert main(["brillouin", "--in", str(SAMPLES / "selected.csv"),
                 str(SAMPLES / "report.json"), str(SAMPLES / "band.csv"),
                 "--out", str(tmp_path / "z.png")]) == 0
    assert main(["sweep", "--in", str(SAMPLES / "sweep.csv"),
                 "--out", str(tmp_path / "s.png")]) == 0


def test_cli_error_paths(tmp_path):
    bad = tmp_path / "field.csv"
    bad.write_text("not a header\n")
    assert main(["field", "--in", str(bad), "--out", str(tmp_path / "x.png")]) == 2
    assert main(["brillouin", "--in", str(SAMPLES / "band.csv"),
                 "--out", str(tmp_path / "x.png")]) == 2
