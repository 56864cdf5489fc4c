import json
import subprocess
import sys

import numpy as np
import pytest

from blochfem.cli import main
from blochfem.pipeline import run_band, run_solve, run_sweep, run_validate
from blochfem.runconfig import RunConfig, load_config, save_config

from conftest import small_homogeneous_config, small_interface_config


def strip_timings(path):
    data = json.loads(open(path).read())
    data.pop("timings", None)
    return data


def test_config_roundtrip(tmp_path):
    cfg = small_interface_config()
    once = RunConfig.from_dict(cfg.to_dict())
    assert once == cfg
    p = tmp_path / "cfg.json"
    save_config(cfg, p)
    again = load_config(p)
    assert again == cfg


def test_config_defaults_mirror_first_experiment():
    cfg = RunConfig()
    assert cfg.geometry.eps == 1.0
    assert (cfg.geometry.R, cfg.geometry.L, cfg.geometry.K) == (15, 6, 14)
    assert (cfg.geometry.n1, cfg.geometry.n2) == (20, 19)
    assert cfg.omega == pytest.approx(0.2 * np.pi)
    assert cfg.delta == 1e-4
    assert cfg.medium_plus["kind"] == "disc_array"


def test_run_band_headers_and_single_row(tmp_path):
    cfg = small_homogeneous_config()
    d = cfg.to_dict()
    d["geometry"].update({"K": 1, "R": 2, "L": 2, "n1": 8, "n2": 8})
    d["source"] = {"kind": "none"}
    d["selection"].update({"j1_mesh": 16, "n_bands": 2})
    cfg = RunConfig.from_dict(d)
    out = run_band(cfg, tmp_path)
    band = open(out["band"]).read().splitlines()
    assert band[0] == "side,j1,j2,m,mu,P,vg1,vg2"
    j2s = {float(line.split(",")[2]) for line in band[1:]}
    assert j2s == {0.0}
    sel = open(out["selected"]).read().splitlines()
    assert sel[0] == "side,j1,j2,m,mu,P,vg1,vg2"


def test_run_solve_zero_source(tmp_path):
    cfg = small_homogeneous_config()
    d = cfg.to_dict()
    d["source"] = {"kind": "none"}
    cfg = RunConfig.from_dict(d)
    out = run_solve(cfg, tmp_path)
    rows = open(out["field"]).read().splitlines()
    assert rows[0] == "x1,x2,re_u,im_u,abs_u"
    vals = np.loadtxt(rows[1:], delimiter=",")
    assert np.abs(vals[:, 2:]).max() == 0.0
    report = strip_timings(out["report"])
    assert report["residual"] == 0.0


def test_run_solve_deterministic(tmp_path):
    cfg = small_homogeneous_config()
    out1 = run_solve(cfg, tmp_path / "a")
    out2 = run_solve(cfg, tmp_path / "b")
    assert open(out1["field"]).read() == open(out2["field"]).read()
    assert open(out1["selected"]).read() == open(out2["selected"]).read()
    assert strip_timings(out1["report"]) == strip_timings(out2["report"])


def test_run_validate_and_sweep(tmp_path):
    cfg = small_interface_config(a_right=0.25)
    out = run_validate(cfg, tmp_path)
    rep = json.loads(open(out["rt_report"]).read())
    assert rep["T_ref"] == pytest.approx(1.0 + rep["R_ref"])
    assert rep["a_star"] == 0.25

    out2 = run_sweep(cfg, deltas=[1e-3], out_dir=tmp_path)
    lines = open(out2["sweep"]).read().splitlines()
    assert lines[0] == "delta,err_R,err_T"
    assert len(lines) == 2


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["--config", str(bad), "solve"]) == 2

    cfg_path = tmp_path / "cfg.json"
    save_config(small_homogeneous_config(), cfg_path)
    # ascending deltas are a numerical-usage error: exit 3
    assert main(["--config", str(cfg_path), "sweep", "--deltas", "1e-4", "1e-3"]) == 3


def test_cli_runs_solve_subprocess(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    save_config(small_homogeneous_config(), cfg_path)
    proc = subprocess.run(
        [sys.executable, "-m", "blochfem.cli", "--config", str(cfg_path),
         "--out", str(tmp_path / "out"), "--threads", "1", "solve"],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "out" / "field.csv").exists()
    assert (tmp_path / "out" / "report.json").exists()


def test_cli_delta_override(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    save_config(small_homogeneous_config(), cfg_path)
    code = main(["--config", str(cfg_path), "--out", str(tmp_path / "o"), "--delta", "1e-3", "validate"])
    assert code == 0
    rep = json.loads(open(tmp_path / "o" / "rt_report.json").read())
    assert rep["delta"] == 1e-3
