"""End-to-end orchestration of configured runs and their file outputs.

A Workspace owns the grid, media, and per-side cell operators of one
configuration and caches the expensive stages (selection, bases, hat-level
matrices) so that damping sweeps only refactorize.  The run_* entry points
emit the documented CSV/JSON files:

  field CSV   x1,x2,re_u,im_u,abs_u
  band CSV    side,j1,j2,m,mu,P,vg1,vg2     (bands and selected sets)
  sweep CSV   delta,err_R,err_T
"""

from __future__ import annotations

import csv
import json
import logging
import time
from pathlib import Path

import numpy as np

from . import analysis, assembly, band_select, enrichment, solve
from .cell_eigen import CellGrid, CellOperator
from .errors import ConfigError
from .grid import build_grid, GridSpec, sample_coefficient
from .media import TwoSided, medium_from_dict
from .runconfig import RunConfig
from .solve import SolutionField

__all__ = ["Workspace", "run_band", "run_solve", "run_validate", "run_sweep"]

log = logging.getLogger(__name__)

FIELD_HEADER = ["x1", "x2", "re_u", "im_u", "abs_u"]
BAND_HEADER = ["side", "j1", "j2", "m", "mu", "P", "vg1", "vg2"]
SWEEP_HEADER = ["delta", "err_R", "err_T"]

INCOMING_ROW_TOL = 1e-4


def _wrap_half(x: float) -> float:
    """Map into (-1/2, 1/2]."""
    w = x - np.floor(x + 0.5)
    return 0.5 if w == -0.5 else float(w)


class Workspace:
    """Cached pipeline for one configuration."""

    def __init__(self, config: RunConfig):
        config.validate()
        self.config = config
        g = config.geometry
        self.spec = GridSpec(eps=g.eps, R=g.R, L=g.L, K=g.K, n1=g.n1, n2=g.n2)
        self.grid = build_grid(self.spec)
        self.medium_minus = medium_from_dict(config.medium_minus)
        self.medium_plus = medium_from_dict(config.medium_plus)
        self.medium = TwoSided(self.medium_minus, self.medium_plus)
        self.a_elem = sample_coefficient(self.medium, self.grid)
        self.cellgrid = CellGrid(g.eps, g.n1, g.n2)
        self._operators: dict[str, CellOperator] = {}
        self._index_sets: dict[str, band_select.IndexSet] = {}
        self._bases = None
        self._loads = None
        self._blocks = None
        self.timings: dict[str, float] = {}

    # --- per-side machinery -------------------------------------------------

    def side_medium(self, side: str):
        return self.medium_minus if side == "-" else self.medium_plus

    def cell_operator(self, side: str) -> CellOperator:
        if side not in self._operators:
            far = self.side_medium(side).far_field()
            self._operators[side] = CellOperator(self.cellgrid, self.cellgrid.sample(far))
        return self._operators[side]

    def incoming_wave(self) -> assembly.IncomingWave | None:
        src = self.config.source
        if src.kind != "incoming":
            return None
        wave = assembly.IncomingWave(
            j_in=tuple(src.j_in), amplitude=src.amplitude_complex, d=src.d
        )
        if not band_select.incoming_admissible(self.config.omega, wave.j_in):
            raise ConfigError(
                f"incoming wave j_in={src.j_in} violates omega^2 = |j_in|^2 "
                f"for omega={self.config.omega}"
            )
        return wave

    def j2_rows(self) -> list[float] | None:
        """Vertical rows to search: the incoming-compatible row for plane-wave
        runs under the 'auto' policy, otherwise all of Q'_K."""
        sel = self.config.selection
        wave = self.incoming_wave()
        if sel.j2_rows == "all" or wave is None:
            return None
        g = self.spec
        target = _wrap_half(wave.j_in[1] * g.eps / (2.0 * np.pi))
        rows = band_select.q_prime(g.K)
        nearest = min(rows, key=lambda q: abs(q - target))
        mismatch = abs(nearest - target)
        if mismatch > INCOMING_ROW_TOL:
            raise ConfigError(
                f"incoming vertical wave number {target:.6f} is not compatible with "
                f"the height eps*K (nearest admissible row {nearest:.6f})"
            )
        if mismatch > 1e-9:
            log.warning(
                "incoming j2 %.9f snapped to admissible row %.9f for the basis",
                target, nearest,
            )
        return [nearest]

    def index_set(self, side: str) -> band_select.IndexSet:
        if side not in self._index_sets:
            sel = self.config.selection
            t0 = time.perf_counter()
            self._index_sets[side] = band_select.select_indices(
                self.side_medium(side),
                self.config.omega,
                side,
                self.spec.K,
                self.cellgrid,
                j1_mesh_size=sel.j1_mesh,
                c0=sel.c0,
                level_tol=sel.level_tol,
                n_bands=sel.n_bands,
                j2_rows=self.j2_rows(),
                max_modes=sel.max_modes,
                operator=self.cell_operator(side),
            )
            self.timings[f"select_{side}"] = time.perf_counter() - t0
        return self._index_sets[side]

    def bases(self):
        if self._bases is None:
            t0 = time.perf_counter()
            bp = enrichment.build_radiation_basis(self.index_set("+"), self.grid)
            bm = enrichment.build_radiation_basis(self.index_set("-"), self.grid)
            bp = enrichment.orthonormalize(bp)
            bm = enrichment.orthonormalize(bm)
            self._bases = (bp, bm)
            self.timings["bases"] = time.perf_counter() - t0
        return self._bases

    def loads(self):
        """Hat-level load vector and nodal add-back offset (or None)."""
        if self._loads is None:
            src = self.config.source
            load = np.zeros(self.grid.n_nodes, dtype=complex)
            offset = None
            if src.kind == "gaussian":

                def f(x1, x2):
                    dx = x1 - src.center[0]
                    dy = x2 - src.center[1]
                    return src.strength * np.exp(-src.decay * (dx**2 + dy**2))

                load = load + assembly.source_load(f, self.grid)
            wave = self.incoming_wave()
            if wave is not None:
                extra, offset = assembly.incoming_source(wave, self.grid, self.a_elem)
                load = load + extra
            self._loads = (load, offset)
        return self._loads

    # --- solving ------------------------------------------------------------

    def system(self, delta: float | None = None) -> assembly.EnrichedSystem:
        bp, bm = self.bases()
        load, _ = self.loads()
        if self._blocks is None:
            t0 = time.perf_counter()
            self._blocks = assembly.assemble_blocks(self.grid, self.a_elem, bp, bm)
            self.timings["assemble_blocks"] = time.perf_counter() - t0
        return assembly.system_from_blocks(
            self._blocks,
            self.grid,
            self.config.omega,
            self.config.delta if delta is None else delta,
            bp,
            bm,
            load=load,
        )

    def solve(self, delta: float | None = None) -> SolutionField:
        t0 = time.perf_counter()
        system = self.system(delta)
        self.timings["assemble"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        sol = solve.solve_system(system, offset=self.loads()[1])
        self.timings["solve"] = time.perf_counter() - t0
        return sol

    def reference_a_star(self) -> float:
        """Fresnel reference coefficient of the right medium: its value when
        homogeneous, otherwise the homogenized coefficient of its far field."""
        if self.config.medium_plus.get("kind") == "constant":
            return float(self.config.medium_plus["value"])
        op = self.cell_operator("+")
        return analysis.homogenized_a(op.a_cell, self.cellgrid)

    def rt_report(self, sol: SolutionField) -> analysis.RTReport:
        wave = self.incoming_wave()
        if wave is None:
            raise ConfigError("reflection/transmission extraction needs an incoming wave")
        bp, bm = self.bases()
        return analysis.extract_rt(
            sol, bp, bm, self.grid, self.cellgrid, wave.j_in, self.reference_a_star()
        )


# --- file emission ----------------------------------------------------------


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else repr(float(v)) if isinstance(v, float) else v for v in row])


def _write_json(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _selected_rows(ws: Workspace):
    rows = []
    for side in ("+", "-"):
        rows.extend(ws.index_set(side).rows())
    return rows


def run_band(config: RunConfig, out_dir=None) -> dict:
    """Band samples and the selected outgoing sets, as CSV files."""
    ws = Workspace(config)
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sel = config.selection
    rows = []
    for side in ("+", "-"):
        rows.extend(
            band_select.sample_bands(
                ws.side_medium(side),
                side,
                ws.spec.K,
                ws.cellgrid,
                j1_mesh_size=sel.j1_mesh,
                n_bands=sel.n_bands,
                j2_rows=ws.j2_rows(),
                operator=ws.cell_operator(side),
            )
        )
    band_path = out / "band.csv"
    _write_csv(band_path, BAND_HEADER, rows)
    selected_path = out / "selected.csv"
    _write_csv(selected_path, BAND_HEADER, _selected_rows(ws))
    return {"band": str(band_path), "selected": str(selected_path)}


def _report_payload(ws: Workspace, sol: SolutionField) -> dict:
    bp, bm = ws.bases()
    wave = ws.incoming_wave()
    mode_rows, negative = analysis.refraction_diagnostics(
        sol, bp, bm, ws.grid, j_in=wave.j_in if wave else None
    )
    return {
        "omega": ws.config.omega,
        "delta": ws.config.delta,
        "geometry": ws.config.to_dict()["geometry"],
        "incoming": list(wave.j_in) if wave else None,
        "dimension": int(ws.grid.n0 + bp.n_modes + bm.n_modes),
        "n_bloch": {"plus": int(bp.n_modes), "minus": int(bm.n_modes)},
        "residual": sol.residual,
        "modes": mode_rows,
        "negative_refraction": negative,
        "solver": {k: v for k, v in sol.stats.items() if k != "factor_and_solve_s"},
        "timings": dict(ws.timings),
    }


def run_solve(config: RunConfig, out_dir=None) -> dict:
    """Full scattering pipeline: field table plus a JSON run report."""
    ws = Workspace(config)
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sol = ws.solve()
    table = solve.reconstruct(sol, ws.grid)
    field_path = out / "field.csv"
    _write_csv(field_path, FIELD_HEADER, table.tolist())
    _write_csv(out / "selected.csv", BAND_HEADER, _selected_rows(ws))
    report = _report_payload(ws, sol)
    report_path = out / "report.json"
    _write_json(report_path, report)
    return {"field": str(field_path), "report": str(report_path), "selected": str(out / "selected.csv")}


def run_validate(config: RunConfig, out_dir=None) -> dict:
    """Quantitative R/T comparison against the Fresnel reference."""
    ws = Workspace(config)
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sol = ws.solve()
    report = ws.rt_report(sol)
    payload = report.to_dict()
    payload["a_star"] = ws.reference_a_star()
    payload["residual"] = sol.residual
    payload["delta"] = ws.config.delta
    path = out / "rt_report.json"
    _write_json(path, payload)
    return {"rt_report": str(path), "report": payload}


def run_sweep(config: RunConfig, deltas=None, out_dir=None) -> dict:
    """One validation solve per damping value; errors against Fresnel."""
    ws = Workspace(config)
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if deltas is None:
        deltas = [10.0**-p for p in range(2, 7)]

    def solve_at(delta: float):
        sol = ws.solve(delta=delta)
        return ws.rt_report(sol)

    rows = analysis.delta_sweep(solve_at, deltas)
    path = out / "sweep.csv"
    _write_csv(path, SWEEP_HEADER, rows)
    return {"sweep": str(path), "rows": rows}
