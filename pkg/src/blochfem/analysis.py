"""Physical post-processing: effective media, Snell/Fresnel references, R/T.

The homogenized coefficient comes from the curvature of the lowest band at
the zone center.  For interfaces between homogeneous media the transmitted
wave vector and the reflection/transmission amplitudes have closed forms,
which serve as the quantitative reference for the scattering solver: the
measured amplitudes are the dominant radiation-basis coefficients after
rescaling the corresponding mode to unit norm per periodicity cell.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .cell_eigen import CellGrid, CellOperator
from .enrichment import RadiationBasis, cell_norms, expand
from .errors import NumericalError
from .grid import Grid
from .solve import SolutionField

__all__ = [
    "RTReport",
    "homogenized_a",
    "snell_fresnel",
    "extract_rt",
    "delta_sweep",
    "refraction_diagnostics",
    "interface_flux_jump",
]

log = logging.getLogger(__name__)

RICHARDSON_RTOL = 1e-3


def homogenized_a(a_cell: np.ndarray, cellgrid: CellGrid, dj: float = 2e-3) -> float:
    """Effective coefficient from the lowest-band curvature at the zone center.

    a* = (eps/(2 pi))^2 / 2 * d^2/dj1^2 mu_0 at j = 0, by second-order central
    differences with step dj; the dj/2 stencil must agree within 1e-3
    relative or a NumericalError is raised.
    """
    if not (1e-4 <= dj <= 1e-2):
        raise ValueError(f"dj must lie in [1e-4, 1e-2], got {dj}")
    op = CellOperator(cellgrid, a_cell)

    def mu0(j1: float) -> float:
        evals = op.eigenvalues((j1, 0.0), 2)
        if evals[1] - evals[0] < 1e-10:
            raise NumericalError(f"band 0 not separated at j1={j1}: {evals[:2]}")
        return float(evals[0])

    mu_center = mu0(0.0)

    def curvature(step: float) -> float:
        return (mu0(step) - 2.0 * mu_center + mu0(-step)) / step**2

    c1 = curvature(dj)
    c2 = curvature(0.5 * dj)
    if abs(c1 - c2) > RICHARDSON_RTOL * abs(c2):
        raise NumericalError(
            f"band curvature not converged: dj={dj} gives {c1:.6g}, dj/2 gives {c2:.6g}"
        )
    scale = 0.5 * (cellgrid.eps / (2.0 * np.pi)) ** 2
    return scale * c1


def snell_fresnel(j_in, a_star: float):
    """Transmitted wave vector and reflection/transmission amplitudes.

    For the interface a=1 (left) | a=a* (right): the vertical component is
    conserved, |j_out| = |j_in| / sqrt(a*), and
    R = (j1_in - a* j1_out) / (j1_in + a* j1_out), T = 1 + R.
    """
    if a_star <= 0:
        raise ValueError("a_star must be positive")
    j_in = np.asarray(j_in, dtype=float)
    norm_out_sq = (j_in @ j_in) / a_star
    j1_sq = norm_out_sq - j_in[1] ** 2
    if j1_sq <= 0:
        raise ValueError(
            f"transmitted wave is evanescent (total internal reflection): "
            f"|j_out|^2 = {norm_out_sq:.6g} <= j2^2 = {j_in[1]**2:.6g}"
        )
    j_out = np.array([np.sqrt(j1_sq), j_in[1]])
    r = (j_in[0] - a_star * j_out[0]) / (j_in[0] + a_star * j_out[0])
    return j_out, float(r), float(1.0 + r)


@dataclass(frozen=True)
class RTReport:
    """Measured vs reference reflection/transmission for one scattering run."""

    r_ref: float
    t_ref: float
    alpha_refl: float
    alpha_out: float
    j_out: np.ndarray
    snell_ratio: float
    err_r: float
    err_t: float
    lambda_out: dict
    lambda_refl: dict

    def to_dict(self) -> dict:
        return {
            "R_ref": self.r_ref,
            "T_ref": self.t_ref,
            "alpha_refl": self.alpha_refl,
            "alpha_out": self.alpha_out,
            "j_out": [float(v) for v in self.j_out],
            "snell_ratio": self.snell_ratio,
            "err_R": self.err_r,
            "err_T": self.err_t,
            "lambda_out": self.lambda_out,
            "lambda_refl": self.lambda_refl,
        }


def _mode_coefficients(solution_alpha: np.ndarray, basis: RadiationBasis, grid: Grid) -> np.ndarray:
    """Coefficients w.r.t. the physical modes, rescaled to unit cell norm."""
    if basis.n_modes == 0:
        return np.zeros(0, dtype=complex)
    trace = basis.kappa @ solution_alpha
    alpha_raw, res = expand(trace, basis, use_raw=True)
    if res > 1e-6 * max(np.linalg.norm(trace), 1e-300):
        log.warning("box trace not fully represented by raw modes (residual %.2e)", res)
    return alpha_raw * cell_norms(basis, grid)


def _dominant(alpha: np.ndarray, basis: RadiationBasis) -> int:
    """Index of the strictly largest |alpha|; ties break toward smaller |j1|
    then smaller band index."""
    mags = np.abs(alpha)
    best = float(mags.max())
    tied = [i for i in range(mags.size) if best - mags[i] <= 1e-12]
    if len(tied) > 1:
        entries = basis.modes.entries
        tied.sort(key=lambda i: (abs(entries[i].mode.j[0]), entries[i].mode.m))
        log.info("dominant-mode tie broken toward %s", entries[tied[0]].mode.j)
    return tied[0]


def _physical_wavevector(entry, cellgrid: CellGrid) -> np.ndarray:
    """2 pi (j + n*)/eps with n* the dominant Fourier branch of the mode."""
    psi = entry.mode.psi.reshape(cellgrid.m1, cellgrid.m2)
    spec = np.fft.fft2(psi)
    n1, n2 = np.unravel_index(np.argmax(np.abs(spec)), spec.shape)
    branch = np.array(
        [np.fft.fftfreq(cellgrid.m1)[n1] * cellgrid.m1, np.fft.fftfreq(cellgrid.m2)[n2] * cellgrid.m2]
    )
    return 2.0 * np.pi * (entry.mode.j + branch) / cellgrid.eps


def extract_rt(
    solution: SolutionField,
    basis_plus: RadiationBasis,
    basis_minus: RadiationBasis,
    grid: Grid,
    cellgrid: CellGrid,
    j_in,
    a_star: float,
) -> RTReport:
    """Reflection/transmission amplitudes of a plane-wave scattering run.

    The dominant coefficient on each side approximates R and T after the
    unit-cell renormalization of the corresponding mode; the transmitted
    wave vector is the dominant Fourier branch of the dominant mode.
    """
    if basis_plus.n_modes == 0 or basis_minus.n_modes == 0:
        raise ValueError("extract_rt needs nonempty bases on both sides")
    j_in = np.asarray(j_in, dtype=float)
    j_out_ref, r_ref, t_ref = snell_fresnel(j_in, a_star)

    alpha_p = _mode_coefficients(solution.alpha_plus, basis_plus, grid)
    alpha_m = _mode_coefficients(solution.alpha_minus, basis_minus, grid)
    i_out = _dominant(alpha_p, basis_plus)
    i_refl = _dominant(alpha_m, basis_minus)
    e_out = basis_plus.entry(i_out)
    e_refl = basis_minus.entry(i_refl)
    j_out = _physical_wavevector(e_out, cellgrid)
    snell = float(np.linalg.norm(j_in) / np.linalg.norm(j_out))
    a_out = float(np.abs(alpha_p[i_out]))
    a_refl = float(np.abs(alpha_m[i_refl]))
    return RTReport(
        r_ref=r_ref,
        t_ref=t_ref,
        alpha_refl=a_refl,
        alpha_out=a_out,
        j_out=j_out,
        snell_ratio=snell,
        err_r=abs(r_ref - a_refl),
        err_t=abs(t_ref - a_out),
        lambda_out={"j": [float(v) for v in e_out.mode.j], "m": int(e_out.mode.m)},
        lambda_refl={"j": [float(v) for v in e_refl.mode.j], "m": int(e_refl.mode.m)},
    )


def delta_sweep(solve_fn, deltas) -> list[tuple[float, float, float]]:
    """Run solve_fn(delta) -> RTReport for each damping value.

    deltas must be positive and descending; rows are (delta, err_R, err_T).
    """
    deltas = [float(d) for d in deltas]
    if any(d <= 0 for d in deltas):
        raise ValueError("deltas must be positive")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("deltas must be strictly descending")
    rows = []
    for d in deltas:
        report = solve_fn(d)
        rows.append((d, report.err_r, report.err_t))
    return rows


def refraction_diagnostics(
    solution: SolutionField,
    basis_plus: RadiationBasis,
    basis_minus: RadiationBasis,
    grid: Grid,
    j_in=None,
):
    """Per-mode table (side, j, vg, |coefficient|) and the refraction flag.

    Negative refraction is flagged when the incident wave travels upward
    (j_in2 > 0) while every transmitted mode carries energy downward
    (vg2 < 0).
    """
    rows = []
    for basis, alpha in (
        (basis_plus, solution.alpha_plus),
        (basis_minus, solution.alpha_minus),
    ):
        coeffs = _mode_coefficients(alpha, basis, grid)
        for i, e in enumerate(basis.modes.entries):
            rows.append(
                {
                    "side": basis.side,
                    "j1": float(e.mode.j[0]),
                    "j2": float(e.mode.j[1]),
                    "m": int(e.mode.m),
                    "vg1": float(e.vg[0]),
                    "vg2": float(e.vg[1]),
                    "coef_mod": float(np.abs(coeffs[i])) if coeffs.size else 0.0,
                }
            )
    plus_rows = [r for r in rows if r["side"] == "+"]
    negative = bool(
        plus_rows
        and all(r["vg2"] < 0 for r in plus_rows)
        and (j_in is None or float(np.asarray(j_in)[1]) > 0)
    )
    return rows, negative


def interface_flux_jump(
    solution: SolutionField,
    grid: Grid,
    a_elem: np.ndarray,
    basis: RadiationBasis,
) -> np.ndarray:
    """Jump functionals of the horizontal flux across the box interface.

    Returns int over the interface of [a d1(u)] * conj(U_lambda) for each
    basis column; for consistent solutions these vanish to discretization
    accuracy (a diagnostic of the weak flux condition, not a hard gate).
    """
    s = grid.spec
    side = basis.side
    i_face = grid.i_interface_plus if side == "+" else grid.i_interface_minus
    u = solution.nodal
    ny = s.K * s.n2
    # element-wise constant a*d1(u) on the two strips touching the interface
    grads = {
        0: np.array([-1.0 / s.h1, 1.0 / s.h1, 0.0]),
        1: np.array([0.0, 1.0 / s.h1, -1.0 / s.h1]),
    }

    def d1_on_line(ci: int, orient: int) -> np.ndarray:
        """a * d1 u per row on the triangles of cell column ci whose edge
        lies on the interface (lower triangles for the left strip, upper for
        the right strip)."""
        mask = (grid.elem_cell[:, 0] == ci) & (grid.elem_orient == orient)
        elems = np.flatnonzero(mask)
        order = np.argsort(grid.elem_cell[elems, 1])
        elems = elems[order]
        vals = (u[grid.tri[elems]] * grads[orient]).sum(axis=1) * a_elem[elems]
        return vals

    left = d1_on_line(i_face - 1, 0)  # lower triangle's vertical leg on the line
    right = d1_on_line(i_face, 1)  # upper triangle's vertical leg on the line
    jump = right - left
    rows = np.arange(ny)
    top = (rows + 1) % ny
    ids = grid.node_id[i_face, :]
    out = np.empty(basis.n_modes, dtype=complex)
    for c in range(basis.n_modes):
        kap = np.zeros(grid.n_nodes, dtype=complex)
        kap[grid.box_nodes(side)] = basis.kappa_raw[:, c]
        w = np.conj(kap[ids[rows]] + kap[ids[top]]) * 0.5 * s.h2
        out[c] = np.sum(jump * w)
    return out
