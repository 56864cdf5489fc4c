"""Direct solution of the assembled system and field reconstruction.

The system matrix is an arrowhead; the sparse hat block is factorized once
(SuperLU) and the small dense Bloch corner is eliminated through its Schur
complement.  The same factorization then back-substitutes the hat unknowns,
so repeated solves are bit-identical.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import EnrichedSystem
from .errors import NumericalError
from .grid import Grid

__all__ = ["SolutionField", "solve_system", "reconstruct"]

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class SolutionField:
    """Solution of one run: trial coordinates, nodal values, diagnostics.

    `nodal` holds the complex field at every grid node, including the
    Bloch contributions mapped through the box bases and, for incoming-wave
    runs, the add-back of the ramped incident field.
    """

    coords: np.ndarray
    nodal: np.ndarray
    alpha_plus: np.ndarray
    alpha_minus: np.ndarray
    residual: float
    stats: dict = field(default_factory=dict)


def solve_system(system: EnrichedSystem, offset: np.ndarray | None = None) -> SolutionField:
    """Solve the assembled system; optionally add a nodal offset field back.

    Raises NumericalError on singular factorization or when the relative
    residual exceeds RESIDUAL_TOL (for delta = 0 a near-resonant inner block
    surfaces here rather than returning garbage).
    """
    s = system.matrix().tocsc()
    f = system.load
    n0 = system.n0
    nbp = system.basis_plus.n_modes
    nbm = system.basis_minus.n_modes
    n = s.shape[0]
    stats: dict = {"dim": n, "n0": n0, "n_bloch": nbp + nbm}

    if not np.any(f):
        coords = np.zeros(n, dtype=complex)
        return _finish(system, coords, 0.0, stats, offset)

    t0 = time.perf_counter()
    h = s[:n0, :n0]
    e = s[:n0, n0:].tocsc()
    g = s[n0:, :n0].tocsr()
    d = s[n0:, n0:].toarray()
    try:
        lu = spla.splu(h)
    except RuntimeError as exc:
        raise NumericalError(f"hat-block factorization failed (dim {n0}): {exc}") from exc
    u_diag = np.abs(lu.U.diagonal())
    cond_est = float(u_diag.max() / u_diag.min()) if u_diag.min() > 0 else np.inf
    stats["cond_estimate"] = cond_est
    stats["lu_nnz"] = int(lu.nnz)

    nb = nbp + nbm
    schur = d.copy()
    for c in range(nb):
        ec = e[:, c].toarray().ravel()
        schur[:, c] -= g @ lu.solve(ec)
    y = lu.solve(f[:n0])
    rhs_b = f[n0:] - g @ y
    try:
        u_bloch = np.linalg.solve(schur, rhs_b) if nb else rhs_b[:0]
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Bloch Schur complement singular ({nb} modes): {exc}") from exc
    u_hat = lu.solve(f[:n0] - e @ u_bloch) if nb else y
    coords = np.concatenate([u_hat, u_bloch])
    stats["factor_and_solve_s"] = time.perf_counter() - t0

    fnorm = np.linalg.norm(f)
    res = float(np.linalg.norm(s @ coords - f) / fnorm) if fnorm > 0 else 0.0
    if res > RESIDUAL_TOL:
        raise NumericalError(
            f"relative residual {res:.3e} exceeds {RESIDUAL_TOL:.0e} "
            f"(condition estimate {cond_est:.3e}); the system may be resonant"
        )
    return _finish(system, coords, res, stats, offset)


def _finish(system, coords, res, stats, offset=None) -> SolutionField:
    grid = system.grid
    n0 = system.n0
    nbp = system.basis_plus.n_modes
    alpha_plus = coords[n0 : n0 + nbp]
    alpha_minus = coords[n0 + nbp :]
    nodal = np.zeros(grid.n_nodes, dtype=complex)
    nodal[:n0] = coords[:n0]
    if nbp:
        nodal[grid.box_nodes("+")] = system.basis_plus.kappa @ alpha_plus
    if alpha_minus.size:
        nodal[grid.box_nodes("-")] = system.basis_minus.kappa @ alpha_minus
    if offset is not None:
        nodal = nodal + offset
    return SolutionField(
        coords=coords,
        nodal=nodal,
        alpha_plus=alpha_plus,
        alpha_minus=alpha_minus,
        residual=res,
        stats=stats,
    )


def reconstruct(solution: SolutionField, grid: Grid) -> np.ndarray:
    """Per-node field table: columns (x1, x2, Re u, Im u, |u|)."""
    u = solution.nodal
    return np.column_stack([grid.x1, grid.x2, u.real, u.imag, np.abs(u)])
