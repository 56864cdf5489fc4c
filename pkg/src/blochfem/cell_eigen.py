"""Shifted Bloch eigenproblems on the doubly periodic unit cell.

For a wave vector j in the zone B = (-1/2, 1/2]^2 the operator acts on
cell-periodic functions as -(grad + i*s) . a (grad + i*s) with the shift
s = 2*pi*j/eps.  Its P1 discretization is assembled from exactly integrated
hat-function products, giving a Hermitian pencil (K_j, M).  Eigenpairs feed
the radiation bases; Poynting numbers and group velocities classify them as
left- or right-going.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateBandError, EigenSolveError
from .grid import element_templates

__all__ = [
    "CellGrid",
    "BlochMode",
    "CellOperator",
    "assemble_shifted",
    "solve_cell",
    "poynting",
    "group_velocity",
]

DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class CellGrid:
    """Right-triangle mesh on Y_eps = (0, eps)^2, periodic in both directions.

    Node (i, r) with i < m1, r < m2 has id i*m2 + r; the right and top edges
    wrap.  Triangles store both the wrapped node ids (for matrix assembly)
    and the unwrapped corner indices (for quadrature of quasi-periodic
    integrands, where the phase must be evaluated at the true coordinate).
    """

    eps: float
    m1: int
    m2: int

    def __post_init__(self):
        if self.eps <= 0 or self.m1 < 1 or self.m2 < 1:
            raise ValueError("CellGrid requires eps > 0 and m1, m2 >= 1")

    @property
    def n_nodes(self) -> int:
        return self.m1 * self.m2

    @property
    def h1(self) -> float:
        return self.eps / self.m1

    @property
    def h2(self) -> float:
        return self.eps / self.m2

    def _corners(self):
        """Unwrapped corner indices (n_elem, 3, 2) and orientations."""
        ci, cr = np.meshgrid(np.arange(self.m1), np.arange(self.m2), indexing="ij")
        ci = ci.ravel()
        cr = cr.ravel()
        lower = np.stack([np.stack([ci, cr], -1), np.stack([ci + 1, cr], -1), np.stack([ci + 1, cr + 1], -1)], axis=1)
        upper = np.stack([np.stack([ci, cr], -1), np.stack([ci + 1, cr + 1], -1), np.stack([ci, cr + 1], -1)], axis=1)
        corners = np.empty((2 * self.m1 * self.m2, 3, 2), dtype=np.int64)
        corners[0::2] = lower
        corners[1::2] = upper
        orient = np.tile(np.array([0, 1], dtype=np.int8), self.m1 * self.m2)
        return corners, orient

    def corners_and_ids(self):
        corners, orient = self._corners()
        ids = (corners[:, :, 0] % self.m1) * self.m2 + (corners[:, :, 1] % self.m2)
        return corners, ids, orient

    @property
    def elem_barycenter(self) -> np.ndarray:
        corners, _, orient = self.corners_and_ids()
        # mean of the (unwrapped) corner positions
        b1 = corners[:, :, 0].mean(axis=1) * self.h1
        b2 = corners[:, :, 1].mean(axis=1) * self.h2
        return np.column_stack([b1, b2])

    def sample(self, medium) -> np.ndarray:
        """Per-element coefficient on the cell, barycenter sampled."""
        bary = self.elem_barycenter
        vals = np.asarray(medium.values(bary[:, 0], bary[:, 1], self.eps), dtype=float)
        if np.any(vals <= 0):
            raise ValueError("cell coefficient must be positive")
        return vals


@dataclass(frozen=True)
class BlochMode:
    """One cell eigenpair: wave vector j, band index m, eigenvalue mu.

    psi holds the nodal values of the periodic factor, normalized so the
    cell mean of |psi|^2 is one; the phase is fixed by making the largest
    nodal value real positive.
    """

    j: np.ndarray
    m: int
    mu: float
    psi: np.ndarray
    side: str = "+"


class CellOperator:
    """Precomputed j-independent pieces of the shifted cell operator."""

    def __init__(self, cellgrid: CellGrid, a_cell: np.ndarray):
        self.cellgrid = cellgrid
        self.a_cell = np.asarray(a_cell, dtype=float)
        if self.a_cell.shape != (2 * cellgrid.m1 * cellgrid.m2,):
            raise ValueError("a_cell must hold one value per cell element")
        n = cellgrid.n_nodes
        stiff_t, mass_t, flux_t = element_templates(cellgrid.h1, cellgrid.h2)
        corners, ids, orient = cellgrid.corners_and_ids()
        self._corners = corners
        self._ids = ids
        self._orient = orient

        self.stiff_a = np.zeros((n, n))
        self.mass_a = np.zeros((n, n))
        self.mass = np.zeros((n, n))
        c1 = np.zeros((n, n))
        c2 = np.zeros((n, n))
        rows = np.repeat(ids, 3, axis=1).reshape(-1, 3, 3)
        cols = np.tile(ids, (1, 3)).reshape(-1, 3, 3)
        a = self.a_cell[:, None, None]
        np.add.at(self.stiff_a, (rows, cols), a * stiff_t[orient])
        np.add.at(self.mass_a, (rows, cols), a * mass_t[orient])
        np.add.at(self.mass, (rows, cols), np.broadcast_to(mass_t[orient], rows.shape))
        np.add.at(c1, (rows, cols), a * flux_t[orient])
        np.add.at(c2, (rows, cols), a * self._flux_x2_templates()[orient])
        # antisymmetric shift couplings: i*(C^T - C) is Hermitian exactly
        self._d1 = c1.T - c1
        self._d2 = c2.T - c2
        self.flux1_templates = flux_t

    def _flux_x2_templates(self) -> np.ndarray:
        """int phi_i d/dx2 phi_j on both orientations."""
        g = self.cellgrid
        area = 0.5 * g.h1 * g.h2
        grads = np.array(
            [
                [[-1.0 / g.h1, 0.0], [1.0 / g.h1, -1.0 / g.h2], [0.0, 1.0 / g.h2]],
                [[0.0, -1.0 / g.h2], [1.0 / g.h1, 0.0], [-1.0 / g.h1, 1.0 / g.h2]],
            ]
        )
        out = np.empty((2, 3, 3))
        for o in range(2):
            out[o] = np.tile(area / 3.0 * grads[o, :, 1], (3, 1))
        return out

    def shifted(self, j) -> tuple[np.ndarray, np.ndarray]:
        """Hermitian pencil (K_j, M) for wave vector j."""
        j = np.asarray(j, dtype=float)
        s = 2.0 * np.pi * j / self.cellgrid.eps
        k = self.stiff_a + (s @ s) * self.mass_a + 1j * (s[0] * self._d1 + s[1] * self._d2)
        return k, self.mass

    def eigenvalues(self, j, n_bands: int) -> np.ndarray:
        k, m = self.shifted(j)
        n = k.shape[0]
        if n_bands > n:
            raise ValueError(f"requested {n_bands} bands from a {n}-dof cell")
        try:
            if n_bands <= n // 4:
                return sla.eigh(k, m, eigvals_only=True, subset_by_index=(0, n_bands - 1))
            return sla.eigh(k, m, eigvals_only=True)[:n_bands]
        except sla.LinAlgError as exc:  # pragma: no cover - solver failure path
            raise EigenSolveError(f"cell eigensolve failed at j={tuple(j)}, size {n}: {exc}") from exc

    def modes(self, j, n_bands: int, side: str = "+") -> list[BlochMode]:
        k, m = self.shifted(j)
        n = k.shape[0]
        if n_bands > n:
            raise ValueError(f"requested {n_bands} bands from a {n}-dof cell")
        try:
            mu, vec = sla.eigh(k, m, subset_by_index=(0, n_bands - 1))
        except sla.LinAlgError as exc:  # pragma: no cover
            raise EigenSolveError(f"cell eigensolve failed at j={tuple(j)}, size {n}: {exc}") from exc
        eps = self.cellgrid.eps
        out = []
        j = np.asarray(j, dtype=float)
        for band in range(n_bands):
            v = vec[:, band]
            # Rayleigh quotient sharpens the eigenvalue (its error is
            # quadratic in the eigenvector error), which matters for mu ~ 0
            mu_rq = float(np.real(np.vdot(v, k @ v)) / np.real(np.vdot(v, m @ v)))
            psi = v * eps  # M-orthonormal -> cell mean |psi|^2 = 1
            pk = np.argmax(np.abs(psi))
            phase = psi[pk] / abs(psi[pk])
            psi = psi * np.conj(phase)
            out.append(BlochMode(j=j.copy(), m=band, mu=mu_rq, psi=psi, side=side))
        return out

    def poynting(self, mode: BlochMode) -> float:
        """Horizontal Poynting number by exact P1 quadrature on the cell."""
        u = self._quasi_periodic_values(mode)
        fl = self.flux1_templates[self._orient] * self.a_cell[:, None, None]
        integ = np.einsum("ek,ekl,el->", np.conj(u), fl, u)
        return float(np.imag(integ) / self.cellgrid.eps**2)

    def _quasi_periodic_values(self, mode: BlochMode) -> np.ndarray:
        """Nodal values of psi * exp(2 pi i j.x / eps) per element corner.

        The periodic factor comes from the wrapped node, the phase from the
        unwrapped corner position, so elements touching the cell edge see
        the quasi-periodically continued field.
        """
        g = self.cellgrid
        frac1 = self._corners[:, :, 0] / g.m1
        frac2 = self._corners[:, :, 1] / g.m2
        phase = np.exp(2j * np.pi * (mode.j[0] * frac1 + mode.j[1] * frac2))
        return mode.psi[self._ids] * phase


def assemble_shifted(cellgrid: CellGrid, a_cell: np.ndarray, j) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian matrices (K_j, M) of the shifted operator in the P1 basis."""
    return CellOperator(cellgrid, a_cell).shifted(j)


def solve_cell(cellgrid: CellGrid, a_cell: np.ndarray, j, n_bands: int, side: str = "+") -> list[BlochMode]:
    """Lowest n_bands eigenpairs at wave vector j, normalized and sorted."""
    return CellOperator(cellgrid, a_cell).modes(j, n_bands, side=side)


def poynting(mode: BlochMode, cellgrid: CellGrid, a_cell: np.ndarray) -> float:
    """Cell-averaged horizontal energy flux of a Bloch mode."""
    return CellOperator(cellgrid, a_cell).poynting(mode)


def group_velocity(
    cellgrid: CellGrid,
    a_cell: np.ndarray,
    j,
    m: int,
    dj: float = 1e-3,
    operator: CellOperator | None = None,
) -> np.ndarray:
    """Central finite difference of sqrt(mu_m) over j, band-matched.

    Each stencil point is re-solved; the band is identified by eigenvalue
    proximity to mu_m(j).  Raises DegenerateBandError when the band is not
    separated from its neighbors at j, or when matching is ambiguous.
    """
    op = operator if operator is not None else CellOperator(cellgrid, a_cell)
    j = np.asarray(j, dtype=float)
    n_solve = min(m + 3, op.cellgrid.n_nodes)
    mu_all = op.eigenvalues(j, n_solve)
    mu_m = mu_all[m]
    if mu_m <= 0:
        raise DegenerateBandError(f"band {m} at j={tuple(j)} has nonpositive mu={mu_m}")
    gap = np.inf
    if m > 0:
        gap = min(gap, mu_m - mu_all[m - 1])
    if m + 1 < n_solve:
        gap = min(gap, mu_all[m + 1] - mu_m)
    if gap <= DEGENERACY_TOL * max(1.0, abs(mu_m)):
        raise DegenerateBandError(f"band {m} at j={tuple(j)} degenerate (gap {gap:.2e})")

    vg = np.empty(2)
    for d in range(2):
        step = np.zeros(2)
        step[d] = dj
        roots = []
        for sign in (+1.0, -1.0):
            evals = op.eigenvalues(j + sign * step, n_solve)
            idx = int(np.argmin(np.abs(evals - mu_m)))
            if abs(evals[idx] - mu_m) > 0.5 * gap + 10.0 * dj * np.sqrt(mu_m) * 4.0 * np.pi:
                raise DegenerateBandError(
                    f"band matching failed at j={tuple(j + sign * step)} for band {m}"
                )
            roots.append(np.sqrt(max(evals[idx], 0.0)))
        vg[d] = (roots[0] - roots[1]) / (2.0 * dj)
    return vg
