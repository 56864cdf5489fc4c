"""Uniform right-triangle meshes on the truncated wave-guide domain.

The computational domain is the strip (-(R+L)*eps, (R+L)*eps) x [0, eps*K)
with periodic identification in the vertical direction.  Mesh lines are the
multiples of h1 = eps/n1 and h2 = eps/n2, so every periodicity-cell boundary
x in eps*Z is a mesh line and no triangle straddles a cell.  Each h1 x h2
mesh cell is split along its SW-NE diagonal into two right triangles.

Nodes are numbered by region: first the open interior (-eps*R, eps*R), then
the closed right radiation box, then the closed left one.  There is no node
row at x2 = eps*K; hat functions on the bottom row wrap around vertically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GridSpec",
    "Grid",
    "build_grid",
    "element_templates",
    "element_matrices",
    "sample_coefficient",
]


@dataclass(frozen=True)
class GridSpec:
    """Mesh parameters: cell size, region widths in cells, subdivisions."""

    eps: float
    R: int
    L: int
    K: int
    n1: int
    n2: int

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        for name in ("R", "L", "K", "n1", "n2"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @property
    def h1(self) -> float:
        return self.eps / self.n1

    @property
    def h2(self) -> float:
        return self.eps / self.n2

    @property
    def height(self) -> float:
        return self.eps * self.K


def element_templates(h1: float, h2: float):
    """Exact P1 element matrices on the two triangle orientations.

    Returns (stiff, mass, flux), each of shape (2, 3, 3); index 0 is the
    lower triangle (vertices SW, SE, NE), index 1 the upper (SW, NE, NW).
    stiff[o, i, j] = int grad(phi_i).grad(phi_j), with diagonals built as
    negated off-diagonal sums so constants lie in the kernel exactly.
    mass[o, i, j] = int phi_i phi_j.
    flux[o, i, j] = int phi_i d/dx1 phi_j; summing over j gives exactly zero
    (the x1-derivative of the partition of unity).
    """
    area = 0.5 * h1 * h2
    # gradients of the three hats per orientation
    grads = np.array(
        [
            [[-1.0 / h1, 0.0], [1.0 / h1, -1.0 / h2], [0.0, 1.0 / h2]],
            [[0.0, -1.0 / h2], [1.0 / h1, 0.0], [-1.0 / h1, 1.0 / h2]],
        ]
    )
    stiff = area * np.einsum("oid,ojd->oij", grads, grads)
    for o in range(2):
        np.fill_diagonal(stiff[o], 0.0)
        stiff[o][np.diag_indices(3)] = -stiff[o].sum(axis=1)
    mass = (area / 12.0) * (np.ones((3, 3)) + np.eye(3))
    mass = np.broadcast_to(mass, (2, 3, 3)).copy()
    # int phi_i d1 phi_j = (area/3) * (d1 phi_j), constant in i
    flux = np.empty((2, 3, 3))
    for o in range(2):
        flux[o] = np.tile(area / 3.0 * grads[o, :, 0], (3, 1))
    return stiff, mass, flux


@dataclass(frozen=True)
class Grid:
    """Immutable mesh with region-ordered node numbering.

    Node k has integer coordinates (node_i[k], node_r[k]): the physical
    position is x1 = (node_i - (R+L)*n1) * h1, x2 = node_r * h2.  Nodes
    0..n0-1 lie strictly inside (-eps*R, eps*R), the next n_w in the closed
    right box, the last n_w in the closed left box.
    """

    spec: GridSpec
    node_i: np.ndarray
    node_r: np.ndarray
    node_id: np.ndarray  # (nx+1, ny) lookup, ny rows wrap vertically
    tri: np.ndarray  # (n_elem, 3) node ids
    elem_orient: np.ndarray  # (n_elem,) 0 lower / 1 upper
    elem_cell: np.ndarray  # (n_elem, 2) cell indices (ci, cr)
    n0: int
    n_w: int

    @property
    def n_nodes(self) -> int:
        return self.node_i.size

    @property
    def n_elem(self) -> int:
        return self.tri.shape[0]

    @property
    def x1(self) -> np.ndarray:
        s = self.spec
        return (self.node_i - (s.R + s.L) * s.n1) * s.h1

    @property
    def x2(self) -> np.ndarray:
        return self.node_r * self.spec.h2

    @property
    def elem_barycenter(self) -> np.ndarray:
        """(n_elem, 2) barycenters, computed from cell indices (wrap-safe)."""
        s = self.spec
        ci = self.elem_cell[:, 0]
        cr = self.elem_cell[:, 1]
        lower = self.elem_orient == 0
        bx = np.where(lower, 2.0 / 3.0, 1.0 / 3.0)
        by = np.where(lower, 1.0 / 3.0, 2.0 / 3.0)
        x1 = (ci - (s.R + s.L) * s.n1 + bx) * s.h1
        x2 = (cr + by) * s.h2
        return np.column_stack([x1, x2])

    def elem_corner_indices(self):
        """Unwrapped corner indices (ii, rr), each (n_elem, 3).

        Corner positions are (ii - (R+L)*n1) * h1 and rr * h2; the top-row
        elements keep rr = ny there even though the node ids wrap, so
        position-dependent integrands are evaluated on the true geometry.
        """
        ci = self.elem_cell[:, 0]
        cr = self.elem_cell[:, 1]
        lower = (self.elem_orient == 0)[:, None]
        li = np.stack([ci, ci + 1, ci + 1], axis=1)
        lr = np.stack([cr, cr, cr + 1], axis=1)
        ui = np.stack([ci, ci + 1, ci], axis=1)
        ur = np.stack([cr, cr + 1, cr + 1], axis=1)
        return np.where(lower, li, ui), np.where(lower, lr, ur)

    @property
    def i_interface_minus(self) -> int:
        return self.spec.L * self.spec.n1

    @property
    def i_interface_plus(self) -> int:
        return (self.spec.L + 2 * self.spec.R) * self.spec.n1

    def elem_region(self) -> np.ndarray:
        """Per-element region: -1 left box, 0 inner domain, +1 right box."""
        ci = self.elem_cell[:, 0]
        out = np.zeros(self.n_elem, dtype=int)
        out[ci < self.i_interface_minus] = -1
        out[ci >= self.i_interface_plus] = 1
        return out

    def box_nodes(self, side: str) -> np.ndarray:
        """Node ids of the closed radiation box, in storage order."""
        if side == "+":
            return np.arange(self.n0, self.n0 + self.n_w)
        if side == "-":
            return np.arange(self.n0 + self.n_w, self.n0 + 2 * self.n_w)
        raise ValueError(f"side must be '+' or '-', got {side!r}")


def build_grid(spec: GridSpec) -> Grid:
    """Build the region-ordered periodic mesh for a GridSpec."""
    R, L, n1, n2, K = spec.R, spec.L, spec.n1, spec.n2, spec.K
    nx = 2 * (R + L) * n1  # cell columns
    ny = K * n2  # cell rows == node rows (top row wraps)
    i_lo = L * n1  # column of x1 = -eps*R
    i_hi = (L + 2 * R) * n1  # column of x1 = +eps*R

    node_id = np.empty((nx + 1, ny), dtype=np.int64)
    cols_interior = np.arange(i_lo + 1, i_hi)
    cols_plus = np.arange(i_hi, nx + 1)
    cols_minus = np.arange(0, i_lo + 1)
    nid = 0
    order = []
    for cols in (cols_interior, cols_plus, cols_minus):
        for i in cols:
            node_id[i, :] = np.arange(nid, nid + ny)
            nid += ny
            order.append(i)
    n0 = cols_interior.size * ny
    n_w = cols_plus.size * ny

    node_i = np.empty(nid, dtype=np.int64)
    node_r = np.empty(nid, dtype=np.int64)
    for i in range(nx + 1):
        node_i[node_id[i, :]] = i
        node_r[node_id[i, :]] = np.arange(ny)

    # two triangles per cell; vertical neighbor wraps modulo ny
    ci, cr = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ci = ci.ravel()
    cr = cr.ravel()
    cr1 = (cr + 1) % ny
    v00 = node_id[ci, cr]
    v10 = node_id[ci + 1, cr]
    v01 = node_id[ci, cr1]
    v11 = node_id[ci + 1, cr1]
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    tri = np.empty((2 * nx * ny, 3), dtype=np.int64)
    tri[0::2] = lower
    tri[1::2] = upper
    orient = np.tile(np.array([0, 1], dtype=np.int8), nx * ny)
    cells = np.repeat(np.column_stack([ci, cr]), 2, axis=0)

    return Grid(
        spec=spec,
        node_i=node_i,
        node_r=node_r,
        node_id=node_id,
        tri=tri,
        elem_orient=orient,
        elem_cell=cells,
        n0=n0,
        n_w=n_w,
    )


def element_matrices(grid: Grid, elem: int, a_value: float = 1.0):
    """Local (stiffness, mass, flux) for one element; stiffness scaled by a."""
    if a_value <= 0:
        raise ValueError(f"coefficient must be positive, got {a_value}")
    s = grid.spec
    stiff, mass, flux = element_templates(s.h1, s.h2)
    o = grid.elem_orient[elem]
    return a_value * stiff[o], mass[o].copy(), flux[o].copy()


def sample_coefficient(medium, grid: Grid) -> np.ndarray:
    """Per-element coefficient values, evaluated at element barycenters."""
    bary = grid.elem_barycenter
    vals = np.asarray(medium.values(bary[:, 0], bary[:, 1], grid.spec.eps), dtype=float)
    if vals.shape != (grid.n_elem,):
        raise ValueError("medium.values must return one value per element")
    if np.any(vals <= 0):
        raise ValueError("coefficient must be positive on every element")
    return vals
