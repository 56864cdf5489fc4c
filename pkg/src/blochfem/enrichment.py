"""Radiation-box bases: Bloch modes extended onto the boxes as hat combinations.

Each selected cell mode is continued quasi-periodically onto the closed box
and sampled at the box nodes; the resulting coefficient columns span the
trial space used there.  On the eps-aligned grid, columns with distinct
aligned wave vectors are exactly L2(W)-orthogonal (a geometric sum over the
cell shifts), but selected sets typically cluster in j, so a modified
Gram-Schmidt pass keeps the discrete system well conditioned.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp

from .band_select import IndexSet, SelectedMode
from .cell_eigen import BlochMode
from .errors import ConfigError
from .grid import Grid, element_templates

__all__ = [
    "RadiationBasis",
    "extend_to_box",
    "build_radiation_basis",
    "box_mass_matrix",
    "box_flux_matrix",
    "orthonormalize",
    "expand",
    "plancherel_check",
]

log = logging.getLogger(__name__)

DROP_TOL = 1e-8
GRAM_TOL = 1e-10


def _check_aligned(mode: BlochMode, grid: Grid, psi_size: int):
    s = grid.spec
    if psi_size != s.n1 * s.n2:
        raise ConfigError(
            f"cell grid ({psi_size} nodes) does not match the global subdivisions "
            f"n1*n2 = {s.n1 * s.n2}; Bloch modes must be solved on the aligned cell"
        )


def extend_to_box(mode: BlochMode, grid: Grid, side: str) -> np.ndarray:
    """Nodal values of the quasi-periodically continued mode, zero off the box.

    Box-local coordinates put the lower-left box corner at the origin, so the
    phase factor is exp(2 pi i j.x'/eps) with x' measured from that corner.
    """
    _check_aligned(mode, grid, mode.psi.size)
    s = grid.spec
    ids = grid.box_nodes(side)
    i_local = grid.node_i[ids] - (grid.i_interface_plus if side == "+" else 0)
    r = grid.node_r[ids]
    psi_idx = (i_local % s.n1) * s.n2 + (r % s.n2)
    phase = np.exp(2j * np.pi * (mode.j[0] * i_local / s.n1 + mode.j[1] * r / s.n2))
    out = np.zeros(grid.n_nodes, dtype=complex)
    out[ids] = mode.psi[psi_idx] * phase
    return out


def _box_elements(grid: Grid, side: str) -> np.ndarray:
    want = 1 if side == "+" else -1
    return np.flatnonzero(grid.elem_region() == want)


def _assemble_box(grid: Grid, side: str, template_of_elem) -> sp.csr_matrix:
    """Assemble a P1 form over box elements in box-local node indices."""
    elems = _box_elements(grid, side)
    offset = grid.box_nodes(side)[0]
    tri = grid.tri[elems] - offset
    if tri.min() < 0 or tri.max() >= grid.n_w:
        raise AssertionError("box elements reference nodes outside the box")
    vals = template_of_elem(elems)
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    mat = sp.coo_matrix((vals.ravel(), (rows, cols)), shape=(grid.n_w, grid.n_w))
    return mat.tocsr()


def box_mass_matrix(grid: Grid, side: str) -> sp.csr_matrix:
    """Exact P1 mass matrix of L2(W) on the box nodes."""
    _, mass_t, _ = element_templates(grid.spec.h1, grid.spec.h2)

    def values(elems):
        return mass_t[grid.elem_orient[elems]]

    return _assemble_box(grid, side, values)


def box_flux_matrix(grid: Grid, side: str, a_elem: np.ndarray) -> sp.csr_matrix:
    """Coefficient-weighted flux form int_W a phi_k d1 phi_l on the box nodes."""
    _, _, flux_t = element_templates(grid.spec.h1, grid.spec.h2)

    def values(elems):
        return a_elem[elems, None, None] * flux_t[grid.elem_orient[elems]]

    return _assemble_box(grid, side, values)


@dataclass(frozen=True)
class RadiationBasis:
    """Basis of one radiation box in box-node coordinates.

    kappa columns are the current basis (orthonormalized or raw); kappa_raw
    keeps the physical cell-normalized modes of the surviving entries, and
    gram_applied records the triangular change of basis kappa_raw = kappa @ R.
    """

    side: str
    modes: IndexSet
    kappa: np.ndarray
    kappa_raw: np.ndarray
    mass: sp.csr_matrix
    orthonormalized: bool = False
    gram_applied: np.ndarray | None = None

    @property
    def n_modes(self) -> int:
        return self.kappa.shape[1]

    def entry(self, i: int) -> SelectedMode:
        return self.modes.entries[i]


def build_radiation_basis(index_set: IndexSet, grid: Grid) -> RadiationBasis:
    """Extend the selected modes onto their box and bundle the box geometry."""
    ids = grid.box_nodes(index_set.side)
    cols = []
    for e in index_set.entries:
        full = extend_to_box(e.mode, grid, index_set.side)
        cols.append(full[ids])
    kappa = np.column_stack(cols) if cols else np.zeros((grid.n_w, 0), dtype=complex)
    mass = box_mass_matrix(grid, index_set.side)
    return RadiationBasis(
        side=index_set.side,
        modes=index_set,
        kappa=kappa,
        kappa_raw=kappa.copy(),
        mass=mass,
    )


def orthonormalize(basis: RadiationBasis, box_mass: sp.csr_matrix | None = None) -> RadiationBasis:
    """L2(W)-orthonormalize the columns by modified Gram-Schmidt.

    One re-orthogonalization pass is applied; columns whose remainder falls
    below DROP_TOL of their original norm are dropped with a warning.  All
    columns collapsing is an error.
    """
    m = basis.mass if box_mass is None else box_mass
    ncols = basis.kappa.shape[1]
    if ncols == 0:
        return replace(basis, orthonormalized=True, gram_applied=np.zeros((0, 0), dtype=complex))

    def dot(x, y):
        return complex(np.vdot(x, m @ y))

    q: list[np.ndarray] = []
    keep: list[int] = []
    r_cols: list[np.ndarray] = []
    for i in range(ncols):
        v = basis.kappa[:, i].copy()
        norm0 = np.sqrt(dot(v, v).real)
        coeffs = np.zeros(ncols, dtype=complex)
        for _ in range(2):  # MGS with one re-orthogonalization pass
            for kq, qk in enumerate(q):
                c = dot(qk, v)
                v -= c * qk
                coeffs[keep[kq]] += c
        norm = np.sqrt(max(dot(v, v).real, 0.0))
        if norm0 == 0.0 or norm < DROP_TOL * norm0:
            log.warning(
                "dropping near-dependent radiation basis column %d on side %s "
                "(remainder %.2e of original)", i, basis.side, norm / max(norm0, 1e-300),
            )
            continue
        q.append(v / norm)
        keep.append(i)
        coeffs[i] = norm
        r_cols.append(coeffs)
    if not q:
        raise ConfigError(f"all radiation basis columns on side {basis.side} are dependent")

    kappa = np.column_stack(q)
    r = np.column_stack([c[np.array(keep)] for c in r_cols])  # raw[kept] = Q @ R
    kept_entries = [basis.modes.entries[i] for i in keep]
    new_index = IndexSet(side=basis.modes.side, entries=kept_entries, c0=basis.modes.c0)
    return RadiationBasis(
        side=basis.side,
        modes=new_index,
        kappa=kappa,
        kappa_raw=basis.kappa_raw[:, keep],
        mass=m,
        orthonormalized=True,
        gram_applied=r,
    )


def expand(field: np.ndarray, basis: RadiationBasis, use_raw: bool = False):
    """Least-squares expansion of box nodal values in the basis columns.

    Returns (alpha, residual_norm) where residual is measured in L2(W).
    With an orthonormalized basis this reduces to plain inner products; the
    raw (pre-Gram) columns go through the Gram system, which tolerates the
    near-collinear clusters the selection produces.
    """
    cols = basis.kappa_raw if use_raw else basis.kappa
    m = basis.mass
    c = cols.conj().T @ (m @ field)
    if basis.orthonormalized and not use_raw:
        alpha = c
    else:
        gram = cols.conj().T @ (m @ cols)
        alpha, *_ = np.linalg.lstsq(gram, c, rcond=None)
    r = field - cols @ alpha
    res = np.sqrt(max(np.real(np.vdot(r, m @ r)), 0.0))
    return alpha, float(res)


def cell_norms(basis: RadiationBasis, grid: Grid) -> np.ndarray:
    """Discrete L2 norm of each raw column over one periodicity cell of the
    box, scaled by the cell size, so a unit-amplitude plane wave gives 1.

    By the cell-shift structure, the box norm of a column is exactly
    sqrt(L*K) times its one-cell norm on the aligned grid.
    """
    s = grid.spec
    want = 1 if basis.side == "+" else -1
    elems = np.flatnonzero((grid.elem_region() == want) & (grid.elem_cell[:, 1] < s.n2))
    ci = grid.elem_cell[elems, 0]
    elems = elems[ci < ci.min() + s.n1]
    offset = grid.box_nodes(basis.side)[0]
    tri = grid.tri[elems] - offset
    _, mass_t, _ = element_templates(s.h1, s.h2)
    mass_loc = mass_t[grid.elem_orient[elems]]
    out = np.empty(basis.kappa_raw.shape[1])
    for c in range(out.size):
        u = basis.kappa_raw[tri, c]
        val = np.einsum("ek,ekl,el->", np.conj(u), mass_loc, u).real
        out[c] = np.sqrt(max(val, 0.0)) / s.eps
    return out


def plancherel_check(field: np.ndarray, basis: RadiationBasis, grid: Grid):
    """Both sides of the discrete Plancherel identity on the box.

    The raw columns are rescaled to unit discrete cell norm, so for fields
    in their span with distinct aligned wave vectors,
    ||field||^2_{L2(W)} = eps^2*L*K * sum |alpha|^2 holds exactly (the
    cross terms cancel through the cell-shift geometric sum).
    """
    s = grid.spec
    lhs = float(np.real(np.vdot(field, basis.mass @ field)))
    if basis.kappa_raw.shape[1] == 0:
        return lhs, 0.0
    norms = cell_norms(basis, grid)
    scaled = replace(basis, kappa_raw=basis.kappa_raw / norms)
    alpha, _ = expand(field, scaled, use_raw=True)
    rhs = float(s.eps**2 * s.L * s.K * np.sum(np.abs(alpha) ** 2))
    return lhs, rhs
