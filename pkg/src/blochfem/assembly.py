"""Assembly of the discrete truncated problem.

The trial space couples interior hat functions with the radiation-box bases,
so every system matrix is an arrowhead: a sparse hat-hat block bordered by
dense Bloch columns.  All Bloch-involving integrals reduce to hat-function
integrals through the coefficient representation of the box bases: with T
mapping trial coordinates to hat coordinates, each block is T^H (hat form) T.

The variational form weights the stiffness with the continuous piecewise
linear cutoff (1 inside the inner domain, falling to 0 across each box), and
carries first-order flux terms on the boxes with opposite signs.  Damping
delta acts on the mass restricted to the inner domain only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .enrichment import RadiationBasis
from .errors import ConfigError
from .grid import Grid, GridSpec, element_templates

__all__ = [
    "CutoffTheta",
    "theta_cutoff",
    "IncomingWave",
    "EnrichedSystem",
    "hat_matrices",
    "assemble",
    "source_load",
    "incoming_source",
    "beta_form",
]


@dataclass(frozen=True)
class CutoffTheta:
    """Piecewise linear ramp: 1 on |x1| <= eps*R, 0 beyond eps*(R+L)."""

    eps: float
    R: int
    L: int

    def __call__(self, x1):
        x1 = np.abs(np.asarray(x1, dtype=float))
        hi = self.eps * (self.R + self.L)
        return np.clip((hi - x1) / (self.eps * self.L), 0.0, 1.0)


def theta_cutoff(x1, spec: GridSpec):
    """Cutoff value(s) at horizontal position(s) x1."""
    return CutoffTheta(spec.eps, spec.R, spec.L)(x1)


@dataclass(frozen=True)
class IncomingWave:
    """Plane wave e^{i j_in.x} fed in from the left half, with ramp steepness d."""

    j_in: tuple
    amplitude: complex = 1.0
    d: float = 1.0

    def field(self, x1, x2):
        j = np.asarray(self.j_in, dtype=float)
        return self.amplitude * np.exp(1j * (j[0] * np.asarray(x1) + j[1] * np.asarray(x2)))


def _ramp(wave: IncomingWave, spec: GridSpec, x1):
    """Smoothed step used to turn the incoming wave into a volume source.

    theta = 1 left of the inner domain, ~0 at the interface x1 = 0; on
    [-eps*R, 0) it is (1 - tanh(d(x1 + eps*R/2)))/2, continuous up to
    exp(-d*eps*R) at the left joint.
    """
    x1 = np.asarray(x1, dtype=float)
    er = spec.eps * spec.R
    z = wave.d * (x1 + 0.5 * er)
    mid = 0.5 * (1.0 - np.tanh(z))
    return np.where(x1 < -er, 1.0, np.where(x1 >= 0.0, 0.0, mid))


def _ramp_derivatives(wave: IncomingWave, spec: GridSpec, x1):
    x1 = np.asarray(x1, dtype=float)
    er = spec.eps * spec.R
    z = wave.d * (x1 + 0.5 * er)
    sech2 = 1.0 / np.cosh(z) ** 2
    inside = (x1 >= -er) & (x1 < 0.0)
    d1 = np.where(inside, -0.5 * wave.d * sech2, 0.0)
    d2 = np.where(inside, wave.d**2 * sech2 * np.tanh(z), 0.0)
    return d1, d2


def theta_incoming(wave: IncomingWave, spec: GridSpec, x1):
    return _ramp(wave, spec, x1)


@dataclass(frozen=True)
class EnrichedSystem:
    """Matrices and load of the discrete problem over the enriched space.

    The unknown ordering is: interior hats (n0), then the right-box basis,
    then the left-box basis.  mass_inner is the plain inner-domain mass,
    kept for energy diagnostics.
    """

    a_mat: sp.csr_matrix
    b_mat: sp.csr_matrix
    m_delta: sp.csr_matrix
    mass_inner: sp.csr_matrix
    load: np.ndarray
    omega: float
    delta: float
    grid: Grid
    basis_plus: RadiationBasis
    basis_minus: RadiationBasis

    @property
    def n0(self) -> int:
        return self.grid.n0

    @property
    def dim(self) -> int:
        return self.a_mat.shape[0]

    def matrix(self) -> sp.csr_matrix:
        return (self.a_mat - self.b_mat - self.omega**2 * self.m_delta).tocsr()


def _cubic_mass_tensor(area: float) -> np.ndarray:
    """t3[k, i, j] = int_T phi_k phi_i phi_j, exact on any triangle."""
    t3 = np.full((3, 3, 3), area / 60.0)
    for k in range(3):
        for i in range(3):
            for j in range(3):
                same = (k == i) + (i == j) + (j == k)
                if same == 3:
                    t3[k, i, j] = area / 10.0
                elif same == 1:
                    t3[k, i, j] = area / 30.0
    return t3


def hat_matrices(grid: Grid, a_elem: np.ndarray):
    """Global hat-level forms: cutoff-weighted stiffness and mass, signed flux.

    Returns (stiff_theta, mass_in, mass_out_theta, flux_signed) as CSR over
    all grid nodes.  The stiffness integrand is linear per element, so the
    cutoff enters through its barycenter value; the box mass integrand is
    cubic and uses the exact three-function tensor with the cutoff's corner
    values (the cutoff is linear on every box element by grid alignment).
    flux_signed carries the box flux terms with their signs and the
    1/(eps*L) scale; it vanishes on inner-domain elements.
    """
    s = grid.spec
    stiff_t, mass_t, flux_t = element_templates(s.h1, s.h2)
    orient = grid.elem_orient
    region = grid.elem_region()
    bary = grid.elem_barycenter
    theta = theta_cutoff(bary[:, 0], s)

    def scatter(vals):
        rows = np.repeat(grid.tri, 3, axis=1).ravel()
        cols = np.tile(grid.tri, (1, 3)).ravel()
        mat = sp.coo_matrix((vals.ravel(), (rows, cols)), shape=(grid.n_nodes, grid.n_nodes))
        return mat.tocsr()

    w_stiff = (a_elem * theta)[:, None, None]
    stiff = scatter(w_stiff * stiff_t[orient])

    inner = (region == 0).astype(float)[:, None, None]
    mass_in = scatter(inner * mass_t[orient])

    ii, _ = grid.elem_corner_indices()
    corner_x1 = (ii - (s.R + s.L) * s.n1) * s.h1
    theta_corners = theta_cutoff(corner_x1, s)
    t3 = _cubic_mass_tensor(0.5 * s.h1 * s.h2)
    mass_out_loc = np.einsum("ek,kij->eij", theta_corners, t3)
    mass_out = scatter((1.0 - inner) * mass_out_loc)

    sign = np.where(region == 1, 1.0, np.where(region == -1, -1.0, 0.0))
    w_flux = (sign * a_elem / (s.eps * s.L))[:, None, None]
    flux = scatter(w_flux * flux_t[orient])
    return stiff, mass_in, mass_out, flux


def _basis_map(grid: Grid, basis_plus: RadiationBasis, basis_minus: RadiationBasis) -> sp.csr_matrix:
    """Sparse map T from trial coordinates to hat coordinates.

    Node ids are contiguous per region, so T is block diagonal: identity on
    the interior hats, then the two coefficient blocks of the box bases.
    """
    blocks = [[sp.eye(grid.n0, dtype=complex, format="csr"), None, None]]
    blocks.append([None, sp.csr_matrix(basis_plus.kappa), None])
    blocks.append([None, None, sp.csr_matrix(basis_minus.kappa)])
    return sp.bmat(blocks, format="csr")


@dataclass(frozen=True)
class TrialBlocks:
    """Delta-independent matrices of the enriched space, for reuse in sweeps."""

    a_mat: sp.csr_matrix
    b_mat: sp.csr_matrix
    m_in: sp.csr_matrix
    m_out: sp.csr_matrix
    basis_map: sp.csr_matrix


def assemble_blocks(
    grid: Grid,
    a_elem: np.ndarray,
    basis_plus: RadiationBasis,
    basis_minus: RadiationBasis,
) -> TrialBlocks:
    """All delta-independent forms projected onto the enriched trial space."""
    if a_elem.shape != (grid.n_elem,):
        raise ConfigError("a_elem must hold one positive value per element")
    if basis_plus.side != "+" or basis_minus.side != "-":
        raise ConfigError("bases passed to assemble are swapped")
    for b in (basis_plus, basis_minus):
        if b.kappa.shape[0] != grid.n_w:
            raise ConfigError("radiation basis was built on a different grid")
    stiff, mass_in, mass_out, flux = hat_matrices(grid, a_elem)
    t = _basis_map(grid, basis_plus, basis_minus)
    th = t.conj().T.tocsr()
    return TrialBlocks(
        a_mat=(th @ (stiff @ t)).tocsr(),
        b_mat=(th @ (flux @ t)).tocsr(),
        m_in=(th @ (mass_in @ t)).tocsr(),
        m_out=(th @ (mass_out @ t)).tocsr(),
        basis_map=t,
    )


def system_from_blocks(
    blocks: TrialBlocks,
    grid: Grid,
    omega: float,
    delta: float,
    basis_plus: RadiationBasis,
    basis_minus: RadiationBasis,
    load: np.ndarray | None = None,
) -> EnrichedSystem:
    if delta < 0:
        raise ConfigError("delta must be nonnegative")
    m_delta = (blocks.m_in + blocks.m_out + 1j * delta * blocks.m_in).tocsr()
    if load is None:
        f = np.zeros(blocks.a_mat.shape[0], dtype=complex)
    else:
        if load.shape != (grid.n_nodes,):
            raise ConfigError("load must be a hat-level vector over all grid nodes")
        f = blocks.basis_map.conj().T @ load
    return EnrichedSystem(
        a_mat=blocks.a_mat,
        b_mat=blocks.b_mat,
        m_delta=m_delta,
        mass_inner=blocks.m_in,
        load=f,
        omega=omega,
        delta=delta,
        grid=grid,
        basis_plus=basis_plus,
        basis_minus=basis_minus,
    )


def assemble(
    grid: Grid,
    a_elem: np.ndarray,
    omega: float,
    delta: float,
    basis_plus: RadiationBasis,
    basis_minus: RadiationBasis,
    load: np.ndarray | None = None,
) -> EnrichedSystem:
    """Assemble the discrete system over hats + radiation bases.

    `load` is the hat-level load vector (one entry per grid node), already
    integrated against the hat functions; it is mapped onto the enriched
    space here.
    """
    blocks = assemble_blocks(grid, a_elem, basis_plus, basis_minus)
    return system_from_blocks(blocks, grid, omega, delta, basis_plus, basis_minus, load)


_QUAD_MIDPOINTS = np.array([[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]])


def _element_quadrature_load(grid: Grid, elems: np.ndarray, fn) -> np.ndarray:
    """Hat-level load from int f*phi over the given elements.

    Edge-midpoint quadrature (exact for quadratics); fn maps (x1, x2) arrays
    to values.
    """
    s = grid.spec
    ii, rr = grid.elem_corner_indices()
    corners_x1 = (ii[elems] - (s.R + s.L) * s.n1) * s.h1
    corners_x2 = rr[elems] * s.h2

    area = 0.5 * s.h1 * s.h2
    load = np.zeros(grid.n_nodes, dtype=complex)
    for q in range(3):
        lam = _QUAD_MIDPOINTS[q]
        xq = corners_x1 @ lam
        yq = corners_x2 @ lam
        fq = np.asarray(fn(xq, yq)) * (area / 3.0)
        for v in range(3):
            if lam[v] == 0.0:
                continue
            np.add.at(load, grid.tri[elems, v], fq * lam[v])
    return load


def source_load(f, grid: Grid) -> np.ndarray:
    """Hat-level load of a volume source supported in the inner domain."""
    elems = np.flatnonzero(grid.elem_region() == 0)
    return _element_quadrature_load(grid, elems, f)


def incoming_source(wave: IncomingWave, grid: Grid, a_elem: np.ndarray):
    """Transform an incoming plane wave into a volume source.

    Returns (load, offset): the hat-level load of
    2 a grad(u_in).grad(theta) + u_in a lap(theta), supported where the ramp
    varies, and the nodal add-back field u_in * theta used to reconstruct the
    physical solution from the transformed unknown.
    """
    s = grid.spec
    theta0 = 0.5 * (1.0 - np.tanh(wave.d * 0.5 * s.eps * s.R))
    if theta0 > 1e-5:
        raise ConfigError(
            f"ramp steepness d={wave.d} leaves theta(0) = {theta0:.2e} > 1e-5; "
            "increase d or eps*R"
        )
    bary = grid.elem_barycenter
    sup = (bary[:, 0] > -s.eps * s.R) & (bary[:, 0] < 0.0)
    vals = a_elem[sup]
    if vals.size and (vals.max() - vals.min()) > 1e-12 * max(vals.max(), 1.0):
        raise ConfigError("coefficient must be constant on the support of the incoming ramp")
    a0 = float(vals[0]) if vals.size else 1.0

    j = np.asarray(wave.j_in, dtype=float)

    def extra(x1, x2):
        u = wave.field(x1, x2)
        d1, d2 = _ramp_derivatives(wave, s, x1)
        return 2.0 * a0 * (1j * j[0]) * u * d1 + u * a0 * d2

    load = _element_quadrature_load(grid, np.flatnonzero(sup), extra)
    offset = wave.field(grid.x1, grid.x2) * _ramp(wave, s, grid.x1)
    return load, offset


def beta_form(system: EnrichedSystem, u: np.ndarray, v: np.ndarray) -> complex:
    """The problem's sesquilinear form through the assembled matrices.

    Conjugate-linear in u, linear in v; the assembled matrix equation is the
    complex conjugate of the variational identity, so beta(u, v) = (S u)^H v.
    """
    return complex(np.vdot(system.matrix() @ u, v))
