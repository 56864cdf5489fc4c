import numpy as np
import pytest

from blochfem.pipeline import Workspace
from blochfem.solve import SolutionField, reconstruct, solve_system

from conftest import small_homogeneous_config


def test_zero_source_gives_zero_field():
    cfg = small_homogeneous_config()
    cfg = type(cfg)(
        geometry=cfg.geometry,
        medium_minus=cfg.medium_minus,
        medium_plus=cfg.medium_plus,
        omega=cfg.omega,
        delta=cfg.delta,
        source=type(cfg.source)(kind="none"),
        selection=cfg.selection,
    )
    ws = Workspace(cfg)
    sol = ws.solve()
    assert np.abs(sol.coords).max() == 0.0
    assert np.abs(sol.nodal).max() == 0.0
    assert sol.residual == 0.0


def test_no_interface_full_transmission(homogeneous_run):
    ws, sol = homogeneous_run
    assert sol.residual < 1e-8
    rep = ws.rt_report(sol)
    assert rep.alpha_refl < 1e-2
    assert abs(rep.alpha_out - 1.0) < 1e-2
    assert rep.snell_ratio == pytest.approx(1.0, abs=1e-6)


def test_solution_field_nodal_matches_boxes(homogeneous_run):
    ws, sol = homogeneous_run
    grid = ws.grid
    bp, bm = ws.bases()
    assert np.allclose(
        sol.nodal[grid.box_nodes("+")],
        bp.kappa @ sol.alpha_plus + ws.loads()[1][grid.box_nodes("+")],
    )


def test_resolve_deterministic(homogeneous_run):
    ws, _ = homogeneous_run
    s1 = ws.solve()
    s2 = ws.solve()
    assert np.array_equal(s1.coords, s2.coords)
    assert np.array_equal(s1.nodal, s2.nodal)


def test_linearity_doubling_load():
    from blochfem import solve as solve_mod

    cfg = small_homogeneous_config()
    ws = Workspace(cfg)
    system = ws.system()
    sol1 = solve_system(system)
    doubled = type(system)(
        a_mat=system.a_mat,
        b_mat=system.b_mat,
        m_delta=system.m_delta,
        mass_inner=system.mass_inner,
        load=2.0 * system.load,
        omega=system.omega,
        delta=system.delta,
        grid=system.grid,
        basis_plus=system.basis_plus,
        basis_minus=system.basis_minus,
    )
    sol2 = solve_system(doubled)
    assert np.array_equal(sol2.coords, 2.0 * sol1.coords)


def test_delta_zero_still_solves():
    ws = Workspace(small_homogeneous_config(delta=0.0))
    sol = ws.solve()
    rep = ws.rt_report(sol)
    assert abs(rep.alpha_out - 1.0) < 1e-2
    assert rep.alpha_refl < 1e-2


def test_energy_bookkeeping_gaussian_source():
    # one outgoing mode per side (K=2 keeps a single admissible row in range)
    from blochfem.runconfig import GeometryConfig, RunConfig, SelectionConfig, SourceConfig

    geo = GeometryConfig(eps=1.0, R=6, L=3, K=2, n1=12, n2=12)
    omega = 2 * np.pi * 0.2
    cfg = RunConfig(
        geometry=geo,
        medium_minus={"kind": "constant", "value": 1.0},
        medium_plus={"kind": "constant", "value": 1.0},
        omega=omega,
        delta=1e-3,
        source=SourceConfig(kind="gaussian", strength=2.0, decay=3.0, center=(-1.5, 0.5)),
        selection=SelectionConfig(j1_mesh=64, n_bands=3, j2_rows="all"),
    )
    ws = Workspace(cfg)
    bp, bm = ws.bases()
    assert bp.n_modes == 1 and bm.n_modes == 1

    # use the raw (pre-orthonormalization) bases so the Bloch coordinates
    # are the physical expansion coefficients of the identity
    from blochfem import assembly, enrichment

    bp_raw = enrichment.build_radiation_basis(ws.index_set("+"), ws.grid)
    bm_raw = enrichment.build_radiation_basis(ws.index_set("-"), ws.grid)
    load, _ = ws.loads()
    system = assembly.assemble(ws.grid, ws.a_elem, omega, cfg.delta, bp_raw, bm_raw, load=load)
    sol = solve_system(system)

    s = ws.spec
    p_plus = ws.index_set("+").entries[0].poynting
    p_minus = ws.index_set("-").entries[0].poynting
    lhs = (
        cfg.delta * omega**2 * np.real(np.vdot(sol.coords, system.mass_inner @ sol.coords))
        + s.eps * s.K * abs(sol.alpha_plus[0]) ** 2 * p_plus
        - s.eps * s.K * abs(sol.alpha_minus[0]) ** 2 * p_minus
    )
    rhs = np.imag(np.vdot(system.load, sol.coords))
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_reconstruct_table(homogeneous_run):
    ws, sol = homogeneous_run
    table = reconstruct(sol, ws.grid)
    assert table.shape == (ws.grid.n_nodes, 5)
    assert np.allclose(table[:, 4], np.hypot(table[:, 2], table[:, 3]))

    ones = SolutionField(
        coords=np.zeros(1),
        nodal=np.ones(ws.grid.n_nodes, complex),
        alpha_plus=np.zeros(0),
        alpha_minus=np.zeros(0),
        residual=0.0,
    )
    t1 = reconstruct(ones, ws.grid)
    assert np.allclose(t1[:, 2], 1.0)
    assert np.allclose(t1[:, 3], 0.0)
    assert np.allclose(t1[:, 4], 1.0)


def test_vertical_wrap_connectivity(homogeneous_run):
    ws, _ = homogeneous_run
    grid = ws.grid
    ny = grid.spec.K * grid.spec.n2
    top_elems = np.flatnonzero(grid.elem_cell[:, 1] == ny - 1)
    wrapped = grid.tri[top_elems]
    # top-row elements reference bottom-row nodes: the interpolant at
    # x2 = eps*K reproduces the values at x2 = 0
    assert np.any(grid.node_r[wrapped] == 0)
    for e in top_elems[:4]:
        rows = grid.node_r[grid.tri[e]]
        assert set(rows) <= {0, ny - 1}
