import numpy as np
import pytest

from blochfem.cell_eigen import BlochMode, CellGrid, CellOperator, group_velocity, poynting, solve_cell
from blochfem.errors import DegenerateBandError
from blochfem.media import ConstantMedium, DiscArrayMedium


def lattice_eigenvalues(j, count):
    """Analytic spectrum |2 pi (j+n)|^2 of the shifted Laplacian, a = 1."""
    j = np.asarray(j, dtype=float)
    vals = []
    for n1 in range(-3, 4):
        for n2 in range(-3, 4):
            k = 2.0 * np.pi * (j + np.array([n1, n2]))
            vals.append(k @ k)
    return np.sort(vals)[:count]


@pytest.fixture(scope="module")
def unit_cell():
    cg = CellGrid(1.0, 20, 20)
    return cg, CellOperator(cg, cg.sample(ConstantMedium(1.0)))


@pytest.fixture(scope="module")
def crystal_cell():
    cg = CellGrid(1.0, 20, 19)
    return cg, CellOperator(cg, cg.sample(DiscArrayMedium()))


def test_shifted_matrix_hermitian_exactly(crystal_cell):
    _, op = crystal_cell
    k, m = op.shifted((0.37, -0.21))
    assert np.abs(k - k.conj().T).max() == 0.0
    assert np.abs(m - m.T).max() == 0.0


def test_zero_shift_real_with_constant_kernel(crystal_cell):
    cg, op = crystal_cell
    k, _ = op.shifted((0.0, 0.0))
    assert np.abs(k.imag).max() == 0.0
    assert np.abs(k @ np.ones(cg.n_nodes)).max() < 1e-12
    modes = solve_cell(cg, op.a_cell, (0.0, 0.0), 1)
    assert abs(modes[0].mu) < 1e-12


def test_conjugation_symmetry_under_j_flip(crystal_cell):
    _, op = crystal_cell
    kp, _ = op.shifted((0.3, 0.12))
    km, _ = op.shifted((-0.3, -0.12))
    assert np.abs(km - kp.conj()).max() == 0.0


def test_homogeneous_first_band_matches_quarter_shift(unit_cell):
    cg, op = unit_cell
    mu = op.eigenvalues((0.25, 0.0), 1)
    assert mu[0] == pytest.approx((np.pi / 2.0) ** 2, rel=1e-10)


def test_homogeneous_band_convergence_order():
    j = (0.25, 0.0)
    exact = lattice_eigenvalues(j, 4)
    errs = []
    for n in (8, 16, 32):
        cg = CellGrid(1.0, n, n)
        op = CellOperator(cg, cg.sample(ConstantMedium(1.0)))
        mu = op.eigenvalues(j, 4)
        errs.append(np.abs(mu - exact).sum())
    order1 = np.log2(errs[0] / errs[1])
    order2 = np.log2(errs[1] / errs[2])
    assert order1 >= 1.9
    assert order2 >= 1.9


def test_modes_sorted_normalized_orthogonal(crystal_cell):
    cg, op = crystal_cell
    modes = solve_cell(cg, op.a_cell, (0.2, 0.1), 5)
    mus = [md.mu for md in modes]
    assert mus == sorted(mus)
    m = op.mass
    for md in modes:
        cell_mean = np.real(np.vdot(md.psi, m @ md.psi)) / cg.eps**2
        assert abs(cell_mean - 1.0) < 1e-10
        # phase convention: largest nodal value real positive
        peak = md.psi[np.argmax(np.abs(md.psi))]
        assert abs(peak.imag) < 1e-12 * abs(peak)
        assert peak.real > 0
    for a in range(len(modes)):
        for b in range(a):
            inner = np.vdot(modes[a].psi, m @ modes[b].psi)
            assert abs(inner) < 1e-8 * cg.eps**2


def test_spectrum_nonnegative(crystal_cell):
    cg, op = crystal_cell
    for j in [(0.0, 0.0), (0.5, 0.5), (0.13, -0.41)]:
        mu = op.eigenvalues(j, 6)
        assert mu.min() > -1e-10


def test_poynting_plane_wave_converges():
    errs = []
    for n in (16, 32):
        cg = CellGrid(1.0, n, n)
        a = np.ones(2 * n * n)
        mode = BlochMode(j=np.array([0.25, 0.0]), m=0, mu=(np.pi / 2) ** 2, psi=np.ones(n * n, complex))
        errs.append(abs(poynting(mode, cg, a) - np.pi / 2.0))
    assert errs[1] < errs[0] / 3.0
    assert errs[1] < 1e-3


def test_poynting_zero_for_real_mode(crystal_cell):
    cg, op = crystal_cell
    mode = solve_cell(cg, op.a_cell, (0.0, 0.0), 1)[0]
    assert abs(op.poynting(mode)) < 1e-12


def test_poynting_flips_under_conjugation(crystal_cell):
    cg, op = crystal_cell
    mode = solve_cell(cg, op.a_cell, (0.31, 0.07), 1, side="+")[0]
    p = op.poynting(mode)
    flipped = BlochMode(j=-mode.j, m=mode.m, mu=mode.mu, psi=np.conj(mode.psi), side="-")
    assert op.poynting(flipped) == pytest.approx(-p, rel=1e-12)


def test_group_velocity_homogeneous_analytic(unit_cell):
    cg, op = unit_cell
    j = np.array([0.2, 0.1])
    vg = group_velocity(cg, op.a_cell, j, 0, operator=op)
    expected = 2.0 * np.pi * j / np.linalg.norm(j)
    assert np.allclose(vg, expected, rtol=1e-4)
    assert np.sign(vg[0]) == np.sign(op.poynting(solve_cell(cg, op.a_cell, j, 1)[0]))


def test_group_velocity_flags_degenerate_band(unit_cell):
    cg, op = unit_cell
    # at j = (1/2, 0) the branches n = (0, 1) and n = (0, -1) coincide
    # exactly, also discretely (x2-reflection symmetry of the mesh)
    with pytest.raises(DegenerateBandError):
        group_velocity(cg, op.a_cell, (0.5, 0.0), 2, operator=op)


def test_poynting_sign_matches_group_velocity_crystal(crystal_cell):
    cg, op = crystal_cell
    for j in [(0.22, 0.071), (-0.228, 0.214)]:
        for m in range(2):
            modes = solve_cell(cg, op.a_cell, j, m + 1)
            p = op.poynting(modes[m])
            try:
                vg = group_velocity(cg, op.a_cell, j, m, operator=op)
            except DegenerateBandError:
                continue
            if abs(vg[0]) > 1e-8 and abs(p) > 1e-8:
                assert np.sign(p) == np.sign(vg[0])
