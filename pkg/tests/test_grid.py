import numpy as np
import pytest

from blochfem.grid import GridSpec, build_grid, element_matrices, element_templates, sample_coefficient
from blochfem.media import ConstantMedium, DiscArrayMedium


def test_smallest_grid_counted_by_hand():
    g = build_grid(GridSpec(eps=1.0, R=1, L=1, K=1, n1=1, n2=1))
    assert g.n_elem == 8  # 2*(R+L)*K*n1*n2*2
    assert g.n0 == 1
    assert g.n_w == 2
    assert g.n_nodes == 5


def test_paper_grid_spacings():
    g = build_grid(GridSpec(eps=1.0, R=15, L=6, K=14, n1=20, n2=19))
    assert g.spec.h1 == pytest.approx(0.05)
    assert g.spec.h2 == pytest.approx(0.0526, abs=1e-4)


def brute_force_region_counts(spec):
    """Independent oracle: enumerate nodes by nested loops and classify."""
    n_int = n_wp = n_wm = 0
    nx = 2 * (spec.R + spec.L) * spec.n1
    for i in range(nx + 1):
        x1 = (i - (spec.R + spec.L) * spec.n1) * spec.h1
        for r in range(spec.K * spec.n2):
            if -spec.eps * spec.R < x1 < spec.eps * spec.R:
                n_int += 1
            if x1 >= spec.eps * spec.R:
                n_wp += 1
            if x1 <= -spec.eps * spec.R:
                n_wm += 1
    return n_int, n_wp, n_wm


@pytest.mark.parametrize("spec", [
    GridSpec(1.0, 2, 1, 3, 2, 3),
    GridSpec(0.5, 3, 2, 2, 4, 2),
    GridSpec(1.0, 15, 6, 14, 20, 19),
])
def test_region_counts_against_node_scan(spec):
    g = build_grid(spec)
    n_int, n_wp, n_wm = brute_force_region_counts(spec)
    assert g.n0 == n_int == (2 * spec.R * spec.n1 - 1) * spec.K * spec.n2
    assert g.n_w == n_wp == n_wm == (spec.L * spec.n1 + 1) * spec.K * spec.n2
    assert g.n_nodes == g.n0 + 2 * g.n_w


def test_node_ordering_by_region():
    spec = GridSpec(1.0, 2, 1, 2, 3, 2)
    g = build_grid(spec)
    x1 = g.x1
    er = spec.eps * spec.R
    assert np.all((x1[: g.n0] > -er) & (x1[: g.n0] < er))
    assert np.all(x1[g.n0 : g.n0 + g.n_w] >= er)
    assert np.all(x1[g.n0 + g.n_w :] <= -er)
    # no node row at the top: hats wrap
    assert g.x2.max() < spec.eps * spec.K


def test_elements_stay_inside_one_cell():
    spec = GridSpec(1.0, 2, 1, 2, 3, 2)
    g = build_grid(spec)
    ii, _ = g.elem_corner_indices()
    cells = ii // spec.n1
    assert np.all(cells.max(axis=1) - cells.min(axis=1) <= 1)
    # stronger: min and max corner lie in the same cell unless on its boundary
    left = ii.min(axis=1)
    assert np.all(ii.max(axis=1) - left <= spec.n1)


def test_translation_invariance_inside_regions():
    spec = GridSpec(1.0, 3, 2, 2, 4, 3)
    g = build_grid(spec)
    # shifting a full cell right inside the inner region maps nodes to nodes
    i0 = g.i_interface_minus + 1
    for i in range(i0, g.i_interface_plus - spec.n1):
        a = g.node_id[i, :]
        b = g.node_id[i + spec.n1, :]
        assert np.all(g.node_i[b] - g.node_i[a] == spec.n1)
        assert np.all(g.node_r[b] == g.node_r[a])


def test_unit_triangle_mass_matrix():
    _, mass, _ = element_templates(1.0, 1.0)
    area = 0.5
    for o in range(2):
        assert np.allclose(np.diag(mass[o]), area / 6.0)
        off = mass[o][~np.eye(3, dtype=bool)]
        assert np.allclose(off, area / 12.0)


def test_stiffness_rows_and_flux_columns_vanish():
    stiff, _, flux = element_templates(0.3, 0.7)
    scale = np.abs(stiff).max()
    assert np.abs(stiff.sum(axis=2)).max() < 1e-15 * scale
    # d1 of the partition of unity: summing over the differentiated slot
    assert np.abs(flux.sum(axis=2)).max() < 1e-15 * np.abs(flux).max()


def test_element_matrices_scaling_and_errors():
    g = build_grid(GridSpec(1.0, 1, 1, 1, 2, 2))
    k1, m1, f1 = element_matrices(g, 0, a_value=1.0)
    k3, m3, f3 = element_matrices(g, 0, a_value=3.0)
    assert np.allclose(k3, 3 * k1)
    assert np.allclose(m3, m1)
    assert np.allclose(f3, f1)
    with pytest.raises(ValueError):
        element_matrices(g, 0, a_value=0.0)


def test_gridspec_rejects_bad_dimensions():
    with pytest.raises(ValueError):
        GridSpec(eps=0.0, R=1, L=1, K=1, n1=1, n2=1)
    with pytest.raises(ValueError):
        GridSpec(eps=1.0, R=0, L=1, K=1, n1=1, n2=1)
    with pytest.raises(ValueError):
        GridSpec(eps=1.0, R=1, L=1, K=1, n1=1, n2=-2)


def test_sample_constant_coefficient():
    g = build_grid(GridSpec(1.0, 1, 1, 1, 4, 4))
    vals = sample_coefficient(ConstantMedium(1.0), g)
    assert np.all(vals == 1.0)


def test_disc_array_point_values():
    # the printed-formula variant: low coefficient inside the discs
    literal = DiscArrayMedium(inside_value=1.0 / 12.0, outside_value=1.0)
    assert literal.values(0.5, 0.0, 1.0) == pytest.approx(1.0 / 12.0)
    # distance from (0.25, 0.25) to the nearest center is ~0.354 > 0.2475
    assert literal.values(0.25, 0.25, 1.0) == pytest.approx(1.0)
    # reference crystal is the complement (air discs in dielectric)
    crystal = DiscArrayMedium()
    assert crystal.values(0.5, 0.0, 1.0) == pytest.approx(1.0)
    assert crystal.values(0.25, 0.25, 1.0) == pytest.approx(1.0 / 12.0)


def test_global_mass_and_stiffness_properties():
    from blochfem.grid import element_templates as templates
    import scipy.sparse as sp

    spec = GridSpec(1.0, 2, 1, 2, 3, 3)
    g = build_grid(spec)
    stiff_t, mass_t, _ = templates(spec.h1, spec.h2)
    rows = np.repeat(g.tri, 3, axis=1).ravel()
    cols = np.tile(g.tri, (1, 3)).ravel()

    mass = sp.coo_matrix((mass_t[g.elem_orient].ravel(), (rows, cols))).toarray()
    stiff = sp.coo_matrix((stiff_t[g.elem_orient].ravel(), (rows, cols))).toarray()
    assert np.allclose(mass, mass.T)
    assert np.all(np.linalg.eigvalsh(mass) > 0)
    assert np.allclose(stiff, stiff.T)
    ev = np.linalg.eigvalsh(stiff)
    assert ev.min() > -1e-12
    assert np.abs(stiff @ np.ones(g.n_nodes)).max() < 1e-12
