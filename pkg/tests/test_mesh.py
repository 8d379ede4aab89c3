import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmsteady import (
    ConfigurationError, boundary_trace_max, boundary_trace_min, build_grid, c1_norm,
    cg_solve, dirichlet_operator, neumann_operator, rayleigh_quotient,
)
from gmsteady.mesh import Grid
from oracles import dense_dirichlet_interior, dense_neumann, interior_indices, y_closed_form


def test_grid_1d_spacing_and_distance():
    g = build_grid(1, (0, 1), 5)
    assert g.h == (0.25,)
    assert np.flatnonzero(g.boundary_mask).tolist() == [0, 4]
    assert np.array_equal(g.dist, [0, 0.25, 0.5, 0.25, 0])


def test_grid_2d_center_and_perimeter():
    g = build_grid(2, (0, 1), 3)
    assert g.dist[4] == 0.5
    perimeter = [k for k in range(9) if k != 4]
    assert g.boundary_mask[perimeter].all()
    assert np.all(g.dist[perimeter] == 0)


@pytest.mark.parametrize("args", [(1, (0, 1), 2), (1, (1, 1), 5), (1, (1, 0), 5), (3, (0, 1), 5),
                                  (2, [(0, 1), (0, 0)], 5), (2, (0, 1), [5, 2])])
def test_grid_rejects_bad_configuration(args):
    with pytest.raises(ConfigurationError):
        build_grid(*args)


@given(nx=st.integers(3, 12), ny=st.integers(3, 12),
       lx=st.floats(0.1, 5), ly=st.floats(0.1, 5))
@settings(max_examples=40, deadline=None)
def test_distance_field_is_exact(nx, ny, lx, ly):
    g = build_grid(2, [(0, lx), (0, ly)], [nx, ny])
    x, y = g.points[:, 0], g.points[:, 1]
    expected = np.minimum.reduce([x, lx - x, y, ly - y])
    expected[g.boundary_mask] = 0.0
    assert np.allclose(g.dist, expected, atol=1e-12)
    assert np.all(g.dist >= 0)
    assert np.all(g.dist[g.boundary_mask] == 0)
    assert np.all(g.dist[~g.boundary_mask] > 0)


def test_grid_json_roundtrip():
    g = build_grid(2, [(0, 1), (0, 2)], [5, 7])
    g2 = Grid.from_dict(g.to_dict())
    assert g2.to_dict() == g.to_dict()
    assert np.array_equal(g2.points, g.points)


def test_grid_is_read_only():
    g = build_grid(1, (0, 1), 5)
    with pytest.raises(ValueError):
        g.dist[1] = 3.0


def test_neumann_stencil_1d():
    g = build_grid(1, (0, 1), 5)
    M = neumann_operator(g).matrix.toarray()
    h2 = 0.25 ** 2
    assert np.allclose(M[2, 1:4], [-1 / h2, 2 / h2 + 1, -1 / h2], rtol=0, atol=1e-12)
    assert M[0, 1] == -2 / h2 and M[4, 3] == -2 / h2
    assert np.count_nonzero(M[0]) == 2


@pytest.mark.parametrize("n,extents", [([5], [(0, 1)]), ([9], [(0, 2)]), ([4, 5], [(0, 1), (0, 2)]),
                                       ([6, 6], [(0, 1), (0, 1)])])
def test_neumann_matches_ghost_node_oracle(n, extents):
    g = build_grid(len(n), extents, n)
    A = neumann_operator(g)
    ref = dense_neumann(n, extents)
    assert np.allclose(A.matrix.toarray(), ref, rtol=1e-14, atol=1e-9)
    u = np.random.default_rng(1).standard_normal(g.num_nodes)
    assert np.allclose(A.apply(u), ref @ u, rtol=1e-12, atol=1e-8)


@given(n=st.integers(3, 40), lo=st.floats(-3, 3), length=st.floats(0.05, 10), dim=st.sampled_from([1, 2]))
@settings(max_examples=40, deadline=None)
def test_neumann_maps_ones_to_ones(n, lo, length, dim):
    g = build_grid(dim, (lo, lo + length), min(n, 15) if dim == 2 else n)
    A = neumann_operator(g)
    ones = np.ones(g.num_nodes)
    assert np.array_equal(A.apply(ones), ones)


def test_neumann_row_sums_exact_on_dyadic_grid():
    g = build_grid(2, (0, 1), 17)
    assert np.array_equal(neumann_operator(g).matrix @ np.ones(g.num_nodes), np.ones(g.num_nodes))


@pytest.mark.parametrize("dim,n", [(1, 33), (2, 9)])
def test_operators_symmetric_positive_definite(dim, n):
    g = build_grid(dim, (0, 1), n)
    for op in (neumann_operator(g), dirichlet_operator(g)):
        S = op.sym
        assert (abs(S - S.T)).max() == 0
        assert np.all(S.diagonal() > 0)
        rng = np.random.default_rng(0)
        for _ in range(20):
            w = rng.standard_normal(g.num_nodes)
            assert rayleigh_quotient(op, w) >= 1.0 - 1e-12


def test_dirichlet_matches_dense_oracle():
    n, ext = [7, 6], [(0, 1), (0, 2)]
    g = build_grid(2, ext, n)
    D = dirichlet_operator(g)
    assert np.allclose(D.sym.toarray(), dense_dirichlet_interior(n, ext), rtol=1e-14)
    assert np.array_equal(D.unknowns, interior_indices(n))


def test_dirichlet_closed_form_and_boundary():
    g = build_grid(1, (0, 1), 257)
    y = cg_solve(dirichlet_operator(g), np.ones(g.num_nodes), tol=1e-10)
    assert np.max(np.abs(y - y_closed_form(g.coords[0]))) < 1e-4
    assert y[0] == 0.0 and y[-1] == 0.0


def test_dirichlet_full_matrix_has_identity_boundary_rows():
    g = build_grid(1, (0, 1), 9)
    M = dirichlet_operator(g).matrix.toarray()
    assert np.array_equal(M[0], np.eye(9)[0]) and np.array_equal(M[-1], np.eye(9)[-1])


@given(seed=st.integers(0, 10_000), n=st.integers(3, 65))
@settings(max_examples=25, deadline=None)
def test_discrete_maximum_principle(seed, n):
    g = build_grid(1, (0, 1), n)
    f = np.random.default_rng(seed).uniform(0, 1, n)
    u = np.linalg.solve(neumann_operator(g).matrix.toarray(), f)
    assert np.all(u >= -1e-12)


def test_dirichlet_refinement_order():
    errs, hs = [], []
    for n in (33, 65, 129, 257):
        g = build_grid(1, (0, 1), n)
        y = cg_solve(dirichlet_operator(g), np.ones(n), tol=1e-12)
        errs.append(np.max(np.abs(y - y_closed_form(g.coords[0]))))
        hs.append(g.h[0])
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert abs(slope - 2.0) <= 0.2
    assert all(a / b > 3.6 for a, b in zip(errs, errs[1:]))


def test_boundary_traces():
    g = build_grid(2, (0, 1), 9)
    assert boundary_trace_max(g, np.ones(g.num_nodes)) == 1.0
    assert boundary_trace_max(g, g.dist) == 0.0
    y = cg_solve(dirichlet_operator(g), np.ones(g.num_nodes))
    assert boundary_trace_max(g, y) == 0.0
    assert boundary_trace_min(g, -2 * np.ones(g.num_nodes)) == -2.0


def test_c1_norm_of_linear_ramp():
    g = build_grid(1, (0, 2), 5)
    assert c1_norm(g, g.coords[0]) == pytest.approx(2.0 + 1.0)
    g2 = build_grid(2, [(0, 1), (0, 1)], [3, 5])
    vals = 3.0 * g2.points[:, 1]
    assert c1_norm(g2, vals) == pytest.approx(3.0 + 3.0)


@pytest.mark.parametrize("dim,n", [(1, 17), (2, 7)])
def test_apply_agrees_with_assembled_matrix(dim, n):
    g = build_grid(dim, [(0, 1), (0, 3)][:dim], n)
    u = np.random.default_rng(3).standard_normal(g.num_nodes)
    for op in (neumann_operator(g), dirichlet_operator(g)):
        ref = op.matrix @ u
        assert np.allclose(op.apply(u), ref, rtol=1e-13, atol=1e-10 * np.abs(ref).max())
