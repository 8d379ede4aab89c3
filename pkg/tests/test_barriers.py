import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmsteady import (
    BoxSpec, CalibrationError, ConfigurationError, DomainError, ExponentConfig, build_grid,
    calibrate_C_boundary, calibrate_C_interior, calibrate_constants, calibrate_delta, compute_y,
    compute_y_delta, compute_z, make_boxes, neumann_operator, smallest_eigenpair, verify_subsuper,
)
from gmsteady.barriers import band_source, boundary_inequalities, interior_inequalities
from gmsteady.sparse_solve import cg_solve
from conftest import EXPONENT_SETS
from oracles import Y_HALF, dense_dirichlet_interior, dense_neumann, interior_indices


# --- exponents ------------------------------------------------------------

def _direct_condition(a1, b1, a2, b2):
    return all(x > 0 for x in (a1, b1, a2, b2)) and a1 - b1 >= 0 and a2 - b2 >= 0 \
        and a1 + b1 < 1 and a2 + b2 < 1


@given(st.tuples(*[st.floats(0.0, 1.0, allow_nan=False)] * 4))
@settings(max_examples=300, deadline=None)
def test_exponent_condition_is_exact(q):
    if _direct_condition(*q):
        ExponentConfig(*q)
    else:
        with pytest.raises(ConfigurationError, match="exponent condition violated"):
            ExponentConfig(*q)


def test_exponent_message_names_violation():
    with pytest.raises(ConfigurationError, match=r"alpha1 \+ beta1 = 1.1 >= 1"):
        ExponentConfig(0.9, 0.2, 0.4, 0.2)
    with pytest.raises(ConfigurationError, match="alpha2 - beta2"):
        ExponentConfig(0.4, 0.2, 0.1, 0.2)


# --- barrier fields -------------------------------------------------------

@pytest.mark.parametrize("dim,n", [(1, 33), (1, 257), (2, 17)])
def test_z_is_one(dim, n):
    z = compute_z(build_grid(dim, (0, 1), n))
    assert np.max(np.abs(z - 1)) <= 1e-12
    assert z.min() > 0


def test_neumann_solve_perturbed_rhs_matches_dense():
    g = build_grid(1, (0, 1), 33)
    rhs = 1 + 0.1 * np.sin(2 * np.pi * g.coords[0])
    x = cg_solve(neumann_operator(g), rhs, tol=1e-12)
    ref = np.linalg.solve(dense_neumann([33], [(0, 1)]), rhs)
    assert np.max(np.abs(x - ref)) <= 1e-10


def test_y_closed_form_midpoint():
    g = build_grid(1, (0, 1), 257)
    y = compute_y(g)
    assert abs(y[128] - Y_HALF) <= 1e-4
    assert y[0] == y[-1] == 0.0
    assert np.all(y[1:-1] > 0)


def test_y_below_z_dense():
    n, ext = [33], [(0, 1)]
    g = build_grid(1, (0, 1), 33)
    idx = interior_indices(n)
    y = np.zeros(33)
    y[idx] = np.linalg.solve(dense_dirichlet_interior(n, ext), np.ones(idx.size))
    z = np.linalg.solve(dense_neumann(n, ext), np.ones(33))
    assert np.all(y <= z + 1e-14)
    assert np.all(compute_y(g) <= compute_z(g) + 1e-12)


def test_band_source_sign():
    g = build_grid(1, (0, 1), 101)
    src = band_source(g, 0.05)
    assert src[4] == -1.0  # dist 0.04
    assert src[50] == 1.0
    assert np.all(src[g.boundary_mask] == -1.0)


def test_y_delta_tends_to_y():
    g = build_grid(1, (0, 1), 257)
    y = compute_y(g)
    gaps = [np.max(np.abs(compute_y_delta(g, d) - y)) for d in (0.1, 0.05, 0.025)]
    assert gaps[0] > gaps[1] > gaps[2] > 0


def test_y_delta_half_bound():
    g = build_grid(1, (0, 1), 257)
    assert np.all(compute_y_delta(g, 0.05) >= compute_y(g) / 2)


@pytest.mark.parametrize("delta", [0.0, -0.1, 0.5, 0.7])
def test_y_delta_range(delta):
    with pytest.raises(ConfigurationError):
        compute_y_delta(build_grid(1, (0, 1), 33), delta)


def test_calibrate_delta_1d():
    g = build_grid(1, (0, 1), 257)
    y = compute_y(g)
    delta, yd = calibrate_delta(g, y)
    assert delta <= 0.05
    assert yd[128] >= y[128] / 2
    assert np.all(yd >= y / 2)


def test_calibrate_delta_only_shrinks():
    g = build_grid(2, (0, 1), 33)
    y = compute_y(g)
    first = compute_y_delta(g, 0.05)
    assert not np.all(first >= y / 2)  # the initial guess fails on the square
    delta, yd = calibrate_delta(g, y)
    assert delta < 0.05
    assert np.all(yd >= y / 2)


def test_calibrate_delta_gives_up():
    g = build_grid(2, (0, 1), 33)
    with pytest.raises(CalibrationError):
        calibrate_delta(g, max_halvings=0)


# --- constants ------------------------------------------------------------

def _barrier_inputs(n=257):
    g = build_grid(1, (0, 1), n)
    eig = smallest_eigenpair(neumann_operator(g))
    z, y = compute_z(g), compute_y(g)
    delta, yd = calibrate_delta(g, y)
    return g, eig, z, y, yd, delta


def test_constants_trivial_fields():
    g, eig, z, y, yd, delta = _barrier_inputs()
    b = calibrate_constants(g, eig, z, y, yd, delta)
    assert b.mu_bar == b.mu_under == 1.0
    assert b.c0 == pytest.approx(1 - 1e-12, abs=0) and 0 < b.c0 < 1
    assert b.c1 == 1.0


def test_constant_c_from_closed_form():
    g, eig, z, y, yd, delta = _barrier_inputs()
    b = calibrate_constants(g, eig, z, y, yd, delta)
    # dominated by the centre: d = 0.5, y = 1 - 1/cosh(1/2)
    assert b.c == pytest.approx(0.5 / Y_HALF, rel=1e-4)
    assert b.c == pytest.approx(4.42, abs=0.01)
    d = g.dist[1:-1]
    assert np.all(d / b.c <= y[1:-1] * (1 + 1e-12)) and np.all(y[1:-1] <= b.c * d * (1 + 1e-12))


def test_constants_need_interior():
    g = build_grid(1, (0, 1), 3)
    eig = smallest_eigenpair(neumann_operator(g))
    g_fake = type("G", (), {"interior_mask": np.zeros(3, bool)})()
    with pytest.raises(ConfigurationError):
        calibrate_constants(g_fake, eig, np.ones(3), np.zeros(3), np.zeros(3), 0.1)


def test_C_interior_trivial_case(barriers129):
    b = barriers129[(0.4, 0.2, 0.4, 0.2)]
    exps = ExponentConfig(0.4, 0.2, 0.4, 0.2)
    assert calibrate_C_interior(exps, b, certify=False) == 2.0
    assert calibrate_C_interior(exps, b) == 2.0
    # C = 1 is the hand-reduced threshold: all four margins vanish there
    assert all(abs(m) < 1e-15 for m in interior_inequalities(1.0, exps, b).values())


@pytest.mark.parametrize("exps", EXPONENT_SETS)
def test_C_interior_monotone_in_C(exps, barriers129):
    b = barriers129[exps]
    e = ExponentConfig(*exps)
    C0 = b.C_interior
    for C in (C0, 2 * C0, 4 * C0, 8 * C0):
        assert all(m >= 0 for m in interior_inequalities(C, e, b).values())


def test_C_boundary_closed_form(barriers129, grid129):
    b = barriers129[(0.4, 0.2, 0.4, 0.2)]
    e = ExponentConfig(0.4, 0.2, 0.4, 0.2)
    C = calibrate_C_boundary(e, b, grid129, certify=False)
    assert C == 32.0
    assert C ** 0.4 > 2 ** 0.4 * b.c ** 0.6
    assert (C / 2) ** 0.4 <= 2 ** 0.4 * b.c ** 0.6


@pytest.mark.parametrize("exps", EXPONENT_SETS)
def test_boundary_lower_inequality_nodewise(exps, barriers129, grid129):
    b = barriers129[exps]
    (a1, b1), (a2, b2) = ExponentConfig(*exps).pairs()
    C, c = b.C_boundary, b.c
    d = grid129.dist[grid129.dist > b.delta]
    assert np.all((d / (2 * c * C)) ** (b1 - a1) > 1 / C)
    assert np.all(d ** (b2 - a2) / (2 ** b2 * (C * c) ** (b2 + a2)) > 1 / C)
    assert all(m > 0 for m in boundary_inequalities(C, ExponentConfig(*exps), b, grid129).values())


def test_boundary_band_inequality_sign(barriers129, grid129):
    # inside the band the lower barrier is clamped at zero, so -1/C < 0 <= lower
    b = barriers129[(0.4, 0.2, 0.4, 0.2)]
    lo = make_boxes(b)[1].lower_u
    band = grid129.dist <= b.delta
    assert np.all(lo[band] >= 0) and -1 / b.C_boundary < 0


# --- boxes and certificates ------------------------------------------------

def _const_box(g, lo, hi, label="interior"):
    n = g.num_nodes
    return BoxSpec(g, np.full(n, lo), np.full(n, lo), np.full(n, hi), np.full(n, hi), label)


def test_interior_box_is_constant(barriers129):
    box = make_boxes(barriers129[(0.4, 0.2, 0.4, 0.2)])[0]
    assert np.all(box.lower_u == 0.5) and np.all(box.upper_u == 2.0)
    assert box.contains(np.ones(129), np.ones(129))


def test_boundary_box_vanishes_on_boundary(barriers129, grid129):
    box = make_boxes(barriers129[(0.4, 0.2, 0.4, 0.2)])[1]
    assert np.all(box.upper_u[grid129.boundary_mask] == 0)
    assert np.all(box.lower_u[grid129.boundary_mask] == 0)
    assert np.all(box.lower_u <= box.upper_u)


def test_box_ordering_violation():
    g = build_grid(1, (0, 1), 9)
    with pytest.raises(CalibrationError):
        _const_box(g, 2.0, 1.0)


def test_trivial_interior_certificate_closed_form():
    g = build_grid(1, (0, 1), 33)
    e = ExponentConfig(0.4, 0.2, 0.4, 0.2)
    rep = verify_subsuper(_const_box(g, 0.5, 2.0), e)
    assert rep.passed
    slack = {c.inequality_id: c.worst_slack for c in rep.checks}
    # constant fields: A acts as the identity
    assert slack["sub_u"] == pytest.approx(0.5 ** 0.4 / 2 ** 0.2 - 0.5, abs=1e-14)
    assert slack["sub_v"] == pytest.approx(0.5 ** 0.2 - 0.5, abs=1e-14)
    assert slack["super_u"] == pytest.approx(2 - 2 ** 0.4 / 0.5 ** 0.2, abs=1e-14)
    assert slack["super_v"] == pytest.approx(2 - 2 ** 0.2, abs=1e-14)
    assert all(s > 0 for s in slack.values())


def test_degenerate_box_at_solution_has_zero_slack():
    g = build_grid(1, (0, 1), 33)
    for exps in EXPONENT_SETS:
        rep = verify_subsuper(_const_box(g, 1.0, 1.0), ExponentConfig(*exps))
        assert all(abs(c.worst_slack) <= 1e-12 for c in rep.checks)


def test_unit_box_with_C_one_is_borderline():
    # shrinking the trivial box to C = 1 gives the equality case, not a strict failure
    g = build_grid(1, (0, 1), 33)
    rep = verify_subsuper(_const_box(g, 1.0, 1.0), ExponentConfig(0.4, 0.2, 0.4, 0.2))
    assert max(abs(c.worst_slack) for c in rep.checks) == 0.0


def test_box_above_solution_fails_subsolution():
    g = build_grid(1, (0, 1), 33)
    rep = verify_subsuper(_const_box(g, 1.5, 2.0), ExponentConfig(0.4, 0.2, 0.4, 0.2))
    assert not rep.passed
    bad = {c.inequality_id for c in rep.failing()}
    assert "sub_u" in bad
    worst = min(c.worst_slack for c in rep.checks)
    assert worst == pytest.approx(1.5 ** 0.4 / 2 ** 0.2 - 1.5, abs=1e-14)


def test_certificate_requires_positive_lower():
    g = build_grid(1, (0, 1), 9)
    with pytest.raises(DomainError):
        verify_subsuper(_const_box(g, 0.0, 1.0), ExponentConfig(0.4, 0.2, 0.4, 0.2))


def test_certificate_json():
    g = build_grid(1, (0, 1), 9)
    rep = verify_subsuper(_const_box(g, 0.5, 2.0), ExponentConfig(0.4, 0.2, 0.4, 0.2))
    rows = rep.to_dict()
    assert len(rows) == 4
    assert all(set(r) == {"inequality_id", "worst_slack", "worst_node", "pass"} for r in rows)


@pytest.mark.parametrize("exps", EXPONENT_SETS)
def test_calibrated_boxes_certify(exps, barriers129):
    b = barriers129[exps]
    assert np.all(b.y_delta >= b.y / 2)
    for box in make_boxes(b):
        rep = verify_subsuper(box, ExponentConfig(*exps))
        assert rep.passed, rep.failing()
        assert np.all(box.lower_u <= box.upper_u) and np.all(box.lower_v <= box.upper_v)


@pytest.mark.parametrize("exps", EXPONENT_SETS)
def test_boundary_box_needs_certified_doubling(exps, barriers129, grid129):
    b = barriers129[exps]
    e = ExponentConfig(*exps)
    closed = calibrate_C_boundary(e, b, grid129, certify=False)
    assert b.C_boundary >= closed
    assert b.C_boundary in (16.0, 32.0, 64.0)


def test_barrier_pipeline_2d():
    from gmsteady import build_barriers
    g = build_grid(2, (0, 1), 17)
    t0 = time.perf_counter()
    b = build_barriers(g, ExponentConfig(0.4, 0.2, 0.4, 0.2))
    assert time.perf_counter() - t0 < 10
    for box in make_boxes(b):
        assert verify_subsuper(box, ExponentConfig(0.4, 0.2, 0.4, 0.2)).passed
