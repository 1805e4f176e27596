"""Discrete calculus against closed forms on the annulus."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leraylab.calculus import (
    annulus_integral,
    circle_average,
    circle_values,
    curl,
    d_x,
    d_y,
    dirichlet_integral,
    divergence,
    gradient,
    laplacian,
    velocity_from_stream,
)
from leraylab.fields import ScalarField, VectorField, build_grid


def _grids(r_outer=4.0):
    return [build_grid(n, m, r_outer) for n, m in ((33, 32), (65, 64), (129, 128))]


def _sup_orders(errs):
    errs = np.asarray(errs)
    return np.log2(errs[:-1] / errs[1:])


def test_cartesian_derivatives_second_order():
    f = lambda x, y: np.sin(x) * np.exp(0.3 * y)
    fx = lambda x, y: np.cos(x) * np.exp(0.3 * y)
    fy = lambda x, y: 0.3 * np.sin(x) * np.exp(0.3 * y)
    ex, ey = [], []
    for grid in _grids():
        x, y = grid.nodes_xy()
        u = f(x, y)
        ex.append(np.max(np.abs(d_x(grid, u) - fx(x, y))))
        ey.append(np.max(np.abs(d_y(grid, u) - fy(x, y))))
    assert _sup_orders(ex).min() > 1.7
    assert _sup_orders(ey).min() > 1.7


def test_laplacian_second_order():
    f = lambda x, y: np.cos(x + 0.5 * y)
    lap = lambda x, y: -1.25 * np.cos(x + 0.5 * y)
    errs = []
    for grid in _grids():
        x, y = grid.nodes_xy()
        errs.append(np.max(np.abs(laplacian(grid, f(x, y)) - lap(x, y))))
    assert _sup_orders(errs).min() > 1.7


def test_gradient_matches_component_derivatives():
    grid = build_grid(33, 32, 3.0)
    x, y = grid.nodes_xy()
    u = x * y
    gx, gy = gradient(grid, u)
    assert np.array_equal(gx, d_x(grid, u))
    assert np.array_equal(gy, d_y(grid, u))


def test_stream_velocity_is_divergence_free():
    grid = build_grid(65, 64, 4.0)
    x, y = grid.nodes_xy()
    psi = ScalarField(grid, np.sin(x) * y + 0.2 * (x**2 - y**2))
    w = velocity_from_stream(psi)
    assert np.max(np.abs(divergence(w).values)) < 1e-12


def test_curl_sign_convention():
    # velocity (y, 0) has curl d_y(w1) - d_x(w2) = +1 in this convention
    grid = build_grid(65, 64, 3.0)
    _, y = grid.nodes_xy()
    w = VectorField(grid, y, np.zeros(grid.shape))
    assert np.allclose(curl(w).values, 1.0, atol=5e-3)


def test_curl_of_stream_velocity_converges_to_laplacian():
    errs = []
    for grid in _grids():
        x, y = grid.nodes_xy()
        vals = np.sin(0.9 * x) * np.cos(0.7 * y)
        w = velocity_from_stream(ScalarField(grid, vals))
        om = curl(w).values
        exact = -(0.9**2 + 0.7**2) * vals
        errs.append(np.max(np.abs(om[2:-2] - exact[2:-2])))
    assert _sup_orders(errs).min() > 1.5


def test_circle_values_on_grid_ring_exact():
    grid = build_grid(33, 16, 4.0)
    x, y = grid.nodes_xy()
    u = x + 2 * y
    k = 10
    assert np.array_equal(circle_values(grid, u, grid.radii[k]), u[k])


def test_circle_average_against_closed_form():
    grid = build_grid(129, 128, 4.0)
    # average of x^2 over the circle of radius r is r^2 / 2
    f = ScalarField.from_function(grid, lambda x, y: x**2)
    for r in (1.3, 2.0, 3.7):
        assert circle_average(f, r) == pytest.approx(r**2 / 2.0, rel=1e-3)


def test_vector_circle_average():
    grid = build_grid(65, 64, 4.0)
    w = VectorField.constant(grid, 0.7, -0.2)
    avg = circle_average(w, 2.5)
    assert avg == pytest.approx([0.7, -0.2])


def test_annulus_integral_of_one_is_area():
    grid = build_grid(129, 64, 5.0)
    one = ScalarField(grid, np.ones(grid.shape))
    assert annulus_integral(one) == pytest.approx(np.pi * (25.0 - 1.0), rel=1e-4)
    assert annulus_integral(one, 2.0, 3.0) == pytest.approx(np.pi * 5.0, rel=1e-4)


@settings(max_examples=25, deadline=None)
@given(split=st.floats(min_value=1.01, max_value=4.95))
def test_annulus_integral_additive_over_split(split):
    grid = build_grid(65, 32, 5.0)
    x, y = grid.nodes_xy()
    f = ScalarField(grid, np.exp(-0.1 * (x**2 + y**2)) + x)
    whole = annulus_integral(f, 1.0, 5.0)
    parts = annulus_integral(f, 1.0, split) + annulus_integral(f, split, 5.0)
    assert parts == pytest.approx(whole, rel=1e-12, abs=1e-12)


def test_dirichlet_integral_of_rigid_rotation():
    # w = (-y, x): grad w has the constant entries (0,-1,1,0), density 2
    grid = build_grid(129, 128, 3.0)
    w = VectorField.from_functions(grid, lambda x, y: -y, lambda x, y: x)
    area = np.pi * (9.0 - 1.0)
    assert dirichlet_integral(w) == pytest.approx(2.0 * area, rel=1e-3)
    assert dirichlet_integral(w, 1.5, 2.5) == pytest.approx(2.0 * np.pi * (2.5**2 - 1.5**2), rel=1e-3)


def test_integral_bounds_behavior():
    grid = build_grid(33, 16, 4.0)
    x, _ = grid.nodes_xy()
    f = ScalarField(grid, 1.0 + 0.1 * x)
    # empty and reversed ranges integrate to zero by convention
    assert annulus_integral(f, 2.0, 2.0) == 0.0
    assert annulus_integral(f, 3.0, 2.0) == 0.0
    with pytest.raises(ValueError):
        annulus_integral(f, 0.5, 2.0)
    with pytest.raises(ValueError):
        circle_values(grid, f.values, 4.5)
