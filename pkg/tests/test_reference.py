"""Closed-form references: leading-order force, potential guess, probe."""

import numpy as np
import pytest

from leraylab.calculus import curl, divergence
from leraylab.fields import build_grid
from leraylab.reference import far_field_probe, leading_order_force, potential_flow_guess


def test_leading_order_force_formula():
    lam0 = 0.05
    assert leading_order_force(lam0) == pytest.approx(4.0 * np.pi * lam0 / abs(np.log(lam0)))


def test_leading_order_force_domain():
    with pytest.raises(ValueError):
        leading_order_force(0.0)
    with pytest.raises(ValueError):
        leading_order_force(1.0)


def test_potential_guess_boundary_values():
    grid = build_grid(65, 64, 8.0)
    guess = potential_flow_guess(grid, 0.2)
    # the stream function vanishes on the disc and has zero vorticity
    assert np.max(np.abs(guess.psi.values[0])) < 1e-14
    assert np.all(guess.omega.values == 0.0)
    w = guess.velocity()
    # no normal flow through the disc: w . e_r = 0 on the wall
    cos, sin = np.cos(grid.theta), np.sin(grid.theta)
    normal_flow = w.w1[0] * cos + w.w2[0] * sin
    assert np.max(np.abs(normal_flow)) < 1e-3


def test_potential_guess_is_divergence_free():
    grid = build_grid(65, 64, 8.0)
    guess = potential_flow_guess(grid, 0.2)
    assert np.max(np.abs(divergence(guess.velocity()).values)) < 1e-12


def test_potential_guess_is_irrotational_away_from_rings():
    grid = build_grid(129, 128, 8.0)
    guess = potential_flow_guess(grid, 0.2)
    om = curl(guess.velocity()).values
    assert np.max(np.abs(om[2:-2])) < 2e-3


def test_far_field_probe_geometry_and_speed(disc_flow):
    probe = far_field_probe(disc_flow)
    grid = disc_flow.grid
    assert probe.radius == pytest.approx(np.sqrt(grid.r_outer * grid.r_inner))
    assert 0.0 < probe.lambda0 < disc_flow.lam
    # symmetric flow: the mean velocity points downstream
    assert abs(probe.phi0) < 1e-8
