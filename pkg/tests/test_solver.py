"""Stationary solver: manufactured convergence, boundary handling, IO."""

import numpy as np
import pytest

from leraylab.fields import build_grid
from leraylab.mms import manufactured_case
from leraylab.solver import (
    LineSearchDiverged,
    NonConvergence,
    SolveConfig,
    load_state,
    save_state,
    solve_stationary,
)


def _mms_errors(n_r, n_theta, lam=0.3, r_outer=4.0):
    grid = build_grid(n_r, n_theta, r_outer)
    case = manufactured_case(grid, lam)
    state = solve_stationary(grid, case.config)
    e_psi = np.max(np.abs(state.psi.values - case.psi.values))
    e_om = np.max(np.abs(state.omega.values - case.omega.values))
    return e_psi, e_om


def test_manufactured_solution_second_order():
    coarse = _mms_errors(49, 32)
    fine = _mms_errors(97, 64)
    orders = np.log2(np.array(coarse) / np.array(fine))
    assert orders.min() > 1.5
    assert orders.max() < 2.6


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(lam=-0.1)
    with pytest.raises(ValueError):
        SolveConfig(lam=0.1, newton_tol=0.0)
    with pytest.raises(ValueError):
        SolveConfig(lam=0.1, max_newton=0)
    with pytest.raises(ValueError):
        SolveConfig(lam=0.1, damping=1.5)


def test_converges_to_tight_tolerance(disc_flow):
    # residual_norm is PDE-scaled; the stop rule is relative to the data scale
    assert disc_flow.residual_norm < 1e-10
    assert disc_flow.newton_iters <= 15


def test_no_slip_wall(disc_flow):
    w = disc_flow.velocity()
    wall_speed = np.max(np.hypot(w.w1[0], w.w2[0]))
    assert wall_speed < 1e-3
    assert np.max(np.abs(disc_flow.psi.values[0])) < 1e-12


def test_outer_trace_is_uniform_stream(disc_flow):
    grid = disc_flow.grid
    trace = disc_flow.lam * grid.r_outer * np.sin(grid.theta)
    assert np.max(np.abs(disc_flow.psi.values[-1] - trace)) < 1e-12


def test_vorticity_consistent_with_stream(disc_flow):
    from leraylab.calculus import laplacian

    res = laplacian(disc_flow.grid, disc_flow.psi.values) - disc_flow.omega.values
    # interior nodes satisfy the coupling equation exactly (it is a solver row)
    assert np.max(np.abs(res[1:-1])) < 1e-9


def test_zero_speed_gives_rest_state():
    grid = build_grid(33, 16, 4.0)
    state = solve_stationary(grid, SolveConfig(lam=0.0))
    assert np.all(state.psi.values == 0.0)
    assert np.all(state.omega.values == 0.0)
    assert state.residual_norm == 0.0


def test_nonconvergence_carries_best_state():
    grid = build_grid(49, 32, 10.0)
    cfg = SolveConfig(lam=0.1, max_newton=1, picard_warmup=0, newton_tol=1e-14)
    with pytest.raises(NonConvergence) as info:
        solve_stationary(grid, cfg)
    best = info.value.state
    assert np.isfinite(best.residual_norm)
    assert best.residual_norm > 0.0
    assert isinstance(info.value, (NonConvergence, LineSearchDiverged))


def test_warm_start_reaches_same_solution(disc_flow):
    grid = build_grid(129, 64, 20.0)
    cfg = SolveConfig(lam=disc_flow.lam)
    cold = solve_stationary(grid, cfg)
    warm = solve_stationary(grid, cfg, guess=disc_flow)
    assert warm.residual_norm < 1e-10
    assert np.max(np.abs(warm.psi.values - cold.psi.values)) < 1e-7


def test_state_round_trip(tmp_path, disc_flow):
    prefix = tmp_path / "flow"
    save_state(disc_flow, prefix)
    back = load_state(prefix)
    assert back.grid == disc_flow.grid
    assert np.array_equal(back.psi.values, disc_flow.psi.values)
    assert np.array_equal(back.omega.values, disc_flow.omega.values)
    assert back.lam == disc_flow.lam
    assert back.residual_norm == disc_flow.residual_norm
    assert back.newton_iters == disc_flow.newton_iters


def test_load_rejects_mismatched_sidecar(tmp_path, disc_flow):
    import json

    prefix = tmp_path / "flow"
    save_state(disc_flow, prefix)
    side = json.loads((tmp_path / "flow.json").read_text())
    side["grid"]["n_theta"] = 999
    (tmp_path / "flow.json").write_text(json.dumps(side))
    with pytest.raises(ValueError):
        load_state(prefix)
