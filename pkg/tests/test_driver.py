"""Sweep orchestration, report emission, and the report validator.

These run on deliberately small annuli (toy contours well inside) so the
whole module stays in the seconds range; the production radius schedule
is exercised by the acceptance suite.
"""

import json

import numpy as np
import pytest

from leraylab.driver import (
    ExperimentConfig,
    check_report,
    emit_reports,
    grid_size_for,
    report_json_text,
    run_invading_sequence,
    run_lambda_sweep,
)
from leraylab.fields import ScalarField, build_grid
from leraylab.solver import FlowState, NonConvergence

TOY = dict(n_theta=32, newton_tol=1e-9, contours=(1.5, 2.0), pair_radii=(1.5, 2.0, 3.0))


def test_grid_policy():
    assert grid_size_for(10.0) == 214
    assert grid_size_for(20.0) == 278
    assert grid_size_for(40.0) == 342
    assert grid_size_for(80.0) == 406


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(lambdas=())
    with pytest.raises(ValueError):
        ExperimentConfig(lambdas=(-0.1,))
    with pytest.raises(ValueError):
        ExperimentConfig(lambdas=(0.1,), radii=(8.0, 4.0))
    with pytest.raises(ValueError):
        # largest force contour not inside the smallest annulus
        ExperimentConfig(lambdas=(0.1,), radii=(8.0,), contours=(2.0, 8.0))


@pytest.fixture(scope="module")
def toy_sweep():
    cfg = ExperimentConfig(lambdas=(0.0, 0.1), radii=(4.0, 8.0), **TOY)
    states = {}
    report = run_lambda_sweep(cfg, states_out=states)
    return cfg, report, states


def test_sweep_cardinality_and_order(toy_sweep):
    _, report, _ = toy_sweep
    keys = [(row["lambda"], row["r"]) for row in report.rows]
    assert keys == [(0.0, 4.0), (0.0, 8.0), (0.1, 4.0), (0.1, 8.0)]


def test_rest_rows_are_trivial(toy_sweep):
    _, report, _ = toy_sweep
    for row in report.rows:
        if row["lambda"] == 0.0:
            assert row["d_total"] == 0.0
            assert row["d_normalized"] == 0.0
            assert row["blowdown"] is None
            assert row["lambda0"] == 0.0
            assert row["slacks"]["energy_identity"] == 0.0


def test_moving_rows_have_full_diagnostics(toy_sweep):
    _, report, _ = toy_sweep
    row = next(r for r in report.rows if r["lambda"] == 0.1 and r["r"] == 8.0)
    assert row["d_total"] > 0.0
    assert row["blowdown"]["epsilon_sq"] > 0.0
    assert 0.0 < row["lambda0"]
    assert set(row["slacks"]["gw_pressure"]) == {"1.5-2", "1.5-3", "2-3"}
    assert row["force"]["1"]["corrected"][0] > 0.0
    assert row["leray_diff_prev"] is not None and row["leray_diff_prev"] > 0.0
    assert np.isfinite(row["slacks"]["bernoulli"]["gap"])


def test_states_collected_per_key(toy_sweep):
    cfg, _, states = toy_sweep
    assert set(states) == {(0.0, 4.0), (0.0, 8.0), (0.1, 4.0), (0.1, 8.0)}
    assert states[(0.1, 8.0)].grid.r_outer == 8.0


def test_failure_row_skips_remaining_radii(monkeypatch):
    import leraylab.driver as drv

    real = drv.solve_stationary

    def flaky(grid, config, guess=None):
        if grid.r_outer > 4.0:
            rest = FlowState(
                grid=grid,
                psi=ScalarField.zeros(grid),
                omega=ScalarField.zeros(grid),
                lam=config.lam,
                residual_norm=1.0,
                newton_iters=config.max_newton,
            )
            raise NonConvergence("stalled", rest)
        return real(grid, config, guess=guess)

    monkeypatch.setattr(drv, "solve_stationary", flaky)
    cfg = ExperimentConfig(lambdas=(0.1,), radii=(4.0, 8.0, 16.0), **TOY)
    rows = run_invading_sequence(cfg, 0.1)
    assert len(rows) == 2
    assert not rows[0].get("failed")
    assert rows[1]["failed"] and rows[1]["r"] == 8.0
    assert "stalled" in rows[1]["error"]
    failures = check_report({"rows": rows})
    assert any("solver failed" in f for f in failures)


def test_emit_reports_files(tmp_path, toy_sweep):
    _, report, states = toy_sweep
    written = emit_reports(report, tmp_path, states=states)
    names = {p.split("/")[-1] for p in map(str, written)}
    assert "report.json" in names and "report.csv" in names
    assert "chart_energy.svg" in names and "chart_blowdown.svg" in names
    # only the largest radius per lambda is persisted
    assert "state_l0.1_r8.psi.txt" in names
    assert "state_l0.1_r8.omega.txt" in names
    assert not any("r4" in n for n in names)

    text = (tmp_path / "report.csv").read_text().splitlines()
    assert text[0] == "lambda,r,quantity,value"
    keys = {line.split(",")[2] for line in text[1:]}
    assert "d_total" in keys and "slacks.energy_identity" in keys

    svg = (tmp_path / "chart_energy.svg").read_text()
    assert svg.lstrip().startswith("<?xml")


def test_report_json_round_trip(toy_sweep):
    _, report, _ = toy_sweep
    text = report_json_text(report)
    parsed = json.loads(text)
    again = json.dumps(parsed, sort_keys=True, indent=2) + "\n"
    assert again == text


def test_check_report_gates():
    # hand-built single row that passes, then break it one gate at a time
    def fresh_row():
        return {
            "lambda": 0.1,
            "r": 8.0,
            "lambda0": 0.08,
            "d_total": 0.1,
            "tail": {"quarter": 0.01, "half": 0.001},
            "slacks": {
                "energy_identity": 0.001,
                "gw_pressure": {"2-3": {"lhs": 1.0, "rhs": 2.0, "slack": 1.0}},
                "gw_velocity_pair": {},
                "gw_velocity_full": {},
                "gw_angle": {"2-3": {"ok": False, "slack": None}},
                "bernoulli": {"interior_max": 0.5, "boundary_max": 0.6},
            },
            "blowdown": {"good_radius": 0.7, "delta0": 0.05, "osc_ratio": 1.0},
        }

    assert check_report({"rows": [fresh_row()]}) == []

    row = fresh_row()
    row["slacks"]["gw_pressure"]["2-3"]["slack"] = -1.0
    assert check_report({"rows": [row]})

    row = fresh_row()
    row["slacks"]["energy_identity"] = 0.5
    assert check_report({"rows": [row]})

    row = fresh_row()
    row["slacks"]["bernoulli"]["interior_max"] = 0.7
    assert check_report({"rows": [row]})

    row = fresh_row()
    row["lambda0"] = 0.2
    assert check_report({"rows": [row]})

    row = fresh_row()
    row["tail"]["half"] = -1.0
    assert check_report({"rows": [row]})

    row = fresh_row()
    row["blowdown"]["good_radius"] = 0.99
    assert check_report({"rows": [row]})
