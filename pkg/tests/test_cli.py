"""End-to-end runs of the console entry points."""

import json

import pytest

from leraylab.cli import build_parser, main


def test_parser_run_arguments():
    args = build_parser().parse_args(
        ["run", "--lambda", "0.1", "--radii", "10,20", "--ntheta", "64", "--tol", "1e-9", "--out", "x"]
    )
    assert args.lam == 0.1
    assert args.radii == (10.0, 20.0)
    assert args.ntheta == 64
    assert args.tol == 1e-9


def test_parser_rejects_bad_float_list():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "--lambda", "0.1", "--radii", "10,abc", "--out", "x"])


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_run")
    code = main(
        ["run", "--lambda", "0.1", "--radii", "10", "--ntheta", "32", "--tol", "1e-9", "--out", str(out)]
    )
    assert code == 0
    return out


def test_run_writes_report_and_state(run_dir):
    report = json.loads((run_dir / "report.json").read_text())
    assert len(report["rows"]) == 1
    row = report["rows"][0]
    assert row["lambda"] == 0.1 and row["r"] == 10.0
    assert (run_dir / "state_l0.1_r10.psi.txt").exists()
    assert (run_dir / "report.csv").exists()
    assert "created_at" in report["metadata"]


def test_check_passes_on_fresh_report(run_dir, capsys):
    code = main(["check", "--report", str(run_dir / "report.json")])
    out = capsys.readouterr().out
    assert code == 0
    assert "all checks passed" in out


def test_check_fails_on_doctored_report(run_dir, tmp_path, capsys):
    report = json.loads((run_dir / "report.json").read_text())
    report["rows"][0]["slacks"]["energy_identity"] = 0.5
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(report))
    code = main(["check", "--report", str(bad)])
    out = capsys.readouterr().out
    assert code == 1
    assert "FAIL" in out


def test_blowdown_prints_report(run_dir, capsys):
    code = main(["blowdown", "--state", str(run_dir / "state_l0.1_r10"), "--delta0", "0.05"])
    out = capsys.readouterr().out
    assert code == 0
    rep = json.loads(out)
    assert rep["delta0"] == 0.05
    assert rep["epsilon_sq"] > 0.0
    assert 0.5 < rep["good_radius"] < 0.95


def test_sweep_single_lambda(tmp_path, capsys):
    code = main(
        ["sweep", "--lambdas", "0.1", "--radii", "10", "--ntheta", "32", "--tol", "1e-9", "--out", str(tmp_path)]
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert "report.json" in printed
