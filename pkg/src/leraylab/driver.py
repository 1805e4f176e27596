"""Experiment driver: expanding-annulus sequences, parameter sweeps, reports.

One "row" of a sweep is a fully diagnosed solve at a given
``(lambda, R)``: energies, forces on several contours, ring-average
inequality slacks, head (Bernoulli) analysis, blow-down measures, the
far-field probe, and tail energies.  Rows are assembled into a report
that serializes deterministically: identical configurations produce
byte-identical JSON, CSV, and chart files, except for the timestamp kept
inside the metadata block.

Solves within one lambda walk the radius schedule in order, warm-started
by interpolating the previous annulus solution; a failed solve yields a
failure row and skips the remaining radii for that lambda.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from . import __version__
from .blowdown import blow_down
from .calculus import dirichlet_integral
from .diagnostics import (
    bernoulli_analysis,
    energy_identity_slack,
    force_on_obstacle,
    gw_angle_slack,
    gw_pressure_slack,
    gw_velocity_slack,
)
from .fields import build_grid, interpolate_field
from .reference import far_field_probe
from .solver import NonConvergence, SolveConfig, recover_pressure, save_state, solve_stationary

__all__ = [
    "ExperimentConfig",
    "SweepReport",
    "grid_size_for",
    "run_invading_sequence",
    "run_lambda_sweep",
    "emit_reports",
    "check_report",
]

COMPARISON_RADIUS = 10.0
SIGMA_FRACTION = 0.2  # speed floor for the direction bound, as a fraction of lambda


def grid_size_for(r_outer: float) -> int:
    """Radial node count keeping resolution in ``ln r`` fixed: one node
    per 1/64 octave, plus the closing ring."""
    return int(round(64.0 * np.log2(r_outer))) + 1


@dataclass(frozen=True)
class ExperimentConfig:
    """A sweep: the cross product of ``lambdas`` with the radius schedule.

    ``contours`` are the force-integration circles (the wall is always
    included separately); ``pair_radii`` generate the ring pairs for the
    drift bounds, filtered per row to circles inside the annulus.
    """

    lambdas: tuple[float, ...]
    radii: tuple[float, ...] = (10.0, 20.0, 40.0, 80.0)
    n_theta: int = 128
    newton_tol: float = 1e-10
    contours: tuple[float, ...] = (2.0, 4.0, 8.0)
    pair_radii: tuple[float, ...] = (2.0, 4.0, 8.0, 16.0)
    delta0: float = 0.05

    def __post_init__(self) -> None:
        if not self.lambdas:
            raise ValueError("need at least one lambda")
        if any(l < 0.0 for l in self.lambdas):
            raise ValueError("lambdas must be nonnegative")
        if list(self.radii) != sorted(set(self.radii)) or len(self.radii) == 0:
            raise ValueError("radii must be strictly increasing and nonempty")
        if min(self.radii) <= max(self.contours):
            raise ValueError("every radius must exceed the largest force contour")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["lambdas"] = list(self.lambdas)
        d["radii"] = list(self.radii)
        d["contours"] = list(self.contours)
        d["pair_radii"] = list(self.pair_radii)
        return d


@dataclass
class SweepReport:
    config: dict
    rows: list
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"config": self.config, "rows": self.rows, "metadata": self.metadata}


def _pairs_for(cfg: ExperimentConfig, r_outer: float) -> list[tuple[float, float]]:
    inside = [r for r in cfg.pair_radii if r < r_outer]
    return [(a, b) for i, a in enumerate(inside) for b in inside[i + 1 :]]


def _pair_key(r1: float, r2: float) -> str:
    return f"{r1:g}-{r2:g}"


def _force_block(state, pf, cfg: ExperimentConfig) -> dict:
    block = {}
    for r in (1.0,) + tuple(cfg.contours):
        fr = force_on_obstacle(state, pf, r)
        block[f"{r:g}"] = {
            "raw": [float(fr.raw[0]), float(fr.raw[1])],
            "momentum_flux": [float(fr.momentum_flux[0]), float(fr.momentum_flux[1])],
            "corrected": [float(fr.corrected[0]), float(fr.corrected[1])],
        }
    contour_fx = [block[f"{r:g}"]["corrected"][0] for r in cfg.contours]
    mean = sum(contour_fx) / len(contour_fx)
    block["contour_spread"] = (max(contour_fx) - min(contour_fx)) / abs(mean) if mean != 0.0 else 0.0
    return block


def _slack_block(state, pf, cfg: ExperimentConfig, probe_radius: float) -> dict:
    lam = state.lam
    r_outer = state.grid.r_outer
    gw_p, gw_v_pair, gw_v_full, gw_a = {}, {}, {}, {}
    for r1, r2 in _pairs_for(cfg, r_outer):
        key = _pair_key(r1, r2)
        sp = gw_pressure_slack(state, pf, r1, r2)
        gw_p[key] = {"lhs": sp.lhs, "rhs": sp.rhs, "slack": sp.slack}
        sv = gw_velocity_slack(state, r1, r2, energy_domain="ring_pair")
        gw_v_pair[key] = {"lhs": sv.lhs, "rhs": sv.rhs, "slack": sv.slack}
        sf = gw_velocity_slack(state, r1, r2, energy_domain="full")
        gw_v_full[key] = {"lhs": sf.lhs, "rhs": sf.rhs, "slack": sf.slack}
        if lam > 0.0:
            sa = gw_angle_slack(state, r1, r2, sigma=SIGMA_FRACTION * lam)
            gw_a[key] = {
                "ok": sa.ok,
                "sigma": sa.sigma,
                "min_mean_speed": sa.min_mean_speed,
                "lhs": sa.lhs,
                "rhs": sa.rhs,
                "slack": sa.slack if sa.ok else None,
            }

    ber_r1, ber_r2 = probe_radius, (1.0 - cfg.delta0) * r_outer
    ber = bernoulli_analysis(state, pf, ber_r1, ber_r2)
    return {
        "energy_identity": energy_identity_slack(state, pf),
        "gw_pressure": gw_p,
        "gw_velocity_pair": gw_v_pair,
        "gw_velocity_full": gw_v_full,
        "gw_angle": gw_a,
        "bernoulli": {
            "r1": ber.r1,
            "r2": ber.r2,
            "interior_max": ber.interior_max,
            "boundary_max": ber.boundary_max,
            "max_principle_slack": ber.boundary_max - ber.interior_max,
            "margin": ber.margin,
            "gap": ber.gap,
        },
    }


def _diagnose(state, pf, cfg: ExperimentConfig) -> dict:
    grid = state.grid
    lam, r_outer = state.lam, grid.r_outer
    w = state.velocity()
    d_total = dirichlet_integral(w)
    probe = far_field_probe(state)
    row = {
        "lambda": lam,
        "r": r_outer,
        "grid": {"n_r": grid.n_r, "n_theta": grid.n_theta},
        "solver": {
            "newton_iters": state.newton_iters,
            "residual_norm": state.residual_norm,
            "compatibility_defect": pf.compatibility_defect,
            "defect_flagged": pf.defect_flagged,
        },
        "d_total": d_total,
        "d_normalized": d_total * abs(np.log(lam)) / lam**2 if lam > 0.0 else 0.0,
        "lambda0": probe.lambda0,
        "phi0": probe.phi0,
        "probe_radius": probe.radius,
        "force": _force_block(state, pf, cfg),
        "slacks": _slack_block(state, pf, cfg, probe.radius),
        "tail": {
            "quarter": dirichlet_integral(w, r_outer / 4.0, r_outer),
            "half": dirichlet_integral(w, r_outer / 2.0, r_outer),
        },
    }
    if lam > 0.0:
        bd = blow_down(state, pf, cfg.delta0)
        row["blowdown"] = {
            "epsilon_sq": bd.epsilon_sq,
            "pressure_osc": bd.pressure_osc,
            "osc_ratio": bd.osc_ratio,
            "good_radius": bd.good_radius,
            "good_circle_defect": bd.good_circle_defect,
            "hardy_ratio": bd.hardy_ratio,
            "delta0": bd.delta0,
        }
    else:
        row["blowdown"] = None
    return row


def _comparison_velocity(state, cfg: ExperimentConfig):
    r_cap = min(COMPARISON_RADIUS, min(cfg.radii))
    small = build_grid(129, cfg.n_theta, r_cap)
    return interpolate_field(state.velocity(), small)


def run_invading_sequence(cfg: ExperimentConfig, lam: float, states_out: Optional[dict] = None) -> list:
    """Solve the radius schedule at one lambda and diagnose each annulus.

    Returns one row dict per radius.  Consecutive solutions are compared
    in sup norm on the common disc ``r <= 10`` (the expanding-domain
    convergence proxy); the difference to the previous radius is stored
    on each row as ``leray_diff_prev``.  A non-converged solve produces a
    failure row and the remaining radii are skipped.  ``states_out``, if
    given, collects the final state per radius keyed by ``r``.
    """
    rows = []
    prev_state = None
    prev_compare = None
    for r_outer in cfg.radii:
        grid = build_grid(grid_size_for(r_outer), cfg.n_theta, r_outer)
        config = SolveConfig(lam=lam, newton_tol=cfg.newton_tol)
        try:
            state = solve_stationary(grid, config, guess=prev_state)
        except NonConvergence as exc:
            rows.append(
                {
                    "lambda": lam,
                    "r": r_outer,
                    "failed": True,
                    "error": str(exc),
                    "residual_norm": exc.state.residual_norm,
                }
            )
            break
        pf = recover_pressure(state)
        row = _diagnose(state, pf, cfg)
        compare = _comparison_velocity(state, cfg)
        if prev_compare is not None:
            row["leray_diff_prev"] = float(
                max(
                    np.max(np.abs(compare.w1 - prev_compare.w1)),
                    np.max(np.abs(compare.w2 - prev_compare.w2)),
                )
            )
        else:
            row["leray_diff_prev"] = None
        rows.append(row)
        if states_out is not None:
            states_out[r_outer] = state
        prev_state = state
        prev_compare = compare
    return rows


def run_lambda_sweep(cfg: ExperimentConfig, states_out: Optional[dict] = None) -> SweepReport:
    """Run every lambda in ascending order and assemble the report.

    ``states_out``, if given, collects final states keyed ``(lam, r)``.
    """
    rows = []
    for lam in sorted(cfg.lambdas):
        per_radius: dict = {}
        rows.extend(run_invading_sequence(cfg, lam, states_out=per_radius))
        if states_out is not None:
            for r_outer, st in per_radius.items():
                states_out[(lam, r_outer)] = st
    metadata = {
        "created_at": datetime.now(timezone.utc).isoformat(),
        "package_version": __version__,
    }
    return SweepReport(config=cfg.as_dict(), rows=rows, metadata=metadata)


# --- persistence -------------------------------------------------------------


def _flatten(prefix: str, value, out: list) -> None:
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else str(k), value[k], out)
    elif isinstance(value, list):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, value))


def report_json_text(report: SweepReport) -> str:
    """Canonical JSON serialization (sorted keys, repr-exact floats)."""
    return json.dumps(report.as_dict(), sort_keys=True, indent=2) + "\n"


def emit_reports(report: SweepReport, out_dir, states: Optional[dict] = None) -> list:
    """Write report.json, report.csv, charts, and per-lambda final states.

    ``states`` maps ``(lam, r)`` to FlowState; for each lambda only the
    largest-radius state is persisted (that is the one worth warm-starting
    from later).  Returns the list of paths written.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []

    json_path = os.path.join(out_dir, "report.json")
    with open(json_path, "w") as fh:
        fh.write(report_json_text(report))
    written.append(json_path)

    csv_path = os.path.join(out_dir, "report.csv")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["lambda", "r", "quantity", "value"])
    for row in report.rows:
        flat: list = []
        _flatten("", row, flat)
        lam, r_outer = row["lambda"], row["r"]
        for key, value in flat:
            if key in ("lambda", "r"):
                continue
            writer.writerow([repr(lam), repr(r_outer), key, repr(value)])
    with open(csv_path, "w") as fh:
        fh.write(buf.getvalue())
    written.append(csv_path)

    written.extend(_emit_charts(report, out_dir))

    if states:
        by_lam: dict = {}
        for (lam, r_outer), st in states.items():
            if lam not in by_lam or r_outer > by_lam[lam][0]:
                by_lam[lam] = (r_outer, st)
        for lam in sorted(by_lam):
            r_outer, st = by_lam[lam]
            prefix = os.path.join(out_dir, f"state_l{lam:g}_r{r_outer:g}")
            save_state(st, prefix)
            written.extend([prefix + ".psi.txt", prefix + ".omega.txt", prefix + ".json"])
    return written


def _emit_charts(report: SweepReport, out_dir) -> list:
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "leraylab"

    ok_rows = [row for row in report.rows if not row.get("failed")]
    radii = sorted({row["r"] for row in ok_rows})
    paths = []
    specs = [
        ("chart_energy.svg", "d_normalized", "energy * |ln lambda| / lambda^2"),
        ("chart_blowdown.svg", ("blowdown", "osc_ratio"), "pressure oscillation / epsilon^2"),
    ]
    for fname, key, ylabel in specs:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for r_outer in radii:
            pts = []
            for row in ok_rows:
                if row["r"] != r_outer or row["lambda"] <= 0.0:
                    continue
                value = row[key] if isinstance(key, str) else (row[key[0]] or {}).get(key[1])
                if value is not None:
                    pts.append((row["lambda"], value))
            if pts:
                pts.sort()
                ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"R={r_outer:g}")
        ax.set_xlabel("lambda")
        ax.set_ylabel(ylabel)
        ax.set_xscale("log")
        ax.legend(loc="best")
        fig.tight_layout()
        path = os.path.join(out_dir, fname)
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        paths.append(path)
    return paths


# --- report validation -------------------------------------------------------

ENERGY_SLACK_BUDGET = 0.02
GW_RELATIVE_BUDGET = 1e-8
ANGLE_SLACK_BUDGET = 1e-6
MAX_PRINCIPLE_BUDGET = 1e-6  # times lambda^2
LAMBDA0_TOLERANCE = 1e-6  # times lambda


def check_report(report: dict) -> list:
    """Re-evaluate every pass/fail rule on a report dict; return failures.

    The gates: converged rows only; ring-average bounds nonnegative within
    ``1e-8`` of their own scale (``1e-6`` absolute for the direction
    bound); energy identity within 2%; head maximum principle within
    ``1e-6 lambda^2``; probe speed below lambda; tail energies
    nonnegative; good radius inside its band.  The head gap and the
    compatibility-defect flag are reported quantities, not gates: the gap
    is negative for genuine symmetric flows (the monotone-curve argument
    forces the two ring extrema to overlap), and the defect scales with
    the truncation error of the scheme.
    """
    failures = []
    for row in report.get("rows", []):
        lam, r_outer = row.get("lambda"), row.get("r")
        tag = f"lambda={lam} r={r_outer}"
        if row.get("failed"):
            failures.append(f"{tag}: solver failed: {row.get('error')}")
            continue
        lam = float(lam)
        slacks = row["slacks"]
        if abs(slacks["energy_identity"]) > ENERGY_SLACK_BUDGET:
            failures.append(f"{tag}: energy identity slack {slacks['energy_identity']:.3e}")
        for name in ("gw_pressure", "gw_velocity_pair", "gw_velocity_full"):
            for key, rec in slacks[name].items():
                scale = max(abs(rec["lhs"]), abs(rec["rhs"]), 1e-30)
                if rec["slack"] < -GW_RELATIVE_BUDGET * scale:
                    failures.append(f"{tag}: {name}[{key}] slack {rec['slack']:.3e}")
        for key, rec in slacks["gw_angle"].items():
            if rec["ok"] and rec["slack"] < -ANGLE_SLACK_BUDGET:
                failures.append(f"{tag}: gw_angle[{key}] slack {rec['slack']:.3e}")
        ber = slacks["bernoulli"]
        if ber["interior_max"] > ber["boundary_max"] + MAX_PRINCIPLE_BUDGET * lam**2:
            failures.append(
                f"{tag}: interior head max {ber['interior_max']:.6e} exceeds "
                f"boundary max {ber['boundary_max']:.6e}"
            )
        if lam > 0.0 and row["lambda0"] >= lam + LAMBDA0_TOLERANCE * lam:
            failures.append(f"{tag}: probe speed {row['lambda0']} not below lambda")
        for cut, value in row["tail"].items():
            if value < -1e-12:
                failures.append(f"{tag}: tail[{cut}] negative: {value}")
        bd = row.get("blowdown")
        if bd is not None:
            if not (0.5 < bd["good_radius"] < 1.0 - bd["delta0"]):
                failures.append(f"{tag}: good radius {bd['good_radius']} outside band")
            if not np.isfinite(bd["osc_ratio"]):
                failures.append(f"{tag}: oscillation ratio not finite")
    return failures
