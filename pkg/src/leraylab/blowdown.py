"""Blow-down rescaling of a solved annulus onto the unit disc.

A state on ``1 <= |z| <= R`` with far-field speed ``lam`` is rescaled to

    v(z) = w(R z) / lam,    q(z) = p(R z) / lam^2

on ``1/R <= |z| <= 1``.  The gradient energy of ``v`` equals
``lam^-2`` times that of ``w`` exactly (the integral is scale invariant
in the plane, and the log-polar discretization inherits that), so
``epsilon_sq * lam^2`` reproduces the physical energy to rounding.

The report quantifies how close the rescaled pair is to the uniform
state ``(e_1, const)`` on the band ``1/2 <= |z| <= 1 - delta0``:
the pressure oscillation and its ratio to ``epsilon_sq``, the circle of
smallest combined deviation (the "good radius"), and a one-dimensional
boundary-layer Hardy quotient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import annulus_integral, d_s, dirichlet_integral
from .fields import PolarGrid, ScalarField, VectorField
from .solver import FlowState, PressureField

__all__ = ["BlowDownReport", "rescale_state", "blow_down"]


@dataclass(frozen=True)
class BlowDownReport:
    epsilon_sq: float
    pressure_osc: float
    osc_ratio: float
    good_radius: float
    good_circle_defect: float
    hardy_ratio: float
    delta0: float


def rescale_state(state: FlowState, pressure: PressureField) -> tuple[VectorField, ScalarField]:
    """Velocity and pressure rescaled onto the annulus ``(1/R, 1]``.

    Node values map one-to-one: the scaled grid's node ``(i, j)`` is the
    physical node ``(i, j)`` divided by ``R``.
    """
    if state.lam <= 0.0:
        raise ValueError("blow-down needs a positive far-field speed")
    grid = state.grid
    small = grid.scaled(1.0 / grid.r_outer)
    w = state.velocity()
    v = VectorField(small, w.w1 / state.lam, w.w2 / state.lam)
    q = ScalarField(small, pressure.pressure.values / state.lam**2)
    return v, q


def _band_rows(grid: PolarGrid, lo: float, hi: float, strict: bool = False) -> np.ndarray:
    eps = 1e-12
    if strict:
        mask = (grid.radii > lo + eps) & (grid.radii < hi - eps)
    else:
        mask = (grid.radii >= lo - eps) & (grid.radii <= hi + eps)
    rows = np.where(mask)[0]
    if rows.size == 0:
        raise ValueError(f"no grid circles inside [{lo}, {hi}]")
    return rows


def blow_down(state: FlowState, pressure: PressureField, delta0: float = 0.05) -> BlowDownReport:
    """Rescale and measure closeness to the uniform stream.

    ``pressure_osc`` is the total oscillation of the rescaled pressure
    over the band ``1/2 <= |z| <= 1 - delta0`` and ``osc_ratio`` divides
    it by ``epsilon_sq``; boundedness of that ratio as the annuli grow is
    the quantitative content of the oscillation estimate.  The good
    radius minimizes ``max over the circle of |v - e1| + |q - ring mean|``
    strictly inside the band.  ``hardy_ratio`` compares the weighted
    distance ``|v - e1|^2 / (1 - |z|)^2`` against the radial derivative
    energy on ``1/2 <= |z| <= 1``; the weight's singular last cell is
    excluded since ``v = e1`` exactly on the outer circle.
    """
    if not 0.0 < delta0 < 0.5:
        raise ValueError(f"delta0 must lie in (0, 1/2), got {delta0}")
    v, q = rescale_state(state, pressure)
    small = v.grid
    epsilon_sq = dirichlet_integral(v)

    band = _band_rows(small, 0.5, 1.0 - delta0)
    qb = q.values[band]
    pressure_osc = float(np.max(qb) - np.min(qb))
    osc_ratio = pressure_osc / epsilon_sq

    inner_rows = _band_rows(small, 0.5, 1.0 - delta0, strict=True)
    dev_v = np.hypot(v.w1 - 1.0, v.w2)
    ring_means = np.mean(q.values, axis=1)
    dev_q = np.abs(q.values - ring_means[:, None])
    circle_defect = np.max(dev_v + dev_q, axis=1)
    best = inner_rows[np.argmin(circle_defect[inner_rows])]
    good_radius = float(small.radii[best])
    good_circle_defect = float(circle_defect[best])

    dv1 = d_s(v.w1, small.ds) / small.radii[:, None]
    dv2 = d_s(v.w2, small.ds) / small.radii[:, None]
    radial_energy = annulus_integral(ScalarField(small, dv1**2 + dv2**2), 0.5, 1.0)
    hardy_cut = float(small.radii[-2])
    denom = (1.0 - small.radii) ** 2
    denom[-1] = 1.0  # outer ring is excluded below; avoid 0/0
    weight = dev_v**2 / denom[:, None]
    weight[-1] = 0.0
    hardy_lhs = annulus_integral(ScalarField(small, weight), 0.5, hardy_cut)
    hardy_ratio = hardy_lhs / radial_energy if radial_energy > 0.0 else float("nan")

    return BlowDownReport(
        epsilon_sq=epsilon_sq,
        pressure_osc=pressure_osc,
        osc_ratio=osc_ratio,
        good_radius=good_radius,
        good_circle_defect=good_circle_defect,
        hardy_ratio=hardy_ratio,
        delta0=delta0,
    )
