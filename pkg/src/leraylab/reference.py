"""Closed-form reference quantities for sanity anchors.

Nothing here touches the solver; these are the analytic scales the
numerical results are compared against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import circle_average
from .fields import PolarGrid, ScalarField
from .solver import FlowState

__all__ = ["leading_order_force", "potential_flow_guess", "far_field_probe", "FarFieldProbe"]


def leading_order_force(lam0: float) -> float:
    """Leading small-speed drag scale ``4 pi lam0 / |ln lam0|``.

    ``lam0`` is the effective far-field speed seen near the obstacle (the
    mean-velocity magnitude at an intermediate radius), assumed below 1.
    """
    if not 0.0 < lam0 < 1.0:
        raise ValueError(f"lam0 must lie in (0, 1), got {lam0}")
    return 4.0 * np.pi * lam0 / abs(np.log(lam0))


def potential_flow_guess(grid: PolarGrid, lam: float) -> FlowState:
    """Irrotational flow past the unit disc, as a warm-start state.

    ``psi = lam * sin(theta) * (r - 1/r)`` is harmonic, carries the right
    circulation-free far field, and vanishes on the disc (though its slope
    does not).  ``residual_norm`` is NaN since this is not a solve result.
    """
    r = grid.radii[:, None]
    sin = np.sin(grid.theta)[None, :]
    psi = lam * sin * (r - 1.0 / r)
    return FlowState(
        grid=grid,
        psi=ScalarField(grid, psi),
        omega=ScalarField.zeros(grid),
        lam=lam,
        residual_norm=float("nan"),
        newton_iters=0,
    )


@dataclass(frozen=True)
class FarFieldProbe:
    """Mean velocity over the geometric-mean circle of the annulus."""

    radius: float
    lambda0: float
    phi0: float


def far_field_probe(state: FlowState) -> FarFieldProbe:
    """Effective far-field speed and direction at ``r = sqrt(r_outer)``.

    The probe circle sits halfway (in log scale) between the obstacle and
    the outer boundary, where the flow has settled toward its slowly
    varying intermediate regime; the returned magnitude is the interior
    speed that the leading-order force scale should be fed with.
    """
    grid = state.grid
    radius = float(np.sqrt(grid.r_outer * grid.r_inner))
    wbar = circle_average(state.velocity(), radius)
    return FarFieldProbe(
        radius=radius,
        lambda0=float(np.hypot(wbar[0], wbar[1])),
        phi0=float(np.arctan2(wbar[1], wbar[0])),
    )
