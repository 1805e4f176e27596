"""Manufactured solution for verifying the solver's discretization order.

The stream function

    psi*(r, theta) = lam * (r - 1)^2 * (R - r)^2 * sin(theta) / (R - 1)^4

has vanishing trace and radial slope on both circles, so it satisfies the
homogeneous version of the solver's boundary conditions; the matching
vorticity and the source term that makes the pair solve the transport
equation are generated symbolically and evaluated on the grid.  Solving
with this source and zero outer data must reproduce ``psi*`` to second
order in the mesh width.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from .fields import PolarGrid, ScalarField
from .solver import SolveConfig

__all__ = ["ManufacturedCase", "manufactured_case"]


@dataclass(frozen=True)
class ManufacturedCase:
    grid: PolarGrid
    lam: float
    psi: ScalarField
    omega: ScalarField
    source: ScalarField
    config: SolveConfig


def manufactured_case(grid: PolarGrid, lam: float, **config_kwargs) -> ManufacturedCase:
    """Build the manufactured pair and a ready-to-run solver config.

    Extra keyword arguments are forwarded to :class:`SolveConfig`
    (tolerances, damping, warmup count).
    """
    r, t = sp.symbols("r t", positive=True)
    R = sp.Float(grid.r_outer, 30)
    psi = lam * (r - 1) ** 2 * (R - r) ** 2 * sp.sin(t) / (R - 1) ** 4

    def lap(f):
        return sp.diff(f, r, 2) + sp.diff(f, r) / r + sp.diff(f, t, 2) / r**2

    omega = sp.simplify(lap(psi))
    advection = (sp.diff(psi, t) / r) * sp.diff(omega, r) - (sp.diff(psi, r) / r) * sp.diff(omega, t)
    source = sp.expand(lap(omega) - advection)

    rr = grid.radii[:, None]
    tt = grid.theta[None, :]
    evaluate = lambda expr: np.broadcast_to(
        sp.lambdify((r, t), expr, modules="numpy")(rr, tt), grid.shape
    ).astype(float)

    psi_f = ScalarField(grid, evaluate(psi))
    omega_f = ScalarField(grid, evaluate(omega))
    source_f = ScalarField(grid, evaluate(source))
    zeros = np.zeros(grid.n_theta)
    config = SolveConfig(
        lam=lam, mms_source=source_f, outer_psi=zeros, outer_dpsi=zeros, **config_kwargs
    )
    return ManufacturedCase(grid=grid, lam=lam, psi=psi_f, omega=omega_f, source=source_f, config=config)
