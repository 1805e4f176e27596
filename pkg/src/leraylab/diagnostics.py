"""Integral diagnostics: forces, energy balance, and ring-average bounds.

Everything here consumes a converged state (plus recovered pressure where
needed) and produces scalars or small result records.  Sign conventions:
the force is the one the fluid exerts on the disc, computed from the
stress ``T = grad w + (grad w)^T - p I`` integrated over a circle with
the outward radial normal; on circles of radius above 1 the momentum flux
through the circle is subtracted so that every contour measures the same
obstacle force up to discretization error.

The ring-average results all report their inequality as a slack
``rhs - lhs``, nonnegative when the bound holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import annulus_integral, circle_average, circle_values, dirichlet_integral, gradient
from .fields import ScalarField
from .reference import far_field_probe
from .solver import FlowState, PressureField

__all__ = [
    "ForceReport",
    "InequalitySlack",
    "AngleSlack",
    "BernoulliReport",
    "force_on_obstacle",
    "energy_identity_slack",
    "gw_pressure_slack",
    "gw_velocity_slack",
    "gw_angle_slack",
    "bernoulli_head",
    "bernoulli_analysis",
]


@dataclass(frozen=True)
class ForceReport:
    """Force integrals over one circle, as Cartesian pairs."""

    radius: float
    raw: np.ndarray
    momentum_flux: np.ndarray
    corrected: np.ndarray


def force_on_obstacle(state: FlowState, pressure: PressureField, radius: float = 1.0) -> ForceReport:
    """Obstacle force evaluated on the circle of the given radius.

    ``raw`` integrates the stress alone; ``corrected`` subtracts the
    momentum flux carried through the circle, which vanishes on the
    obstacle itself where the velocity is zero.

    On the wall circle itself the no-slip condition reduces the traction
    to ``-p e_r - omega e_theta`` exactly (tangential derivatives vanish
    and incompressibility kills the radial strain), so the wall force is
    assembled from solved nodal values instead of differenced gradients;
    this keeps its accuracy at the order of the scheme, where gradient
    extraction at the wall would lose one order.
    """
    grid = state.grid
    w = state.velocity()
    p = pressure.pressure.values
    if abs(radius - grid.r_inner) <= 1e-12 * grid.r_inner:
        cos = np.cos(grid.theta)
        sin = np.sin(grid.theta)
        p0 = p[0]
        om0 = state.omega.values[0]
        raw = grid.r_inner * grid.dtheta * np.array(
            [np.sum(-p0 * cos + om0 * sin), np.sum(-p0 * sin - om0 * cos)]
        )
        zero = np.zeros(2)
        return ForceReport(radius=radius, raw=raw, momentum_flux=zero, corrected=raw.copy())
    g1x, g1y = gradient(grid, w.w1)
    g2x, g2y = gradient(grid, w.w2)
    t11 = 2.0 * g1x - p
    t12 = g1y + g2x
    t22 = 2.0 * g2y - p
    cos = np.cos(grid.theta)[None, :]
    sin = np.sin(grid.theta)[None, :]
    tr1 = t11 * cos + t12 * sin
    tr2 = t12 * cos + t22 * sin
    wr = w.w1 * cos + w.w2 * sin
    f1 = wr * w.w1
    f2 = wr * w.w2

    def ring_integral(density: np.ndarray) -> float:
        vals = circle_values(grid, density, radius)
        return radius * grid.dtheta * float(np.sum(vals))

    raw = np.array([ring_integral(tr1), ring_integral(tr2)])
    flux = np.array([ring_integral(f1), ring_integral(f2)])
    return ForceReport(radius=radius, raw=raw, momentum_flux=flux, corrected=raw - flux)


def energy_identity_slack(state: FlowState, pressure: PressureField) -> float:
    """Relative gap in the work-dissipation balance.

    The total gradient energy of a solution equals the force on the disc
    dotted with the far-field velocity; returns
    ``(energy - force . w_inf) / energy``, zero up to discretization
    error for a converged state.
    """
    d_total = dirichlet_integral(state.velocity())
    if d_total == 0.0:
        return 0.0  # rest state: both sides vanish
    force = force_on_obstacle(state, pressure, radius=1.0).corrected
    work = state.lam * force[0]
    return (d_total - work) / d_total


@dataclass(frozen=True)
class InequalitySlack:
    """A verified bound, recorded as ``slack = rhs - lhs``."""

    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def gw_pressure_slack(state: FlowState, pressure: PressureField, r1: float, r2: float) -> InequalitySlack:
    """Ring-average pressure drift bound.

    The mean pressure over two circles differs by at most the gradient
    energy of the velocity between them divided by ``4 pi``.  Equal radii
    are allowed and give the trivial ``0 <= 0``.
    """
    if not state.grid.r_inner <= r1 <= r2 <= state.grid.r_outer:
        raise ValueError(f"need r_inner <= r1 <= r2 <= r_outer, got ({r1}, {r2})")
    lhs = abs(circle_average(pressure.pressure, r2) - circle_average(pressure.pressure, r1))
    rhs = dirichlet_integral(state.velocity(), r1, r2) / (4.0 * np.pi)
    return InequalitySlack(lhs=lhs, rhs=rhs)


def gw_velocity_slack(
    state: FlowState, r1: float, r2: float, energy_domain: str = "ring_pair"
) -> InequalitySlack:
    """Ring-average velocity drift bound.

    The mean velocities over two circles differ by at most
    ``sqrt(E / (2 pi)) * sqrt(ln(r2 / r1))``.  With
    ``energy_domain="ring_pair"`` the energy ``E`` is the gradient energy
    between the circles (the sharp form); ``"full"`` uses the whole
    annulus, the looser variant that appears when the bound is chained
    over many rings.  Equal radii give the trivial ``0 <= 0``.
    """
    if not state.grid.r_inner <= r1 <= r2 <= state.grid.r_outer:
        raise ValueError(f"need r_inner <= r1 <= r2 <= r_outer, got ({r1}, {r2})")
    if energy_domain == "ring_pair":
        energy = dirichlet_integral(state.velocity(), r1, r2)
    elif energy_domain == "full":
        energy = dirichlet_integral(state.velocity())
    else:
        raise ValueError(f"unknown energy_domain {energy_domain!r}")
    w = state.velocity()
    wbar1 = circle_average(w, r1)
    wbar2 = circle_average(w, r2)
    lhs = float(np.linalg.norm(wbar2 - wbar1))
    rhs = float(np.sqrt(energy / (2.0 * np.pi)) * np.sqrt(np.log(r2 / r1)))
    return InequalitySlack(lhs=lhs, rhs=rhs)


@dataclass(frozen=True)
class AngleSlack:
    """Ring-average direction drift bound, conditional on a speed floor.

    ``ok`` is False when some circle between the two radii has mean speed
    below ``sigma``, in which case the bound does not apply and ``lhs``,
    ``rhs`` are still reported for inspection.
    """

    ok: bool
    sigma: float
    min_mean_speed: float
    lhs: float
    rhs: float

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs if self.ok else float("nan")


def gw_angle_slack(state: FlowState, r1: float, r2: float, sigma: float) -> AngleSlack:
    """Bound on the turning of the ring-averaged velocity direction.

    Valid when every circle in ``[r1, r2]`` has mean speed at least
    ``sigma``; the turning angle is then controlled by
    ``(E_1 + E_2) / (4 pi sigma^2)`` where ``E_1`` integrates
    ``|grad omega| / r`` and ``E_2`` the squared velocity gradient over
    the ring pair.
    """
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    grid = state.grid
    if not grid.r_inner <= r1 < r2 <= grid.r_outer:
        raise ValueError(f"need r_inner <= r1 < r2 <= r_outer, got ({r1}, {r2})")
    w = state.velocity()

    radii = [r1] + [float(r) for r in grid.radii if r1 < r < r2] + [r2]
    means = np.array([circle_average(w, r) for r in radii])
    speeds = np.hypot(means[:, 0], means[:, 1])
    min_speed = float(np.min(speeds))

    wbar1, wbar2 = means[0], means[-1]
    phi1 = float(np.arctan2(wbar1[1], wbar1[0]))
    phi2 = float(np.arctan2(wbar2[1], wbar2[0]))
    dphi = (phi2 - phi1 + np.pi) % (2.0 * np.pi) - np.pi
    lhs = abs(dphi)

    ox, oy = gradient(grid, state.omega.values)
    density = np.hypot(ox, oy) / grid.radii[:, None]
    e1 = annulus_integral(ScalarField(grid, density), r1, r2)
    e2 = dirichlet_integral(w, r1, r2)
    rhs = (e1 + e2) / (4.0 * np.pi * sigma**2)
    return AngleSlack(ok=bool(min_speed >= sigma), sigma=sigma, min_mean_speed=min_speed, lhs=lhs, rhs=rhs)


def bernoulli_head(state: FlowState, pressure: PressureField) -> ScalarField:
    """Total head ``p + |w|^2 / 2``."""
    w = state.velocity()
    return ScalarField(state.grid, pressure.pressure.values + 0.5 * (w.w1**2 + w.w2**2))


@dataclass(frozen=True)
class BernoulliReport:
    """Maximum-principle check and ring gap for the total head.

    The head satisfies an elliptic inequality with no zeroth-order term,
    so on any sub-annulus its maximum sits on one of the two bounding
    circles: ``interior_max <= boundary_max`` up to discretization error.
    ``gap`` is ``min(head on the outer circle) - max(head on the inner
    circle)`` minus the margin ``(lam / 3)(lam - lambda0)``.  For a
    genuine symmetric flow the two ring ranges overlap (the head is
    monotone along streamlines but oscillates around each circle by an
    amount comparable to ``force / r``), so the gap typically comes out
    negative; it is reported, not asserted.
    """

    interior_max: float
    boundary_max: float
    r1: float
    r2: float
    lambda0: float
    margin: float
    gap: float


def bernoulli_analysis(state: FlowState, pressure: PressureField, r1: float, r2: float) -> BernoulliReport:
    """Head extrema on the closed annulus ``r1 <= r <= r2``.

    The interior maximum scans grid nodes strictly between the circles;
    the boundary maximum interpolates the head onto the two circles
    themselves.  The comparison speed ``lambda0`` comes from the
    far-field probe of the same state.
    """
    grid = state.grid
    if not grid.r_inner < r1 < r2 < grid.r_outer:
        raise ValueError(f"need r_inner < r1 < r2 < r_outer, got ({r1}, {r2})")
    head = bernoulli_head(state, pressure).values
    inside = (grid.radii > r1) & (grid.radii < r2)
    if not np.any(inside):
        raise ValueError(f"no grid rings strictly inside ({r1}, {r2})")
    interior_max = float(np.max(head[inside]))
    inner_ring = circle_values(grid, head, r1)
    outer_ring = circle_values(grid, head, r2)
    boundary_max = float(max(np.max(inner_ring), np.max(outer_ring)))
    lam0 = far_field_probe(state).lambda0
    margin = (state.lam / 3.0) * (state.lam - lam0)
    gap = float(np.min(outer_ring)) - float(np.max(inner_ring)) - margin
    return BernoulliReport(
        interior_max=interior_max,
        boundary_max=boundary_max,
        r1=r1,
        r2=r2,
        lambda0=lam0,
        margin=margin,
        gap=gap,
    )
