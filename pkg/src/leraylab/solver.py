"""Stationary Navier-Stokes solver on annuli in stream-function / vorticity form.

Unknowns are the stream function ``psi`` and the scalar rotation
``omega = d(w1)/dy - d(w2)/dx`` of the velocity ``w = (psi_y, -psi_x)``.
With unit viscosity the stationary system reduces to the coupled pair

    laplacian(psi)  = omega
    laplacian(omega) = (w . grad) omega

on the annulus ``1 <= r <= r_outer``, with no-slip on the inner circle
(``psi = 0``, ``d psi/dr = 0``) and a uniform stream of speed ``lambda``
in the x-direction on the outer circle (``psi = lambda*y``,
``d psi/dr = lambda*sin(theta)``).

Discretization: second-order centered differences on the log-polar grid,
written in ``s = ln r`` where the Laplacian is ``(d_ss + d_tt)/r^2``.
Each slope condition is absorbed into a one-sided second-derivative
closure that turns the wall value of ``omega`` into an equation coupling
the three nearest stream-function rings (a Thom-type wall-vorticity rule,
kept at second order by the extra ring).  The coupled system is solved by
damped Newton with a frozen-advection (Picard) warmup; every linear
system goes through a sparse LU factorization.

``residual_norm`` values quoted by this module are sup-norms of the
residual scaled back to PDE form, i.e. rows are divided by ``r^2`` so the
number is comparable across rings and grids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import splu

from .calculus import d_theta, d_thetatheta, d_x, d_y, gradient, velocity_from_stream
from .fields import PolarGrid, ScalarField, VectorField, interpolate_field, read_field, write_field

__all__ = [
    "SolveConfig",
    "FlowState",
    "PressureField",
    "NonConvergence",
    "LineSearchDiverged",
    "solve_stationary",
    "recover_pressure",
    "momentum_residual",
    "save_state",
    "load_state",
]


@dataclass(frozen=True)
class SolveConfig:
    """Parameters of one stationary solve.

    lam
        Far-field speed; equals the Reynolds number since the viscosity
        and the disc radius are 1.
    newton_tol
        Relative tolerance: iteration stops when the PDE-scaled residual
        sup-norm drops below ``newton_tol`` times the data scale (the
        larger of ``lam``, the source amplitude, and the boundary-data
        amplitude).
    damping
        Initial Newton step fraction; the line search halves from here.
    picard_warmup
        Frozen-advection linear solves taken before Newton proper.
    mms_source
        Optional manufactured right-hand side added to the vorticity
        transport equation, for verification runs.
    outer_psi, outer_dpsi
        Optional overrides for the outer-circle trace and log-radial
        slope of ``psi`` (length ``n_theta``); defaults describe the
        uniform stream ``lam * r * sin(theta)``.
    """

    lam: float
    newton_tol: float = 1e-10
    max_newton: int = 50
    damping: float = 1.0
    picard_warmup: int = 3
    mms_source: Optional[ScalarField] = None
    outer_psi: Optional[np.ndarray] = None
    outer_dpsi: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.lam < 0.0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if self.newton_tol <= 0.0:
            raise ValueError("newton_tol must be positive")
        if self.max_newton < 1:
            raise ValueError("max_newton must be at least 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        if self.picard_warmup < 0:
            raise ValueError("picard_warmup must be nonnegative")


@dataclass(frozen=True)
class FlowState:
    """Converged (or best-effort) solution of one annulus problem."""

    grid: PolarGrid
    psi: ScalarField
    omega: ScalarField
    lam: float
    residual_norm: float
    newton_iters: int

    def velocity(self) -> VectorField:
        """Velocity field ``(psi_y, -psi_x)`` induced by the stream function."""
        return velocity_from_stream(self.psi)


@dataclass(frozen=True)
class PressureField:
    """Pressure recovered from a velocity field, outer-circle mean zero.

    ``compatibility_defect`` is the mismatch between the volume integral
    of the pressure-Poisson right-hand side and the boundary flux of the
    Neumann data; it is subtracted uniformly before solving and flagged
    when it exceeds ``1e-6 * lam**2``.
    """

    pressure: ScalarField
    compatibility_defect: float
    defect_flagged: bool

    @property
    def grid(self) -> PolarGrid:
        return self.pressure.grid


class NonConvergence(RuntimeError):
    """Newton failed; ``state`` carries the best iterate seen."""

    def __init__(self, message: str, state: "FlowState"):
        super().__init__(message)
        self.state = state


class LineSearchDiverged(NonConvergence):
    """No step fraction reduced the residual."""


class _System:
    """Assembled residual/Jacobian of the coupled psi-omega system.

    Rows are stored in assembled form (multiplied by ``r^2``); the
    constant part of the Jacobian sparsity is precomputed once and the
    advection entries are refreshed per iterate.  Duplicate coordinate
    entries are summed on conversion, which is how the constant diffusion
    stencil and the state-dependent advection stencil share positions.
    """

    def __init__(self, grid: PolarGrid, config: SolveConfig):
        self.grid = grid
        self.config = config
        nr, nt = grid.n_r, grid.n_theta
        self.nr, self.nt = nr, nt
        self.N = nr * nt
        self.ds = grid.ds
        self.dt = grid.dtheta
        self.r2 = grid.radii**2

        if config.outer_psi is not None:
            self.g_psi = np.asarray(config.outer_psi, dtype=float)
        else:
            self.g_psi = config.lam * grid.r_outer * np.sin(grid.theta)
        if config.outer_dpsi is not None:
            self.g_slope = np.asarray(config.outer_dpsi, dtype=float)
        else:
            self.g_slope = config.lam * grid.r_outer * np.sin(grid.theta)
        for name, arr in (("outer_psi", self.g_psi), ("outer_dpsi", self.g_slope)):
            if arr.shape != (nt,):
                raise ValueError(f"{name} must have shape ({nt},), got {arr.shape}")

        if config.mms_source is not None:
            if config.mms_source.grid != grid:
                raise ValueError("mms_source lives on a different grid")
            self.source = config.mms_source.values
        else:
            self.source = np.zeros((nr, nt))

        # data scale for the relative convergence test
        self.scale = max(
            config.lam,
            float(np.max(np.abs(self.source))),
            float(np.max(np.abs(self.g_psi))) / grid.r_outer,
            float(np.max(np.abs(self.g_slope))) / grid.r_outer,
        )

        P = np.arange(self.N).reshape(nr, nt)
        W = P + self.N
        self.P, self.W = P, W
        jp = (np.arange(nt) + 1) % nt
        jm = (np.arange(nt) - 1) % nt
        self.jp, self.jm = jp, jm
        ds2, dt2 = self.ds**2, self.dt**2
        r2i = self.r2[1:-1][:, None]

        rows, cols, data = [], [], []

        def add(r, c, d):
            rows.append(np.ravel(r))
            cols.append(np.ravel(c))
            data.append(np.ravel(np.broadcast_to(np.asarray(d, dtype=float), np.shape(r))))

        Pi, Wi = P[1:-1], W[1:-1]
        # stream-function rows: laplacian(psi) - r^2 omega
        add(Pi, Pi, -2.0 / ds2 - 2.0 / dt2)
        add(Pi, P[2:], 1.0 / ds2)
        add(Pi, P[:-2], 1.0 / ds2)
        add(Pi, P[1:-1][:, jp], 1.0 / dt2)
        add(Pi, P[1:-1][:, jm], 1.0 / dt2)
        add(Pi, Wi, -r2i)
        # Dirichlet identity rows for the boundary traces of psi
        add(P[0], P[0], 1.0)
        add(P[-1], P[-1], 1.0)
        # vorticity rows, diffusion part
        add(Wi, Wi, -2.0 / ds2 - 2.0 / dt2)
        add(Wi, W[2:], 1.0 / ds2)
        add(Wi, W[:-2], 1.0 / ds2)
        add(Wi, W[1:-1][:, jp], 1.0 / dt2)
        add(Wi, W[1:-1][:, jm], 1.0 / dt2)
        # wall-vorticity closure, inner ring
        add(W[0], W[0], self.r2[0])
        add(W[0], P[1], -4.0 / ds2)
        add(W[0], P[2], 0.5 / ds2)
        add(W[0], P[0], 3.5 / ds2 + 2.0 / dt2)
        add(W[0], P[0][jp], -1.0 / dt2)
        add(W[0], P[0][jm], -1.0 / dt2)
        # wall-vorticity closure, outer ring
        add(W[-1], W[-1], self.r2[-1])
        add(W[-1], P[-2], -4.0 / ds2)
        add(W[-1], P[-3], 0.5 / ds2)
        add(W[-1], P[-1], 3.5 / ds2 + 2.0 / dt2)
        add(W[-1], P[-1][jp], -1.0 / dt2)
        add(W[-1], P[-1][jm], -1.0 / dt2)

        self.const_rows = np.concatenate(rows)
        self.const_cols = np.concatenate(cols)
        self.const_data = np.concatenate(data)

        # advection entries in the vorticity rows, refreshed per iterate:
        # four coupling to omega (kept in the Picard operator), four to psi
        # (Newton only)
        wi = np.ravel(Wi)
        self.adv_w_rows = np.concatenate([wi, wi, wi, wi])
        self.adv_w_cols = np.concatenate(
            [np.ravel(W[2:]), np.ravel(W[:-2]), np.ravel(W[1:-1][:, jp]), np.ravel(W[1:-1][:, jm])]
        )
        self.adv_p_rows = self.adv_w_rows
        self.adv_p_cols = np.concatenate(
            [np.ravel(P[1:-1][:, jp]), np.ravel(P[1:-1][:, jm]), np.ravel(P[2:]), np.ravel(P[:-2])]
        )

        # per-row r^2, for scaling assembled residuals back to PDE form
        row_scale = np.empty(2 * self.N)
        row_scale[P] = np.where(
            (np.arange(nr)[:, None] == 0) | (np.arange(nr)[:, None] == nr - 1), 1.0, self.r2[:, None]
        )
        row_scale[W] = self.r2[:, None]
        self.row_scale = row_scale

    def unpack(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return z[: self.N].reshape(self.nr, self.nt), z[self.N :].reshape(self.nr, self.nt)

    def initial_state(self, guess) -> np.ndarray:
        nr, nt = self.nr, self.nt
        if guess is None:
            psi = np.zeros((nr, nt))
            omega = np.zeros((nr, nt))
        else:
            lam = self.config.lam
            psi_f = interpolate_field(guess.psi, self.grid, fill=lambda x, y: lam * y)
            om_f = interpolate_field(guess.omega, self.grid, fill=0.0)
            psi = psi_f.values.copy()
            omega = om_f.values.copy()
        psi[0] = 0.0
        psi[-1] = self.g_psi
        return np.concatenate([psi.ravel(), omega.ravel()])

    def _centered(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Centered interior derivatives (d/ds, d/dtheta) of a grid array."""
        us = (u[2:] - u[:-2]) / (2.0 * self.ds)
        ut = (u[1:-1][:, self.jp] - u[1:-1][:, self.jm]) / (2.0 * self.dt)
        return us, ut

    def residual(self, z: np.ndarray) -> np.ndarray:
        psi, om = self.unpack(z)
        ds2, dt2 = self.ds**2, self.dt**2
        jp, jm = self.jp, self.jm
        F = np.empty(2 * self.N)

        lap_psi = (psi[2:] - 2.0 * psi[1:-1] + psi[:-2]) / ds2 + (
            psi[1:-1][:, jp] - 2.0 * psi[1:-1] + psi[1:-1][:, jm]
        ) / dt2
        F[self.P[1:-1]] = lap_psi - self.r2[1:-1][:, None] * om[1:-1]
        F[self.P[0]] = psi[0]
        F[self.P[-1]] = psi[-1] - self.g_psi

        lap_om = (om[2:] - 2.0 * om[1:-1] + om[:-2]) / ds2 + (
            om[1:-1][:, jp] - 2.0 * om[1:-1] + om[1:-1][:, jm]
        ) / dt2
        ps, pt = self._centered(psi)
        os_, ot = self._centered(om)
        F[self.W[1:-1]] = lap_om - (pt * os_ - ps * ot) - self.r2[1:-1][:, None] * self.source[1:-1]

        F[self.W[0]] = (
            om[0] * self.r2[0]
            - (8.0 * psi[1] - psi[2] - 7.0 * psi[0]) / (2.0 * ds2)
            - (psi[0][jp] - 2.0 * psi[0] + psi[0][jm]) / dt2
        )
        F[self.W[-1]] = (
            om[-1] * self.r2[-1]
            - (8.0 * psi[-2] - psi[-3] - 7.0 * psi[-1] + 6.0 * self.ds * self.g_slope) / (2.0 * ds2)
            - (psi[-1][jp] - 2.0 * psi[-1] + psi[-1][jm]) / dt2
        )
        return F

    def norm(self, F: np.ndarray) -> float:
        return float(np.max(np.abs(F / self.row_scale)))

    def jacobian(self, z: np.ndarray, frozen_advection: bool) -> csr_matrix:
        psi, om = self.unpack(z)
        ps, pt = self._centered(psi)
        two_ds, two_dt = 2.0 * self.ds, 2.0 * self.dt
        w_data = np.concatenate(
            [np.ravel(-pt / two_ds), np.ravel(pt / two_ds), np.ravel(ps / two_dt), np.ravel(-ps / two_dt)]
        )
        rows = [self.const_rows, self.adv_w_rows]
        cols = [self.const_cols, self.adv_w_cols]
        data = [self.const_data, w_data]
        if not frozen_advection:
            os_, ot = self._centered(om)
            p_data = np.concatenate(
                [np.ravel(-os_ / two_dt), np.ravel(os_ / two_dt), np.ravel(ot / two_ds), np.ravel(-ot / two_ds)]
            )
            rows.append(self.adv_p_rows)
            cols.append(self.adv_p_cols)
            data.append(p_data)
        n = 2 * self.N
        return csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        )

    def make_state(self, z: np.ndarray, norm: float, iters: int) -> FlowState:
        psi, om = self.unpack(z)
        return FlowState(
            grid=self.grid,
            psi=ScalarField(self.grid, psi),
            omega=ScalarField(self.grid, om),
            lam=self.config.lam,
            residual_norm=norm,
            newton_iters=iters,
        )


def solve_stationary(grid: PolarGrid, config: SolveConfig, guess: Optional[FlowState] = None) -> FlowState:
    """Solve the annulus problem, warm-starting from ``guess`` if given.

    A guess on a different grid is interpolated over, with the uniform
    stream filling any nodes beyond its outer radius.  Raises
    :class:`NonConvergence` after ``max_newton`` steps without meeting the
    tolerance and :class:`LineSearchDiverged` when no damping fraction
    reduces the residual; both carry the best state seen.
    """
    sys_ = _System(grid, config)
    z = sys_.initial_state(guess)
    F = sys_.residual(z)
    norm = sys_.norm(F)
    tol = config.newton_tol * sys_.scale

    if sys_.scale == 0.0 or norm <= tol:
        return sys_.make_state(z, norm, 0)

    best_z, best_norm, iters = z.copy(), norm, 0

    for k in range(config.picard_warmup + config.max_newton):
        frozen = k < config.picard_warmup
        J = sys_.jacobian(z, frozen_advection=frozen)
        delta = splu(J.tocsc()).solve(-F)

        if frozen:
            z = z + delta
            F = sys_.residual(z)
            norm = sys_.norm(F)
        else:
            alpha, accepted = config.damping, False
            for _ in range(40):
                z_try = z + alpha * delta
                F_try = sys_.residual(z_try)
                n_try = sys_.norm(F_try)
                if n_try < norm:
                    z, F, norm, accepted = z_try, F_try, n_try, True
                    break
                alpha *= 0.5
            if not accepted:
                state = sys_.make_state(best_z, best_norm, iters)
                raise LineSearchDiverged(
                    f"line search stalled at iteration {iters} (residual {norm:.3e})", state
                )
        iters += 1
        if norm < best_norm:
            best_z, best_norm = z.copy(), norm
        if norm <= tol:
            return sys_.make_state(z, norm, iters)

    state = sys_.make_state(best_z, best_norm, iters)
    raise NonConvergence(
        f"no convergence in {config.max_newton} Newton steps (best residual {best_norm:.3e}, tol {tol:.3e})",
        state,
    )


# --- pressure recovery -------------------------------------------------------


def _advection(grid: PolarGrid, w: VectorField) -> tuple[np.ndarray, np.ndarray]:
    g1x, g1y = gradient(grid, w.w1)
    g2x, g2y = gradient(grid, w.w2)
    return w.w1 * g1x + w.w2 * g1y, w.w1 * g2x + w.w2 * g2y


def recover_pressure(state: FlowState) -> PressureField:
    """Recover the pressure of a solved state, outer-circle mean zero.

    Solves the Neumann problem for ``laplacian(p) = -sum_ij d_i w_j d_j w_i``
    with radial-derivative data taken from the momentum balance
    ``grad p = laplacian(w) - (w . grad) w``, where ``laplacian(w)`` is
    evaluated as the rotated vorticity gradient ``(omega_y, -omega_x)``.
    The discrete compatibility defect between source and boundary flux is
    removed as a uniform shift of the source and reported.  A rank-one
    bordering (extra unknown added to every row, mean-over-outer-circle
    constraint row) keeps the matrix nonsingular; the gauge is enforced to
    rounding by a final subtraction of the outer-ring mean.
    """
    grid = state.grid
    nr, nt = grid.n_r, grid.n_theta
    N = nr * nt
    ds, dt = grid.ds, grid.dtheta
    ds2, dt2 = ds**2, dt**2
    r2 = grid.radii[:, None] ** 2

    w = state.velocity()
    g1x, g1y = gradient(grid, w.w1)
    g2x, g2y = gradient(grid, w.w2)
    rhs = -(g1x**2 + 2.0 * g1y * g2x + g2y**2)

    lap_w1 = d_y(grid, state.omega.values)
    lap_w2 = -d_x(grid, state.omega.values)
    adv1, adv2 = _advection(grid, w)
    gx1, gx2 = lap_w1 - adv1, lap_w2 - adv2
    cos, sin = np.cos(grid.theta), np.sin(grid.theta)
    g_rad = gx1 * cos[None, :] + gx2 * sin[None, :]

    # defect between the volume source and the Neumann boundary flux
    vol = _quad_annulus(grid, rhs)
    flux_out = dt * float(np.sum(g_rad[-1])) * grid.r_outer
    flux_in = dt * float(np.sum(g_rad[0])) * grid.r_inner
    defect = vol - (flux_out - flux_in)
    area = np.pi * (grid.r_outer**2 - grid.r_inner**2)
    rhs_adj = rhs - defect / area

    lam2 = state.lam**2
    flagged = bool(abs(defect) > 1e-6 * lam2) if lam2 > 0.0 else bool(abs(defect) > 1e-12)

    P = np.arange(N).reshape(nr, nt)
    jp = (np.arange(nt) + 1) % nt
    jm = (np.arange(nt) - 1) % nt
    rows, cols, data = [], [], []

    def add(r, c, d):
        rows.append(np.ravel(r))
        cols.append(np.ravel(c))
        data.append(np.ravel(np.broadcast_to(np.asarray(d, dtype=float), np.shape(r))))

    Pi = P[1:-1]
    add(Pi, Pi, -2.0 / ds2 - 2.0 / dt2)
    add(Pi, P[2:], 1.0 / ds2)
    add(Pi, P[:-2], 1.0 / ds2)
    add(Pi, P[1:-1][:, jp], 1.0 / dt2)
    add(Pi, P[1:-1][:, jm], 1.0 / dt2)
    # one-sided d/ds rows carrying the Neumann data
    add(P[0], P[0], -3.0 / (2.0 * ds))
    add(P[0], P[1], 4.0 / (2.0 * ds))
    add(P[0], P[2], -1.0 / (2.0 * ds))
    add(P[-1], P[-1], 3.0 / (2.0 * ds))
    add(P[-1], P[-2], -4.0 / (2.0 * ds))
    add(P[-1], P[-3], 1.0 / (2.0 * ds))
    # bordering column and mean-over-outer-circle row
    add(np.arange(N), np.full(N, N), 1.0)
    add(np.full(nt, N), P[-1], 1.0 / nt)

    A = csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(N + 1, N + 1)
    )
    b = np.empty(N + 1)
    b[P[1:-1]] = r2[1:-1] * rhs_adj[1:-1]
    b[P[0]] = grid.r_inner * g_rad[0]
    b[P[-1]] = grid.r_outer * g_rad[-1]
    b[N] = 0.0

    p = splu(A.tocsc()).solve(b)[:N].reshape(nr, nt)
    p = p - np.mean(p[-1])
    return PressureField(
        pressure=ScalarField(grid, p), compatibility_defect=float(defect), defect_flagged=flagged
    )


def _quad_annulus(grid: PolarGrid, density: np.ndarray) -> float:
    """Trapezoidal integral of a node density against the area element."""
    ring = grid.dtheta * (density * grid.radii[:, None] ** 2).sum(axis=1)
    weights = np.full(grid.n_r, grid.ds)
    weights[0] = weights[-1] = 0.5 * grid.ds
    return float(np.sum(ring * weights))


def momentum_residual(state: FlowState, pressure: PressureField) -> VectorField:
    """Pointwise momentum balance ``laplacian(w) - (w.grad)w - grad p``.

    Evaluated with the same discrete operators the diagnostics use, on
    interior nodes; the two boundary rings are zeroed since one-sided
    differences there measure closure error, not balance.  The result
    converges to zero at the truncation order of the scheme, so its size
    tracks the grid resolution rather than the Newton tolerance.
    """
    grid = state.grid
    w = state.velocity()
    lap1 = d_y(grid, state.omega.values)
    lap2 = -d_x(grid, state.omega.values)
    adv1, adv2 = _advection(grid, w)
    px, py = gradient(grid, pressure.pressure.values)
    r1 = lap1 - adv1 - px
    r2 = lap2 - adv2 - py
    r1[0] = r1[-1] = 0.0
    r2[0] = r2[-1] = 0.0
    return VectorField(grid, r1, r2)


# --- state persistence -------------------------------------------------------


def save_state(state: FlowState, prefix) -> None:
    """Write a state as ``<prefix>.psi.txt``, ``<prefix>.omega.txt``, ``<prefix>.json``."""
    prefix = str(prefix)
    write_field(state.psi, prefix + ".psi.txt")
    write_field(state.omega, prefix + ".omega.txt")
    meta = {
        "lambda": state.lam,
        "residual_norm": state.residual_norm,
        "newton_iters": state.newton_iters,
        "grid": {
            "n_r": state.grid.n_r,
            "n_theta": state.grid.n_theta,
            "r_outer": state.grid.r_outer / state.grid.r_inner,
        },
    }
    with open(prefix + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_state(prefix) -> FlowState:
    """Load a state written by :func:`save_state`."""
    prefix = str(prefix)
    with open(prefix + ".json") as fh:
        meta = json.load(fh)
    psi = read_field(prefix + ".psi.txt")
    omega = read_field(prefix + ".omega.txt")
    g = meta["grid"]
    for f, name in ((psi, "psi"), (omega, "omega")):
        if f.grid.n_r != g["n_r"] or f.grid.n_theta != g["n_theta"]:
            raise ValueError(f"{name} field shape disagrees with the sidecar metadata")
        if not np.isclose(f.grid.r_outer, g["r_outer"], rtol=1e-12):
            raise ValueError(f"{name} field radius disagrees with the sidecar metadata")
    if psi.grid != omega.grid:
        raise ValueError("psi and omega were saved on different grids")
    return FlowState(
        grid=psi.grid,
        psi=psi,
        omega=omega,
        lam=float(meta["lambda"]),
        residual_norm=float(meta["residual_norm"]),
        newton_iters=int(meta["newton_iters"]),
    )
