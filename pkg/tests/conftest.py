"""Shared solves for the unit tests.

The session fixtures keep the expensive pieces (a converged disc flow and
its pressure) to one solve per test run.  The grids here are deliberately
coarser than the production policy; tests that care about accuracy do
their own refinement studies.
"""

import pytest

from leraylab.fields import build_grid
from leraylab.solver import SolveConfig, recover_pressure, solve_stationary


@pytest.fixture(scope="session")
def disc_flow():
    """Converged flow past the disc: lambda 0.1 on the annulus out to 10."""
    grid = build_grid(97, 64, 10.0)
    return solve_stationary(grid, SolveConfig(lam=0.1))


@pytest.fixture(scope="session")
def disc_pressure(disc_flow):
    return recover_pressure(disc_flow)
