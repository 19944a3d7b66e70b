import pytest

from hardychoquard.core import make_grid, make_params
from hardychoquard.groundstate import compute_ground_state
from hardychoquard.riesz import build_riesz


@pytest.fixture(scope="session")
def cubic():
    """(d, alpha, p) = (3, 2, 3) ground state on the default ground-state grid."""
    params = make_params(3, 2, 3)
    grid = make_grid(2048, 40.0, "algebraic:2")
    op = build_riesz(params, grid)
    return params, grid, op, compute_ground_state(params, grid, op)


@pytest.fixture(scope="session")
def mass_critical():
    """(3, 2, 7/3) ground state on a grid refined enough for blow-up runs."""
    params = make_params(3, 2, 7 / 3)
    grid = make_grid(2048, 20.0, "algebraic:3")
    op = build_riesz(params, grid)
    return params, grid, op, compute_ground_state(params, grid, op)
