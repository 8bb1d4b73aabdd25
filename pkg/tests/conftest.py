import math

import numpy as np
import pytest

from rsv.statespace import Grid, Params, State


@pytest.fixture
def unit_params():
    return Params(g=1.0, epsilon=1.0, alpha=1.0, h_star=1.0)


@pytest.fixture
def grid256():
    return Grid(256, 2.0 * math.pi)


def smooth_state(grid, amp_eta=0.05, amp_u=0.03, time=0.0):
    """A generic smooth periodic state with O(1) depth."""
    x = grid.x
    eta = amp_eta * (np.sin(x) + 0.4 * np.cos(2.0 * x))
    u = amp_u * (np.cos(x) - 0.3 * np.sin(3.0 * x))
    return State(eta, u, time)
