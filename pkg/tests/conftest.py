import numpy as np
import pytest

from nematicon import Grid, Params
from nematicon.standing import picard_fixed_point

FIG1 = dict(H=1.0, mu=-0.8, lam=0.1, b=1.0)


@pytest.fixture(scope="session")
def fig1_grid():
    return Grid.half_line(3001, 0.002)


@pytest.fixture(scope="session")
def fig1_params():
    return Params(**FIG1)


@pytest.fixture(scope="session")
def fig1_wave(fig1_grid, fig1_params):
    return picard_fixed_point(fig1_grid, fig1_params)


@pytest.fixture(scope="session")
def fig1_wave_fine(fig1_params):
    return picard_fixed_point(Grid.half_line(6001, 0.001), fig1_params)


@pytest.fixture(scope="session")
def fig1_lam0_wave(fig1_grid):
    # semilinear re-solve of the baseline point (the wave channel needs lam = 0)
    return picard_fixed_point(fig1_grid, Params(H=1.0, mu=-0.8, lam=0.0, b=1.0))


def gaussian_profile(grid, width=1.0, amplitude=1.0):
    from nematicon.grid import RealProfile

    return RealProfile(grid, amplitude * np.exp(-(grid.x**2) / (2.0 * width**2)))
