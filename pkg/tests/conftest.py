"""Shared fixtures; expensive geometry is built once per session."""

import numpy as np
import pytest

from monolab import GridSpec, curvature_stack, metric_from_preset

TWO_PI = 2.0 * np.pi

CONFORMAL_PRESET = "conformal:0.3*sin(x0)*cos(x1)+0.2*sin(x2+x3)"


def make_grid(n, periods=None):
    if periods is None:
        periods = (TWO_PI,) * 4
    return GridSpec((n,) * 4, periods)


@pytest.fixture(scope="session")
def grid8():
    return make_grid(8)


@pytest.fixture(scope="session")
def m8(grid8):
    return metric_from_preset("flat", grid8)


@pytest.fixture(scope="session")
def curv8(m8):
    return curvature_stack(m8)


@pytest.fixture(scope="session")
def m8_conf(grid8):
    return metric_from_preset(CONFORMAL_PRESET, grid8)


@pytest.fixture(scope="session")
def curv8_conf(m8_conf):
    return curvature_stack(m8_conf)
