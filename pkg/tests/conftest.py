import math

import numpy as np
import pytest

from selfsim.geometry import FlowParams
from selfsim.ode import IntegratorConfig


@pytest.fixture(scope="session")
def params22():
    return FlowParams(2, 2)


@pytest.fixture(scope="session")
def cfg_tight():
    return IntegratorConfig(rel_tol=1e-12, abs_tol=1e-14)


@pytest.fixture(scope="session")
def cfg_default():
    return IntegratorConfig()


@pytest.fixture(scope="session")
def shrinkers22(params22, cfg_tight):
    from selfsim.shooting import find_shrinkers

    return find_shrinkers(6, params22, cfg_tight)


@pytest.fixture(scope="session")
def companion22(params22, cfg_tight):
    from selfsim.shooting import companion

    return companion(params22, cfg_tight)


@pytest.fixture(scope="session")
def big_sweep(params22, cfg_tight):
    """Expander slope sweep over eight decades, reused by several suites."""
    from selfsim.shooting import alpha_curve

    n_pts = int(400 * math.log10(20.0 / 1e-7)) + 1
    grid = np.geomspace(1e-7, 20.0, n_pts)
    return alpha_curve(grid, params22, cfg_tight, threads=2, refine=False)


@pytest.fixture(scope="session")
def matching22(params22, cfg_tight):
    from selfsim.asymptotics import matching_constants

    return matching_constants(params22, cfg_tight)


@pytest.fixture(scope="session")
def sphere_flow_n3():
    """Unit round profile in R^3 evolved to extinction."""
    from selfsim.evolve import SchemeConfig, run_flow, sphere_profile

    params = FlowParams(1, 2)
    scheme = SchemeConfig(dt_safety=0.5, resample_tol=0.008)
    return run_flow(sphere_profile(1.0, params, 250), 0.5, params, scheme)
