"""Shared fixtures: the bundled two-state benchmark system."""

import numpy as np
import pytest

BENCH_A = np.array([[1.0, 1.0], [0.0, 1.0]])
BENCH_B = np.eye(2)
BENCH_K = np.array([[-2.1961, -0.7545], [-0.7545, -2.7146]])


@pytest.fixture(scope="session")
def bench_plant():
    from doscontrol import LtiPlant

    return LtiPlant(A=BENCH_A, B=BENCH_B)


@pytest.fixture(scope="session")
def bench_inputs(bench_plant):
    from doscontrol import DesignInputs

    return DesignInputs(plant=bench_plant, K=BENCH_K)
