import numpy as np
import pytest

from dwell.hamiltonian import ModelParams


@pytest.fixture
def mixture_params():
    return ModelParams(U=0.0, J=1.0, omega=5.0, g=5.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
