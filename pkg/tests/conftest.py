import time

import numpy as np
import pytest

from slq.core import ProblemSpec, RunConfig, SigmaFunction, validate_problem
from slq.forward import extract_spectral_data

# The m=2 trig coefficient matrices used by the round-trip fixtures.
TRIG_M0 = np.array([[0.2, 0.1 - 0.05j], [0.1 + 0.05j, -0.1]])
TRIG_M1 = np.array([[0.15, 0.1j], [0.05, 0.1]])


def make_problem(T1, T2, H2, sigma):
    m = np.asarray(T1).shape[0]
    return validate_problem(ProblemSpec(m=m, T1=np.asarray(T1, dtype=complex),
                                        T2=np.asarray(T2, dtype=complex),
                                        H2=np.asarray(H2, dtype=complex),
                                        sigma=sigma))


@pytest.fixture(scope="session")
def config():
    return RunConfig()


@pytest.fixture(scope="session")
def timings():
    """Wall-clock seconds of the expensive fixture builds, keyed by name."""
    return {}


@pytest.fixture(scope="session")
def neumann2_problem():
    eye = np.eye(2)
    return make_problem(eye, eye, np.zeros((2, 2)), SigmaFunction.zero(2))


@pytest.fixture(scope="session")
def dirichlet2_problem():
    z = np.zeros((2, 2))
    return make_problem(z, z, z, SigmaFunction.zero(2))


@pytest.fixture(scope="session")
def mixed2_problem():
    return make_problem(np.diag([1.0, 0.0]), np.eye(2), np.zeros((2, 2)),
                        SigmaFunction.zero(2))


@pytest.fixture(scope="session")
def robin1_problem():
    one = np.eye(1)
    return make_problem(one, one, np.zeros((1, 1)),
                        SigmaFunction.constant(np.eye(1)))


@pytest.fixture(scope="session")
def const1_problem():
    one = np.eye(1)
    return make_problem(one, one, np.zeros((1, 1)),
                        SigmaFunction.constant(0.3 * np.eye(1)))


@pytest.fixture(scope="session")
def trig2_problem():
    sigma = SigmaFunction.trig([TRIG_M0, TRIG_M1])
    return make_problem(np.diag([1.0, 0.0]), np.eye(2), np.diag([0.3, 0.0]),
                        sigma)


def _timed_extract(problem, n_max, config, timings, key):
    t0 = time.monotonic()
    data = extract_spectral_data(problem, n_max, config=config)
    timings[key] = time.monotonic() - t0
    return data


@pytest.fixture(scope="session")
def neumann2_data(neumann2_problem, config, timings):
    return _timed_extract(neumann2_problem, 20, config, timings, "neumann2")


@pytest.fixture(scope="session")
def dirichlet2_data(dirichlet2_problem, config, timings):
    return _timed_extract(dirichlet2_problem, 20, config, timings, "dirichlet2")


@pytest.fixture(scope="session")
def mixed2_data(mixed2_problem, config, timings):
    return _timed_extract(mixed2_problem, 20, config, timings, "mixed2")


@pytest.fixture(scope="session")
def robin1_data(robin1_problem, config, timings):
    return _timed_extract(robin1_problem, 20, config, timings, "robin1")


@pytest.fixture(scope="session")
def const1_data(const1_problem, config, timings):
    return _timed_extract(const1_problem, 20, config, timings, "const1")


@pytest.fixture(scope="session")
def trig2_data(trig2_problem, config, timings):
    return _timed_extract(trig2_problem, 20, config, timings, "trig2")
