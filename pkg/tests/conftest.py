import numpy as np
import pytest

from bcwave.connecting import build_connecting
from bcwave.goursat import solve_kernels
from bcwave.grid import UniformGrid
from bcwave.potentials import GaussianPotential
from bcwave.response import response_matrix

ACCEPTANCE_LINES = []


def record_criterion(num, name, passed, detail):
    line = "criterion %2d %-28s %s  (%s)" % (
        num, name, "PASS" if passed else "FAIL", detail)
    ACCEPTANCE_LINES.append((num, line))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def gauss():
    return GaussianPotential(amplitude=1.0, width=0.3, center=0.0)


@pytest.fixture(scope="session")
def offcenter():
    return GaussianPotential(amplitude=1.5, width=0.25, center=0.3)


@pytest.fixture(scope="session")
def field128(gauss):
    return solve_kernels(gauss, UniformGrid(2.0, 256))


@pytest.fixture(scope="session")
def resp128(field128):
    return response_matrix(field128)


@pytest.fixture(scope="session")
def ck128(resp128):
    return build_connecting(resp128)


@pytest.fixture(scope="session")
def field256(gauss):
    return solve_kernels(gauss, UniformGrid(2.0, 512))


@pytest.fixture(scope="session")
def resp256(field256):
    return response_matrix(field256)


@pytest.fixture(scope="session")
def ck256(resp256):
    return build_connecting(resp256)


@pytest.fixture(scope="session")
def field_off(offcenter):
    return solve_kernels(offcenter, UniformGrid(2.0, 256))


@pytest.fixture(scope="session")
def resp_off(field_off):
    return response_matrix(field_off)


def max_rel(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
