import numpy as np
import pytest

from qcapacity.channel import QuantumChannel
from qcapacity.sampling import haar_random_channel

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20061708)


def random_state(d, rng, rank=None):
    rank = rank or d
    G = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_matrix(d, rng, cols=None):
    return rng.standard_normal((d, cols or d)) + 1j * rng.standard_normal((d, cols or d))


def random_hermitian(d, rng):
    A = random_matrix(d, rng)
    return A + A.conj().T


def random_unitary(d, rng):
    Q, R = np.linalg.qr(random_matrix(d, rng))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_channel(d, d_env, rng) -> QuantumChannel:
    return haar_random_channel(d, d_env, rng)


def random_diagonal_channel(d, d_env, rng) -> QuantumChannel:
    """Diagonal Kraus operators; row l of the coefficient array is a unit vector."""
    a = random_matrix(d, rng, d_env)
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    return QuantumChannel([np.diag(a[:, i]) for i in range(d_env)])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
