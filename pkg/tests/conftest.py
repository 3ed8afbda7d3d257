import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ffproj import models
from ffproj.regions import interval

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture(scope="session")
def aklt():
    return models.aklt_spec()


@pytest.fixture(scope="session")
def aklt_system(aklt):
    return models.mps_system(6, aklt)


@pytest.fixture(scope="session")
def product_chain():
    return models.product_system([1, 0], interval(0, 5))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def spin1_operators():
    """Spin-1 matrices in the basis m = +1, 0, -1 (independent of the package)."""
    sz = np.diag([1.0, 0.0, -1.0])
    sp = np.sqrt(2) * np.diag([1.0, 1.0], 1)
    sx = (sp + sp.T) / 2
    sy = (sp - sp.T) / 2j
    return sx, sy, sz


def aklt_bond_projector():
    """Projector onto total spin 2 of two spin-1's, from S_tot^2 = 6."""
    ops = spin1_operators()
    s_tot = [np.kron(s, np.eye(3)) + np.kron(np.eye(3), s) for s in ops]
    s2 = sum(s @ s for s in s_tot)
    w, v = np.linalg.eigh(s2)
    sel = np.isclose(w, 6.0)
    return v[:, sel] @ v[:, sel].conj().T


def aklt_chain_hamiltonian(n):
    """Sum of spin-2 bond projectors on an open n-chain."""
    p = aklt_bond_projector()
    h = np.zeros((3**n, 3**n), dtype=complex)
    for i in range(n - 1):
        h += np.kron(np.kron(np.eye(3**i), p), np.eye(3 ** (n - i - 2)))
    return h
