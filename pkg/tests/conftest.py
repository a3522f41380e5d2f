import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def random_hermitian(rng, n):
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (M + M.conj().T)


def random_density(rng, n=4, rank=None):
    rank = n if rank is None else rank
    M = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = M @ M.conj().T
    return rho / np.trace(rho).real


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
