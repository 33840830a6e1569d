import numpy as np
import pytest

from endgate import ChainSpec, build_hamiltonian


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def xy20():
    return build_hamiltonian(ChainSpec(20, "xy"))


@pytest.fixture
def engineered8():
    return build_hamiltonian(ChainSpec(8, "engineered"))


def random_state(rng, dim):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


# acceptance results, printed as one block at the end of the session
ACCEPTANCE = {}


def record(number, title, ok, detail):
    line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
