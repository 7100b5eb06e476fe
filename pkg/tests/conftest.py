import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from eigenkit.hamiltonian import Graph, build_ising, transverse_field

settings.register_profile(
    "default", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_label(label: str) -> np.ndarray:
    """Dense matrix of a label, highest qubit leftmost, built by Kronecker products."""
    out = np.eye(1, dtype=complex)
    for letter in label:
        out = np.kron(out, PAULI[letter])
    return out


@pytest.fixture
def gapped_pair():
    """h0 = -(X0 + X1) and the single-edge Ising Hamiltonian (Z0 Z1 - I) / 2."""
    return transverse_field(2), build_ising(Graph.from_edges(2, [(0, 1)]))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, title: str, passed: bool, detail: str) -> None:
    """Store and print the one-line verdict for an acceptance criterion."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
