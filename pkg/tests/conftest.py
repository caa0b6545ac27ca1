"""Shared fixtures and independent dense oracles.

The oracles here deliberately avoid the package's own Pauli action code:
Pauli matrices come from ``np.kron`` of 2x2 blocks and rotation gates from
``scipy.linalg.expm``.
"""

from functools import reduce

import numpy as np
import pytest
import scipy.linalg

from vqos import Ansatz, PauliString, PauliSum

SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_pauli(letters: str) -> np.ndarray:
    return reduce(np.kron, [SINGLE[c] for c in letters])


def expm_gate(letters: str, theta: float) -> np.ndarray:
    return scipy.linalg.expm(1j * theta * kron_pauli(letters))


def oracle_unitary(labels, theta) -> np.ndarray:
    """``R_L ... R_1`` by explicit matrix exponentials."""
    d = 2 ** len(labels[0])
    u = np.eye(d, dtype=complex)
    for label, th in zip(labels, theta):
        u = expm_gate(label, th) @ u
    return u


def oracle_hamiltonian(terms) -> np.ndarray:
    return sum(c * kron_pauli(s) for c, s in terms)


def fd_derivatives(labels, theta, eps=1e-5) -> list[np.ndarray]:
    out = []
    for j in range(len(theta)):
        e = np.zeros(len(theta))
        e[j] = eps
        out.append((oracle_unitary(labels, theta + e) - oracle_unitary(labels, theta - e)) / (2 * eps))
    return out


def random_label(rng, n, allow_identity=False) -> str:
    while True:
        s = "".join(rng.choice(list("IXYZ"), size=n))
        if allow_identity or set(s) != {"I"}:
            return s


def random_instance(rng, n, L, n_terms=None):
    labels = [random_label(rng, n) for _ in range(L)]
    theta = rng.uniform(-np.pi, np.pi, L)
    n_terms = n_terms or int(rng.integers(1, 6))
    terms = [(float(rng.normal()), random_label(rng, n)) for _ in range(n_terms)]
    ansatz = Ansatz.from_generators(labels)
    return ansatz, labels, theta, PauliSum.from_terms(terms), terms


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance reporting ---------------------------------------------------------

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for key, value in report.user_properties:
        if key == "acceptance":
            prev = _ACCEPTANCE.get(value, "PASS")
            _ACCEPTANCE[value] = "PASS" if prev == "PASS" and report.passed else "FAIL"


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        n, title = marker.args
        item.user_properties.append(("acceptance", (n, title)))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), status in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"[{status}] criterion {n}: {title}")
