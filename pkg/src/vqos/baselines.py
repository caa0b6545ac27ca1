"""Exact propagation, first-order Trotterization and the process infidelity metric."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pauli import PauliSum


@dataclass(frozen=True)
class ExactPropagator:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n_qubits: int

    @classmethod
    def from_hamiltonian(cls, h: PauliSum) -> ExactPropagator:
        evals, evecs = np.linalg.eigh(h.to_dense())
        return cls(evals, evecs, h.n_qubits)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def exact_unitary(p: ExactPropagator, t: float) -> np.ndarray:
    """``exp(-i H t)`` from the eigendecomposition."""
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    v = p.eigenvectors
    return (v * np.exp(-1j * p.eigenvalues * t)) @ v.conj().T


def pauli_sum_exponential(h: PauliSum, tau: float) -> np.ndarray:
    """``exp(-i h tau)`` for a sum of mutually commuting Pauli terms.

    Raises ValueError if any two terms anticommute.
    """
    terms = h.terms
    for i, (_, a) in enumerate(terms):
        for _, b in terms[i + 1 :]:
            if not a.commutes_with(b):
                raise ValueError(f"terms {a.letters} and {b.letters} do not commute")
    d = 1 << h.n_qubits
    out = np.eye(d, dtype=complex)
    for c, s in terms:
        out = np.cos(c * tau) * out - 1j * np.sin(c * tau) * s.apply_left(out)
    return out


def trotter_unitary(h_groups: Sequence[PauliSum], t: float, n_layers: int) -> np.ndarray:
    """``(prod_g exp(-i H_g t/L))**L`` with the first group leftmost in each layer."""
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    if not h_groups:
        raise ValueError("need at least one group")
    tau = t / n_layers
    layer = np.eye(1 << h_groups[0].n_qubits, dtype=complex)
    for group in h_groups:
        layer = layer @ pauli_sum_exponential(group, tau)
    return np.linalg.matrix_power(layer, n_layers)


def process_infidelity(u: np.ndarray, v: np.ndarray) -> float:
    """``1 - |Tr(V^dag U)| / d``, clipped to ``[0, 1]``."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    f = abs(np.vdot(v, u)) / u.shape[0]
    return float(min(1.0, max(0.0, 1.0 - f)))
