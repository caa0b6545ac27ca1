"""Pauli-rotation ansatz circuits.

Every gate is ``R_j(theta) = exp(+i G_j theta) = cos(theta) I + i sin(theta) G_j``
and the circuit is ``U = R_L ... R_1`` (gate 1 acts first).  Gate positions in
the partial-product helpers are 1-based to line up with ``U_{k:j}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .pauli import PauliString, check_dense_limit


@dataclass(frozen=True)
class RotationGate:
    generator: PauliString
    parameter_index: int

    def __post_init__(self):
        if self.generator.phase != 0:
            raise ValueError("rotation generators must be phase-free")

    def unitary(self, theta: float) -> np.ndarray:
        d = 1 << self.generator.n_qubits
        return np.cos(theta) * np.eye(d) + 1j * np.sin(theta) * self.generator.to_dense()

    def apply_left(self, m: np.ndarray, theta: float) -> np.ndarray:
        """``R(theta) @ m``."""
        return np.cos(theta) * m + 1j * np.sin(theta) * self.generator.apply_left(m)

    def apply_right(self, m: np.ndarray, theta: float) -> np.ndarray:
        """``m @ R(theta)``."""
        return np.cos(theta) * m + 1j * np.sin(theta) * self.generator.apply_right(m)


@dataclass(frozen=True)
class Ansatz:
    n_qubits: int
    gates: tuple[RotationGate, ...]
    layer_size: int = 0

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if not self.gates:
            raise ValueError("an ansatz needs at least one gate")
        for g in self.gates:
            if g.generator.n_qubits != self.n_qubits:
                raise ValueError("gate acts on the wrong number of qubits")
        if sorted(g.parameter_index for g in self.gates) != list(range(len(self.gates))):
            raise ValueError("parameter indices must use 0..L-1 exactly once")
        if self.layer_size == 0:
            object.__setattr__(self, "layer_size", len(self.gates))

    @classmethod
    def from_generators(
        cls, generators: Sequence[PauliString | str], layer_size: int = 0
    ) -> Ansatz:
        gens = [PauliString.from_label(g) if isinstance(g, str) else g for g in generators]
        if not gens:
            raise ValueError("an ansatz needs at least one gate")
        gates = tuple(RotationGate(g, i) for i, g in enumerate(gens))
        return cls(gens[0].n_qubits, gates, layer_size)

    @property
    def n_params(self) -> int:
        return len(self.gates)

    @property
    def n_layers(self) -> float:
        return self.n_params / self.layer_size

    @property
    def generators(self) -> list[PauliString]:
        return [g.generator for g in self.gates]

    def check_theta(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {theta.shape}")
        return theta

    def gate_angles(self, theta) -> np.ndarray:
        """Angle seen by each gate in circuit order."""
        theta = self.check_theta(theta)
        return theta[[g.parameter_index for g in self.gates]]


def ansatz_unitary(a: Ansatz, theta) -> np.ndarray:
    return partial_unitary(a, theta, 1, a.n_params)


def partial_unitary(a: Ansatz, theta, j: int, k: int) -> np.ndarray:
    """Dense ``U_{k:j} = R_k ... R_j``; identity when ``k < j``."""
    check_dense_limit(a.n_qubits)
    angles = a.gate_angles(theta)
    L = a.n_params
    if j < 1 or k > L or j > L + 1 or k < 0:
        raise IndexError(f"partial product U_{{{k}:{j}}} out of range for L={L}")
    out = np.eye(1 << a.n_qubits, dtype=complex)
    for pos in range(j, k + 1):
        out = a.gates[pos - 1].apply_left(out, angles[pos - 1])
    return out


def prefix_suffix(a: Ansatz, theta) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Return ``prefix[j] = U_{j:1}`` and ``suffix[j] = U_{L:j+1}`` for j = 0..L."""
    check_dense_limit(a.n_qubits)
    angles = a.gate_angles(theta)
    L = a.n_params
    eye = np.eye(1 << a.n_qubits, dtype=complex)
    prefix = [eye]
    for pos in range(L):
        prefix.append(a.gates[pos].apply_left(prefix[-1], angles[pos]))
    suffix = [eye] * (L + 1)
    for pos in range(L, 0, -1):
        suffix[pos - 1] = a.gates[pos - 1].apply_right(suffix[pos], angles[pos - 1])
    return prefix, suffix


def derivative_stack(a: Ansatz, theta) -> np.ndarray:
    """All parameter derivatives of ``U(theta)``, shape ``(L, d, d)``.

    ``D[p]`` is the derivative with respect to ``theta[p]``; for the gate at
    position j this is ``U_{L:j+1} (i G_j) U_{j:1}``.  One prefix sweep, one
    suffix sweep and L dense products.
    """
    prefix, suffix = prefix_suffix(a, theta)
    L = a.n_params
    d = 1 << a.n_qubits
    out = np.empty((L, d, d), dtype=complex)
    for pos, gate in enumerate(a.gates, start=1):
        out[gate.parameter_index] = suffix[pos] @ (1j * gate.generator.apply_left(prefix[pos]))
    return out


def periodic_bonds(n_sites: int) -> list[tuple[int, int]]:
    return [(s, (s + 1) % n_sites) for s in range(n_sites)]


def build_heisenberg_ansatz(n_sites: int, n_layers: int) -> Ansatz:
    """Layers of X rotations followed by XX, YY and ZZ rotations on a ring."""
    if n_sites < 3:
        raise ValueError("the periodic chain needs at least 3 sites")
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    layer = [PauliString.single(n_sites, {s: "X"}) for s in range(n_sites)]
    for letter in "XYZ":
        layer += [PauliString.single(n_sites, {a: letter, b: letter}) for a, b in periodic_bonds(n_sites)]
    return Ansatz.from_generators(layer * n_layers, layer_size=len(layer))
