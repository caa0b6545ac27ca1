"""Shot-level emulation of the reduced circuits that estimate ``g_jkl``.

Two operator-level methods act on an ``n``-qubit register:

``indirect``
    Hadamard test.  Ancilla in ``|+>``, system in the maximally mixed state
    (a uniformly random computational basis state per shot), controlled-P_j,
    ``U_{l:j+1}``, controlled-P_k, ancilla read out in the X basis.
``direct``
    No ancilla.  The register starts in a uniformly random eigenstate of
    P_j, evolves under ``U_{l:j+1}`` and P_k is measured; the estimate is
    ``(<P_k>_+ - <P_k>_-) / 2``.

Shots are sampled from exact Born probabilities of the simulated circuit, so
the estimators carry genuine binomial noise and are unbiased.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .ansatz import Ansatz, partial_unitary
from .engine import UpdateSystem, assemble_vqos_from_g
from .pauli import PauliString, PauliSum

Method = Literal["indirect", "direct"]

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_SH = np.diag([1, 1j]) @ _H
_DIAGONALIZER = {"I": np.eye(2, dtype=complex), "Z": np.eye(2, dtype=complex), "X": _H, "Y": _SH}


@dataclass(frozen=True)
class ShotPlan:
    shots: int
    seed: int = 0
    method: Method = "indirect"

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.method not in ("indirect", "direct"):
            raise ValueError(f"unknown method {self.method!r}")

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True)
class GSpec:
    """One ``g_jkl`` target: Paulis, indices ``0 <= j <= l <= L`` and the circuit it lives in."""

    p_j: PauliString
    p_k: PauliString
    l: int
    j: int
    ansatz: Ansatz
    theta: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(v) for v in self.theta))
        if not 0 <= self.j <= self.l <= self.ansatz.n_params:
            raise IndexError(f"need 0 <= j <= l <= L, got j={self.j}, l={self.l}")
        n = self.ansatz.n_qubits
        if self.p_j.n_qubits != n or self.p_k.n_qubits != n:
            raise ValueError("Pauli operators act on the wrong number of qubits")
        if self.p_j.phase or self.p_k.phase:
            raise ValueError("P_j and P_k must be phase-free")

    def circuit(self) -> np.ndarray:
        """Dense ``U_{l:j+1}``."""
        return partial_unitary(self.ansatz, np.array(self.theta), self.j + 1, self.l)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    shots: int


def _support_parity_signs(mask: int, d: int) -> np.ndarray:
    return 1 - 2 * (np.bitwise_count(np.arange(d) & mask) & 1).astype(np.int64)


@lru_cache(maxsize=256)
def _diagonalizer(p: PauliString) -> np.ndarray:
    """Product Clifford ``C`` with ``P C = C Z_supp``: column b is an eigenvector of P."""
    out = np.ones((1, 1), dtype=complex)
    for letter in p.letters:
        out = np.kron(out, _DIAGONALIZER[letter])
    return out


def _pm_stats(n_plus: int, n: int) -> tuple[float, float]:
    """Mean and standard error of ``n`` outcomes in ``{+1, -1}`` with ``n_plus`` of them ``+1``."""
    mean = (2 * n_plus - n) / n
    if n < 2:
        return mean, float("inf")
    var = max(0.0, 1.0 - mean * mean) * n / (n - 1)
    return mean, float(np.sqrt(var / n))


def _sample_inputs_and_outcomes(p_plus: np.ndarray, shots: int, rng: np.random.Generator):
    """Per-input shot counts and ``+1`` counts.

    Each shot draws a uniform basis input then a +/-1 outcome with the input's
    Born probability; shots are tallied per input, which leaves the joint
    distribution unchanged.
    """
    d = p_plus.shape[0]
    counts = rng.multinomial(shots, np.full(d, 1.0 / d))
    plus = rng.binomial(counts, np.clip(p_plus, 0.0, 1.0))
    return counts, plus


def indirect_from_circuit(
    p_j: PauliString, p_k: PauliString, v: np.ndarray, shots: int, rng: np.random.Generator
) -> Estimate:
    # ancilla |0> branch carries V|b>, |1> branch carries P_k V P_j|b>; a final
    # Hadamard on the ancilla gives p(0) = |V|b> + P_k V P_j|b>|^2 / 4
    branch0 = v
    branch1 = p_k.apply_left(p_j.apply_right(v))
    p_zero = np.sum(np.abs(branch0 + branch1) ** 2, axis=0) / 4.0
    _, plus = _sample_inputs_and_outcomes(p_zero, shots, rng)
    mean, err = _pm_stats(int(plus.sum()), shots)
    return Estimate(mean, err, shots)


def direct_from_circuit(
    p_j: PauliString, p_k: PauliString, v: np.ndarray, shots: int, rng: np.random.Generator
) -> Estimate:
    d = v.shape[0]
    c_j = _diagonalizer(p_j)
    c_k = _diagonalizer(p_k)
    eig_j = _support_parity_signs(p_j.x | p_j.z, d)
    # amplitudes of V C_j|b> in the P_k eigenbasis; parity on supp(P_k) is the outcome
    amps = c_k.conj().T @ v @ c_j
    probs = np.abs(amps) ** 2
    plus_rows = _support_parity_signs(p_k.x | p_k.z, d) > 0
    counts, plus = _sample_inputs_and_outcomes(probs[plus_rows].sum(axis=0), shots, rng)
    n_pos, n_neg = int(counts[eig_j > 0].sum()), int(counts[eig_j < 0].sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError(
            "an eigenvalue branch of P_j received no shots; increase shots or change the seed"
        )
    m_plus, e_plus = _pm_stats(int(plus[eig_j > 0].sum()), n_pos)
    m_minus, e_minus = _pm_stats(int(plus[eig_j < 0].sum()), n_neg)
    return Estimate(0.5 * (m_plus - m_minus), 0.5 * float(np.hypot(e_plus, e_minus)), shots)


def estimate_g_indirect(spec: GSpec, plan: ShotPlan, with_stderr: bool = False):
    if plan.method != "indirect":
        raise ValueError("plan.method must be 'indirect'")
    est = indirect_from_circuit(spec.p_j, spec.p_k, spec.circuit(), plan.shots, plan.rng())
    return est if with_stderr else est.value


def estimate_g_direct(spec: GSpec, plan: ShotPlan, with_stderr: bool = False):
    if plan.method != "direct":
        raise ValueError("plan.method must be 'direct'")
    est = direct_from_circuit(spec.p_j, spec.p_k, spec.circuit(), plan.shots, plan.rng())
    return est if with_stderr else est.value


def estimate_g(spec: GSpec, plan: ShotPlan, with_stderr: bool = False):
    if plan.method == "indirect":
        return estimate_g_indirect(spec, plan, with_stderr)
    return estimate_g_direct(spec, plan, with_stderr)


@dataclass(frozen=True)
class VQSSGSpec:
    """State-level ``g_jkl = Re <phi_in| U_{j-1:1}^dag P_j U_{l:j}^dag P_k U_{l:1} |phi_in>``.

    Indices satisfy ``1 <= j <= l + 1 <= L + 1``.
    """

    p_j: PauliString
    p_k: PauliString
    l: int
    j: int
    ansatz: Ansatz
    theta: tuple[float, ...]
    phi_in: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "theta", tuple(float(v) for v in self.theta))
        object.__setattr__(self, "phi_in", tuple(complex(v) for v in self.phi_in))
        L = self.ansatz.n_params
        if not 1 <= self.j <= self.l + 1 <= L + 1:
            raise IndexError(f"need 1 <= j <= l + 1 <= L + 1, got j={self.j}, l={self.l}")
        if len(self.phi_in) != 1 << self.ansatz.n_qubits:
            raise ValueError("input state has the wrong dimension")
        if abs(np.linalg.norm(self.phi_in) - 1.0) > 1e-10:
            raise ValueError("input state must be normalized")


def vqss_estimate_g(spec: VQSSGSpec, plan: ShotPlan, with_stderr: bool = False):
    """Mid-circuit P_j measurement, ``U_{l:j}``, then P_k; returns ``mean(m_j * m_k)``.

    The mean equals ``p_+ <P_k>_+ - p_- <P_k>_-``.
    """
    theta = np.array(spec.theta)
    psi = partial_unitary(spec.ansatz, theta, 1, spec.j - 1) @ np.array(spec.phi_in)
    v = partial_unitary(spec.ansatz, theta, spec.j, spec.l)
    p_psi = spec.p_j.apply_left(psi)
    post = {s: 0.5 * (psi + s * p_psi) for s in (1, -1)}
    p_plus = float(np.vdot(post[1], post[1]).real)
    cond = {}
    for s, unnorm in post.items():
        w = np.vdot(unnorm, unnorm).real
        if w < 1e-300:
            cond[s] = 0.0
            continue
        phi = v @ (unnorm / np.sqrt(w))
        cond[s] = float(np.clip(np.vdot(phi, spec.p_k.apply_left(phi)).real, -1.0, 1.0))
    rng = plan.rng()
    n_pos = int(rng.binomial(plan.shots, min(1.0, p_plus)))
    k_pos = int(rng.binomial(n_pos, 0.5 * (1 + cond[1])))
    k_neg = int(rng.binomial(plan.shots - n_pos, 0.5 * (1 + cond[-1])))
    # m_j * m_k is +1 for (+,+) and (-,-)
    same = k_pos + (plan.shots - n_pos - k_neg)
    mean, err = _pm_stats(same, plan.shots)
    est = Estimate(mean, err, plan.shots)
    return est if with_stderr else est.value


def circuit_count(L: int, n_h: int) -> tuple[int, int]:
    """Circuits needed per assembly: ``(L(L+1)/2, L n_H)`` for N and W."""
    if L < 1 or n_h < 1:
        raise ValueError("L and n_H must be >= 1")
    return L * (L + 1) // 2, L * n_h


def shot_assembler(a: Ansatz, h: PauliSum, shots: int, seed: int = 0, method: Method = "indirect"):
    """Return ``theta -> UpdateSystem`` with every ``g_jkl`` estimated from ``shots`` shots.

    Each estimate draws from its own stream keyed by ``(seed, assembly, evaluation)``,
    so a run is reproducible for a fixed seed.
    """
    ShotPlan(shots, seed, method)
    sampler = indirect_from_circuit if method == "indirect" else direct_from_circuit
    calls = itertools.count()

    def assemble(theta) -> UpdateSystem:
        call = next(calls)
        evals = itertools.count()

        def g_eval(p_j, p_k, v):
            rng = np.random.default_rng([seed, call, next(evals)])
            return sampler(p_j, p_k, v, shots, rng).value

        return assemble_vqos_from_g(a, theta, h, g_eval)

    return assemble
