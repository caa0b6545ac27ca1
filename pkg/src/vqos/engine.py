"""Assembly and integration of the operator-level McLachlan equation ``N theta_dot = W``.

Two independent assembly routes are provided:

* :func:`assemble_vqos` uses the stacked derivatives ``dU/dtheta_j`` and
  Frobenius inner products (the classical fast path).
* :func:`assemble_vqos_from_g` builds N and W as linear combinations of
  ``g_jkl`` trace quantities, i.e. the quantities a quantum device would
  estimate.  It accepts a pluggable ``g`` evaluator so the same code drives
  the shot-level estimators.

Both use the ``1/2**n`` normalization and the minus sign on W that makes
``theta(t) = -c t`` reproduce ``exp(-i c G t)`` for a single gate ``G``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg

from .ansatz import Ansatz, ansatz_unitary, derivative_stack, partial_unitary, prefix_suffix
from .pauli import PauliString, PauliSum, check_dense_limit

logger = logging.getLogger(__name__)

GEvaluator = Callable[[PauliString, PauliString, np.ndarray], float]


class IntegrationError(RuntimeError):
    """Raised when the integrator meets a non-finite state; carries the partial trajectory."""

    def __init__(self, message: str, trajectory: ParameterTrajectory):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass
class UpdateSystem:
    n_matrix: np.ndarray
    w_vector: np.ndarray
    asymmetry: float = 0.0
    imag_residue: float = 0.0

    def __post_init__(self):
        self.n_matrix = np.asarray(self.n_matrix, dtype=float)
        self.w_vector = np.asarray(self.w_vector, dtype=float)
        L = self.w_vector.shape[0]
        if self.n_matrix.shape != (L, L):
            raise ValueError("N must be L x L with L = len(W)")


@dataclass(frozen=True)
class IntegratorConfig:
    t_final: float
    dt: float = 0.05
    regularization: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.regularization < 0:
            raise ValueError("regularization must be non-negative")
        if not (self.t_final >= 0 and math.isfinite(self.t_final)):
            raise ValueError("t_final must be finite and non-negative")

    def time_grid(self) -> np.ndarray:
        n_full = int(math.floor(self.t_final / self.dt + 1e-9))
        times = [k * self.dt for k in range(n_full + 1)]
        if self.t_final - times[-1] > 1e-12 * max(1.0, self.t_final):
            times.append(self.t_final)
        return np.array(times)


@dataclass
class StepRecord:
    t: float
    solve_residual: float
    fallback_used: bool
    condition: float = float("nan")


@dataclass
class ParameterTrajectory:
    times: list[float] = field(default_factory=list)
    thetas: list[np.ndarray] = field(default_factory=list)
    diagnostics: list[StepRecord] = field(default_factory=list)

    @property
    def final_theta(self) -> np.ndarray:
        return self.thetas[-1]


# -- trace quantities -----------------------------------------------------------


def g_from_circuit(p_j: PauliString, p_k: PauliString, v: np.ndarray) -> float:
    """``Re Tr(P_j V^dag P_k V) / d`` for a dense circuit block ``V``."""
    d = v.shape[0]
    # Tr(P_j V^† P_k V) = <V P_j, P_k V>_F since P_j is Hermitian
    return float(np.vdot(p_j.apply_right(v), p_k.apply_left(v)).real) / d


def g_exact(a: Ansatz, theta, p_j: PauliString, p_k: PauliString, l: int, j: int) -> float:
    """Dense ``g_jkl = Re Tr(P_j U_{l:j+1}^dag P_k U_{l:j+1}) / 2**n`` with ``0 <= j <= l <= L``."""
    if not 0 <= j <= l <= a.n_params:
        raise IndexError(f"need 0 <= j <= l <= L, got j={j}, l={l}, L={a.n_params}")
    v = partial_unitary(a, theta, j + 1, l)
    return g_from_circuit(p_j, p_k, v)


def _require_traceless(h: PauliSum) -> None:
    if not h.is_traceless:
        raise ValueError(
            "Hamiltonian has an identity term; strip it with PauliSum.without_identity() "
            "(it only contributes a global phase)"
        )


# -- VQOS assembly --------------------------------------------------------------


def assemble_vqos(a: Ansatz, theta, h: PauliSum) -> UpdateSystem:
    """Assemble N and W from the derivative stack."""
    _require_traceless(h)
    if h.n_qubits != a.n_qubits:
        raise ValueError("Hamiltonian and ansatz act on different qubit counts")
    d = 1 << a.n_qubits
    D = derivative_stack(a, theta)
    flat = D.reshape(len(D), -1)
    gram = flat.conj() @ flat.T / d
    hu = h.apply_left(ansatz_unitary(a, theta))
    overlaps = flat.conj() @ hu.ravel() / d
    n_raw = gram.real
    return UpdateSystem(
        n_matrix=0.5 * (n_raw + n_raw.T),
        w_vector=overlaps.imag,
        asymmetry=float(np.max(np.abs(n_raw - n_raw.T))),
        # Tr(D_j^† D_k) is real and Tr(D_j^† H U) is imaginary for Pauli generators
        imag_residue=float(max(np.max(np.abs(gram.imag)), np.max(np.abs(overlaps.real)))),
    )


def assemble_vqos_from_g(
    a: Ansatz, theta, h: PauliSum, g_eval: GEvaluator = g_from_circuit
) -> UpdateSystem:
    """Assemble N and W from ``g_jkl`` evaluations.

    ``N_jk = g(G_j, G_k, U_{k:j+1})`` for ``j <= k`` (mirrored below the
    diagonal) and ``W_j = -sum_k c_k g(G_j, H_k, U_{L:j+1})``.  This needs
    ``L(L+1)/2 + L n_H`` evaluations.
    """
    _require_traceless(h)
    angles = a.gate_angles(theta)
    L = a.n_params
    d = 1 << a.n_qubits
    gens = a.generators
    n_pos = np.zeros((L, L))
    w_pos = np.zeros(L)
    for j in range(1, L + 1):
        v = np.eye(d, dtype=complex)  # U_{j:j+1}, empty
        for k in range(j, L + 1):
            if k > j:
                v = a.gates[k - 1].apply_left(v, angles[k - 1])
            n_pos[j - 1, k - 1] = g_eval(gens[j - 1], gens[k - 1], v)
        # v is now U_{L:j+1}
        w_pos[j - 1] = -sum(c * g_eval(gens[j - 1], hk, v) for c, hk in h.terms)
    n_pos = np.triu(n_pos) + np.triu(n_pos, 1).T
    order = np.argsort([g.parameter_index for g in a.gates])
    return UpdateSystem(n_pos[np.ix_(order, order)], w_pos[order])


def derivative_phase_overlaps(a: Ansatz, theta) -> np.ndarray:
    """``Tr[(dU/dtheta_j)^dag U]`` for every parameter; zero for non-identity generators."""
    D = derivative_stack(a, theta)
    u = ansatz_unitary(a, theta)
    return np.array([np.vdot(Dj, u) for Dj in D])


# -- VQSS assembly --------------------------------------------------------------


def assemble_vqss(a: Ansatz, theta, h: PauliSum, phi_in: np.ndarray) -> UpdateSystem:
    """State-level McLachlan system M, V for ``|phi> = U(theta)|phi_in>``.

    Includes the global-phase terms:
    ``M_jk = Re<d_j|d_k> + <d_j|phi><d_k|phi>`` and
    ``V_k = Im<d_k|H|phi> + i <d_k|phi> <phi|H|phi>``.
    """
    phi_in = np.asarray(phi_in, dtype=complex)
    d = 1 << a.n_qubits
    if phi_in.shape != (d,):
        raise ValueError(f"input state must have shape ({d},)")
    if abs(np.linalg.norm(phi_in) - 1.0) > 1e-10:
        raise ValueError("input state must be normalized")
    if h.n_qubits != a.n_qubits:
        raise ValueError("Hamiltonian and ansatz act on different qubit counts")
    angles = a.gate_angles(theta)
    _, suffix = prefix_suffix(a, theta)
    L = a.n_params
    derivs = np.empty((L, d), dtype=complex)
    state = phi_in
    for pos, gate in enumerate(a.gates, start=1):
        state = gate.apply_left(state, angles[pos - 1])
        derivs[gate.parameter_index] = suffix[pos] @ (1j * gate.generator.apply_left(state))
    phi = state
    h_phi = h.apply_left(phi)
    energy = np.vdot(phi, h_phi)
    a_vec = derivs.conj() @ phi  # <d_j|phi>, purely imaginary
    gram = derivs.conj() @ derivs.T
    m_raw = (gram + np.outer(a_vec, a_vec)).real
    v_full = (derivs.conj() @ h_phi).imag + (1j * a_vec * energy).real
    return UpdateSystem(
        n_matrix=0.5 * (m_raw + m_raw.T),
        w_vector=v_full,
        asymmetry=float(np.max(np.abs(m_raw - m_raw.T))),
        imag_residue=float(np.max(np.abs(a_vec.real))),
    )


def choi_trace_identity(m: np.ndarray) -> tuple[complex, complex]:
    """Both sides of ``<Phi|(A ⊗ I)|Phi> = Tr(A)/d`` for the maximally entangled ``|Phi>``."""
    m = np.asarray(m)
    d = m.shape[0]
    if m.shape != (d, d):
        raise ValueError("matrix must be square")
    check_dense_limit(2 * max(1, int(round(math.log2(d)))))
    phi = np.eye(d).reshape(-1) / np.sqrt(d)
    lhs = np.vdot(phi, np.kron(m, np.eye(d)) @ phi)
    return complex(lhs), complex(np.trace(m) / d)


def maximally_entangled_state(n_qubits: int) -> np.ndarray:
    """``|Phi> = sum_j |j>|j> / sqrt(d)`` on ``2 n_qubits`` qubits (system register first)."""
    d = 1 << n_qubits
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


# -- linear solve and time stepping ---------------------------------------------


def _solve(system: UpdateSystem, reg: float) -> tuple[np.ndarray, float, bool]:
    n_mat, w = system.n_matrix, system.w_vector
    if not (np.all(np.isfinite(n_mat)) and np.all(np.isfinite(w))):
        raise ValueError("update system has non-finite entries")
    lhs = n_mat + reg * np.eye(len(w))
    fallback = False
    try:
        factor = scipy.linalg.cho_factor(lhs, check_finite=False)
        x = scipy.linalg.cho_solve(factor, w, check_finite=False)
    except np.linalg.LinAlgError:
        fallback = True
        x = np.linalg.lstsq(lhs, w, rcond=None)[0]
    residual = float(np.linalg.norm(lhs @ x - w))
    return x, residual, fallback


def solve_update(system: UpdateSystem, reg: float = 1e-8) -> np.ndarray:
    """Solve ``(N + reg I) theta_dot = W`` by Cholesky, falling back to least squares."""
    return _solve(system, reg)[0]


Assembler = Callable[[np.ndarray], UpdateSystem]


def integrate(
    a: Ansatz,
    h: PauliSum,
    cfg: IntegratorConfig,
    assemble: Assembler | None = None,
    theta0=None,
) -> ParameterTrajectory:
    """Fixed-step RK4 on ``theta_dot = solve(N(theta), W(theta))`` from ``theta(0) = 0``.

    ``assemble`` maps a parameter vector to an :class:`UpdateSystem`; it
    defaults to the dense derivative path.  N and W are rebuilt at every stage.
    """
    if assemble is None:
        _require_traceless(h)

        def assemble(th):
            return assemble_vqos(a, th, h)

    theta = np.zeros(a.n_params) if theta0 is None else a.check_theta(theta0).copy()
    times = cfg.time_grid()
    traj = ParameterTrajectory(times=[float(times[0])], thetas=[theta.copy()])

    def rhs(th, record=None):
        system = assemble(th)
        x, residual, fallback = _solve(system, cfg.regularization)
        if record is not None:
            lhs = system.n_matrix + cfg.regularization * np.eye(len(x))
            record.extend([residual, fallback, float(np.linalg.cond(lhs))])
        return x

    for t0, t1 in zip(times[:-1], times[1:]):
        h_step = t1 - t0
        info: list = []
        try:
            k1 = rhs(theta, info)
            k2 = rhs(theta + 0.5 * h_step * k1)
            k3 = rhs(theta + 0.5 * h_step * k2)
            k4 = rhs(theta + h_step * k3)
        except ValueError as exc:
            raise IntegrationError(f"integration aborted at t={t0:.6g}: {exc}", traj) from exc
        new_theta = theta + (h_step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(new_theta)):
            traj.diagnostics.append(StepRecord(float(t0), float("nan"), bool(info[1])))
            raise IntegrationError(f"non-finite parameters after step from t={t0:.6g}", traj)
        theta = new_theta
        traj.times.append(float(t1))
        traj.thetas.append(theta.copy())
        traj.diagnostics.append(StepRecord(float(t0), float(info[0]), bool(info[1]), info[2]))
        if info[1]:
            logger.warning("least-squares fallback used at t=%.6g", t0)
    return traj


def write_trajectory_csv(traj: ParameterTrajectory, path, diagnostics_path=None) -> None:
    """Write ``t,theta_1..theta_L`` and, optionally, the per-step diagnostics sidecar."""
    L = len(traj.thetas[0])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t"] + [f"theta_{i}" for i in range(1, L + 1)])
        for t, th in zip(traj.times, traj.thetas):
            writer.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in th])
    if diagnostics_path is not None:
        with open(diagnostics_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "solve_residual", "fallback_used"])
            for rec in traj.diagnostics:
                writer.writerow([f"{rec.t:.17g}", f"{rec.solve_residual:.17g}", int(rec.fallback_used)])
