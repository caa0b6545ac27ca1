"""Variational compilation of time-evolution operators into Pauli-rotation circuits."""

from .ansatz import (
    Ansatz,
    RotationGate,
    ansatz_unitary,
    build_heisenberg_ansatz,
    derivative_stack,
    partial_unitary,
)
from .baselines import ExactPropagator, exact_unitary, process_infidelity, trotter_unitary
from .engine import (
    IntegrationError,
    IntegratorConfig,
    ParameterTrajectory,
    UpdateSystem,
    assemble_vqos,
    assemble_vqos_from_g,
    assemble_vqss,
    choi_trace_identity,
    g_exact,
    integrate,
    solve_update,
)
from .estimators import (
    GSpec,
    ShotPlan,
    VQSSGSpec,
    circuit_count,
    estimate_g_direct,
    estimate_g_indirect,
    vqss_estimate_g,
)
from .experiments import (
    ExperimentConfig,
    SweepRecord,
    build_heisenberg_hamiltonian,
    heisenberg_groups,
    run_evolution,
    run_layer_sweep,
    run_required_layers,
)
from .pauli import MAX_DENSE_QUBITS, PauliString, PauliSum, pauli_product, pauli_sum_to_dense, pauli_to_dense

__version__ = "0.1.0"
