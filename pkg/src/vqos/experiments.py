"""Model construction, VQOS-vs-Trotter sweeps and CSV/config I/O."""

from __future__ import annotations

import configparser
import csv
import logging
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .ansatz import Ansatz, ansatz_unitary, build_heisenberg_ansatz, periodic_bonds
from .baselines import ExactPropagator, exact_unitary, process_infidelity, trotter_unitary
from .engine import IntegrationError, IntegratorConfig, ParameterTrajectory, integrate
from .estimators import shot_assembler
from .pauli import PauliString, PauliSum

logger = logging.getLogger(__name__)

NOT_REACHED = -1
SWEEP_HEADER = ["t", "sites", "layers", "infidelity_vqos", "infidelity_trotter"]
REQUIRED_HEADER = ["t", "layers_vqos", "layers_trotter"]


def heisenberg_groups(n_sites: int) -> list[PauliSum]:
    """``[H_x, H_xx, H_yy, H_zz]`` of the periodic transverse-field Heisenberg ring."""
    if n_sites < 3:
        raise ValueError("the periodic chain needs at least 3 sites (n=2 double-counts the bond)")
    h_x = PauliSum(n_sites, tuple((-0.5, PauliString.single(n_sites, {s: "X"})) for s in range(n_sites)))
    groups = [h_x]
    for letter in "XYZ":
        bonds = tuple(
            (-0.5, PauliString.single(n_sites, {a: letter, b: letter})) for a, b in periodic_bonds(n_sites)
        )
        groups.append(PauliSum(n_sites, bonds))
    return groups


def build_heisenberg_hamiltonian(n_sites: int) -> PauliSum:
    h = heisenberg_groups(n_sites)
    return h[0] + h[1] + h[2] + h[3]


def hamiltonian_ansatz(h: PauliSum, n_layers: int) -> Ansatz:
    """One rotation per Hamiltonian term, repeated ``n_layers`` times."""
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    layer = [s for _, s in h.terms if not s.is_identity]
    return Ansatz.from_generators(layer * n_layers, layer_size=len(layer))


def read_gate_layer(text: str) -> tuple[PauliString, ...]:
    """Parse a gate list in the Pauli-sum grammar; every coefficient must be 1."""
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or float(parts[0]) != 1.0:
            raise ValueError(f"line {lineno}: expected '1 <letters>', got {raw!r}")
        gates.append(PauliString.from_label(parts[1]))
    if not gates:
        raise ValueError("gate list is empty")
    return tuple(gates)


@dataclass(frozen=True)
class ExperimentConfig:
    sites: int = 3
    layers: int | tuple[int, ...] = 1
    t_final: float = 1.0
    dt: float = 0.05
    backend: str = "dense"
    shots: int = 10_000
    method: str = "indirect"
    target_infidelity: float = 1e-3
    seed: int = 0
    output_path: str | None = None
    max_layers: int = 64
    regularization: float = 1e-8
    hamiltonian: PauliSum | None = None
    gate_layer: tuple[PauliString, ...] | None = None

    def __post_init__(self):
        if isinstance(self.layers, (list, tuple)):
            object.__setattr__(self, "layers", tuple(int(v) for v in self.layers))
        if self.hamiltonian is not None:
            object.__setattr__(self, "sites", self.hamiltonian.n_qubits)
        elif self.sites < 3:
            raise ValueError("sites must be >= 3")
        if min(self.layer_list) < 1:
            raise ValueError("layers must be >= 1")
        if not self.t_final >= 0:
            raise ValueError("t_final must be non-negative")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.backend not in ("dense", "shots"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if not 0 < self.target_infidelity < 1:
            raise ValueError("target_infidelity must lie in (0, 1)")
        if self.shots < 1 or self.max_layers < 1:
            raise ValueError("shots and max_layers must be >= 1")

    @property
    def layer_list(self) -> tuple[int, ...]:
        return self.layers if isinstance(self.layers, tuple) else (self.layers,)

    def problem(self) -> Problem:
        if self.hamiltonian is None:
            groups = heisenberg_groups(self.sites)
            h = groups[0] + groups[1] + groups[2] + groups[3]
        else:
            h = self.hamiltonian.without_identity()
            groups = [PauliSum(h.n_qubits, (term,)) for term in h.terms]
        return Problem(h, tuple(groups), self.gate_layer, self.hamiltonian is None)


@dataclass(frozen=True)
class Problem:
    hamiltonian: PauliSum
    trotter_groups: tuple[PauliSum, ...]
    gate_layer: tuple[PauliString, ...] | None = None
    heisenberg: bool = True
    _exact: dict = field(default_factory=dict, compare=False, repr=False)

    def ansatz(self, n_layers: int) -> Ansatz:
        if self.gate_layer is not None:
            return Ansatz.from_generators(list(self.gate_layer) * n_layers, len(self.gate_layer))
        if self.heisenberg:
            return build_heisenberg_ansatz(self.hamiltonian.n_qubits, n_layers)
        return hamiltonian_ansatz(self.hamiltonian, n_layers)

    @property
    def propagator(self) -> ExactPropagator:
        if "p" not in self._exact:
            self._exact["p"] = ExactPropagator.from_hamiltonian(self.hamiltonian)
        return self._exact["p"]

    def trotter_infidelity(self, t: float, n_layers: int) -> float:
        return process_infidelity(
            trotter_unitary(self.trotter_groups, t, n_layers), exact_unitary(self.propagator, t)
        )


@dataclass(frozen=True)
class SweepRecord:
    t: float
    sites: int
    layers: int
    infidelity_vqos: float
    infidelity_trotter: float


@dataclass(frozen=True)
class RequiredLayersRecord:
    t: float
    layers_vqos: int
    layers_trotter: int


# -- core runs -------------------------------------------------------------------


def _integrate(problem: Problem, cfg: ExperimentConfig, n_layers: int, t_final: float):
    ansatz = problem.ansatz(n_layers)
    icfg = IntegratorConfig(t_final=t_final, dt=cfg.dt, regularization=cfg.regularization)
    assemble = None
    if cfg.backend == "shots":
        assemble = shot_assembler(ansatz, problem.hamiltonian, cfg.shots, cfg.seed, cfg.method)
    return ansatz, integrate(ansatz, problem.hamiltonian, icfg, assemble=assemble)


def _trajectory_infidelities(problem: Problem, ansatz: Ansatz, traj: ParameterTrajectory) -> list[float]:
    return [
        process_infidelity(ansatz_unitary(ansatz, th), exact_unitary(problem.propagator, t))
        for t, th in zip(traj.times, traj.thetas)
    ]


def _records(problem, cfg, n_layers, ansatz, traj) -> list[SweepRecord]:
    return [
        SweepRecord(t, cfg.sites, n_layers, f_v, problem.trotter_infidelity(t, n_layers))
        for t, f_v in zip(traj.times, _trajectory_infidelities(problem, ansatz, traj))
    ]


def run_evolution(cfg: ExperimentConfig) -> list[SweepRecord]:
    """Integrate to ``t_final`` and record VQOS and Trotter infidelity on the dt grid."""
    if len(cfg.layer_list) != 1:
        raise ValueError("run_evolution takes a single layer count")
    n_layers = cfg.layer_list[0]
    problem = cfg.problem()
    ansatz = problem.ansatz(n_layers)
    try:
        _, traj = _integrate(problem, cfg, n_layers, cfg.t_final)
    except IntegrationError as exc:
        partial = _records(problem, cfg, n_layers, ansatz, exc.trajectory)
        if cfg.output_path:
            write_sweep_csv(partial, cfg.output_path)
        raise
    records = _records(problem, cfg, n_layers, ansatz, traj)
    if cfg.output_path:
        write_sweep_csv(records, cfg.output_path)
    return records


def _grid_index(times: Sequence[float], t: float, dt: float) -> int:
    idx = int(np.argmin(np.abs(np.asarray(times) - t)))
    if abs(times[idx] - t) > 1e-9 * max(1.0, dt):
        raise ValueError(f"t={t} is not on the integration grid (dt={dt})")
    return idx


def _vqos_infidelity_at(problem, cfg, n_layers, t_targets) -> dict[float, float]:
    """VQOS infidelity at each target time from one integration to the latest target.

    Targets off the dt grid get their own integration ending exactly there.
    """
    t_targets = [float(t) for t in t_targets]
    on_grid = [t for t in t_targets if abs(t / cfg.dt - round(t / cfg.dt)) < 1e-9]
    out = {}
    if on_grid:
        ansatz, traj = _integrate(problem, cfg, n_layers, max(on_grid))
        for t in on_grid:
            i = _grid_index(traj.times, t, cfg.dt)
            out[t] = process_infidelity(
                ansatz_unitary(ansatz, traj.thetas[i]), exact_unitary(problem.propagator, t)
            )
    for t in t_targets:
        if t not in out:
            ansatz, traj = _integrate(problem, cfg, n_layers, t)
            out[t] = process_infidelity(
                ansatz_unitary(ansatz, traj.final_theta), exact_unitary(problem.propagator, t)
            )
    return out


def run_layer_sweep(cfg: ExperimentConfig, t_targets: Sequence[float]) -> list[SweepRecord]:
    """One integration per layer count; infidelities at each target time."""
    problem = cfg.problem()
    records = []
    for n_layers in cfg.layer_list:
        vqos = _vqos_infidelity_at(problem, cfg, n_layers, t_targets)
        for t in t_targets:
            records.append(
                SweepRecord(float(t), cfg.sites, n_layers, vqos[float(t)], problem.trotter_infidelity(t, n_layers))
            )
    if cfg.output_path:
        write_sweep_csv(records, cfg.output_path)
    return records


def run_required_layers(cfg: ExperimentConfig, t_grid: Sequence[float]) -> list[RequiredLayersRecord]:
    """Smallest layer count reaching ``target_infidelity`` at each t, by linear search from 1.

    Counts above ``max_layers`` are reported as ``NOT_REACHED``.
    """
    problem = cfg.problem()
    target = cfg.target_infidelity
    t_grid = [float(t) for t in t_grid]

    vqos_layers = {t: NOT_REACHED for t in t_grid}
    pending = list(t_grid)
    for n_layers in range(1, cfg.max_layers + 1):
        if not pending:
            break
        infid = _vqos_infidelity_at(problem, cfg, n_layers, pending)
        for t in list(pending):
            if infid[t] <= target:
                vqos_layers[t] = n_layers
                pending.remove(t)
        logger.info("VQOS layers=%d: %d time points unresolved", n_layers, len(pending))

    rows = []
    for t in t_grid:
        trot = next(
            (m for m in range(1, cfg.max_layers + 1) if problem.trotter_infidelity(t, m) <= target),
            NOT_REACHED,
        )
        rows.append(RequiredLayersRecord(t, vqos_layers[t], trot))
    if cfg.output_path:
        write_required_csv(rows, cfg.output_path)
    return rows


# -- CSV -------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def write_sweep_csv(records: Sequence[SweepRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for r in records:
            writer.writerow([_fmt(r.t), r.sites, r.layers, _fmt(r.infidelity_vqos), _fmt(r.infidelity_trotter)])


def read_sweep_csv(path) -> list[SweepRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SWEEP_HEADER:
            raise ValueError(f"unexpected header {header}")
        return [SweepRecord(float(t), int(s), int(l), float(v), float(tr)) for t, s, l, v, tr in reader]


def write_required_csv(rows: Sequence[RequiredLayersRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REQUIRED_HEADER)
        for r in rows:
            writer.writerow([_fmt(r.t), r.layers_vqos, r.layers_trotter])


def read_required_csv(path) -> list[RequiredLayersRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != REQUIRED_HEADER:
            raise ValueError(f"unexpected header {header}")
        return [RequiredLayersRecord(float(t), int(a), int(b)) for t, a, b in reader]


# -- config files ----------------------------------------------------------------

_INT_KEYS = {"sites", "shots", "seed", "max_layers"}
_FLOAT_KEYS = {"t_final", "dt", "target_infidelity", "regularization"}
_STR_KEYS = {"backend", "method", "output_path"}


def _parse_floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def load_config(path) -> tuple[dict, dict]:
    """Read an ``[experiment]`` key-value file.

    Returns ``(config_kwargs, extras)`` where extras holds ``t_targets`` and
    the paths ``hamiltonian`` / ``ansatz`` resolved relative to the file.
    Unknown keys raise ValueError.
    """
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_section("experiment"):
        raise ValueError(f"{path}: missing [experiment] section")
    kwargs: dict = {}
    extras: dict = {}
    for raw_key, value in parser.items("experiment"):
        key = raw_key.replace("-", "_")
        if key in _INT_KEYS:
            kwargs[key] = int(value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(value)
        elif key in _STR_KEYS:
            kwargs[key] = value.strip()
        elif key == "layers":
            vals = [int(v) for v in _parse_floats(value)]
            kwargs[key] = vals[0] if len(vals) == 1 else tuple(vals)
        elif key in ("t_targets", "t_grid"):
            extras["t_targets"] = _parse_floats(value)
        elif key in ("hamiltonian", "ansatz"):
            extras[key] = str((path.parent / value.strip()).resolve())
        elif key == "model":
            if value.strip() != "heisenberg":
                raise ValueError(f"{path}: only model = heisenberg is built in")
        else:
            raise ValueError(f"{path}: unknown key {raw_key!r}")
    return kwargs, extras


CONFIG_KEYS = sorted(
    {f.name for f in fields(ExperimentConfig)} - {"hamiltonian", "gate_layer"}
    | {"t_targets", "hamiltonian", "ansatz", "model"}
)


def with_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


def default_time_grid(t_final: float, dt: float) -> list[float]:
    return [k * dt for k in range(int(math.floor(t_final / dt + 1e-9)) + 1)]
