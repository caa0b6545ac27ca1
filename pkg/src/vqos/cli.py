"""Command-line entry point: ``vqos <subcommand> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .engine import IntegrationError, g_exact
from .estimators import GSpec, ShotPlan, circuit_count, estimate_g
from .experiments import (
    ExperimentConfig,
    default_time_grid,
    load_config,
    read_gate_layer,
    run_evolution,
    run_layer_sweep,
    run_required_layers,
    with_overrides,
)
from .pauli import PauliString, PauliSum

EXIT_INTEGRATION_ABORT = 3


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(",", " ").split())


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key-value file with an [experiment] section")
    p.add_argument("--sites", type=int)
    p.add_argument("--layers", type=_int_list, help="layer count, or a comma list for sweeps")
    p.add_argument("--t-final", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--backend", choices=["dense", "shots"])
    p.add_argument("--shots", type=int)
    p.add_argument("--method", choices=["indirect", "direct"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--target-infidelity", type=float)
    p.add_argument("--max-layers", type=int)
    p.add_argument("--hamiltonian", help="Pauli-sum text file ('<coefficient> <letters>' per line)")
    p.add_argument("--ansatz", help="gate list, one '1 <letters>' line per gate of a layer")
    p.add_argument("--t-targets", type=_float_list, help="comma list of times")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqos", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_experiment_flags(sub.add_parser("evolve", help="infidelity vs time for one layer count"))
    _add_experiment_flags(sub.add_parser("layer-sweep", help="infidelity vs layer count at target times"))
    _add_experiment_flags(sub.add_parser("required-layers", help="minimal layers reaching a target infidelity"))

    g = sub.add_parser("estimate-g", help="estimate a single g_jkl on a Heisenberg ansatz")
    g.add_argument("--sites", type=int, default=3)
    g.add_argument("--layers", type=int, default=1)
    g.add_argument("--pj", required=True, help="Pauli letters, e.g. XZI")
    g.add_argument("--pk", required=True)
    g.add_argument("--j", type=int, required=True, help="0 <= j <= l")
    g.add_argument("--l", type=int, required=True, help="l <= L")
    g.add_argument("--backend", choices=["dense", "shots"], default="dense")
    g.add_argument("--method", choices=["indirect", "direct"], default="indirect")
    g.add_argument("--shots", type=int, default=10_000)
    g.add_argument("--seed", type=int, default=0, help="seeds both the random angles and the shots")

    c = sub.add_parser("circuit-count", help="circuits needed per N/W assembly")
    c.add_argument("--L", type=int, help="number of parameters")
    c.add_argument("--n-h", type=int, help="number of Hamiltonian terms")
    c.add_argument("--sites", type=int, help="derive L and n_H from the Heisenberg model")
    c.add_argument("--layers", type=int, default=1)
    return parser


def _experiment_config(args) -> tuple[ExperimentConfig, list[float] | None]:
    kwargs, extras = ({}, {}) if args.config is None else load_config(args.config)
    ham_path = args.hamiltonian or extras.get("hamiltonian")
    ansatz_path = args.ansatz or extras.get("ansatz")
    if ham_path:
        kwargs["hamiltonian"] = PauliSum.from_text(Path(ham_path).read_text())
    if ansatz_path:
        kwargs["gate_layer"] = read_gate_layer(Path(ansatz_path).read_text())
    layers = args.layers
    if layers is not None and len(layers) == 1:
        layers = layers[0]
    cfg = with_overrides(
        ExperimentConfig(**kwargs),
        sites=args.sites,
        layers=layers,
        t_final=args.t_final,
        dt=args.dt,
        backend=args.backend,
        shots=args.shots,
        method=args.method,
        seed=args.seed,
        output_path=args.out,
        target_infidelity=args.target_infidelity,
        max_layers=args.max_layers,
    )
    return cfg, args.t_targets or extras.get("t_targets")


def _print_rows(header, rows) -> None:
    print(",".join(header))
    for row in rows:
        print(",".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")

    if args.command == "circuit-count":
        if args.sites is not None:
            L, n_h = 4 * args.sites * args.layers, 4 * args.sites
        elif args.L is not None and args.n_h is not None:
            L, n_h = args.L, args.n_h
        else:
            print("circuit-count needs --L and --n-h, or --sites", file=sys.stderr)
            return 2
        n_circ, w_circ = circuit_count(L, n_h)
        print(f"L={L} n_H={n_h} N_circuits={n_circ} W_circuits={w_circ} total={n_circ + w_circ}")
        return 0

    if args.command == "estimate-g":
        from .ansatz import build_heisenberg_ansatz

        ansatz = build_heisenberg_ansatz(args.sites, args.layers)
        theta = np.random.default_rng(args.seed).uniform(-np.pi, np.pi, ansatz.n_params)
        spec = GSpec(PauliString.from_label(args.pj), PauliString.from_label(args.pk), args.l, args.j, ansatz, theta)
        exact = g_exact(ansatz, theta, spec.p_j, spec.p_k, args.l, args.j)
        if args.backend == "dense":
            print(f"g={exact:.17g}")
        else:
            est = estimate_g(spec, ShotPlan(args.shots, args.seed, args.method), with_stderr=True)
            print(f"g={est.value:.17g} stderr={est.stderr:.3g} exact={exact:.17g}")
        return 0

    cfg, t_targets = _experiment_config(args)
    try:
        if args.command == "evolve":
            records = run_evolution(cfg)
            _print_rows(["t", "layers", "infidelity_vqos", "infidelity_trotter"],
                        [(r.t, r.layers, r.infidelity_vqos, r.infidelity_trotter) for r in records])
        elif args.command == "layer-sweep":
            records = run_layer_sweep(cfg, t_targets or [cfg.t_final])
            _print_rows(["t", "layers", "infidelity_vqos", "infidelity_trotter"],
                        [(r.t, r.layers, r.infidelity_vqos, r.infidelity_trotter) for r in records])
        else:
            rows = run_required_layers(cfg, t_targets or default_time_grid(cfg.t_final, cfg.dt)[1:])
            _print_rows(["t", "layers_vqos", "layers_trotter"], [(r.t, r.layers_vqos, r.layers_trotter) for r in rows])
    except IntegrationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION_ABORT
    return 0


if __name__ == "__main__":
    sys.exit(main())
