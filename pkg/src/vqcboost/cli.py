"""Command-line entry point.

Subcommands: depth-sweep, ensemble-sweep, noise-sweep, phase-diagram, verify.
Options can come from a key=value config file (--config) or flags; flags win.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import fields

import numpy as np

from . import engine
from .data import GroundStateError
from .experiments import (ExperimentConfig, run_depth_sweep, run_ensemble_sweep,
                          run_noise_sweep, run_phase_diagram)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parse_tuple(elem):
    def parse(text):
        return tuple(elem(v) for v in text.split(",")) if text else ()
    return parse


def _parse_bool(text):
    if text.lower() in ("true", "1", "yes"):
        return True
    if text.lower() in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value config file")
    for f in fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        default = getattr(ExperimentConfig, f.name)
        if isinstance(default, tuple):
            elem = type(default[0]) if default else float
            parser.add_argument(flag, type=_parse_tuple(elem), default=None)
        elif isinstance(default, bool):
            parser.add_argument(flag, type=_parse_bool, default=None)
        else:
            parser.add_argument(flag, type=type(default), default=None)


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            config = ExperimentConfig.from_kv(fh.read())
    else:
        config = ExperimentConfig()
    for f in fields(ExperimentConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(config, f.name, value)
    config.validate()
    return config


def _cmd_verify(args: argparse.Namespace) -> int:
    """Self-checks of the numerical core against independent references."""
    from . import engine
    from .ansatz import Ansatz, gate_sequence
    from .ensemble import closed_form_z, update_weights
    from .qstate import NoiseModel, cnot_permutation, rotation_matrix
    from .vqc import SampleWeights, WeakClassifier

    checks = []
    rng = np.random.default_rng(args.seed)

    # circuit unitarity and dense-matrix equivalence on a small random circuit
    n, depth = 3, 2
    theta = rng.uniform(0.0, 2.0 * np.pi, 3 * n * depth)
    dense = np.eye(2 ** n, dtype=complex)
    for g in gate_sequence(n, depth):
        if g.kind == "rot":
            G = rotation_matrix(g.axis, theta[g.param])
            full = np.array([[1.0]], dtype=complex)
            for q in range(1, n + 1):
                full = np.kron(full, G if q == g.qubit else np.eye(2))
            dense = full @ dense
        else:
            perm = cnot_permutation(n, g.qubit, g.target)
            dense = np.eye(2 ** n, dtype=complex)[perm] @ dense
    psi0 = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    psi0 /= np.linalg.norm(psi0)
    ansatz = Ansatz(n, depth, theta)
    psi = engine.forward_statevectors(ansatz, psi0[None, :])[0]
    checks.append(("circuit matches dense matrix product",
                   float(np.max(np.abs(psi - dense @ psi0))), 1e-10))
    checks.append(("circuit preserves norm",
                   abs(float(np.linalg.norm(psi)) - 1.0), 1e-10))

    # gradient agreement between adjoint sweep and the shift rule, with noise
    clf = WeakClassifier.initial(3, 2, 2, int(args.seed))
    X = np.stack([psi0, dense @ psi0])
    y = np.array([0, 1])
    from .ansatz import EncodedSample
    from .qstate import QuantumState
    dataset = [EncodedSample(QuantumState.from_statevector(x), int(l))
               for x, l in zip(X, y)]
    weights = SampleWeights.uniform(2)
    for p in (0.0, 0.1):
        noise = NoiseModel(p, 1)
        from .vqc import gradient, parameter_shift_gradient
        g_adj = gradient(clf, dataset, weights, noise)
        g_ps = parameter_shift_gradient(clf, dataset, weights, noise)
        checks.append((f"adjoint gradient matches shift rule at P={p}",
                       float(np.max(np.abs(g_adj - g_ps))), 1e-8))

    # boosting identities on a synthetic stage
    w0 = SampleWeights.uniform(10)
    miss = np.zeros(10, dtype=bool)
    miss[:2] = True
    _, z = update_weights(w0, np.log(4.0) + np.log(3.0), miss, 4)
    gamma = 0.75 - 0.2
    checks.append(("weight normalizer matches closed form",
                   abs(z - closed_form_z(gamma, 4)), 1e-12))

    failed = 0
    for name, value, tol in checks:
        ok = value <= tol
        failed += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {value:.3e} (tol {tol:.0e})")
    if failed:
        print(f"{failed} check(s) failed")
        return EXIT_NUMERICAL
    print("all checks passed")
    return EXIT_OK


RUNNERS = {
    "depth-sweep": run_depth_sweep,
    "ensemble-sweep": run_ensemble_sweep,
    "noise-sweep": run_noise_sweep,
    "phase-diagram": run_phase_diagram,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqcboost",
        description="Variational quantum classifier ensembles on a built-in simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name)
        _add_config_flags(p)
    v = sub.add_parser("verify", help="run built-in numerical self-checks")
    v.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _cmd_verify(args)
    try:
        config = build_config(args)
    except (ValueError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        path = RUNNERS[args.command](config)
    except (FloatingPointError, np.linalg.LinAlgError,
            engine.NumericalError, GroundStateError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
