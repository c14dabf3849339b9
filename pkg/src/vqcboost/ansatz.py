"""Layered hardware-efficient ansatz and amplitude encoding.

Each layer applies G(θ_q) = R_x(θ_q1) R_z(θ_q2) R_x(θ_q3) on every qubit
(rightmost factor acts first) followed by a nearest-neighbour CNOT ladder
CNOT(q, q+1) for q = 1..N-1 (open chain).  Parameters live in a flat vector
of length 3 * num_qubits * depth, layer-major, then qubit-major, then
[θ_q1, θ_q2, θ_q3].
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .qstate import (NOISELESS, Backend, NoiseModel, QuantumState, apply_cnot,
                     apply_single_qubit_rotation)


class GateSpec(NamedTuple):
    kind: str          # "rot" or "cx"
    qubit: int         # rotation qubit, or control for "cx"
    target: int        # cx target (0 for rotations)
    axis: str          # "x" / "z" for rotations, "" for cx
    param: int         # flat theta index (-1 for cx)


def gate_sequence(num_qubits: int, depth: int) -> tuple[GateSpec, ...]:
    """Gates in application order for the layered ansatz."""
    gates: list[GateSpec] = []
    for d in range(depth):
        base_layer = 3 * num_qubits * d
        for q in range(1, num_qubits + 1):
            base = base_layer + 3 * (q - 1)
            # G = R_x(θ_q1) R_z(θ_q2) R_x(θ_q3), rightmost first
            gates.append(GateSpec("rot", q, 0, "x", base + 2))
            gates.append(GateSpec("rot", q, 0, "z", base + 1))
            gates.append(GateSpec("rot", q, 0, "x", base + 0))
        for q in range(1, num_qubits):
            gates.append(GateSpec("cx", q, q + 1, "", -1))
    return tuple(gates)


@dataclass(frozen=True)
class Ansatz:
    num_qubits: int
    depth: int
    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        if theta.shape != (self.num_params,):
            raise ValueError(
                f"theta must have shape ({self.num_params},), got {theta.shape}")

    @property
    def num_params(self) -> int:
        return 3 * self.num_qubits * self.depth

    def layered(self) -> np.ndarray:
        """View of theta with shape (depth, num_qubits, 3)."""
        return self.theta.reshape(self.depth, self.num_qubits, 3)

    @classmethod
    def from_layers(cls, layers: np.ndarray) -> "Ansatz":
        layers = np.asarray(layers, dtype=float)
        depth, num_qubits, three = layers.shape
        if three != 3:
            raise ValueError("layered parameters must have trailing dimension 3")
        return cls(num_qubits, depth, layers.reshape(-1))

    @classmethod
    def random(cls, num_qubits: int, depth: int, rng: np.random.Generator) -> "Ansatz":
        theta = rng.uniform(0.0, 2.0 * math.pi, 3 * num_qubits * depth)
        return cls(num_qubits, depth, theta)

    def with_theta(self, theta: np.ndarray) -> "Ansatz":
        return replace(self, theta=np.asarray(theta, dtype=float))

    def gates(self) -> tuple[GateSpec, ...]:
        return gate_sequence(self.num_qubits, self.depth)


@dataclass(frozen=True)
class AnsatzSpec:
    """Circuit shape without parameters; seeds turn it into concrete ansatze."""
    num_qubits: int
    depth: int

    def init(self, seed: int) -> Ansatz:
        return Ansatz.random(self.num_qubits, self.depth, np.random.default_rng(seed))


@dataclass
class EncodedSample:
    state: QuantumState
    label: int


def amplitude_encode(features: np.ndarray) -> QuantumState:
    """Encode a feature vector into the amplitudes of ceil(log2 N_f) qubits."""
    features = np.asarray(features, dtype=float)
    if features.ndim != 1 or features.size < 1:
        raise ValueError("features must be a non-empty 1-D vector")
    norm = float(np.linalg.norm(features))
    if norm == 0.0:
        raise ValueError("cannot amplitude-encode the all-zero vector")
    num_qubits = max(1, math.ceil(math.log2(features.size)))
    data = np.zeros(1 << num_qubits, dtype=complex)
    data[: features.size] = features / norm
    return QuantumState(num_qubits, Backend.STATEVECTOR, data)


def run_ansatz(ansatz: Ansatz, input_state: QuantumState,
               noise: NoiseModel = NOISELESS) -> QuantumState:
    """Run the layered circuit on a copy of the input state."""
    if input_state.num_qubits != ansatz.num_qubits:
        raise ValueError(
            f"input has {input_state.num_qubits} qubits, ansatz expects {ansatz.num_qubits}")
    state = input_state.copy()
    theta = ansatz.theta
    for g in ansatz.gates():
        if g.kind == "rot":
            state = apply_single_qubit_rotation(state, g.qubit, g.axis, theta[g.param])
        else:
            state = apply_cnot(state, g.qubit, g.target, noise)
    return state


@dataclass(frozen=True)
class FoldedCircuit:
    """Execution plan where every logical CNOT runs fold_factor noisy CNOTs."""
    ansatz: Ansatz
    fold_factor: int

    def run(self, input_state: QuantumState, noise: NoiseModel = NOISELESS) -> QuantumState:
        return run_ansatz(self.ansatz, input_state, noise.with_fold(self.fold_factor))


def fold_circuit(ansatz: Ansatz, fold_factor: int) -> FoldedCircuit:
    if fold_factor < 1 or fold_factor % 2 == 0:
        raise ValueError(f"fold_factor must be odd and >= 1, got {fold_factor}")
    return FoldedCircuit(ansatz, fold_factor)


def save_checkpoint(path, ansatz: Ansatz, num_classes: int, seed: int,
                    noise_p: float) -> None:
    """Plain-text checkpoint: header plus one parameter per line."""
    with open(path, "w") as fh:
        fh.write(f"num_qubits={ansatz.num_qubits}\n")
        fh.write(f"depth={ansatz.depth}\n")
        fh.write(f"num_classes={num_classes}\n")
        fh.write(f"seed={seed}\n")
        fh.write(f"noise_p={noise_p!r}\n")
        for value in ansatz.theta:
            fh.write(format(value, ".17g") + "\n")


def load_checkpoint(path) -> tuple[Ansatz, dict]:
    meta: dict = {}
    params: list[float] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if "=" in line:
                key, value = line.split("=", 1)
                meta[key] = value
            else:
                params.append(float(line))
    num_qubits = int(meta["num_qubits"])
    depth = int(meta["depth"])
    meta["num_classes"] = int(meta["num_classes"])
    meta["seed"] = int(meta["seed"])
    meta["noise_p"] = float(meta["noise_p"])
    return Ansatz(num_qubits, depth, np.asarray(params)), meta
