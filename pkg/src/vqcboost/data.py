"""Dataset pipelines: 8x8 handwritten digits and SPT spin-chain ground states.

Digits come in the classic optdigits comma-separated format (64 integer
pixels in 0..16 followed by the digit).  Only digits {1, 3, 5, 7} are
kept, remapped to class indices {0, 1, 2, 3}, with pixels scaled by 1/16.

The quantum dataset is built from ground states of the cluster-type chain
H = -J Σ σ_z σ_x σ_z - h1 Σ σ_x σ_x - h2 Σ σ_x (open boundaries),
labeled SPT when the string order parameter
S = <σ_z^(1) (Π_{even i} σ_x^(i)) σ_z^(N)> exceeds a threshold in
absolute value.
"""
from __future__ import annotations

import csv
import importlib.resources
import math
import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, eigsh

from .ansatz import EncodedSample, amplitude_encode
from .qstate import Backend, QuantumState

DIGIT_CLASSES = {1: 0, 3: 1, 5: 2, 7: 3}


@dataclass
class ClassicalDataset:
    features: np.ndarray   # (num_samples, 64) floats in [0, 1]
    labels: np.ndarray     # class indices 0..3

    def __len__(self) -> int:
        return len(self.labels)

    def encoded(self) -> list[EncodedSample]:
        return [EncodedSample(amplitude_encode(f), int(y))
                for f, y in zip(self.features, self.labels)]

    def encoded_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        norms = np.linalg.norm(self.features, axis=1)
        if np.any(norms == 0):
            raise ValueError("cannot amplitude-encode an all-zero sample")
        X = (self.features / norms[:, None]).astype(complex)
        return X, self.labels.copy()


def _parse_digits_file(path) -> ClassicalDataset:
    features, labels = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 65:
                raise ValueError(f"{path}:{lineno}: expected 65 fields, got {len(parts)}")
            try:
                values = [int(p) for p in parts]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: non-integer field") from exc
            pixels, digit = values[:64], values[64]
            if any(not 0 <= p <= 16 for p in pixels):
                raise ValueError(f"{path}:{lineno}: pixel outside 0..16")
            if not 0 <= digit <= 9:
                raise ValueError(f"{path}:{lineno}: unknown digit {digit}")
            if digit in DIGIT_CLASSES:
                features.append(pixels)
                labels.append(DIGIT_CLASSES[digit])
    return ClassicalDataset(np.asarray(features, dtype=float) / 16.0,
                            np.asarray(labels, dtype=int))


def load_digits(train_path, test_path) -> tuple[ClassicalDataset, ClassicalDataset]:
    """Load the odd-digit four-class task from optdigits-format files."""
    return _parse_digits_file(train_path), _parse_digits_file(test_path)


def packaged_digits_paths() -> tuple[str, str]:
    """Paths of the digit CSVs shipped with the package."""
    root = importlib.resources.files("vqcboost") / "datasets"
    return str(root / "digits_train.csv"), str(root / "digits_test.csv")


# ---------------------------------------------------------------------------
# SPT Hamiltonian and quantum dataset

class SptHamiltonian:
    """H as an implicit Hermitian operator (sparse matrix-vector product)."""

    def __init__(self, num_qubits: int, coupling_j: float, h1: float, h2: float):
        if num_qubits < 3:
            raise ValueError("the chain needs at least 3 qubits")
        self.num_qubits = num_qubits
        self.coupling_j = coupling_j
        self.h1 = h1
        self.h2 = h2
        self.dim = 1 << num_qubits
        self._matrix = self._build_sparse()

    def _flip(self, qubit: int) -> int:
        return 1 << (self.num_qubits - qubit)

    def _bit(self, j: np.ndarray, qubit: int) -> np.ndarray:
        return (j >> (self.num_qubits - qubit)) & 1

    def _build_sparse(self) -> sp.csr_matrix:
        n, dim = self.num_qubits, self.dim
        j = np.arange(dim)
        rows, cols, vals = [], [], []
        for i in range(1, n - 1):
            # -J σ_z^(i) σ_x^(i+1) σ_z^(i+2)
            phase = 1.0 - 2.0 * ((self._bit(j, i) + self._bit(j, i + 2)) % 2)
            rows.append(j ^ self._flip(i + 1))
            cols.append(j)
            vals.append(-self.coupling_j * phase)
        for i in range(1, n):
            rows.append(j ^ self._flip(i) ^ self._flip(i + 1))
            cols.append(j)
            vals.append(np.full(dim, -self.h1))
        for i in range(1, n + 1):
            rows.append(j ^ self._flip(i))
            cols.append(j)
            vals.append(np.full(dim, -self.h2))
        matrix = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim))
        return matrix.tocsr()

    @property
    def matrix(self) -> sp.csr_matrix:
        return self._matrix

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        return self._matrix @ vec

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator((self.dim, self.dim), matvec=self.matvec,
                              dtype=float)


def build_spt_hamiltonian(num_qubits: int, coupling_j: float, h1: float,
                          h2: float) -> SptHamiltonian:
    return SptHamiltonian(num_qubits, coupling_j, h1, h2)


class GroundStateError(RuntimeError):
    pass


def ground_state(hamiltonian: SptHamiltonian) -> tuple[QuantumState, float]:
    """Lowest eigenpair via Lanczos with a fixed all-ones start vector."""
    dim = hamiltonian.dim
    v0 = np.full(dim, 1.0 / math.sqrt(dim))
    try:
        evals, evecs = eigsh(hamiltonian.as_linear_operator(), k=1, which="SA", v0=v0)
    except Exception as exc:
        raise GroundStateError(f"Lanczos did not converge: {exc}") from exc
    energy = float(evals[0])
    vec = evecs[:, 0]
    residual = float(np.linalg.norm(hamiltonian.matvec(vec) - energy * vec))
    if residual > 1e-8:
        raise GroundStateError(f"ground-state residual {residual} exceeds 1e-8")
    state = QuantumState(hamiltonian.num_qubits, Backend.STATEVECTOR,
                         vec.astype(complex))
    return state, energy


def string_order_parameter(state: QuantumState) -> float:
    """S = <σ_z^(1) (Π_{even i, 1<i<N} σ_x^(i)) σ_z^(N)>, odd chains only."""
    n = state.num_qubits
    if n % 2 == 0:
        raise ValueError("string order endpoints require an odd chain length")
    if state.backend is not Backend.STATEVECTOR:
        raise ValueError("string order is computed on statevectors")
    mask = 0
    for i in range(2, n, 2):
        mask ^= 1 << (n - i)
    j = np.arange(state.dim)
    phase = 1.0 - 2.0 * (((j >> (n - 1)) & 1) ^ (j & 1))
    value = np.sum(state.data.conj() * phase * state.data[j ^ mask])
    return float(np.real(value))


@dataclass
class SptSample:
    h1_over_j: float
    h2_over_j: float
    ground_state: QuantumState
    string_order: float
    energy: float
    label: int


DEFAULT_H1_RANGE = (-1.6, 1.6)
DEFAULT_H2_RANGE = (0.0, 1.6)
# Calibrated on the 9-qubit chain so the labeling boundary on the h1=0 line
# sits at h2/J = 1.0, the critical point of the solvable line; |S| there is
# 0.1857, and a fixed threshold drifts with chain length (finite-size decay).
DEFAULT_THRESHOLD = 0.185


def spt_sample_at(num_qubits: int, h1: float, h2: float,
                  threshold: float = DEFAULT_THRESHOLD) -> SptSample:
    ham = build_spt_hamiltonian(num_qubits, 1.0, h1, h2)
    state, energy = ground_state(ham)
    order = string_order_parameter(state)
    return SptSample(h1, h2, state, order, energy, int(abs(order) > threshold))


def generate_spt_dataset(num_qubits: int, h1_range=DEFAULT_H1_RANGE,
                         h2_range=DEFAULT_H2_RANGE, num_samples: int = 400,
                         seed: int = 0,
                         threshold: float = DEFAULT_THRESHOLD) -> list[SptSample]:
    """Ground states at uniformly random couplings, labeled by string order."""
    if num_samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(num_samples):
        h1 = float(rng.uniform(*h1_range))
        h2 = float(rng.uniform(*h2_range))
        samples.append(spt_sample_at(num_qubits, h1, h2, threshold))
    return samples


def spt_encoded(samples: list[SptSample]) -> list[EncodedSample]:
    return [EncodedSample(s.ground_state, s.label) for s in samples]


def spt_arrays(samples: list[SptSample]) -> tuple[np.ndarray, np.ndarray]:
    X = np.stack([s.ground_state.data for s in samples])
    y = np.array([s.label for s in samples], dtype=int)
    return X, y


def save_spt_dataset(csv_path, sidecar_path, samples: list[SptSample],
                     num_qubits: int, seed: int, threshold: float,
                     h1_range=DEFAULT_H1_RANGE, h2_range=DEFAULT_H2_RANGE) -> None:
    """CSV of per-sample records plus a binary sidecar of ground states.

    The sidecar holds little-endian 8-byte reals, interleaved (re, im),
    sample-major.
    """
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["num_qubits", num_qubits, "seed", seed,
                         "threshold", repr(threshold),
                         "h1_range", repr(h1_range[0]), repr(h1_range[1]),
                         "h2_range", repr(h2_range[0]), repr(h2_range[1])])
        writer.writerow(["h1_over_j", "h2_over_j", "string_order", "label", "energy"])
        for s in samples:
            writer.writerow([repr(s.h1_over_j), repr(s.h2_over_j),
                             repr(s.string_order), s.label, repr(s.energy)])
    with open(sidecar_path, "wb") as fh:
        for s in samples:
            interleaved = np.empty(2 * s.ground_state.dim)
            interleaved[0::2] = s.ground_state.data.real
            interleaved[1::2] = s.ground_state.data.imag
            fh.write(struct.pack(f"<{interleaved.size}d", *interleaved))


def load_spt_dataset(csv_path, sidecar_path) -> list[SptSample]:
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        num_qubits = int(header[1])
        next(reader)  # column names
        records = [(float(r[0]), float(r[1]), float(r[2]), int(r[3]), float(r[4]))
                   for r in reader]
    dim = 1 << num_qubits
    samples = []
    with open(sidecar_path, "rb") as fh:
        for h1, h2, order, label, energy in records:
            raw = fh.read(16 * dim)
            interleaved = np.array(struct.unpack(f"<{2 * dim}d", raw))
            vec = interleaved[0::2] + 1.0j * interleaved[1::2]
            state = QuantumState(num_qubits, Backend.STATEVECTOR, vec)
            samples.append(SptSample(h1, h2, state, order, energy, label))
    return samples
