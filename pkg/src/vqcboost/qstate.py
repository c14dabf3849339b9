"""Quantum state backends: pure statevectors and density matrices.

Qubits are 1-indexed and qubit 1 is the most significant bit of the
computational-basis index, i.e. basis state |j> has qubit q in state
(j >> (num_qubits - q)) & 1.

Only CNOTs are noisy.  The noisy CNOT is a depolarizing channel that, with
probability p, replaces the (control, target) pair by the maximally mixed
state I/4 (tensored with the partial trace of the rest), and otherwise
applies the ideal gate.  Noisy evolution requires the density-matrix
backend; a Monte-Carlo trajectory unraveling on statevectors is provided
as a cross-check.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)
PAULIS_1Q = (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z)


class UnsupportedConfigurationError(RuntimeError):
    """Raised when an operation is asked for on an unsupporting backend."""


class Backend(enum.Enum):
    STATEVECTOR = "statevector"
    DENSITY_MATRIX = "density_matrix"


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """2x2 matrix of R_axis(angle) = exp(-i * angle * sigma_axis / 2)."""
    c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
    if axis == "x":
        return np.array([[c, -1.0j * s], [-1.0j * s, c]], dtype=complex)
    if axis == "z":
        return np.array([[c - 1.0j * s, 0.0], [0.0, c + 1.0j * s]], dtype=complex)
    raise ValueError(f"unsupported rotation axis {axis!r}")


def cnot_permutation(num_qubits: int, control: int, target: int) -> np.ndarray:
    """Index permutation perm with (CNOT psi)[j] = psi[perm[j]].

    CNOT is a self-inverse permutation of basis states, so the same array
    serves for forward and adjoint application.
    """
    j = np.arange(1 << num_qubits)
    cbit = (j >> (num_qubits - control)) & 1
    return np.where(cbit == 1, j ^ (1 << (num_qubits - target)), j)


@dataclass
class NoiseModel:
    """Per-CNOT depolarizing strength plus the ZNE gate-fold factor."""

    p_depol: float = 0.0
    fold_factor: int = 1

    def __post_init__(self):
        if not 0.0 <= self.p_depol <= 1.0:
            raise ValueError(f"p_depol must lie in [0, 1], got {self.p_depol}")
        if self.fold_factor < 1 or self.fold_factor % 2 == 0:
            raise ValueError(f"fold_factor must be odd and >= 1, got {self.fold_factor}")

    def with_fold(self, fold_factor: int) -> "NoiseModel":
        return NoiseModel(self.p_depol, fold_factor)


NOISELESS = NoiseModel(0.0, 1)


@dataclass
class QuantumState:
    num_qubits: int
    backend: Backend
    data: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    @classmethod
    def zero(cls, num_qubits: int, backend: Backend = Backend.STATEVECTOR) -> "QuantumState":
        dim = 1 << num_qubits
        if backend is Backend.STATEVECTOR:
            data = np.zeros(dim, dtype=complex)
            data[0] = 1.0
        else:
            data = np.zeros((dim, dim), dtype=complex)
            data[0, 0] = 1.0
        return cls(num_qubits, backend, data)

    @classmethod
    def from_statevector(cls, amplitudes: np.ndarray) -> "QuantumState":
        amplitudes = np.asarray(amplitudes, dtype=complex)
        n = int(round(math.log2(amplitudes.size)))
        if 1 << n != amplitudes.size:
            raise ValueError("statevector length must be a power of two")
        state = cls(n, Backend.STATEVECTOR, amplitudes.copy())
        state.validate(atol=1e-9)
        return state

    @classmethod
    def from_density_matrix(cls, rho: np.ndarray) -> "QuantumState":
        rho = np.asarray(rho, dtype=complex)
        n = int(round(math.log2(rho.shape[0])))
        if rho.ndim != 2 or rho.shape != (1 << n, 1 << n):
            raise ValueError("density matrix must be square with power-of-two size")
        state = cls(n, Backend.DENSITY_MATRIX, rho.copy())
        state.validate(atol=1e-9)
        return state

    def to_density_matrix(self) -> "QuantumState":
        if self.backend is Backend.DENSITY_MATRIX:
            return self.copy()
        rho = np.outer(self.data, self.data.conj())
        return QuantumState(self.num_qubits, Backend.DENSITY_MATRIX, rho)

    def copy(self) -> "QuantumState":
        return QuantumState(self.num_qubits, self.backend, self.data.copy())

    def validate(self, atol: float = 1e-10) -> None:
        if self.backend is Backend.STATEVECTOR:
            norm = float(np.sum(np.abs(self.data) ** 2))
            if abs(norm - 1.0) > atol:
                raise ValueError(f"statevector norm² = {norm} deviates from 1")
        else:
            tr = complex(np.trace(self.data))
            if abs(tr - 1.0) > atol:
                raise ValueError(f"density-matrix trace = {tr} deviates from 1")
            if np.max(np.abs(self.data - self.data.conj().T)) > atol:
                raise ValueError("density matrix is not Hermitian")
            evals = np.linalg.eigvalsh(self.data)
            if evals.min() < -1e-9:
                raise ValueError(f"density matrix has negative eigenvalue {evals.min()}")


def _check_qubit(state: QuantumState, qubit: int) -> None:
    if not 1 <= qubit <= state.num_qubits:
        raise ValueError(f"qubit index {qubit} out of range 1..{state.num_qubits}")


def _apply_matrix_sv(vec: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    lead, trail = 1 << (qubit - 1), 1 << (n - qubit)
    v = vec.reshape(lead, 2, trail)
    out = np.empty_like(v)
    out[:, 0, :] = mat[0, 0] * v[:, 0, :] + mat[0, 1] * v[:, 1, :]
    out[:, 1, :] = mat[1, 0] * v[:, 0, :] + mat[1, 1] * v[:, 1, :]
    return out.reshape(-1)


def _apply_matrix_dm(rho: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    # rho -> (U on qubit) rho (U† on qubit)
    dim = 1 << n
    lead, trail = 1 << (qubit - 1), 1 << (n - qubit)
    r = rho.reshape(lead, 2, trail * dim)
    out = np.empty_like(r)
    out[:, 0, :] = mat[0, 0] * r[:, 0, :] + mat[0, 1] * r[:, 1, :]
    out[:, 1, :] = mat[1, 0] * r[:, 0, :] + mat[1, 1] * r[:, 1, :]
    r = out.reshape(dim, lead, 2, trail)
    mc = mat.conj()
    out2 = np.empty_like(r)
    out2[:, :, 0, :] = mc[0, 0] * r[:, :, 0, :] + mc[0, 1] * r[:, :, 1, :]
    out2[:, :, 1, :] = mc[1, 0] * r[:, :, 0, :] + mc[1, 1] * r[:, :, 1, :]
    return out2.reshape(dim, dim)


def apply_single_qubit_unitary(state: QuantumState, qubit: int, mat: np.ndarray) -> QuantumState:
    """Pure: returns a new state, the input is left untouched."""
    _check_qubit(state, qubit)
    if state.backend is Backend.STATEVECTOR:
        data = _apply_matrix_sv(state.data, mat, qubit, state.num_qubits)
    else:
        data = _apply_matrix_dm(state.data, mat, qubit, state.num_qubits)
    return QuantumState(state.num_qubits, state.backend, data)


def apply_single_qubit_rotation(state: QuantumState, qubit: int, axis: str, angle: float) -> QuantumState:
    """Evolve the state by R_axis(angle) on one qubit (axis 'x' or 'z')."""
    return apply_single_qubit_unitary(state, qubit, rotation_matrix(axis, angle))


def partial_trace_pair(rho: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    """Trace a 2^n x 2^n density matrix over qubits (control, target)."""
    t = rho.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCD"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    col[control - 1] = row[control - 1]
    col[target - 1] = row[target - 1]
    keep_r = [row[q] for q in range(n) if q + 1 not in (control, target)]
    keep_c = [col[q] for q in range(n) if q + 1 not in (control, target)]
    sub = "".join(row) + "".join(col) + "->" + "".join(keep_r) + "".join(keep_c)
    red = np.einsum(sub, t)
    half = 1 << (n - 2)
    return red.reshape(half, half)


def embed_identity_pair(red: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    """Tensor I_4 at (control, target) with `red` on the remaining qubits."""
    dim = 1 << n
    red_t = red.reshape((2,) * (2 * (n - 2)))
    out = np.zeros((2,) * (2 * n), dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            idx = [slice(None)] * (2 * n)
            idx[control - 1] = a
            idx[target - 1] = b
            idx[n + control - 1] = a
            idx[n + target - 1] = b
            out[tuple(idx)] = red_t
    return out.reshape(dim, dim)


def depolarizing_cnot_channel(rho: np.ndarray, n: int, control: int, target: int, p: float) -> np.ndarray:
    """One application of the noisy-CNOT channel on a density matrix."""
    perm = cnot_permutation(n, control, target)
    conj = rho[np.ix_(perm, perm)]
    if p == 0.0:
        return conj
    red = partial_trace_pair(rho, n, control, target)
    mixed = embed_identity_pair(red, n, control, target) / 4.0
    return (1.0 - p) * conj + p * mixed


def apply_cnot(state: QuantumState, control: int, target: int,
               noise: NoiseModel = NOISELESS) -> QuantumState:
    """Apply fold_factor noisy CNOTs on (control, target)."""
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise ValueError("control and target must differ")
    n = state.num_qubits
    data = state.data
    if state.backend is Backend.STATEVECTOR:
        if noise.p_depol > 0.0:
            raise UnsupportedConfigurationError(
                "noisy CNOT on a statevector: use the DensityMatrix backend "
                "or the trajectory unraveling")
        perm = cnot_permutation(n, control, target)
        for _ in range(noise.fold_factor):
            data = data[perm]
    else:
        for _ in range(noise.fold_factor):
            data = depolarizing_cnot_channel(data, n, control, target, noise.p_depol)
    return QuantumState(n, state.backend, data)


def apply_channel_trajectory(state: QuantumState, control: int, target: int,
                             noise: NoiseModel, rng: np.random.Generator) -> QuantumState:
    """Monte-Carlo unraveling of the noisy CNOT on a statevector.

    Each fold applies the ideal CNOT and then, with probability p, a
    uniformly random two-qubit Pauli on the pair (the identity branch is
    merged, giving the plain gate total weight (1-p) + p/16).  Averaging
    |psi><psi| over trajectories converges to the exact channel.
    """
    if state.backend is not Backend.STATEVECTOR:
        raise UnsupportedConfigurationError("trajectory unraveling needs a statevector")
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise ValueError("control and target must differ")
    n = state.num_qubits
    perm = cnot_permutation(n, control, target)
    data = state.data
    for _ in range(noise.fold_factor):
        data = data[perm]
        if noise.p_depol > 0.0 and rng.random() < noise.p_depol:
            k = int(rng.integers(16))
            pc, pt = PAULIS_1Q[k // 4], PAULIS_1Q[k % 4]
            if k // 4:
                data = _apply_matrix_sv(data, pc, control, n)
            if k % 4:
                data = _apply_matrix_sv(data, pt, target, n)
    return QuantumState(n, state.backend, data)


def measure_projectors(state: QuantumState, measured_qubits: list[int]) -> np.ndarray:
    """Computational-basis outcome probabilities on the given qubits.

    Outcomes are ordered by binary value with the first listed qubit as
    the most significant bit.
    """
    if not measured_qubits:
        raise ValueError("measured_qubits must be non-empty")
    if len(set(measured_qubits)) != len(measured_qubits):
        raise ValueError("measured_qubits must be distinct")
    for q in measured_qubits:
        _check_qubit(state, q)
    n = state.num_qubits
    if state.backend is Backend.STATEVECTOR:
        weights = np.abs(state.data) ** 2
    else:
        weights = np.real(np.diagonal(state.data)).copy()
    t = weights.reshape((2,) * n)
    keep = [q - 1 for q in measured_qubits]
    drop = tuple(ax for ax in range(n) if ax not in keep)
    marg = t.sum(axis=drop) if drop else t
    # after sum() the remaining axes sit in increasing qubit order;
    # reorder them to the caller's qubit order
    sorted_keep = sorted(keep)
    marg = np.transpose(marg, [sorted_keep.index(ax) for ax in keep])
    probs = marg.reshape(-1).astype(float)
    return np.clip(probs, 0.0, None)
