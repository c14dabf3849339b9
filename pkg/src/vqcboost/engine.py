"""Batched circuit execution and reverse-mode (adjoint) gradients.

Two execution routes share the gate sequence of `ansatz.gate_sequence`:

* statevector route (noise-free): the whole sample batch evolves as a
  (batch, 2^n) array; gradients come from the standard adjoint sweep,
  un-applying gates backwards while propagating the loss cotangent.

* observable route (depolarizing CNOTs): the class projectors are pulled
  backwards through the adjoint channel of every gate (Heisenberg
  picture).  Probabilities and parameter derivatives then reduce to
  quadratic forms in the *initial* pure states, so the cost per gate is
  independent of the batch size.  This is exactly the superoperator
  adjoint of the density-matrix evolution.
"""
from __future__ import annotations

import numpy as np

from .ansatz import Ansatz
from .qstate import (SIGMA_X, SIGMA_Z, NoiseModel, cnot_permutation,
                     rotation_matrix)

_PAULI = {"x": SIGMA_X, "z": SIGMA_Z}


class NumericalError(RuntimeError):
    """Non-finite loss or gradient during training."""


# ---------------------------------------------------------------------------
# batched statevector ops: X has shape (batch, 2^n)

def _sv_apply(X: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    B = X.shape[0]
    lead, trail = 1 << (qubit - 1), 1 << (n - qubit)
    if trail >= 4:
        v = X.reshape(B * lead, 2, trail)
        return np.matmul(mat, v).reshape(B, -1)
    # short trailing blocks: fold them into rows and contract on the last axis
    v = np.swapaxes(X.reshape(B * lead, 2, trail), 1, 2).reshape(-1, 2)
    out = (v @ mat.T).reshape(B * lead, trail, 2)
    return np.swapaxes(out, 1, 2).reshape(B, -1)


def _sv_apply_t(Xt: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Single-qubit gate on a transposed batch of shape (2^n, batch)."""
    lead = 1 << (qubit - 1)
    v = Xt.reshape(lead, 2, -1)
    return np.matmul(mat, v).reshape(Xt.shape)


def forward_statevectors(ansatz: Ansatz, X: np.ndarray, fold_factor: int = 1) -> np.ndarray:
    """Run the (noise-free) circuit on a batch of statevectors."""
    return _forward_t(ansatz, np.array(X, dtype=complex).T, fold_factor).T.copy()


def _forward_t(ansatz: Ansatz, Xt: np.ndarray, fold_factor: int = 1) -> np.ndarray:
    """Transposed-layout forward pass; Xt has shape (2^n, batch)."""
    n = ansatz.num_qubits
    theta = ansatz.theta
    perms = _cnot_perms(ansatz)
    for g in ansatz.gates():
        if g.kind == "rot":
            Xt = _sv_apply_t(Xt, rotation_matrix(g.axis, theta[g.param]), g.qubit, n)
        else:
            for _ in range(fold_factor):
                Xt = Xt[perms[g.qubit]]
    return Xt


def _cnot_perms(ansatz: Ansatz) -> dict[int, np.ndarray]:
    return {q: cnot_permutation(ansatz.num_qubits, q, q + 1)
            for q in range(1, ansatz.num_qubits)}


def class_probs_from_statevectors(X: np.ndarray, num_classes: int) -> np.ndarray:
    """Marginal over the last ceil(log2 K) qubits; classes are the low bits."""
    B, dim = X.shape
    m = max(1, (num_classes - 1).bit_length())
    block = 1 << m
    p = (np.abs(X) ** 2).reshape(B, dim // block, block).sum(axis=1)
    return p[:, :num_classes] if block == num_classes else _fold_surplus(p, num_classes)


def _fold_surplus(p: np.ndarray, num_classes: int) -> np.ndarray:
    out = p[:, :num_classes].copy()
    out[:, -1] += p[:, num_classes:].sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# observable (Heisenberg) ops: O has shape (K, dim, dim)

def _obs_left(O: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    K, dim = O.shape[0], O.shape[1]
    lead, trail = 1 << (qubit - 1), 1 << (n - qubit)
    v = O.reshape(K * lead, 2, trail * dim)
    return np.matmul(mat, v).reshape(K, dim, dim)


def _obs_right(O: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    # O <- O M with M acting on the column qubit: out_{.b} = sum_c O_{.c} M_{cb};
    # on the column index this is the action of M^T in the row convention
    K, dim = O.shape[0], O.shape[1]
    return _sv_apply(O.reshape(K * dim, dim), mat.T, qubit, n).reshape(K, dim, dim)


def _obs_trace_pair(O: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    K = O.shape[0]
    t = O.reshape((K,) + (2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDE"
    row = list(letters[:n])
    col = list(letters[n:2 * n])
    col[control - 1] = row[control - 1]
    col[target - 1] = row[target - 1]
    keep_r = [row[q] for q in range(n) if q + 1 not in (control, target)]
    keep_c = [col[q] for q in range(n) if q + 1 not in (control, target)]
    sub = "F" + "".join(row) + "".join(col) + "->F" + "".join(keep_r) + "".join(keep_c)
    half = 1 << (n - 2)
    return np.einsum(sub, t).reshape(K, half, half)


def _obs_embed_pair(red: np.ndarray, n: int, control: int, target: int) -> np.ndarray:
    K = red.shape[0]
    dim = 1 << n
    red_t = red.reshape((K,) + (2,) * (2 * (n - 2)))
    out = np.zeros((K,) + (2,) * (2 * n), dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            idx: list = [slice(None)] * (2 * n + 1)
            idx[1 + control - 1] = a
            idx[1 + target - 1] = b
            idx[1 + n + control - 1] = a
            idx[1 + n + target - 1] = b
            out[tuple(idx)] = red_t
    return out.reshape(K, dim, dim)


def _obs_pull_cnot(O: np.ndarray, n: int, control: int, target: int,
                   noise: NoiseModel) -> np.ndarray:
    """Adjoint channel of the noisy CNOT: O <- (1-p) U†OU + p/4 Tr_pair(O) ⊗ I."""
    perm = cnot_permutation(n, control, target)
    p = noise.p_depol
    for _ in range(noise.fold_factor):
        conj = O[:, perm][:, :, perm]
        if p == 0.0:
            O = conj
        else:
            mixed = _obs_embed_pair(_obs_trace_pair(O, n, control, target) / 4.0,
                                    n, control, target)
            O = (1.0 - p) * conj + p * mixed
    return O


def class_projectors(num_qubits: int, num_classes: int) -> np.ndarray:
    """Stack of diagonal projectors onto the last ceil(log2 K) qubits."""
    dim = 1 << num_qubits
    m = max(1, (num_classes - 1).bit_length())
    block = 1 << m
    out = np.zeros((num_classes, dim, dim), dtype=complex)
    j = np.arange(dim)
    for k in range(num_classes):
        sel = (j % block) == k
        if k == num_classes - 1 and block > num_classes:
            sel = (j % block) >= k
        out[k, j[sel], j[sel]] = 1.0
    return out


def pulled_observables(ansatz: Ansatz, noise: NoiseModel, num_classes: int) -> np.ndarray:
    """Class projectors pulled back through the whole circuit's adjoint."""
    n = ansatz.num_qubits
    theta = ansatz.theta
    O = class_projectors(n, num_classes)
    for g in reversed(ansatz.gates()):
        if g.kind == "rot":
            G = rotation_matrix(g.axis, theta[g.param])
            O = _obs_right(_obs_left(O, G.conj().T, g.qubit, n), G, g.qubit, n)
        else:
            O = _obs_pull_cnot(O, n, g.qubit, g.target, noise)
    return O


def expectations(O: np.ndarray, X: np.ndarray) -> np.ndarray:
    """<x_i| O_k |x_i> for a stack of observables; returns (batch, K) real."""
    B = X.shape[0]
    K = O.shape[0]
    out = np.empty((B, K))
    Xc = X.conj()
    for k in range(K):
        out[:, k] = np.real(np.einsum("ib,ib->i", Xc @ O[k], X))
    return out


# ---------------------------------------------------------------------------
# loss and gradients

def batched_probabilities(ansatz: Ansatz, X: np.ndarray, noise: NoiseModel,
                          num_classes: int) -> np.ndarray:
    """Class probabilities for a batch of encoded (pure) inputs."""
    if noise.p_depol == 0.0:
        out = forward_statevectors(ansatz, X, noise.fold_factor)
        return np.clip(class_probs_from_statevectors(out, num_classes), 0.0, None)
    A = pulled_observables(ansatz, noise, num_classes)
    return np.clip(expectations(A, X), 0.0, None)


def weighted_loss(probs: np.ndarray, labels: np.ndarray, weights: np.ndarray,
                  prob_floor: float) -> float:
    py = probs[np.arange(len(labels)), labels]
    return float(-np.sum(weights * np.log(np.maximum(py, prob_floor))))


def _loss_cotangent(probs: np.ndarray, labels: np.ndarray, weights: np.ndarray,
                    prob_floor: float) -> np.ndarray:
    """dL/dp_{ik}; zero off the true class and where the floor binds."""
    B, K = probs.shape
    c = np.zeros((B, K))
    py = probs[np.arange(B), labels]
    active = py > prob_floor
    c[np.arange(B)[active], labels[active]] = -weights[active] / py[active]
    return c


def loss_and_gradient(ansatz: Ansatz, X: np.ndarray, labels: np.ndarray,
                      weights: np.ndarray, noise: NoiseModel, num_classes: int,
                      prob_floor: float = 1e-12) -> tuple[float, np.ndarray, np.ndarray]:
    """Weighted cross-entropy, its exact adjoint-mode gradient, and probs."""
    if noise.p_depol == 0.0:
        return _loss_grad_statevector(ansatz, X, labels, weights, noise,
                                      num_classes, prob_floor)
    return _loss_grad_observable(ansatz, X, labels, weights, noise,
                                 num_classes, prob_floor)


def _loss_grad_statevector(ansatz, X, labels, weights, noise, num_classes, prob_floor):
    n = ansatz.num_qubits
    theta = ansatz.theta
    perms = _cnot_perms(ansatz)
    out_t = _forward_t(ansatz, np.array(X, dtype=complex).T, noise.fold_factor)
    probs = np.clip(class_probs_from_statevectors(out_t.T, num_classes), 0.0, None)
    loss = weighted_loss(probs, labels, weights, prob_floor)
    c = _loss_cotangent(probs, labels, weights, prob_floor)
    # cotangent lam_i = sum_k c_ik Pi_k psi_i; the projectors are diagonal
    dim = out_t.shape[0]
    m = max(1, (num_classes - 1).bit_length())
    block = 1 << m
    cls = np.arange(dim) % block
    cls = np.minimum(cls, num_classes - 1)  # surplus outcomes fold into the last class
    lam = c.T[cls] * out_t  # lam[j, i] = c[i, cls[j]] psi_t[j, i]
    grad = np.zeros(ansatz.num_params)
    psi = out_t
    for g in reversed(ansatz.gates()):
        if g.kind == "rot":
            sig_psi = _sv_apply_t(psi, _PAULI[g.axis], g.qubit, n)
            # 2 Re( <lam| (-i/2) sig |psi> ) = Im <lam| sig |psi>
            grad[g.param] = float(np.imag(np.vdot(lam, sig_psi)))
            Gdag = rotation_matrix(g.axis, -theta[g.param])
            psi = _sv_apply_t(psi, Gdag, g.qubit, n)
            lam = _sv_apply_t(lam, Gdag, g.qubit, n)
        else:
            perm = perms[g.qubit]
            for _ in range(noise.fold_factor):
                psi = psi[perm]
                lam = lam[perm]
    _check_finite(loss, grad)
    return loss, grad, probs


def _loss_grad_observable(ansatz, X, labels, weights, noise, num_classes, prob_floor):
    # dp_ik/dθ_t = Tr( Φ_{1..j-1}†( i/2 [σ, B_k^{(j)}] ) ρ_i )
    #            = Tr( i/2 [σ, B_k^{(j)}] · Φ_{j-1..1}(ρ_i) ),
    # with B^{(j)} the projector pulled back through gates N..j.  Sweep 1
    # pulls the projectors and stores the commutator observable of every
    # rotation; sweep 2 pushes the weighted input matrices forward and
    # takes the traces at each gate position.
    n = ansatz.num_qubits
    theta = ansatz.theta
    gates = ansatz.gates()
    B = class_projectors(n, num_classes)
    commutators: dict[int, np.ndarray] = {}
    for g in reversed(gates):
        if g.kind == "rot":
            G = rotation_matrix(g.axis, theta[g.param])
            B = _obs_right(_obs_left(B, G.conj().T, g.qubit, n), G, g.qubit, n)
            sigma = _PAULI[g.axis]
            commutators[g.param] = 0.5j * (_obs_left(B, sigma, g.qubit, n)
                                           - _obs_right(B, sigma, g.qubit, n))
        else:
            B = _obs_pull_cnot(B, n, g.qubit, g.target, noise)
    probs = np.clip(expectations(B, X), 0.0, None)
    loss = weighted_loss(probs, labels, weights, prob_floor)
    c = _loss_cotangent(probs, labels, weights, prob_floor)
    rho_bar = np.empty((num_classes,) + B.shape[1:], dtype=complex)
    for k in range(num_classes):
        rho_bar[k] = (X.T * c[:, k]) @ X.conj()
    grad = np.zeros(ansatz.num_params)
    for g in gates:
        if g.kind == "rot":
            grad[g.param] = float(np.real(
                np.einsum("kab,kba->", commutators.pop(g.param), rho_bar)))
            G = rotation_matrix(g.axis, theta[g.param])
            rho_bar = _obs_right(_obs_left(rho_bar, G, g.qubit, n),
                                 G.conj().T, g.qubit, n)
        else:
            # the depolarizing-CNOT channel has the same matrix form as its
            # adjoint (CNOT is self-adjoint, the mixing term is symmetric)
            rho_bar = _obs_pull_cnot(rho_bar, n, g.qubit, g.target, noise)
    _check_finite(loss, grad)
    return loss, grad, probs


def _check_finite(loss: float, grad: np.ndarray) -> None:
    if not np.isfinite(loss) or not np.all(np.isfinite(grad)):
        raise NumericalError("non-finite loss or gradient")


def parameter_shift_gradient(ansatz: Ansatz, X: np.ndarray, labels: np.ndarray,
                             weights: np.ndarray, noise: NoiseModel,
                             num_classes: int, prob_floor: float = 1e-12) -> np.ndarray:
    """Gradient via the ±π/2 shift rule chained through dL/dp."""
    probs = batched_probabilities(ansatz, X, noise, num_classes)
    c = _loss_cotangent(probs, labels, weights, prob_floor)
    grad = np.empty(ansatz.num_params)
    for t in range(ansatz.num_params):
        shift = np.zeros(ansatz.num_params)
        shift[t] = np.pi / 2.0
        p_plus = batched_probabilities(ansatz.with_theta(ansatz.theta + shift), X,
                                       noise, num_classes)
        p_minus = batched_probabilities(ansatz.with_theta(ansatz.theta - shift), X,
                                        noise, num_classes)
        grad[t] = float(np.sum(c * (p_plus - p_minus) / 2.0))
    return grad
