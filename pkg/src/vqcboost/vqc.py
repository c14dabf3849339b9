"""A single variational quantum classifier: forward pass, weighted
cross-entropy, adjoint gradients, Adam training, prediction."""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace

import numpy as np

from . import engine
from .ansatz import Ansatz, AnsatzSpec, EncodedSample, run_ansatz
from .qstate import NOISELESS, Backend, NoiseModel, measure_projectors


def measured_qubit_indices(num_qubits: int, num_classes: int) -> list[int]:
    m = max(1, (num_classes - 1).bit_length())
    return list(range(num_qubits - m + 1, num_qubits + 1))


@dataclass
class WeakClassifier:
    ansatz: Ansatz
    num_classes: int
    error_rate: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        if self.num_classes < 2 or self.num_classes & (self.num_classes - 1):
            raise ValueError("num_classes must be a power of two >= 2")

    @property
    def measured_qubits(self) -> list[int]:
        return measured_qubit_indices(self.ansatz.num_qubits, self.num_classes)

    @classmethod
    def initial(cls, num_qubits: int, depth: int, num_classes: int, seed: int) -> "WeakClassifier":
        return cls(AnsatzSpec(num_qubits, depth).init(seed), num_classes)


@dataclass
class SampleWeights:
    w: np.ndarray

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if np.any(self.w < 0):
            raise ValueError("sample weights must be non-negative")
        if abs(self.w.sum() - 1.0) > 1e-12:
            raise ValueError(f"sample weights must sum to 1, got {self.w.sum()}")

    @classmethod
    def uniform(cls, num_samples: int) -> "SampleWeights":
        return cls(np.full(num_samples, 1.0 / num_samples))


@dataclass
class TrainConfig:
    learning_rate: float = 5e-3
    iterations: int = 500
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0
    prob_floor: float = 1e-12

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


def dataset_arrays(dataset: list[EncodedSample]) -> tuple[np.ndarray, np.ndarray]:
    """Stack encoded statevectors into a (batch, dim) matrix plus labels."""
    if not dataset:
        raise ValueError("empty dataset")
    for s in dataset:
        if s.state.backend is not Backend.STATEVECTOR:
            raise ValueError("dataset samples must be statevectors")
    X = np.stack([s.state.data for s in dataset])
    y = np.array([s.label for s in dataset], dtype=int)
    return X, y


def class_probabilities(clf: WeakClassifier, sample: EncodedSample,
                        noise: NoiseModel = NOISELESS) -> np.ndarray:
    """Per-sample forward pass through the state simulator."""
    state = sample.state
    if noise.p_depol > 0.0 and state.backend is Backend.STATEVECTOR:
        state = state.to_density_matrix()
    out = run_ansatz(clf.ansatz, state, noise)
    probs = measure_projectors(out, clf.measured_qubits)
    if probs.size > clf.num_classes:
        folded = probs[: clf.num_classes].copy()
        folded[-1] += probs[clf.num_classes:].sum()
        probs = folded
    return probs


def predict(clf: WeakClassifier, sample: EncodedSample,
            noise: NoiseModel = NOISELESS) -> int:
    """Most probable class; ties resolve to the smallest index."""
    return int(np.argmax(class_probabilities(clf, sample, noise)))


def predict_batch(clf: WeakClassifier, X: np.ndarray,
                  noise: NoiseModel = NOISELESS) -> np.ndarray:
    probs = engine.batched_probabilities(clf.ansatz, X, noise, clf.num_classes)
    return np.argmax(probs, axis=1)


def weighted_cross_entropy(clf: WeakClassifier, dataset: list[EncodedSample],
                           weights: SampleWeights, noise: NoiseModel = NOISELESS,
                           prob_floor: float = 1e-12) -> float:
    X, y = dataset_arrays(dataset)
    probs = engine.batched_probabilities(clf.ansatz, X, noise, clf.num_classes)
    return engine.weighted_loss(probs, y, weights.w, prob_floor)


def gradient(clf: WeakClassifier, dataset: list[EncodedSample],
             weights: SampleWeights, noise: NoiseModel = NOISELESS,
             prob_floor: float = 1e-12) -> np.ndarray:
    """Exact gradient of the weighted cross-entropy (adjoint mode)."""
    X, y = dataset_arrays(dataset)
    _, grad, _ = engine.loss_and_gradient(clf.ansatz, X, y, weights.w, noise,
                                          clf.num_classes, prob_floor)
    return grad


def parameter_shift_gradient(clf: WeakClassifier, dataset: list[EncodedSample],
                             weights: SampleWeights, noise: NoiseModel = NOISELESS,
                             prob_floor: float = 1e-12) -> np.ndarray:
    """Shift-rule gradient; kept as a slow cross-check of `gradient`."""
    X, y = dataset_arrays(dataset)
    return engine.parameter_shift_gradient(clf.ansatz, X, y, weights.w, noise,
                                           clf.num_classes, prob_floor)


def error_rate(clf: WeakClassifier, dataset: list[EncodedSample],
               weights: SampleWeights, noise: NoiseModel = NOISELESS) -> float:
    X, y = dataset_arrays(dataset)
    pred = predict_batch(clf, X, noise)
    return float(np.sum(weights.w * (pred != y)))


def train(clf_init: WeakClassifier, dataset: list[EncodedSample],
          weights: SampleWeights, noise: NoiseModel, config: TrainConfig,
          trace_path=None) -> WeakClassifier:
    """Full-batch Adam on the weighted cross-entropy.

    Deterministic given the initial parameters; `config.seed` only enters
    through `WeakClassifier.initial`.
    """
    X, y = dataset_arrays(dataset)
    theta = clf_init.ansatz.theta.copy()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    trace: list[tuple[int, float, float]] = []
    for it in range(1, config.iterations + 1):
        ans = clf_init.ansatz.with_theta(theta)
        loss, grad, probs = engine.loss_and_gradient(
            ans, X, y, weights.w, noise, clf_init.num_classes, config.prob_floor)
        if trace_path is not None:
            acc = float(np.mean(np.argmax(probs, axis=1) == y))
            trace.append((it, loss, acc))
        m = config.beta1 * m + (1.0 - config.beta1) * grad
        v = config.beta2 * v + (1.0 - config.beta2) * grad * grad
        m_hat = m / (1.0 - config.beta1 ** it)
        v_hat = v / (1.0 - config.beta2 ** it)
        theta = theta - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
    if trace_path is not None:
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "loss", "train_accuracy"])
            for row in trace:
                writer.writerow([row[0], repr(row[1]), repr(row[2])])
    return replace(clf_init, ansatz=clf_init.ansatz.with_theta(theta))
