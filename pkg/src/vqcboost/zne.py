"""Zero-noise extrapolation of class probabilities via CNOT gate folding.

Every logical CNOT is replaced by an odd number of noisy CNOTs; the
per-class probabilities measured at fold factors c in {1, 3, 5, 7} are
extrapolated to c = 0 with the exact interpolating polynomial (Lagrange),
then clipped to [0, 1] and renormalized.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import engine
from .ansatz import EncodedSample
from .qstate import NoiseModel
from .vqc import WeakClassifier, class_probabilities


@dataclass(frozen=True)
class ZneSchedule:
    fold_factors: tuple[int, ...] = (1, 3, 5, 7)
    extrapolation_degree: int = 3

    def __post_init__(self):
        folds = tuple(self.fold_factors)
        object.__setattr__(self, "fold_factors", folds)
        if len(set(folds)) != len(folds):
            raise ValueError("fold factors must be distinct")
        if any(f < 1 or f % 2 == 0 for f in folds):
            raise ValueError("fold factors must be odd and >= 1")
        if list(folds) != sorted(folds):
            raise ValueError("fold factors must be strictly increasing")
        if self.extrapolation_degree != len(folds) - 1:
            raise ValueError("extrapolation degree must be len(fold_factors) - 1")


def extrapolation_weights(fold_factors: tuple[int, ...]) -> np.ndarray:
    """Lagrange weights evaluating the interpolating polynomial at 0."""
    cs = np.asarray(fold_factors, dtype=float)
    weights = np.empty(len(cs))
    for j, cj in enumerate(cs):
        others = np.delete(cs, j)
        weights[j] = np.prod((0.0 - others) / (cj - others))
    return weights


def _finalize(extrapolated: np.ndarray) -> tuple[np.ndarray, bool]:
    clipped = np.clip(extrapolated, 0.0, 1.0)
    total = clipped.sum(axis=-1, keepdims=True)
    degenerate = (total == 0.0).squeeze(-1)
    safe_total = np.where(total == 0.0, 1.0, total)
    out = clipped / safe_total
    if np.any(degenerate):
        out = np.where((total == 0.0), 1.0 / extrapolated.shape[-1], out)
        warnings.warn("all extrapolated probabilities clipped to zero; "
                      "falling back to the uniform distribution")
    return out, bool(np.any(degenerate))


def zne_probabilities(clf: WeakClassifier, sample: EncodedSample,
                      base_noise: NoiseModel,
                      schedule: ZneSchedule = ZneSchedule()) -> np.ndarray:
    """Mitigated class probabilities for one sample."""
    points = np.stack([
        class_probabilities(clf, sample, base_noise.with_fold(c))
        for c in schedule.fold_factors])
    extrapolated = extrapolation_weights(schedule.fold_factors) @ points
    out, _ = _finalize(extrapolated)
    return out


def zne_probabilities_batch(clf: WeakClassifier, X: np.ndarray,
                            base_noise: NoiseModel,
                            schedule: ZneSchedule = ZneSchedule(),
                            return_points: bool = False):
    points = np.stack([
        engine.batched_probabilities(clf.ansatz, X, base_noise.with_fold(c),
                                     clf.num_classes)
        for c in schedule.fold_factors])
    extrapolated = np.einsum("c,cbk->bk", extrapolation_weights(schedule.fold_factors),
                             points)
    out, _ = _finalize(extrapolated)
    if return_points:
        return out, points
    return out


def predict_mitigated(clf: WeakClassifier, sample: EncodedSample,
                      base_noise: NoiseModel,
                      schedule: ZneSchedule = ZneSchedule()) -> int:
    return int(np.argmax(zne_probabilities(clf, sample, base_noise, schedule)))


def predict_mitigated_batch(clf: WeakClassifier, X: np.ndarray,
                            base_noise: NoiseModel,
                            schedule: ZneSchedule = ZneSchedule()) -> np.ndarray:
    return np.argmax(zne_probabilities_batch(clf, X, base_noise, schedule), axis=1)
