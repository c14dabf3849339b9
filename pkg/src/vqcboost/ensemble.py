"""Bagging and AdaBoost (SAMME) over weak variational classifiers.

The AdaBoost stage weight is alpha_l = log((1-e_l)/e_l) + log(K_c - 1) and
sample weights update with exponent alpha_l * ((1-K_c)/K_c + 1[misclassified]),
normalized by Z_l.  The exponential training-error bound
e_AB <= exp(-K_c/(K_c-1) * L_c * gamma^2), gamma_l = (K_c-1)/K_c - e_l,
is re-checked at runtime on every completed run.
"""
from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .ansatz import AnsatzSpec, EncodedSample, load_checkpoint, save_checkpoint
from .qstate import NOISELESS, NoiseModel
from .vqc import (SampleWeights, TrainConfig, WeakClassifier, dataset_arrays,
                  predict_batch, train)
from . import engine

ERROR_CLAMP = 1e-10  # keeps alpha finite when a stage classifies perfectly


class Combination(enum.Enum):
    HARD_VOTE = "hard_vote"
    WEIGHTED_HARD_VOTE = "weighted_hard_vote"
    WEIGHTED_PROBABILITY = "weighted_probability"


@dataclass
class EnsembleModel:
    members: list[WeakClassifier]
    alphas: np.ndarray
    combination: Combination
    num_classes: int

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=float)
        if len(self.alphas) != len(self.members):
            raise ValueError("alphas and members must have equal length")
        if self.combination is Combination.WEIGHTED_HARD_VOTE and np.any(self.alphas <= 0):
            raise ValueError("weighted hard vote requires positive alphas")

    def truncated(self, length: int) -> "EnsembleModel":
        return EnsembleModel(self.members[:length], self.alphas[:length],
                             self.combination, self.num_classes)


@dataclass
class BoostDiagnostics:
    error_rates: list[float] = field(default_factory=list)
    alphas: list[float] = field(default_factory=list)
    gammas: list[float] = field(default_factory=list)
    z_factors: list[float] = field(default_factory=list)
    final_train_error: float = math.nan
    bound: float = math.nan
    warning: str = ""

    @property
    def num_stages(self) -> int:
        return len(self.error_rates)


def update_weights(weights: SampleWeights, alpha: float, misclassified: np.ndarray,
                   num_classes: int) -> tuple[SampleWeights, float]:
    """One SAMME reweighting step; returns the new weights and Z_l."""
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    exponent = alpha * ((1.0 - num_classes) / num_classes + misclassified.astype(float))
    unnorm = weights.w * np.exp(exponent)
    z = float(unnorm.sum())
    if z <= 0.0:
        raise ValueError("zero normalizing factor in weight update")
    return SampleWeights(unnorm / z), z


def stage_alpha(error: float, num_classes: int) -> float:
    error = max(error, ERROR_CLAMP)
    return math.log((1.0 - error) / error) + math.log(num_classes - 1)


def _vote_scores(model: EnsembleModel, member_probs: list[np.ndarray] | None,
                 member_preds: np.ndarray) -> np.ndarray:
    B = member_preds.shape[1]
    K = model.num_classes
    scores = np.zeros((B, K))
    if model.combination is Combination.WEIGHTED_PROBABILITY:
        for alpha, probs in zip(model.alphas, member_probs):
            scores += alpha * probs
        return scores
    for l, alpha in enumerate(model.alphas):
        weight = 1.0 if model.combination is Combination.HARD_VOTE else alpha
        np.add.at(scores, (np.arange(B), member_preds[l]), weight)
    return scores


def predict_ensemble_batch(model: EnsembleModel, X: np.ndarray,
                           noise: NoiseModel = NOISELESS) -> np.ndarray:
    if not model.members:
        raise ValueError("empty ensemble")
    member_probs = None
    if model.combination is Combination.WEIGHTED_PROBABILITY:
        member_probs = [engine.batched_probabilities(m.ansatz, X, noise, m.num_classes)
                        for m in model.members]
        preds = np.stack([np.argmax(p, axis=1) for p in member_probs])
    else:
        preds = np.stack([predict_batch(m, X, noise) for m in model.members])
    scores = _vote_scores(model, member_probs, preds)
    return np.argmax(scores, axis=1)  # argmax ties resolve to the smallest index


def predict_ensemble(model: EnsembleModel, sample: EncodedSample,
                     noise: NoiseModel = NOISELESS) -> int:
    X = sample.state.data[np.newaxis, :]
    return int(predict_ensemble_batch(model, X, noise)[0])


def ensemble_accuracy(model: EnsembleModel, X: np.ndarray, y: np.ndarray,
                      noise: NoiseModel = NOISELESS) -> float:
    return float(np.mean(predict_ensemble_batch(model, X, noise) == y))


def train_bagging(dataset: list[EncodedSample], num_members: int, spec: AnsatzSpec,
                  noise: NoiseModel, config: TrainConfig, seeds: list[int],
                  num_classes: int, resample: bool = False) -> EnsembleModel:
    """Independently trained members combined by plain majority vote.

    The default follows initialization diversity only; `resample=True`
    switches to classical bootstrap resampling.
    """
    if num_members < 1:
        raise ValueError("need at least one member")
    if len(seeds) != num_members:
        raise ValueError("need one seed per member")
    members = []
    uniform = SampleWeights.uniform(len(dataset))
    for seed in seeds:
        data = dataset
        weights = uniform
        if resample:
            rng = np.random.default_rng(seed)
            idx = rng.integers(len(dataset), size=len(dataset))
            data = [dataset[i] for i in idx]
            weights = SampleWeights.uniform(len(data))
        init = WeakClassifier.initial(spec.num_qubits, spec.depth, num_classes, seed)
        clf = train(init, data, weights, noise, TrainConfig(**{**config.__dict__, "seed": seed}))
        members.append(clf)
    return EnsembleModel(members, np.ones(num_members), Combination.HARD_VOTE, num_classes)


RETRY_SEED_OFFSET = 7919


def train_adaboost(dataset: list[EncodedSample], num_members: int, spec: AnsatzSpec,
                   noise: NoiseModel, config: TrainConfig, seeds: list[int],
                   num_classes: int,
                   combination: Combination = Combination.WEIGHTED_HARD_VOTE,
                   ) -> tuple[EnsembleModel, BoostDiagnostics]:
    """Sequential SAMME boosting of weak classifiers."""
    if num_members < 1:
        raise ValueError("need at least one member")
    if len(seeds) != num_members:
        raise ValueError("need one seed per member")
    X, y = dataset_arrays(dataset)
    weights = SampleWeights.uniform(len(dataset))
    random_guess = (num_classes - 1) / num_classes
    members: list[WeakClassifier] = []
    diag = BoostDiagnostics()
    for seed in seeds:
        clf, err = _train_stage(dataset, X, y, spec, noise, config, seed,
                                num_classes, weights)
        if err >= random_guess:
            # one retry with a fresh seed, then give up on further stages
            clf, err = _train_stage(dataset, X, y, spec, noise, config,
                                    seed + RETRY_SEED_OFFSET, num_classes, weights)
            if err >= random_guess:
                diag.warning = (f"stage {len(members) + 1} failed the weak-learner "
                                f"condition twice (e_l={err:.4f}); stopping early")
                break
        err = max(err, ERROR_CLAMP)
        alpha = stage_alpha(err, num_classes)
        misclassified = predict_batch(clf, X, noise) != y
        weights, z = update_weights(weights, alpha, misclassified, num_classes)
        clf.error_rate = err
        clf.alpha = alpha
        members.append(clf)
        diag.error_rates.append(err)
        diag.alphas.append(alpha)
        diag.gammas.append(random_guess - err)
        diag.z_factors.append(z)
    model = EnsembleModel(members, np.array([m.alpha for m in members]),
                          combination, num_classes)
    if members:
        vote = model if combination is not Combination.WEIGHTED_PROBABILITY else \
            EnsembleModel(members, model.alphas, Combination.WEIGHTED_HARD_VOTE, num_classes)
        diag.final_train_error = 1.0 - ensemble_accuracy(vote, X, y, noise)
        if all(g > 0 for g in diag.gammas):
            gamma = min(diag.gammas)
            diag.bound = math.exp(-num_classes / (num_classes - 1)
                                  * diag.num_stages * gamma * gamma)
    return model, diag


def _train_stage(dataset, X, y, spec, noise, config, seed, num_classes, weights):
    init = WeakClassifier.initial(spec.num_qubits, spec.depth, num_classes, seed)
    clf = train(init, dataset, weights, noise,
                TrainConfig(**{**config.__dict__, "seed": seed}))
    err = float(np.sum(weights.w * (predict_batch(clf, X, noise) != y)))
    return clf, err


@dataclass
class BoundReport:
    applicable: bool
    product_bound_ok: bool        # training error <= prod_l Z_l
    stage_bounds_ok: bool         # each Z_l <= exp(-K/(K-1) gamma_l^2)
    exponential_bound_ok: bool    # training error <= exp(-K/(K-1) L gamma^2)
    z_product: float
    stage_bounds: list[float]
    exponential_bound: float
    inapplicable_stages: list[int]
    # Vote-margin bound: error <= prod_l Z_l * exp((K-2)/(2K) * sum_l alpha_l).
    # Coincides with the plain product bound for K=2; for K>2 the plain
    # product bound can fail (the margin argument only guarantees that a
    # misclassified point carries at least half the total alpha mass on
    # wrong classes, which costs the extra exponential factor).
    margin_product_bound: float = math.nan
    margin_product_ok: bool = False

    def __bool__(self) -> bool:
        return (self.applicable and self.product_bound_ok
                and self.stage_bounds_ok and self.exponential_bound_ok)


BOUND_SLACK = 1e-10


def verify_bounds(diag: BoostDiagnostics) -> BoundReport:
    """Check the chain of boosting inequalities on recorded diagnostics.

    The chain is: final training error <= product of stage normalizers Z_l,
    each Z_l <= exp(-K/(K-1) gamma_l^2), hence the error is below an
    exponential in the number of stages and the worst edge.  The chain only
    applies when every stage beat random guessing (gamma_l > 0).

    The first link is a theorem only for K=2.  For K>2 classes the weighted
    vote can err even when the exponential weight bookkeeping says otherwise,
    and `product_bound_ok` can legitimately come back False (see the
    `margin_product_bound` field for the inequality that does hold for any K).
    """
    k_over = None
    bad = [l + 1 for l, g in enumerate(diag.gammas) if g <= 0]
    if bad or diag.num_stages == 0:
        return BoundReport(False, False, False, False, math.nan, [], math.nan, bad)
    kc = _infer_num_classes(diag)
    k_over = kc / (kc - 1)
    z_product = float(np.prod(diag.z_factors))
    product_ok = diag.final_train_error <= z_product + BOUND_SLACK
    stage_bounds = [math.exp(-k_over * g * g) for g in diag.gammas]
    stage_ok = all(z <= b + BOUND_SLACK for z, b in zip(diag.z_factors, stage_bounds))
    gamma = min(diag.gammas)
    exponential_bound = math.exp(-k_over * diag.num_stages * gamma * gamma)
    exponential_ok = diag.final_train_error <= exponential_bound + BOUND_SLACK
    margin_bound = z_product * math.exp(
        (kc - 2) / (2.0 * kc) * float(np.sum(diag.alphas)))
    margin_ok = diag.final_train_error <= margin_bound + BOUND_SLACK
    return BoundReport(True, product_ok, stage_ok, exponential_ok, z_product,
                       stage_bounds, exponential_bound, [],
                       margin_bound, margin_ok)


def _infer_num_classes(diag: BoostDiagnostics) -> int:
    # alpha = log((1-e)/e) + log(K-1) inverts exactly
    e, a = diag.error_rates[0], diag.alphas[0]
    return int(round(math.exp(a - math.log((1.0 - e) / e)) + 1.0))


def closed_form_z(gamma: float, num_classes: int) -> float:
    """Z_l = (1 - K/(K-1)·γ)^((K-1)/K) · (1 + K·γ)^(1/K)."""
    kc = num_classes
    return ((1.0 - kc / (kc - 1) * gamma) ** ((kc - 1) / kc)
            * (1.0 + kc * gamma) ** (1.0 / kc))


def save_ensemble(directory, model: EnsembleModel, diag: BoostDiagnostics | None = None,
                  noise_p: float = 0.0) -> None:
    """Manifest plus one checkpoint file per member."""
    os.makedirs(directory, exist_ok=True)
    manifest = os.path.join(directory, "ensemble_manifest.txt")
    with open(manifest, "w") as fh:
        fh.write(f"num_classes={model.num_classes}\n")
        fh.write(f"combination={model.combination.value}\n")
        for l, member in enumerate(model.members):
            name = f"member_{l:03d}.txt"
            save_checkpoint(os.path.join(directory, name), member.ansatz,
                            model.num_classes, 0, noise_p)
            fh.write(f"member={name},alpha={model.alphas[l]!r},"
                     f"error_rate={member.error_rate!r}\n")
    if diag is not None:
        write_diagnostics_csv(os.path.join(directory, "diagnostics.csv"), diag)


def load_ensemble(directory) -> EnsembleModel:
    manifest = os.path.join(directory, "ensemble_manifest.txt")
    members, alphas = [], []
    num_classes, combination = None, None
    with open(manifest) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("num_classes="):
                num_classes = int(line.split("=", 1)[1])
            elif line.startswith("combination="):
                combination = Combination(line.split("=", 1)[1])
            elif line.startswith("member="):
                fields = dict(part.split("=", 1) for part in line.split(","))
                ansatz, _ = load_checkpoint(os.path.join(directory, fields["member"]))
                clf = WeakClassifier(ansatz, num_classes,
                                     error_rate=float(fields["error_rate"]),
                                     alpha=float(fields["alpha"]))
                members.append(clf)
                alphas.append(float(fields["alpha"]))
    return EnsembleModel(members, np.array(alphas), combination, num_classes)


def write_diagnostics_csv(path, diag: BoostDiagnostics) -> None:
    kc = _infer_num_classes(diag) if diag.num_stages else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "e_l", "alpha_l", "gamma_l", "Z_l",
                         "cumulative_bound", "cumulative_train_error"])
        cumulative = 1.0
        for l in range(diag.num_stages):
            gammas = diag.gammas[: l + 1]
            if all(g > 0 for g in gammas):
                gamma = min(gammas)
                cumulative = math.exp(-kc / (kc - 1) * (l + 1) * gamma * gamma)
            else:
                cumulative = math.nan
            writer.writerow([l + 1, repr(diag.error_rates[l]), repr(diag.alphas[l]),
                             repr(diag.gammas[l]), repr(diag.z_factors[l]),
                             repr(cumulative), repr(diag.final_train_error)])
