"""Experiment runners emitting CSV tables, with reproducible configuration.

Every run writes a `config_echo.txt` (line-oriented key=value) next to its
outputs; re-running from the echo reproduces the CSVs bitwise.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, fields

import numpy as np

from . import data, engine, zne
from .ansatz import AnsatzSpec
from .ensemble import (Combination, EnsembleModel, train_adaboost, train_bagging,
                       write_diagnostics_csv)
from .qstate import NoiseModel
from .vqc import TrainConfig, WeakClassifier, train

DEEP_ITERATIONS = 1500   # single deep classifier
WEAK_ITERATIONS = 500    # ensemble members
SPT_ITERATIONS = 1000    # quantum-data task


@dataclass
class ExperimentConfig:
    task: str = "digits"                    # digits | spt
    mode: str = "single"                    # single | bagging | adaboost
    depths: tuple[int, ...] = (12,)
    num_members: int = 1
    num_classes: int = 4
    noise_p: float = 0.0
    p_grid: tuple[float, ...] = (0.0, 0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14, 0.16, 0.18)
    use_zne: bool = False
    fold_factors: tuple[int, ...] = (1, 3, 5, 7)
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    iterations: int = 0                     # 0 = per-task default
    learning_rate: float = 5e-3
    output_dir: str = "results"
    combination: str = "weighted_hard_vote"
    train_path: str = ""                    # empty = packaged digit files
    test_path: str = ""
    train_limit: int = 0                    # 0 = full training set
    resample: bool = False
    train_noise_free: bool = False
    zne_trace: bool = False
    spt_num_qubits: int = 9
    spt_samples: int = 400
    spt_seed: int = 0
    spt_threshold: float = 0.185
    h1_min: float = -1.6
    h1_max: float = 1.6
    h2_min: float = 0.0
    h2_max: float = 1.6
    grid_resolution: int = 64

    def validate(self) -> None:
        if self.task not in ("digits", "spt"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.mode not in ("single", "bagging", "adaboost"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.use_zne and self.noise_p <= 0 and not self.p_grid:
            raise ValueError("ZNE requires a positive noise rate")
        if self.num_classes & (self.num_classes - 1):
            raise ValueError("num_classes must be a power of two")
        Combination(self.combination)

    def to_kv(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                text = ",".join(repr(v) if isinstance(v, float) else str(v)
                                for v in value)
            elif isinstance(value, float):
                text = repr(value)
            elif isinstance(value, bool):
                text = "true" if value else "false"
            else:
                text = str(value)
            lines.append(f"{f.name}={text}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_kv(cls, text: str) -> "ExperimentConfig":
        raw = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, value = line.split("=", 1)
            raw[key.strip()] = value.strip()
        kwargs = {}
        for f in fields(cls):
            if f.name not in raw:
                continue
            text_value = raw[f.name]
            default = getattr(cls, f.name, f.default)
            if isinstance(default, tuple):
                elem = type(default[0]) if default else float
                kwargs[f.name] = tuple(elem(v) for v in text_value.split(",")) \
                    if text_value else ()
            elif isinstance(default, bool):
                kwargs[f.name] = text_value.lower() in ("true", "1", "yes")
            elif isinstance(default, int):
                kwargs[f.name] = int(text_value)
            elif isinstance(default, float):
                kwargs[f.name] = float(text_value)
            else:
                kwargs[f.name] = text_value
        return cls(**kwargs)


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _echo_config(config: ExperimentConfig) -> None:
    os.makedirs(config.output_dir, exist_ok=True)
    with open(os.path.join(config.output_dir, "config_echo.txt"), "w") as fh:
        fh.write(config.to_kv())


def _digit_arrays(config: ExperimentConfig):
    train_path, test_path = config.train_path, config.test_path
    if not train_path or not test_path:
        train_path, test_path = data.packaged_digits_paths()
    train_set, test_set = data.load_digits(train_path, test_path)
    Xtr, ytr = train_set.encoded_arrays()
    Xte, yte = test_set.encoded_arrays()
    if config.train_limit and config.train_limit < len(ytr):
        idx = _stratified_subset(ytr, config.train_limit)
        Xtr, ytr = Xtr[idx], ytr[idx]
    return Xtr, ytr, Xte, yte


def _stratified_subset(labels: np.ndarray, limit: int) -> np.ndarray:
    rng = np.random.default_rng(0)
    classes = np.unique(labels)
    per_class = limit // len(classes)
    chosen = []
    for k in classes:
        idx = np.where(labels == k)[0]
        take = min(per_class, len(idx))
        chosen.append(rng.choice(idx, size=take, replace=False))
    return np.sort(np.concatenate(chosen))


def _samples_from_arrays(X: np.ndarray, y: np.ndarray):
    from .ansatz import EncodedSample
    from .qstate import QuantumState
    return [EncodedSample(QuantumState.from_statevector(x), int(label))
            for x, label in zip(X, y)]


def _train_config(config: ExperimentConfig, iterations: int, seed: int) -> TrainConfig:
    its = config.iterations if config.iterations > 0 else iterations
    return TrainConfig(learning_rate=config.learning_rate, iterations=its, seed=seed)


def _train_noise(config: ExperimentConfig, p: float) -> NoiseModel:
    return NoiseModel(0.0 if config.train_noise_free else p, 1)


def run_depth_sweep(config: ExperimentConfig) -> str:
    """Noise-controlled single-VQC accuracy as a function of circuit depth."""
    config.validate()
    _echo_config(config)
    Xtr, ytr, Xte, yte = _digit_arrays(config)
    dataset = _samples_from_arrays(Xtr, ytr)
    noise = NoiseModel(config.noise_p, 1)
    rows = []
    for depth in config.depths:
        for seed in config.seeds:
            init = WeakClassifier.initial(6, depth, config.num_classes, seed)
            clf = train(init, dataset, _uniform(len(ytr)),
                        _train_noise(config, config.noise_p),
                        _train_config(config, DEEP_ITERATIONS, seed))
            train_acc = _accuracy(clf, Xtr, ytr, noise)
            test_acc = _accuracy(clf, Xte, yte, noise)
            rows.append([depth, seed, train_acc, test_acc])
    rows = _aggregate_depth(rows)
    path = os.path.join(config.output_dir, "depth_sweep.csv")
    _write_csv(path, ["D_l", "seed", "train_acc", "test_acc"], rows)
    return path


def _aggregate_depth(rows):
    out = list(rows)
    depths = []
    for row in rows:
        if row[0] not in depths:
            depths.append(row[0])
    for depth in depths:
        vals = np.array([[r[2], r[3]] for r in rows if r[0] == depth])
        out.append([depth, "mean", vals[:, 0].mean(), vals[:, 1].mean()])
        out.append([depth, "std", vals[:, 0].std(), vals[:, 1].std()])
    return out


def _uniform(count):
    from .vqc import SampleWeights
    return SampleWeights.uniform(count)


def _accuracy(clf, X, y, noise) -> float:
    from .vqc import predict_batch
    return float(np.mean(predict_batch(clf, X, noise) == y))


def _member_predictions(model: EnsembleModel, X, noise) -> np.ndarray:
    from .vqc import predict_batch
    return np.stack([predict_batch(m, X, noise) for m in model.members])


def _prefix_accuracy(model: EnsembleModel, preds: np.ndarray, y: np.ndarray,
                     length: int) -> float:
    sub = model.truncated(length)
    scores = np.zeros((len(y), model.num_classes))
    for l in range(length):
        weight = 1.0 if sub.combination is Combination.HARD_VOTE else sub.alphas[l]
        np.add.at(scores, (np.arange(len(y)), preds[l]), weight)
    return float(np.mean(np.argmax(scores, axis=1) == y))


def run_ensemble_sweep(config: ExperimentConfig) -> str:
    """Bagging and AdaBoost accuracy versus ensemble size."""
    config.validate()
    _echo_config(config)
    Xtr, ytr, Xte, yte = _digit_arrays(config)
    dataset = _samples_from_arrays(Xtr, ytr)
    noise = NoiseModel(config.noise_p, 1)
    train_noise = _train_noise(config, config.noise_p)
    max_members = config.num_members
    rows = []
    for mode in ("bagging", "adaboost"):
        for depth in config.depths:
            spec = AnsatzSpec(6, depth)
            for seed in config.seeds:
                member_seeds = [seed * 1000 + l for l in range(max_members)]
                tc = _train_config(config, WEAK_ITERATIONS, seed)
                if mode == "bagging":
                    model = train_bagging(dataset, max_members, spec, train_noise,
                                          tc, member_seeds, config.num_classes,
                                          resample=config.resample)
                    diag = None
                else:
                    model, diag = train_adaboost(dataset, max_members, spec,
                                                 train_noise, tc, member_seeds,
                                                 config.num_classes)
                preds = _member_predictions(model, Xte, noise)
                for length in range(1, len(model.members) + 1):
                    acc = _prefix_accuracy(model, preds, yte, length)
                    if diag is not None:
                        rows.append([mode, depth, length, seed, acc,
                                     diag.error_rates[length - 1],
                                     diag.alphas[length - 1],
                                     diag.gammas[length - 1],
                                     diag.z_factors[length - 1]])
                    else:
                        rows.append([mode, depth, length, seed, acc,
                                     "", "", "", ""])
                if diag is not None:
                    write_diagnostics_csv(
                        os.path.join(config.output_dir,
                                     f"adaboost_diag_D{depth}_seed{seed}.csv"), diag)
    for mode in ("bagging", "adaboost"):
        for depth in config.depths:
            for length in range(1, max_members + 1):
                vals = np.array([r[4] for r in rows
                                 if r[0] == mode and r[1] == depth and r[2] == length
                                 and isinstance(r[3], int)])
                if len(vals):
                    rows.append([mode, depth, length, "mean", vals.mean(),
                                 "", "", "", ""])
                    rows.append([mode, depth, length, "std", vals.std(),
                                 "", "", "", ""])
    path = os.path.join(config.output_dir, "ensemble_sweep.csv")
    _write_csv(path, ["mode", "D_l", "L_c", "seed", "test_acc",
                      "e_l", "alpha_l", "gamma_l", "Z_l"], rows)
    return path


def run_noise_sweep(config: ExperimentConfig) -> str:
    """Deep VQC (plain and ZNE-mitigated) vs shallow ensembles under noise."""
    config.validate()
    _echo_config(config)
    Xtr, ytr, Xte, yte = _digit_arrays(config)
    dataset = _samples_from_arrays(Xtr, ytr)
    schedule = zne.ZneSchedule(config.fold_factors, len(config.fold_factors) - 1)
    rows = []
    zne_rows = []
    for p in config.p_grid:
        noise = NoiseModel(p, 1)
        train_noise = _train_noise(config, p)
        for seed in config.seeds:
            deep_init = WeakClassifier.initial(6, 12, config.num_classes, seed)
            deep = train(deep_init, dataset, _uniform(len(ytr)), train_noise,
                         _train_config(config, DEEP_ITERATIONS, seed))
            rows.append(["deep_plain", p, seed, _accuracy(deep, Xte, yte, noise)])
            if p > 0:
                probs, points = zne.zne_probabilities_batch(
                    deep, Xte, noise, schedule, return_points=True)
                acc = float(np.mean(np.argmax(probs, axis=1) == yte))
                rows.append(["deep_zne", p, seed, acc])
                if config.zne_trace:
                    for i in range(len(yte)):
                        for ci, c in enumerate(schedule.fold_factors):
                            for k in range(config.num_classes):
                                zne_rows.append([i, c, k, points[ci, i, k],
                                                 probs[i, k]])
            for depth in config.depths:
                spec = AnsatzSpec(6, depth)
                member_seeds = [seed * 1000 + l for l in range(config.num_members)]
                tc = _train_config(config, WEAK_ITERATIONS, seed)
                bag = train_bagging(dataset, config.num_members, spec, train_noise,
                                    tc, member_seeds, config.num_classes,
                                    resample=config.resample)
                rows.append([f"bagging_D{depth}", p, seed,
                             _ensemble_accuracy(bag, Xte, yte, noise)])
                boost, _ = train_adaboost(dataset, config.num_members, spec,
                                          train_noise, tc, member_seeds,
                                          config.num_classes)
                rows.append([f"adaboost_D{depth}", p, seed,
                             _ensemble_accuracy(boost, Xte, yte, noise)])
    rows = _aggregate_noise(rows)
    path = os.path.join(config.output_dir, "noise_sweep.csv")
    _write_csv(path, ["scenario", "P", "seed", "test_acc"], rows)
    if config.zne_trace:
        _write_csv(os.path.join(config.output_dir, "zne_trace.csv"),
                   ["sample_id", "fold_factor", "class", "probability",
                    "extrapolated"], zne_rows)
    return path


def _ensemble_accuracy(model, X, y, noise) -> float:
    from .ensemble import ensemble_accuracy
    return ensemble_accuracy(model, X, y, noise)


def _aggregate_noise(rows):
    out = list(rows)
    keys = []
    for row in rows:
        key = (row[0], row[1])
        if key not in keys:
            keys.append(key)
    for scenario, p in keys:
        vals = np.array([r[3] for r in rows if r[0] == scenario and r[1] == p])
        out.append([scenario, p, "mean", vals.mean()])
        out.append([scenario, p, "std", vals.std()])
    return out


def run_phase_diagram(config: ExperimentConfig) -> str:
    """SPT-phase recognition on a coupling-plane grid."""
    config.validate()
    _echo_config(config)
    h1_range = (config.h1_min, config.h1_max)
    h2_range = (config.h2_min, config.h2_max)
    samples = data.generate_spt_dataset(
        config.spt_num_qubits, h1_range, h2_range, config.spt_samples,
        config.spt_seed, config.spt_threshold)
    data.save_spt_dataset(
        os.path.join(config.output_dir, "spt_train.csv"),
        os.path.join(config.output_dir, "spt_train_states.bin"),
        samples, config.spt_num_qubits, config.spt_seed, config.spt_threshold,
        h1_range, h2_range)
    dataset = data.spt_encoded(samples)
    noise = NoiseModel(config.noise_p, 1)
    spec = AnsatzSpec(config.spt_num_qubits, config.depths[0])
    seed = config.seeds[0]
    member_seeds = [seed * 1000 + l for l in range(config.num_members)]
    tc = _train_config(config, SPT_ITERATIONS, seed)
    if config.mode == "bagging":
        model = train_bagging(dataset, config.num_members, spec, noise, tc,
                              member_seeds, 2, resample=config.resample)
    else:
        model, diag = train_adaboost(dataset, config.num_members, spec, noise,
                                     tc, member_seeds, 2)
        write_diagnostics_csv(os.path.join(config.output_dir,
                                           "adaboost_diag_spt.csv"), diag)
        if not model.members:
            raise engine.NumericalError(
                "boosting stopped with no usable members: " + (diag.warning or ""))
    grid = np.linspace(h1_range[0], h1_range[1], config.grid_resolution)
    grid2 = np.linspace(h2_range[0], h2_range[1], config.grid_resolution)
    rows = []
    ed_rows = []
    states = []
    for h2 in grid2:
        for h1 in grid:
            sample = data.spt_sample_at(config.spt_num_qubits, float(h1), float(h2),
                                        config.spt_threshold)
            states.append(sample.ground_state.data)
            ed_rows.append([h1, h2, sample.string_order, sample.label])
    X = np.stack(states)
    preds = _member_predictions(model, X, noise)
    spt_score = _spt_probability(model, X, noise, preds)
    idx = 0
    for h2 in grid2:
        for h1 in grid:
            predicted = int(np.argmax(np.bincount(
                preds[:, idx], weights=model.alphas, minlength=2)))
            rows.append([h1, h2, spt_score[idx], predicted])
            idx += 1
    path = os.path.join(config.output_dir, "phase_diagram.csv")
    _write_csv(path, ["h1_over_j", "h2_over_j", "p_spt", "predicted_label"], rows)
    _write_csv(os.path.join(config.output_dir, "phase_diagram_ed.csv"),
               ["h1_over_j", "h2_over_j", "string_order", "ed_label"], ed_rows)
    return path


def _spt_probability(model, X, noise, preds) -> np.ndarray:
    # alpha-weighted average of the per-member class-1 probabilities
    total = np.zeros(X.shape[0])
    for alpha, member in zip(model.alphas, model.members):
        probs = engine.batched_probabilities(member.ansatz, X, noise,
                                             member.num_classes)
        total += alpha * probs[:, 1]
    return total / model.alphas.sum()
