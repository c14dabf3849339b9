"""Variational quantum classifiers with ensemble boosting on a built-in simulator.

Layers:
  qstate      statevector / density-matrix states, gates, noise channel
  ansatz      parameterized circuit layout, encoding, checkpoints
  engine      batched forward passes, probabilities, analytic gradients
  vqc         weak classifier definition and Adam training
  ensemble    bagging, multiclass boosting, error-bound verification
  zne         zero-noise extrapolation of class probabilities
  data        digit corpus and cluster-model ground-state datasets
  experiments CSV-producing experiment runners
  cli         command-line front end
"""
from .ansatz import (Ansatz, AnsatzSpec, EncodedSample, amplitude_encode,
                     fold_circuit, load_checkpoint, run_ansatz, save_checkpoint)
from .data import (ClassicalDataset, SptSample, build_spt_hamiltonian,
                   generate_spt_dataset, ground_state, load_digits,
                   load_spt_dataset, packaged_digits_paths, save_spt_dataset,
                   spt_sample_at, string_order_parameter)
from .ensemble import (BoostDiagnostics, BoundReport, Combination,
                       EnsembleModel, ensemble_accuracy, load_ensemble,
                       predict_ensemble, predict_ensemble_batch, save_ensemble,
                       train_adaboost, train_bagging, verify_bounds,
                       write_diagnostics_csv)
from .experiments import (ExperimentConfig, run_depth_sweep, run_ensemble_sweep,
                          run_noise_sweep, run_phase_diagram)
from .qstate import (NOISELESS, Backend, NoiseModel, QuantumState,
                     depolarizing_cnot_channel)
from .vqc import (SampleWeights, TrainConfig, WeakClassifier,
                  class_probabilities, error_rate, predict, predict_batch,
                  train, weighted_cross_entropy)
from .zne import (ZneSchedule, extrapolation_weights, predict_mitigated,
                  predict_mitigated_batch, zne_probabilities,
                  zne_probabilities_batch)

__version__ = "0.1.0"
