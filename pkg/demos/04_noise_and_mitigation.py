"""Depolarizing CNOT noise and zero-noise extrapolation.

Each two-qubit gate leaves the pair maximally mixed with probability P.
Folding the gate an odd number of times keeps the ideal circuit unchanged
while amplifying the noise, so probabilities measured at fold factors
1, 3, 5, 7 can be extrapolated back to the zero-noise point.

Run: python3 demos/04_noise_and_mitigation.py
"""
import numpy as np

from vqcboost import (NOISELESS, NoiseModel, SampleWeights, TrainConfig,
                      WeakClassifier, ZneSchedule, load_digits,
                      packaged_digits_paths, predict_batch, train,
                      zne_probabilities_batch)
from vqcboost.engine import batched_probabilities

train_set, test_set = load_digits(*packaged_digits_paths())
subset = train_set.encoded()[:200]
Xte, yte = test_set.encoded_arrays()

init = WeakClassifier.initial(num_qubits=6, depth=6, num_classes=4, seed=0)
clf = train(init, subset, SampleWeights.uniform(len(subset)), NOISELESS,
            TrainConfig(iterations=300, seed=0))

clean_acc = np.mean(predict_batch(clf, Xte, NOISELESS) == yte)
print(f"noiseless test accuracy: {clean_acc:.3f}")

schedule = ZneSchedule()
for p in (0.02, 0.06, 0.10):
    noise = NoiseModel(p)
    plain = np.mean(predict_batch(clf, Xte, noise) == yte)
    mitigated_probs = zne_probabilities_batch(clf, Xte, noise, schedule)
    mitigated = np.mean(np.argmax(mitigated_probs, axis=1) == yte)
    print(f"P={p:.2f}: plain {plain:.3f}, extrapolated {mitigated:.3f}")

# On one sample, show how the class probabilities drift toward uniform with
# the fold factor and how extrapolation pulls them back.
x = Xte[:1]
print("\nclass probabilities for one test sample:")
print("  noiseless      ", np.round(batched_probabilities(clf.ansatz, x, NOISELESS, 4)[0], 4))
for c in schedule.fold_factors:
    probs = batched_probabilities(clf.ansatz, x, NoiseModel(0.06, c), 4)[0]
    print(f"  fold {c} at P=0.06", np.round(probs, 4))
print("  extrapolated   ",
      np.round(zne_probabilities_batch(clf, x, NoiseModel(0.06), schedule)[0], 4))
