"""Train one variational classifier on the packaged digit task.

A short run (a few hundred Adam iterations on a 200-sample subset) already
separates the four classes well above chance.

Run: python3 demos/02_single_classifier.py
"""
import numpy as np

from vqcboost import (NOISELESS, SampleWeights, TrainConfig, WeakClassifier,
                      load_digits, packaged_digits_paths, predict_batch, train)

train_set, test_set = load_digits(*packaged_digits_paths())
print(f"train {len(train_set)} samples, test {len(test_set)} samples")

Xtr, ytr = train_set.encoded_arrays()
Xte, yte = test_set.encoded_arrays()

# Keep the demo quick: 200 training samples, depth 6, 300 iterations.
subset = train_set.encoded()[:200]
init = WeakClassifier.initial(num_qubits=6, depth=6, num_classes=4, seed=0)
config = TrainConfig(iterations=300, seed=0)
clf = train(init, subset, SampleWeights.uniform(len(subset)), NOISELESS, config,
            trace_path="demo_train_trace.csv")

train_acc = np.mean(predict_batch(clf, Xtr, NOISELESS) == ytr)
test_acc = np.mean(predict_batch(clf, Xte, NOISELESS) == yte)
print(f"train accuracy {train_acc:.3f}, test accuracy {test_acc:.3f}")
print("per-iteration loss written to demo_train_trace.csv")
