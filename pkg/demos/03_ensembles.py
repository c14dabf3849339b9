"""Bagging and boosting of shallow classifiers, with bound verification.

Boosting reweights hard samples after every stage; the verified inequalities
relate the final training error to the per-stage weighted errors.

Run: python3 demos/03_ensembles.py
"""

from vqcboost import (NOISELESS, TrainConfig, ensemble_accuracy, load_digits,
                      packaged_digits_paths, train_adaboost, train_bagging,
                      verify_bounds)
from vqcboost.ansatz import AnsatzSpec

train_set, test_set = load_digits(*packaged_digits_paths())
dataset = train_set.encoded()[:200]
Xte, yte = test_set.encoded_arrays()

spec = AnsatzSpec(num_qubits=6, depth=3)
config = TrainConfig(iterations=200, seed=0)
seeds = list(range(4))

bag = train_bagging(dataset, 4, spec, NOISELESS, config, seeds, 4)
print(f"bagging  (4 members): test accuracy "
      f"{ensemble_accuracy(bag, Xte, yte, NOISELESS):.3f}")

boost, diag = train_adaboost(dataset, 4, spec, NOISELESS, config, seeds, 4)
print(f"boosting (4 members): test accuracy "
      f"{ensemble_accuracy(boost, Xte, yte, NOISELESS):.3f}")

print("\nper-stage boosting diagnostics:")
for l in range(diag.num_stages):
    print(f"  stage {l + 1}: error {diag.error_rates[l]:.3f} "
          f"alpha {diag.alphas[l]:.3f} edge {diag.gammas[l]:.3f} "
          f"Z {diag.z_factors[l]:.4f}")

report = verify_bounds(diag)
print(f"\ntraining error {diag.final_train_error:.4f} "
      f"<= product of Z factors {report.z_product:.4f} "
      f"<= exponential bound {report.exponential_bound:.4f}")
print("all inequalities hold:", bool(report))
