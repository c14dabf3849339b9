import numpy as np
import pytest

from vqcboost.ansatz import EncodedSample
from vqcboost.engine import batched_probabilities
from vqcboost.qstate import NOISELESS, NoiseModel, QuantumState
from vqcboost.vqc import WeakClassifier, predict
from vqcboost.zne import (ZneSchedule, _finalize, extrapolation_weights,
                          predict_mitigated, zne_probabilities,
                          zne_probabilities_batch)


def random_clf(n, depth, num_classes, seed):
    return WeakClassifier.initial(n, depth, num_classes, seed)


def random_sample(n, seed, label=0):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return EncodedSample(QuantumState.from_statevector(v / np.linalg.norm(v)), label)


class TestSchedule:
    def test_defaults(self):
        s = ZneSchedule()
        assert s.fold_factors == (1, 3, 5, 7)
        assert s.extrapolation_degree == 3

    def test_validation(self):
        with pytest.raises(ValueError):
            ZneSchedule((1, 2, 3), 2)
        with pytest.raises(ValueError):
            ZneSchedule((1, 3, 3), 2)
        with pytest.raises(ValueError):
            ZneSchedule((3, 1), 1)
        with pytest.raises(ValueError):
            ZneSchedule((1, 3, 5, 7), 2)

    def test_weights_sum_to_one(self):
        w = extrapolation_weights((1, 3, 5, 7))
        assert abs(w.sum() - 1.0) < 1e-12

    def test_cubic_recovery(self):
        # exact for p(c) = 0.5 + 0.1c - 0.02c^2 + 0.001c^3: value at 0 is 0.5
        folds = (1, 3, 5, 7)
        points = np.array([0.5 + 0.1 * c - 0.02 * c ** 2 + 0.001 * c ** 3
                           for c in folds])
        assert abs(extrapolation_weights(folds) @ points - 0.5) < 1e-10


class TestExtrapolation:
    def test_noise_free_returns_exact_probabilities(self):
        clf = random_clf(3, 2, 2, 0)
        sample = random_sample(3, 1)
        mitigated = zne_probabilities(clf, sample, NOISELESS)
        X = sample.state.data[None, :]
        plain = batched_probabilities(clf.ansatz, X, NOISELESS, 2)[0]
        np.testing.assert_allclose(mitigated, plain, atol=1e-12)
        assert predict_mitigated(clf, sample, NOISELESS) == \
            predict(clf, sample, NOISELESS)

    def test_single_fold_degree_zero_is_unmitigated(self):
        clf = random_clf(3, 2, 2, 2)
        sample = random_sample(3, 3)
        noise = NoiseModel(0.08)
        schedule = ZneSchedule((1,), 0)
        mitigated = zne_probabilities(clf, sample, noise, schedule)
        plain = batched_probabilities(clf.ansatz, sample.state.data[None, :],
                                      noise, 2)[0]
        np.testing.assert_allclose(mitigated, plain, atol=1e-12)

    def test_output_is_distribution(self):
        rng = np.random.default_rng(4)
        for seed in range(5):
            clf = random_clf(2, 2, 2, seed)
            sample = random_sample(2, 100 + seed)
            out = zne_probabilities(clf, sample, NoiseModel(0.15))
            assert np.all(out >= 0) and np.all(out <= 1)
            assert abs(out.sum() - 1.0) < 1e-9

    def test_batch_matches_per_sample(self):
        clf = random_clf(2, 2, 2, 5)
        samples = [random_sample(2, 200 + i) for i in range(4)]
        X = np.stack([s.state.data for s in samples])
        noise = NoiseModel(0.1)
        batch = zne_probabilities_batch(clf, X, noise)
        for i, s in enumerate(samples):
            np.testing.assert_allclose(batch[i], zne_probabilities(clf, s, noise),
                                       atol=1e-12)

    def test_mitigation_beats_unmitigated_on_small_circuits(self):
        # quick version of the acceptance-scale l1 comparison
        improved = 0
        for seed in range(20):
            clf = random_clf(2, 3, 2, seed)
            sample = random_sample(2, 300 + seed)
            X = sample.state.data[None, :]
            truth = batched_probabilities(clf.ansatz, X, NOISELESS, 2)[0]
            noisy = batched_probabilities(clf.ansatz, X, NoiseModel(0.05), 2)[0]
            mitigated = zne_probabilities(clf, sample, NoiseModel(0.05))
            if np.abs(mitigated - truth).sum() < np.abs(noisy - truth).sum():
                improved += 1
        assert improved >= 18


class TestClipping:
    def test_negative_values_clipped_and_renormalized(self):
        out, warned = _finalize(np.array([[-0.2, 0.6]]))
        np.testing.assert_allclose(out, [[0.0, 1.0]], atol=1e-12)
        assert not warned

    def test_all_clipped_falls_back_to_uniform_with_warning(self):
        with pytest.warns(UserWarning):
            out, warned = _finalize(np.array([[-0.2, -0.6]]))
        np.testing.assert_allclose(out, [[0.5, 0.5]], atol=1e-12)
        assert warned
        assert int(np.argmax(out[0])) == 0
