"""Divergences, bit correlation, confusion statistics, reference classifier."""

import math

import numpy as np
import pytest

import tabmark as tm
from tabmark.errors import ConfigError, DataError
from tabmark.metrics import (histogram, reference_classifier_predict,
                             reference_classifier_train)


class TestKlDivergence:
    def test_identical_histograms_zero(self):
        assert tm.kl_divergence([2, 3, 5], [2, 3, 5]) == 0.0

    def test_direct_formula(self):
        expected = 0.5 * math.log2(0.5 / 0.25) + 0.5 * math.log2(0.5 / 0.75)
        assert expected == pytest.approx(0.2075, abs=5e-5)
        assert tm.kl_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(
            expected, rel=1e-12)

    def test_zero_q_with_positive_p_is_infinite(self):
        assert tm.kl_divergence([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_zero_p_bins_contribute_nothing(self):
        assert tm.kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(1.0)

    def test_bin_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            tm.kl_divergence([1, 2], [1, 2, 3])

    def test_non_negative_on_random_pairs(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            p = rng.integers(0, 50, size=8) + 1
            q = rng.integers(0, 50, size=8) + 1
            assert tm.kl_divergence(p, q) >= 0.0


class TestJensenShannon:
    def test_identical_is_zero(self):
        assert tm.jensen_shannon([3, 1, 4], [3, 1, 4]) == 0.0

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            p = rng.integers(0, 50, size=6) + 0.0
            q = rng.integers(0, 50, size=6) + 0.0
            p[0] += 1.0
            q[-1] += 1.0
            a = tm.jensen_shannon(p, q)
            b = tm.jensen_shannon(q, p)
            assert a == pytest.approx(b, rel=1e-12)
            assert 0.0 <= a <= 1.0 + 1e-12

    def test_disjoint_histograms_hit_one_bit(self):
        assert tm.jensen_shannon([1, 0], [0, 1]) == pytest.approx(1.0, rel=1e-12)


class TestBitCorrelation:
    def test_identical_is_exactly_one(self):
        bits = (1, 1, 0, 0, 1)
        assert tm.bit_correlation(bits, bits) == 1.0

    def test_complement_is_exactly_minus_one(self):
        bits = (1, 1, 0, 0, 1, 0)
        flipped = tuple(1 - b for b in bits)
        assert tm.bit_correlation(bits, flipped) == -1.0

    def test_half_flipped_balanced_is_zero(self):
        truth = (0,) * 8 + (1,) * 8
        decoded = (1, 1, 1, 1, 0, 0, 0, 0) + (0, 0, 0, 0, 1, 1, 1, 1)
        expected = float(np.corrcoef(truth, decoded)[0, 1])
        assert expected == pytest.approx(0.0, abs=1e-12)
        assert tm.bit_correlation(truth, decoded) == pytest.approx(0.0, abs=1e-12)

    def test_matches_numpy_on_random_pairs(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            a = rng.integers(0, 2, size=16)
            b = rng.integers(0, 2, size=16)
            if len(set(a.tolist())) == 1 or len(set(b.tolist())) == 1:
                continue
            expected = float(np.corrcoef(a, b)[0, 1])
            assert tm.bit_correlation(a, b) == pytest.approx(expected, rel=1e-9)

    def test_constant_sequences_rule(self):
        assert tm.bit_correlation((1, 1, 1), (1, 1, 1)) == 1.0
        assert tm.bit_correlation((1, 1, 1), (0, 0, 0)) == 0.0

    def test_length_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            tm.bit_correlation((1, 0), (1, 0, 1))


class TestClassificationStats:
    def test_perfect_prediction(self):
        truth = ["1", "0", "1", "0"]
        stats = tm.classification_stats(truth, truth, positive_label="1")
        assert stats.fp == stats.fn == 0
        assert stats.detection_rate == 100.0
        assert stats.false_alarm_rate == 0.0

    def test_all_positive_prediction_on_balanced_truth(self):
        truth = ["1", "0"] * 6
        stats = tm.classification_stats(truth, ["1"] * 12, positive_label="1")
        assert stats.detection_rate == 100.0
        assert stats.false_alarm_rate == 100.0

    def test_detection_rate_from_confusion_counts(self):
        # 152 true positives, 30 false negatives: 152/182 = 83.52%
        stats = tm.ClassificationStats(tp=152, fp=5, tn=3569, fn=30)
        assert round(stats.detection_rate, 2) == 83.52

    def test_non_binary_rejected(self):
        with pytest.raises(DataError):
            tm.classification_stats(["a", "b", "c"], ["a", "b", "c"])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            tm.classification_stats(["a"], ["a", "b"])


class TestGaussianNaiveBayes:
    def separated_dataset(self, rows=300, gap=6.0, seed=5):
        rng = np.random.default_rng(seed)
        half = rows // 2
        values = np.concatenate([rng.normal(0.0, 1.0, half),
                                 rng.normal(gap, 1.0, rows - half)])
        labels = ("0",) * half + ("1",) * (rows - half)
        ids = tuple(str(i) for i in range(rows))
        return tm.Dataset(("id", "f", "class"), "id", "class", ("f",), ids,
                          labels, values.reshape(-1, 1))

    def test_separated_classes_detected(self):
        d = self.separated_dataset()
        model = reference_classifier_train(d)
        stats = tm.classification_stats(
            d.labels, reference_classifier_predict(model, d), "1")
        assert stats.detection_rate >= 99.0

    def test_constant_feature_predicts_majority(self):
        values = np.full(10, 3.0)
        labels = ("1",) * 7 + ("0",) * 3
        d = tm.Dataset(("id", "f", "class"), "id", "class", ("f",),
                       tuple(str(i) for i in range(10)), labels,
                       values.reshape(-1, 1))
        model = reference_classifier_train(d)
        assert set(reference_classifier_predict(model, d)) == {"1"}

    def test_marked_data_keeps_detection_rate(self, small_table):
        result = tm.encode(small_table, tm.EncodeOptions(
            seed=5, swarm=tm.SwarmConfig(particles=20, iterations=25, seed=5)))
        assert result.feasible
        model = reference_classifier_train(small_table)
        before = tm.classification_stats(
            small_table.labels,
            reference_classifier_predict(model, small_table), "1")
        after = tm.classification_stats(
            result.marked.labels,
            reference_classifier_predict(model, result.marked), "1")
        assert abs(before.detection_rate - after.detection_rate) <= 1.0

    def test_non_binary_training_rejected(self):
        values = np.arange(6, dtype=float).reshape(-1, 1)
        d = tm.Dataset(("id", "f", "class"), "id", "class", ("f",),
                       tuple(str(i) for i in range(6)),
                       ("a", "b", "c", "a", "b", "c"), values)
        with pytest.raises(DataError):
            reference_classifier_train(d)


def test_histogram_counts_with_fixed_edges():
    edges = np.array([0.0, 1.0, 2.0, 3.0])
    counts = histogram([0.5, 1.5, 1.0, 2.5, 3.0], edges)
    assert counts.tolist() == [1, 2, 2]
