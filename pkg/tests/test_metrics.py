"""Divergence, F1, worst-off aggregation, and entropy-alignment analysis."""

import math

import numpy as np
import pytest
from scipy.spatial.distance import jensenshannon
from sklearn.metrics import f1_score

from crowdal import (
    EmbeddingMatrix,
    EntropyAlignment,
    MetricReport,
    SoftLabelClassifier,
    entropy_alignment,
    entropy_bin,
    evaluate_overall,
    evaluate_per_annotator,
    evaluate_report,
    js_divergence,
    macro_f1,
    worst_off,
)
from helpers import consume_pairs, make_corpus, make_embeddings, pools_for


class TestJsDivergence:
    def test_identical_distributions(self):
        assert js_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_disjoint_support_maximal(self):
        assert js_divergence([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)

    def test_uniform_vs_point_mass(self):
        np.testing.assert_allclose(
            js_divergence([0.5, 0.5], [1.0, 0.0]), 0.3113, atol=5e-5
        )

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            p = rng.dirichlet(np.ones(4))
            q = rng.dirichlet(np.ones(4))
            assert js_divergence(p, q) == pytest.approx(js_divergence(q, p), abs=1e-12)

    def test_matches_scipy(self):
        """scipy's jensenshannon returns the square root of the divergence."""
        rng = np.random.default_rng(1)
        for _ in range(100):
            k = int(rng.integers(2, 6))
            p = rng.dirichlet(np.ones(k))
            q = rng.dirichlet(np.ones(k))
            np.testing.assert_allclose(
                js_divergence(p, q), jensenshannon(p, q, base=2) ** 2, atol=1e-10
            )

    def test_bounded_unit_interval(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            p = rng.dirichlet(np.ones(3) * 0.3)
            q = rng.dirichlet(np.ones(3) * 0.3)
            assert 0.0 <= js_divergence(p, q) <= 1.0 + 1e-12

    def test_zeros_handled(self):
        assert math.isfinite(js_divergence([1.0, 0.0, 0.0], [0.5, 0.5, 0.0]))

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            js_divergence([1.0], [0.5, 0.5])


class TestMacroF1:
    def test_perfect_agreement(self):
        assert macro_f1([0, 1, 2], [0, 1, 2], 3) == 1.0

    def test_total_disagreement(self):
        assert macro_f1([0, 0], [1, 1], 2) == 0.0

    def test_hand_confusion_matrix(self):
        np.testing.assert_allclose(macro_f1([0, 0, 1, 1], [0, 1, 1, 1], 2), 0.7333, atol=5e-5)

    def test_absent_class_not_diluting(self):
        """Classes never seen in gold or pred stay out of the average."""
        assert macro_f1([0, 0], [0, 0], 5) == 1.0

    def test_matches_sklearn_on_occurring_classes(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(2, 30))
            c = int(rng.integers(2, 5))
            gold = rng.integers(c, size=n)
            pred = rng.integers(c, size=n)
            labels = sorted(set(gold.tolist()) | set(pred.tolist()))
            expected = f1_score(gold, pred, labels=labels, average="macro", zero_division=0)
            np.testing.assert_allclose(macro_f1(gold, pred, c), expected, atol=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError, match="mismatch"):
            macro_f1([0, 1], [0], 2)
        with pytest.raises(ValueError, match="at least one"):
            macro_f1([], [], 2)
        with pytest.raises(ValueError, match="outside"):
            macro_f1([0, 3], [0, 1], 2)


class TestWorstOff:
    def test_single_score(self):
        assert worst_off({"a": 0.5}, "low") == 0.5

    def test_m_is_one_up_to_ten(self):
        scores = {f"a{i}": float(i) for i in range(10)}
        assert worst_off(scores, "low") == 0.0
        assert worst_off(scores, "high") == 9.0

    def test_m_is_two_at_eleven(self):
        scores = {f"a{i:02d}": float(i) for i in range(11)}
        assert worst_off(scores, "low") == 0.5
        assert worst_off(scores, "high") == 9.5

    def test_twenty_scores_average_exactly_two(self):
        rng = np.random.default_rng(4)
        values = rng.uniform(size=20)
        ordered = np.sort(values)
        scores = {f"a{i:02d}": float(v) for i, v in enumerate(values)}
        np.testing.assert_allclose(worst_off(scores, "low"), ordered[:2].mean(), atol=1e-12)
        np.testing.assert_allclose(worst_off(scores, "high"), ordered[-2:].mean(), atol=1e-12)

    def test_plain_sequence_accepted(self):
        assert worst_off([3.0, 1.0, 2.0], "low") == 1.0

    def test_errors(self):
        with pytest.raises(ValueError, match="no scores"):
            worst_off({}, "low")
        with pytest.raises(ValueError, match="direction"):
            worst_off({"a": 1.0}, "sideways")


class TestEntropyBin:
    def test_edges_inclusive_in_middle(self):
        assert entropy_bin(0.4299) == 0
        assert entropy_bin(0.43) == 1
        assert entropy_bin(0.5) == 1
        assert entropy_bin(0.72) == 1
        assert entropy_bin(0.7201) == 2

    def test_extremes(self):
        assert entropy_bin(0.0) == 0
        assert entropy_bin(math.log(3)) == 2


class TestEntropyAlignment:
    def build(self):
        """Three samples engineered to land in low/aligned/high buckets."""
        triples = []
        # full panel uniform over 3 classes (H = ln 3, high); one consumed → H 0 (low)
        triples += [("sL", f"a{j}", j % 3) for j in range(6)]
        # full panel split 4/2 (H = 0.6365, medium); both consumed labels → medium
        triples += [("sA", f"a{j}", 0 if j < 4 else 1) for j in range(6)]
        # full panel 6/1 (H = 0.4101, low); consumed pair splits → H ln 2 (medium, high side)
        triples += [("sH", f"a{j}", 0) for j in range(6)] + [("sH", "a6", 1)]
        corpus = make_corpus(triples, num_classes=3)
        labeled, unlabeled = pools_for(corpus)
        consume_pairs(
            labeled,
            unlabeled,
            [("sL", "a0"), ("sA", "a0"), ("sA", "a4"), ("sH", "a0"), ("sH", "a6")],
        )
        return corpus, labeled

    def test_buckets(self):
        corpus, labeled = self.build()
        result = entropy_alignment(labeled, corpus)
        assert result.proportion_low == pytest.approx(1 / 3)
        assert result.proportion_aligned == pytest.approx(1 / 3)
        assert result.proportion_high == pytest.approx(1 / 3)

    def test_full_consumption_is_fully_aligned(self):
        corpus, _ = self.build()
        labeled, unlabeled = pools_for(corpus)
        for sid in list(unlabeled.sample_ids()):
            for ann_id in unlabeled.pop_all(sid):
                labeled.add(ann_id)
        result = entropy_alignment(labeled, corpus)
        assert result.proportion_aligned == 1.0

    def test_empty_pool_rejected(self):
        corpus, _ = self.build()
        labeled, _ = pools_for(corpus)
        with pytest.raises(ValueError, match="empty"):
            entropy_alignment(labeled, corpus)

    def test_proportions_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            EntropyAlignment(0.5, 0.2, 0.2)


class TestMetricReport:
    def test_csv_row_round_trips(self):
        report = MetricReport(
            f1_macro=1 / 3,
            js_mean=0.1,
            f1_per_annotator=0.25,
            js_per_annotator=0.2,
            f1_worst=0.0,
            js_worst=0.9,
            n_annotators_evaluated=4,
        )
        row = report.to_csv_row()
        assert [float(x) for x in row] == [1 / 3, 0.1, 0.25, 0.2, 0.0, 0.9]
        assert list(report.to_dict()) == list(MetricReport.CSV_FIELDS)


def uniform_classifier(dim, num_classes):
    clf = SoftLabelClassifier(n_features=dim, n_classes=num_classes, seed=0)
    clf.weights_ = np.zeros((num_classes, dim))
    return clf


class TestEvaluateOverall:
    def test_uniform_on_unanimous_data(self):
        """Uniform predictions vs one-hot targets give the pinned divergence."""
        triples = [(f"s{i}", f"a{j}", 0) for i in range(4) for j in range(2)]
        corpus = make_corpus(triples)
        emb = make_embeddings(corpus.sample_ids(), dim=3, seed=5)
        f1, js = evaluate_overall(
            uniform_classifier(3, 2), corpus.sample_ids(), corpus, emb
        )
        np.testing.assert_allclose(js, 0.3113, atol=5e-5)

    def test_perfect_majority_classifier(self):
        triples = [("s0", "a0", 0), ("s0", "a1", 0), ("s1", "a0", 1), ("s1", "a1", 1)]
        corpus = make_corpus(triples)
        emb = EmbeddingMatrix({"s0": np.array([1.0, 0.0]), "s1": np.array([0.0, 1.0])})
        clf = SoftLabelClassifier(n_features=2, n_classes=2, seed=0)
        clf.weights_ = np.array([[5.0, -5.0], [-5.0, 5.0]])
        f1, js = evaluate_overall(clf, corpus.sample_ids(), corpus, emb)
        assert f1 == 1.0

    def test_matching_distribution_gives_zero_js(self):
        """A classifier reproducing each sample's label distribution exactly."""
        triples = [("s0", "a0", 0), ("s0", "a1", 1)]
        corpus = make_corpus(triples)
        emb = EmbeddingMatrix({"s0": np.zeros(2)})
        f1, js = evaluate_overall(uniform_classifier(2, 2), ["s0"], corpus, emb)
        assert js == pytest.approx(0.0, abs=1e-12)

    def test_empty_split_rejected(self):
        corpus = make_corpus([("s0", "a0", 0)])
        emb = make_embeddings(["s0"])
        with pytest.raises(ValueError, match="no samples"):
            evaluate_overall(uniform_classifier(4, 2), [], corpus, emb)


class TestEvaluatePerAnnotator:
    def brute_force(self, clf, sample_ids, corpus, emb):
        split = set(sample_ids)
        preds = {sid: clf.predict_proba(emb.matrix([sid]))[0] for sid in split}
        f1_by, js_by = {}, {}
        for aid in sorted({t.annotator_id for t in corpus.triples if t.sample_id in split}):
            pairs = [
                (t.sample_id, t.label)
                for t in corpus.triples
                if t.annotator_id == aid and t.sample_id in split
            ]
            gold = [l for _, l in pairs]
            pred = [int(np.argmax(preds[s])) for s, _ in pairs]
            f1_by[aid] = macro_f1(gold, pred, corpus.label_space.num_classes)
            one_hot = np.eye(corpus.label_space.num_classes)
            js_by[aid] = float(
                np.mean([js_divergence(one_hot[l], preds[s]) for s, l in pairs])
            )
        return f1_by, js_by

    def test_matches_brute_force(self):
        rng = np.random.default_rng(6)
        triples = [
            (f"s{i}", f"a{j}", int(rng.integers(3)))
            for i in range(4)
            for j in range(3)
        ]
        corpus = make_corpus(triples, num_classes=3)
        emb = make_embeddings(corpus.sample_ids(), dim=4, seed=6)
        clf = SoftLabelClassifier(n_features=4, n_classes=3, seed=1)
        clf.weights_ = rng.standard_normal((3, 4))
        f1_by, js_by = evaluate_per_annotator(clf, corpus.sample_ids(), corpus, emb)
        f1_ref, js_ref = self.brute_force(clf, corpus.sample_ids(), corpus, emb)
        assert set(f1_by) == {"a0", "a1", "a2"}
        for aid in f1_ref:
            np.testing.assert_allclose(f1_by[aid], f1_ref[aid], atol=1e-12)
            np.testing.assert_allclose(js_by[aid], js_ref[aid], atol=1e-12)

    def test_annotator_outside_split_excluded(self):
        triples = [("s0", "a0", 0), ("s1", "a1", 1)]
        corpus = make_corpus(triples)
        emb = make_embeddings(["s0", "s1"], dim=2, seed=7)
        f1_by, _ = evaluate_per_annotator(uniform_classifier(2, 2), ["s0"], corpus, emb)
        assert set(f1_by) == {"a0"}

    def test_one_hot_prediction_zero_js(self):
        corpus = make_corpus([("s0", "a0", 1)])
        emb = EmbeddingMatrix({"s0": np.array([1.0])})
        clf = SoftLabelClassifier(n_features=1, n_classes=2, seed=0)
        clf.weights_ = np.array([[-500.0], [500.0]])
        _, js_by = evaluate_per_annotator(clf, ["s0"], corpus, emb)
        assert js_by["a0"] == pytest.approx(0.0, abs=1e-9)


class TestEvaluateReport:
    def test_aggregates_consistent(self):
        """Report means equal the per-annotator means; worst-off bounds them."""
        rng = np.random.default_rng(8)
        triples = [
            (f"s{i}", f"a{j}", int(rng.integers(2)))
            for i in range(6)
            for j in range(4)
        ]
        corpus = make_corpus(triples)
        emb = make_embeddings(corpus.sample_ids(), dim=3, seed=8)
        clf = SoftLabelClassifier(n_features=3, n_classes=2, seed=2)
        clf.weights_ = rng.standard_normal((2, 3))
        report = evaluate_report(clf, corpus.sample_ids(), corpus, emb)
        f1_by, js_by = evaluate_per_annotator(clf, corpus.sample_ids(), corpus, emb)
        np.testing.assert_allclose(
            report.f1_per_annotator, np.mean(list(f1_by.values())), atol=1e-12
        )
        np.testing.assert_allclose(
            report.js_per_annotator, np.mean(list(js_by.values())), atol=1e-12
        )
        assert report.f1_worst <= report.f1_per_annotator + 1e-12
        assert report.js_worst >= report.js_per_annotator - 1e-12
        assert report.n_annotators_evaluated == 4
