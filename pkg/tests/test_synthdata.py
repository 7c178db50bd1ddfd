"""Synthetic population generation and its statistical guarantees."""

import json

import numpy as np
import pytest

from crowdal import (
    PopulationSpec,
    generate_population,
    ground_truth_js,
    load_corpus,
    load_embeddings,
    write_population,
)


def spec(**overrides):
    base = dict(
        n_samples=40,
        n_annotators=10,
        annotations_per_sample=4,
        num_classes=3,
        embedding_dim=6,
        minority_fraction=0.2,
        minority_label_bias=0.9,
        agreement_temperature=1.0,
        seed=0,
    )
    base.update(overrides)
    return PopulationSpec(**base)


class TestPopulationSpec:
    def test_validation(self):
        with pytest.raises(ValueError, match="n_samples"):
            spec(n_samples=0)
        with pytest.raises(ValueError, match="num_classes"):
            spec(num_classes=1)
        with pytest.raises(ValueError, match="annotations_per_sample"):
            spec(annotations_per_sample=11)
        with pytest.raises(ValueError, match="minority_fraction"):
            spec(minority_fraction=0.0)
        with pytest.raises(ValueError, match="minority_label_bias"):
            spec(minority_label_bias=1.5)
        with pytest.raises(ValueError, match="agreement_temperature"):
            spec(agreement_temperature=0.0)
        with pytest.raises(ValueError, match="label_embedding_correlation"):
            spec(label_embedding_correlation=-0.1)

    def test_dict_round_trip(self):
        s = spec(seed=3)
        assert PopulationSpec.from_dict(s.to_dict()) == s

    def test_from_dict_rejects_unknown_and_missing(self):
        with pytest.raises(ValueError, match="unknown population fields.*extra"):
            PopulationSpec.from_dict(dict(spec().to_dict(), extra=1))
        partial = spec().to_dict()
        del partial["n_samples"]
        with pytest.raises(ValueError, match="missing population fields.*n_samples"):
            PopulationSpec.from_dict(partial)

    def test_correlation_defaults_to_zero(self):
        d = spec().to_dict()
        del d["label_embedding_correlation"]
        assert PopulationSpec.from_dict(d).label_embedding_correlation == 0.0


class TestGeneratePopulation:
    def test_shapes_and_ids(self):
        corpus, emb, truth = generate_population(spec())
        assert len(corpus.sample_ids()) == 40
        assert corpus.sample_ids()[0] == "s00000"
        assert corpus.n_annotations == 40 * 4
        assert emb.dim == 6
        assert set(emb.ids) == set(corpus.sample_ids())
        assert set(truth) == set(corpus.sample_ids())
        assert corpus.label_space.names == ("c0", "c1", "c2")

    def test_panels_are_distinct_annotators(self):
        corpus, _, _ = generate_population(spec())
        for sid in corpus.sample_ids():
            aids = [
                corpus.triples[i].annotator_id
                for i in corpus.samples[sid].annotation_ids
            ]
            assert len(set(aids)) == len(aids) == 4

    def test_truth_rows_are_distributions(self):
        _, _, truth = generate_population(spec())
        for latent in truth.values():
            assert np.all(latent > 0)
            assert latent.sum() == pytest.approx(1.0, abs=1e-12)

    def test_embeddings_unit_norm(self):
        _, emb, _ = generate_population(spec())
        for sid in emb.ids:
            assert np.linalg.norm(emb.vector(sid)) == pytest.approx(1.0, abs=1e-9)

    def test_deterministic(self):
        a_corpus, a_emb, a_truth = generate_population(spec(seed=5))
        b_corpus, b_emb, b_truth = generate_population(spec(seed=5))
        assert a_corpus.triples == b_corpus.triples
        for sid in a_truth:
            np.testing.assert_array_equal(a_truth[sid], b_truth[sid])
            np.testing.assert_array_equal(a_emb.vector(sid), b_emb.vector(sid))

    def test_seed_changes_population(self):
        a, _, _ = generate_population(spec(seed=0))
        b, _, _ = generate_population(spec(seed=1))
        assert a.triples != b.triples

    def test_minority_group_prefers_last_class(self):
        """Biased annotators (the lowest ids) over-produce the last class."""
        s = spec(n_samples=400, n_annotators=10, minority_label_bias=0.95)
        corpus, _, _ = generate_population(s)
        minority = {f"a{j:04d}" for j in range(2)}  # round(0.2 * 10)
        rates = {True: [], False: []}
        for t in corpus.triples:
            rates[t.annotator_id in minority].append(t.label == 2)
        assert np.mean(rates[True]) > 0.9
        assert np.mean(rates[False]) < 0.6

    def test_low_temperature_reduces_disagreement(self):
        """Cold latent distributions concentrate annotations on one class."""

        def mean_entropy(temperature):
            corpus, _, _ = generate_population(
                spec(n_samples=150, agreement_temperature=temperature)
            )
            from crowdal import aggregate_soft_label, annotation_entropy

            return np.mean(
                [
                    annotation_entropy(aggregate_soft_label(corpus, sid))
                    for sid in corpus.sample_ids()
                ]
            )

        assert mean_entropy(0.05) < mean_entropy(5.0)

    def test_annotations_follow_latent_distribution(self):
        """Majority labels concentrate near each sample's latent mode."""
        s = spec(
            n_samples=200,
            n_annotators=30,
            annotations_per_sample=20,
            agreement_temperature=0.3,
            minority_fraction=0.05,
        )
        corpus, _, truth = generate_population(s)
        hits = []
        for sid in corpus.sample_ids():
            mode = int(np.argmax(truth[sid]))
            labels = [corpus.triples[i].label for i in corpus.samples[sid].annotation_ids]
            hits.append(np.mean([l == mode for l in labels]))
        assert np.mean(hits) > 0.7

    def test_correlation_aligns_same_class_embeddings(self):
        """At correlation 1, same-mode samples point the same way."""
        from crowdal import cosine_similarity

        s = spec(n_samples=120, label_embedding_correlation=1.0, agreement_temperature=0.2)
        corpus, emb, truth = generate_population(s)
        by_mode = {}
        for sid in corpus.sample_ids():
            by_mode.setdefault(int(np.argmax(truth[sid])), []).append(sid)
        same, cross = [], []
        modes = [m for m in by_mode if len(by_mode[m]) >= 2]
        for m in modes:
            ids = by_mode[m][:10]
            same += [
                cosine_similarity(emb.vector(a), emb.vector(b))
                for i, a in enumerate(ids)
                for b in ids[i + 1 :]
            ]
        for m in modes:
            for m2 in modes:
                if m < m2:
                    cross += [
                        cosine_similarity(emb.vector(a), emb.vector(b))
                        for a in by_mode[m][:5]
                        for b in by_mode[m2][:5]
                    ]
        assert np.mean(same) > np.mean(cross)


class TestGroundTruthJs:
    def test_exact_match_is_zero(self):
        _, _, truth = generate_population(spec())
        assert ground_truth_js(truth, truth) == 0.0

    def test_mean_over_samples(self):
        truth = {"s1": np.array([1.0, 0.0]), "s2": np.array([0.5, 0.5])}
        predicted = {"s1": np.array([0.5, 0.5]), "s2": np.array([0.5, 0.5])}
        np.testing.assert_allclose(
            ground_truth_js(predicted, truth), 0.3113 / 2, atol=5e-5
        )

    def test_key_mismatch_rejected(self):
        truth = {"s1": np.array([1.0, 0.0])}
        with pytest.raises(ValueError, match="s2"):
            ground_truth_js({"s2": np.array([1.0, 0.0])}, truth)


class TestWritePopulation:
    def test_files_load_back(self, tmp_path):
        corpus, emb, truth = generate_population(spec(seed=2))
        paths = write_population(tmp_path / "pop", corpus, emb, truth)

        loaded = load_corpus(paths["annotations"], corpus.label_space)
        assert loaded.triples == corpus.triples

        loaded_emb = load_embeddings(paths["embeddings"], expected_ids=corpus.sample_ids())
        for sid in corpus.sample_ids():
            np.testing.assert_array_equal(loaded_emb.vector(sid), emb.vector(sid))

        payload = json.loads((tmp_path / "pop" / "ground_truth.json").read_text())
        assert payload["labels"] == ["c0", "c1", "c2"]
        for sid, latent in truth.items():
            np.testing.assert_allclose(payload["truth"][sid], latent, atol=1e-12)
