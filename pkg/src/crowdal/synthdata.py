"""Synthetic annotator populations with known ground truth.

Each sample gets a latent label distribution (a temperature-controlled
softmax of random scores) and a random unit embedding.  Majority annotators
sample labels straight from the latent distribution; a planted minority
group mixes it with a one-hot preference for the last class.  Everything is
drawn from a single seeded generator in a fixed order, so a spec generates
the same population every time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .corpus import AnnotationTriple, Corpus, LabelSpace
from .embeddings import EmbeddingMatrix, write_embeddings
from .metrics import js_divergence

_SPEC_FIELDS = (
    "n_samples",
    "n_annotators",
    "annotations_per_sample",
    "num_classes",
    "embedding_dim",
    "minority_fraction",
    "minority_label_bias",
    "agreement_temperature",
    "seed",
    "label_embedding_correlation",
)


@dataclass(frozen=True)
class PopulationSpec:
    """Parameters of one synthetic population.

    ``minority_fraction`` of annotators (the lowest annotator ids) put
    ``minority_label_bias`` of their probability mass on the last class.
    ``agreement_temperature`` scales the latent score softmax: low values
    make samples nearly unanimous, high values make them contentious.
    ``label_embedding_correlation`` optionally mixes class anchor directions
    into the embeddings so similarity-based strategies have signal.
    """

    n_samples: int
    n_annotators: int
    annotations_per_sample: int
    num_classes: int
    embedding_dim: int
    minority_fraction: float
    minority_label_bias: float
    agreement_temperature: float
    seed: int
    label_embedding_correlation: float = 0.0

    def __post_init__(self):
        for name in ("n_samples", "n_annotators", "annotations_per_sample",
                     "embedding_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name}: must be >= 1")
        if self.num_classes < 2:
            raise ValueError("num_classes: must be >= 2")
        if self.annotations_per_sample > self.n_annotators:
            raise ValueError(
                "annotations_per_sample: cannot exceed n_annotators"
                f" ({self.annotations_per_sample} > {self.n_annotators})"
            )
        if not 0.0 < self.minority_fraction < 1.0:
            raise ValueError("minority_fraction: must be in (0, 1)")
        if not 0.0 <= self.minority_label_bias <= 1.0:
            raise ValueError("minority_label_bias: must be in [0, 1]")
        if not self.agreement_temperature > 0.0:
            raise ValueError("agreement_temperature: must be > 0")
        if not 0.0 <= self.label_embedding_correlation <= 1.0:
            raise ValueError("label_embedding_correlation: must be in [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PopulationSpec":
        unknown = sorted(set(d) - set(_SPEC_FIELDS))
        if unknown:
            raise ValueError(f"unknown population fields: {unknown}")
        missing = sorted(set(_SPEC_FIELDS) - set(d) - {"label_embedding_correlation"})
        if missing:
            raise ValueError(f"missing population fields: {missing}")
        return cls(**d)


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max()
    expd = np.exp(shifted)
    return expd / expd.sum()


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm == 0.0:
        out = np.zeros_like(v)
        out[0] = 1.0
        return out
    return v / norm


def generate_population(
    spec: PopulationSpec,
) -> tuple[Corpus, EmbeddingMatrix, dict[str, np.ndarray]]:
    """Draw a full population: corpus, embeddings, and latent ground truth.

    Minority annotators are the first round(minority_fraction * n_annotators)
    ids and prefer the last class.  Each sample is annotated by
    ``annotations_per_sample`` distinct annotators drawn uniformly.
    """
    rng = np.random.default_rng(spec.seed)
    num_classes = spec.num_classes
    sample_ids = [f"s{i:05d}" for i in range(spec.n_samples)]
    annotator_ids = [f"a{j:04d}" for j in range(spec.n_annotators)]
    n_minority = round(spec.minority_fraction * spec.n_annotators)
    minority = set(annotator_ids[:n_minority])
    preferred = num_classes - 1

    anchors = np.stack([_unit(rng.standard_normal(spec.embedding_dim))
                        for _ in range(num_classes)])
    corr = spec.label_embedding_correlation

    truth: dict[str, np.ndarray] = {}
    vectors: dict[str, np.ndarray] = {}
    triples: list[AnnotationTriple] = []
    preference = np.zeros(num_classes)
    preference[preferred] = 1.0

    for sid in sample_ids:
        latent = _softmax(rng.standard_normal(num_classes) / spec.agreement_temperature)
        truth[sid] = latent
        noise = _unit(rng.standard_normal(spec.embedding_dim))
        vectors[sid] = _unit((1.0 - corr) * noise + corr * (latent @ anchors))
        panel = sorted(rng.choice(spec.n_annotators, size=spec.annotations_per_sample,
                                  replace=False).tolist())
        majority_members = [annotator_ids[a] for a in panel if annotator_ids[a] not in minority]
        minority_members = [annotator_ids[a] for a in panel if annotator_ids[a] in minority]
        mixed = (1.0 - spec.minority_label_bias) * latent + spec.minority_label_bias * preference
        labels: dict[str, int] = {}
        if majority_members:
            drawn = rng.choice(num_classes, size=len(majority_members), p=latent)
            labels.update(zip(majority_members, (int(c) for c in drawn)))
        if minority_members:
            drawn = rng.choice(num_classes, size=len(minority_members), p=mixed)
            labels.update(zip(minority_members, (int(c) for c in drawn)))
        for a in panel:
            aid = annotator_ids[a]
            triples.append(AnnotationTriple(sid, aid, labels[aid]))

    label_space = LabelSpace(tuple(f"c{k}" for k in range(num_classes)))
    return Corpus(label_space, triples), EmbeddingMatrix(vectors), truth


def ground_truth_js(predicted: dict, ground_truth: dict) -> float:
    """Mean JSD between predicted and latent distributions over matching ids."""
    if set(predicted) != set(ground_truth):
        missing = sorted(set(ground_truth) ^ set(predicted))
        raise ValueError(f"sample sets differ, e.g. {missing[:5]}")
    if not predicted:
        raise ValueError("no samples to compare")
    values = [js_divergence(predicted[sid], ground_truth[sid]) for sid in sorted(predicted)]
    return float(np.mean(values))


def write_population(out_dir, corpus: Corpus, emb: EmbeddingMatrix, truth: dict) -> dict:
    """Write annotations.csv, embeddings.csv, and ground_truth.json into a directory."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "annotations": os.path.join(out_dir, "annotations.csv"),
        "embeddings": os.path.join(out_dir, "embeddings.csv"),
        "ground_truth": os.path.join(out_dir, "ground_truth.json"),
    }
    with open(paths["annotations"], "w", encoding="utf-8", newline="") as fh:
        fh.write("sample_id,annotator_id,label\n")
        for t in corpus.triples:
            fh.write(f"{t.sample_id},{t.annotator_id},{t.label}\n")
    write_embeddings(paths["embeddings"], {sid: emb.vector(sid) for sid in emb.ids})
    payload = {
        "labels": list(corpus.label_space.names),
        "truth": {sid: [float(p) for p in truth[sid]] for sid in sorted(truth)},
    }
    with open(paths["ground_truth"], "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
