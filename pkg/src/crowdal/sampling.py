"""Sample-selection strategies over the unlabeled pool."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import UnlabeledPool
from .embeddings import EmbeddingMatrix
from .model import SoftLabelClassifier

SAMPLE_STRATEGY_TOKENS = ("random", "uncertainty")


@dataclass(frozen=True)
class SampleBatch:
    """Unique sample ids picked for one iteration, each with annotations left."""

    sample_ids: tuple[str, ...]
    strategy_tag: str

    def __post_init__(self):
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ValueError("batch contains duplicate sample ids")


def batch_size(total_annotations: int, unique_train_samples: int) -> int:
    """Per-iteration batch size: min(ceil(5% of annotations), unique samples).

    Computed in integer arithmetic (5% = 1/20) so the ceiling never picks up
    float error; always at least 1.
    """
    if total_annotations < 1 or unique_train_samples < 1:
        raise ValueError("counts must be >= 1")
    five_percent = -(-total_annotations // 20)
    return max(1, min(five_percent, unique_train_samples))


def select_random(pool: UnlabeledPool, b: int, rng: np.random.Generator) -> SampleBatch:
    """Uniform draw of min(b, |pool|) unique samples with remaining annotations."""
    ids = pool.sample_ids()
    if not ids:
        raise ValueError("unlabeled pool is empty")
    k = min(b, len(ids))
    picked = rng.choice(len(ids), size=k, replace=False)
    return SampleBatch(tuple(ids[i] for i in picked), "random")


def select_uncertainty(
    pool: UnlabeledPool, b: int, classifier: SoftLabelClassifier, emb: EmbeddingMatrix
) -> SampleBatch:
    """Top-b pool samples by prediction entropy; ties fall back to id order."""
    ids = pool.sample_ids()
    if not ids:
        raise ValueError("unlabeled pool is empty")
    probs = classifier.predict_proba(emb.matrix(ids))
    logs = np.where(probs > 0, np.log(probs, where=probs > 0), 0.0)
    entropies = -np.sum(probs * logs, axis=1)
    # ids are pre-sorted, so a stable sort on -entropy breaks ties by sample_id
    order = np.argsort(-entropies, kind="stable")
    k = min(b, len(ids))
    return SampleBatch(tuple(ids[i] for i in order[:k]), "uncertainty")
