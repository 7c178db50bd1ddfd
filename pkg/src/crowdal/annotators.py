"""Annotator-selection strategies: pick who labels each selected sample.

Every strategy resolves its final (possibly singleton) candidate set with
exactly one uniform draw from the caller's generator.  Candidate sets are
built in sorted-annotator-id order and ties are exact float equalities, so a
selection is bit-reproducible from (pool snapshot, histories, rng state)
alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import LabeledPool, LabelSpace, UnlabeledPool
from .embeddings import (
    EmbeddingMatrix,
    PrincipalComponents,
    annotator_representation,
    cosine_to_many,
    mean_similarity_to_history,
)

ANNOTATOR_STRATEGY_TOKENS = (
    "random",
    "label_minority",
    "semantic_diversity",
    "representation_diversity",
)


@dataclass(frozen=True)
class AnnotatorChoice:
    sample_id: str
    annotator_id: str
    strategy_tag: str
    score: float | None = None


def _available(pool: UnlabeledPool, sample_id: str) -> list[str]:
    available = pool.available_annotators(sample_id)
    if not available:
        raise ValueError(f"no available annotators for sample {sample_id!r}")
    return available


def _draw(candidates: list[str], rng: np.random.Generator) -> str:
    return candidates[int(rng.integers(len(candidates)))]


def select_random_annotator(
    sample_id: str, pool: UnlabeledPool, rng: np.random.Generator
) -> AnnotatorChoice:
    """Uniform choice among the annotators who can still label the sample."""
    available = _available(pool, sample_id)
    return AnnotatorChoice(sample_id, _draw(available, rng), "random")


def minority_label(labeled: LabeledPool) -> int:
    """Class with the fewest consumed annotations (zero counts included, ties → lowest)."""
    if labeled.n_consumed == 0:
        raise ValueError("labeled pool is empty; run warmup first")
    return int(np.argmin(labeled.label_counts))


def select_label_minority(
    sample_id: str,
    pool: UnlabeledPool,
    labeled: LabeledPool,
    rng: np.random.Generator,
) -> AnnotatorChoice:
    """Pick the available annotator most biased toward the pool's minority label.

    An annotator's bias is the fraction of their consumed annotations that
    used the minority label; no history means bias 0.  Exact bias ties are
    resolved uniformly.
    """
    available = _available(pool, sample_id)
    target = minority_label(labeled)
    biases = []
    for aid in available:
        counts = labeled.annotator_label_counts.get(aid)
        biases.append(0.0 if counts is None else counts[target] / counts.sum())
    best = max(biases)
    tied = [aid for aid, b in zip(available, biases) if b == best]
    return AnnotatorChoice(sample_id, _draw(tied, rng), "label_minority", float(best))


def select_semantic_diversity(
    sample_id: str,
    pool: UnlabeledPool,
    histories: LabeledPool,
    emb: EmbeddingMatrix,
    rng: np.random.Generator,
) -> AnnotatorChoice:
    """Pick the annotator whose labeled history is least similar to the sample.

    Annotators with no history yet take priority (uniform among themselves);
    otherwise the candidate minimizing the mean cosine similarity between the
    sample and their history wins, ties uniform.
    """
    available = _available(pool, sample_id)
    fresh = [aid for aid in available if not histories.history_sample_ids(aid)]
    if fresh:
        return AnnotatorChoice(sample_id, _draw(fresh, rng), "semantic_diversity")
    scores = [
        mean_similarity_to_history(sample_id, histories.history_sample_ids(aid), emb)
        for aid in available
    ]
    best = min(scores)
    tied = [aid for aid, s in zip(available, scores) if s == best]
    return AnnotatorChoice(sample_id, _draw(tied, rng), "semantic_diversity", float(best))


def select_representation_diversity(
    sample_id: str,
    pool: UnlabeledPool,
    histories: LabeledPool,
    emb: EmbeddingMatrix,
    label_space: LabelSpace,
    rng: np.random.Generator,
) -> AnnotatorChoice:
    """Pick the available annotator least similar on average to the other candidates.

    Annotator representations (mean of [embedding ; one-hot(label)] over
    their consumed history) are built for every annotator with history, a
    10-component PCA is fitted on all of them, and the available candidates
    are compared pairwise in the projected space by cosine similarity.
    Empty-history candidates take priority as in the semantic strategy, and
    with fewer than two represented annotators there is nothing to project,
    so the choice degrades to a uniform draw.
    """
    available = _available(pool, sample_id)
    fresh = [aid for aid in available if not histories.history(aid)]
    if fresh:
        return AnnotatorChoice(sample_id, _draw(fresh, rng), "representation_diversity")
    represented = sorted(aid for aid in histories.by_annotator if histories.history(aid))
    if len(available) == 1 or len(represented) < 2:
        return AnnotatorChoice(sample_id, _draw(available, rng), "representation_diversity")
    reps = np.stack(
        [
            annotator_representation(aid, histories.history_pairs(aid), emb, label_space).vector
            for aid in represented
        ]
    )
    pca = PrincipalComponents(n_components=10).fit(reps)
    row_of = {aid: i for i, aid in enumerate(represented)}
    projected = pca.transform(reps[[row_of[aid] for aid in available]])
    k = len(available)
    # one cosine per unordered pair, mirrored, so symmetric candidates tie exactly
    sims = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            sims[i, j] = sims[j, i] = float(
                cosine_to_many(projected[i : i + 1], projected[j])[0]
            )
    scores = [
        math.fsum(sims[i, j] for j in range(k) if j != i) / (k - 1) for i in range(k)
    ]
    best = min(scores)
    tied = [aid for aid, s in zip(available, scores) if s == best]
    return AnnotatorChoice(
        sample_id, _draw(tied, rng), "representation_diversity", float(best)
    )


def select_annotator(
    strategy: str,
    sample_id: str,
    pool: UnlabeledPool,
    labeled: LabeledPool,
    emb: EmbeddingMatrix,
    label_space: LabelSpace,
    rng: np.random.Generator,
) -> AnnotatorChoice:
    """Dispatch one annotator-selection decision by strategy token."""
    if strategy == "random":
        return select_random_annotator(sample_id, pool, rng)
    if strategy == "label_minority":
        return select_label_minority(sample_id, pool, labeled, rng)
    if strategy == "semantic_diversity":
        return select_semantic_diversity(sample_id, pool, labeled, emb, rng)
    if strategy == "representation_diversity":
        return select_representation_diversity(sample_id, pool, labeled, emb, label_space, rng)
    raise ValueError(
        f"annotator_strategy: unknown token {strategy!r}; expected one of {ANNOTATOR_STRATEGY_TOKENS}"
    )
