"""Small builders shared across test modules."""

import numpy as np

from crowdal import (
    AnnotationTriple,
    Corpus,
    EmbeddingMatrix,
    LabeledPool,
    LabelSpace,
    UnlabeledPool,
)


def make_corpus(triples, num_classes=2, texts=None):
    """Corpus from (sample_id, annotator_id, label) tuples."""
    space = LabelSpace(tuple(f"c{k}" for k in range(num_classes)))
    return Corpus(space, [AnnotationTriple(s, a, l) for s, a, l in triples], texts)


def make_embeddings(sample_ids, dim=4, seed=0, unit=True):
    """Random embeddings for the given ids (unit-norm by default)."""
    rng = np.random.default_rng(seed)
    vectors = {}
    for sid in sample_ids:
        v = rng.standard_normal(dim)
        vectors[sid] = v / np.linalg.norm(v) if unit else v
    return EmbeddingMatrix(vectors)


def make_random_corpus(n_samples, n_annotators, num_classes=3, seed=0, density=1.0):
    """Random corpus; each (sample, annotator) pair annotated at most once."""
    rng = np.random.default_rng(seed)
    triples = []
    for i in range(n_samples):
        aids = [f"a{j}" for j in range(n_annotators)]
        if density < 1.0:
            keep = max(1, int(round(density * n_annotators)))
            aids = [aids[j] for j in rng.choice(n_annotators, size=keep, replace=False)]
        for aid in aids:
            triples.append((f"s{i:03d}", aid, int(rng.integers(num_classes))))
    return make_corpus(triples, num_classes=num_classes)


def pools_for(corpus, sample_ids=None):
    """Fresh labeled/unlabeled pools over the given (default: all) samples."""
    ids = corpus.sample_ids() if sample_ids is None else list(sample_ids)
    return LabeledPool(corpus), UnlabeledPool(corpus, ids)


def consume_pairs(labeled, unlabeled, pairs):
    """Consume specific (sample_id, annotator_id) pairs in order."""
    for sid, aid in pairs:
        labeled.add(unlabeled.pop(sid, aid))
