"""Evaluation metrics: JS divergence, macro F1, per-annotator and worst-off views,
and the collected-vs-target entropy alignment analysis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import (
    Corpus,
    LabeledPool,
    aggregate_soft_label,
    annotation_entropy,
    check_soft_label,
    majority_label,
)
from .embeddings import EmbeddingMatrix
from .model import SoftLabelClassifier

DEFAULT_ENTROPY_EDGES = (0.43, 0.72)


def _js_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Row-wise base-2 Jensen-Shannon divergence with 0*log(0/x) = 0."""
    M = 0.5 * (P + Q)
    with np.errstate(divide="ignore", invalid="ignore"):
        left = np.where(P > 0, P * np.log2(np.where(P > 0, P / M, 1.0)), 0.0)
        right = np.where(Q > 0, Q * np.log2(np.where(Q > 0, Q / M, 1.0)), 0.0)
    return 0.5 * left.sum(axis=1) + 0.5 * right.sum(axis=1)


def js_divergence(p, q) -> float:
    """Jensen-Shannon divergence in bits: ½KL(p‖m) + ½KL(q‖m), m = ½(p+q).

    Base-2 logs bound the value to [0, 1]; it is 0 exactly when p = q.
    """
    p = check_soft_label(p)
    q = check_soft_label(q)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape[0]} vs {q.shape[0]}")
    return float(_js_rows(p[None, :], q[None, :])[0])


def macro_f1(gold, pred, num_classes: int) -> float:
    """Macro-averaged F1 over the classes that occur in gold or predictions.

    Per-class precision, recall, and F1 all fall back to 0 when undefined
    (zero denominators).  Classes absent from both vectors do not dilute the
    average.
    """
    gold = np.asarray(gold, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if gold.shape != pred.shape or gold.ndim != 1:
        raise ValueError(f"length mismatch: {gold.shape} vs {pred.shape}")
    if gold.size == 0:
        raise ValueError("need at least one labeled example")
    for name, v in (("gold", gold), ("pred", pred)):
        if v.min() < 0 or v.max() >= num_classes:
            raise ValueError(f"{name} labels outside [0, {num_classes})")
    scores = []
    for c in sorted(set(gold.tolist()) | set(pred.tolist())):
        tp = int(np.sum((gold == c) & (pred == c)))
        fp = int(np.sum((gold != c) & (pred == c)))
        fn = int(np.sum((gold == c) & (pred != c)))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        scores.append(f1)
    return float(np.mean(scores))


def worst_off(scores, direction: str) -> float:
    """Mean of the worst-performing 10% of scores (at least one score).

    ``direction`` says which tail is bad: "low" averages the m smallest
    values (F1-style), "high" the m largest (divergence-style), with
    m = max(1, ceil(0.10 n)).
    """
    values = np.asarray(sorted(scores.values()) if isinstance(scores, dict) else sorted(scores))
    if values.size == 0:
        raise ValueError("no scores given")
    m = max(1, math.ceil(0.10 * values.size))
    if direction == "low":
        tail = values[:m]
    elif direction == "high":
        tail = values[-m:]
    else:
        raise ValueError(f"direction must be 'low' or 'high', got {direction!r}")
    return float(np.mean(tail))


@dataclass(frozen=True)
class MetricReport:
    """One evaluation pass: overall, per-annotator mean, and worst-off metrics."""

    f1_macro: float
    js_mean: float
    f1_per_annotator: float
    js_per_annotator: float
    f1_worst: float
    js_worst: float
    n_annotators_evaluated: int

    CSV_FIELDS = ("f1", "js", "f1_a", "js_a", "f1_w", "js_w")

    def to_dict(self) -> dict[str, float]:
        return {
            "f1": self.f1_macro,
            "js": self.js_mean,
            "f1_a": self.f1_per_annotator,
            "js_a": self.js_per_annotator,
            "f1_w": self.f1_worst,
            "js_w": self.js_worst,
        }

    def to_csv_row(self) -> list[str]:
        d = self.to_dict()
        return [repr(d[k]) for k in self.CSV_FIELDS]


@dataclass(frozen=True)
class EntropyAlignment:
    """How collected-annotation entropy compares to full-annotation entropy."""

    proportion_low: float
    proportion_aligned: float
    proportion_high: float
    edges: tuple[float, float] = DEFAULT_ENTROPY_EDGES

    def __post_init__(self):
        total = self.proportion_low + self.proportion_aligned + self.proportion_high
        if not math.isclose(total, 1.0, abs_tol=1e-9):
            raise ValueError(f"proportions must sum to 1, got {total}")


def entropy_bin(entropy_nats: float, edges=DEFAULT_ENTROPY_EDGES) -> int:
    """0 for low (< edges[0]), 1 for medium (inclusive), 2 for high (> edges[1])."""
    if entropy_nats < edges[0]:
        return 0
    if entropy_nats > edges[1]:
        return 2
    return 1


def entropy_alignment(
    labeled: LabeledPool, corpus: Corpus, edges=DEFAULT_ENTROPY_EDGES
) -> EntropyAlignment:
    """Bin collected vs full annotation entropy for every touched sample.

    A sample is aligned when both entropies land in the same low/medium/high
    bin; otherwise it counts toward ``proportion_low`` or ``proportion_high``
    depending on which side of the target bin the collected entropy fell.
    """
    sample_ids = labeled.sample_ids()
    if not sample_ids:
        raise ValueError("labeled pool is empty")
    low = aligned = high = 0
    for sid in sample_ids:
        collected = entropy_bin(annotation_entropy(labeled.consumed_soft_label(sid)), edges)
        target = entropy_bin(annotation_entropy(aggregate_soft_label(corpus, sid)), edges)
        if collected == target:
            aligned += 1
        elif collected < target:
            low += 1
        else:
            high += 1
    n = len(sample_ids)
    return EntropyAlignment(low / n, aligned / n, high / n, tuple(edges))


def _predictions(
    classifier: SoftLabelClassifier, sample_ids, emb: EmbeddingMatrix
) -> dict[str, np.ndarray]:
    probs = classifier.predict_proba(emb.matrix(sample_ids))
    return {sid: probs[i] for i, sid in enumerate(sample_ids)}


def evaluate_overall(
    classifier: SoftLabelClassifier, sample_ids, corpus: Corpus, emb: EmbeddingMatrix
) -> tuple[float, float]:
    """(macro F1 against majority labels, mean JSD against full soft labels)."""
    sample_ids = sorted(sample_ids)
    if not sample_ids:
        raise ValueError("no samples to evaluate")
    preds = _predictions(classifier, sample_ids, emb)
    targets = np.stack([aggregate_soft_label(corpus, sid) for sid in sample_ids])
    probs = np.stack([preds[sid] for sid in sample_ids])
    gold = [majority_label(targets[i]) for i in range(len(sample_ids))]
    pred = list(np.argmax(probs, axis=1))
    f1 = macro_f1(gold, pred, corpus.label_space.num_classes)
    js = float(np.mean(_js_rows(probs, targets)))
    return f1, js


def evaluate_per_annotator(
    classifier: SoftLabelClassifier, sample_ids, corpus: Corpus, emb: EmbeddingMatrix
) -> tuple[dict[str, float], dict[str, float]]:
    """Per-annotator macro F1 and mean JSD, each against that annotator's labels.

    An annotator's gold labels are their own annotations on the split's
    samples; the JS target per annotation is the one-hot of their label.
    Every annotator with at least one annotation in the split is included.
    """
    sample_ids = sorted(set(sample_ids))
    if not sample_ids:
        raise ValueError("no samples to evaluate")
    preds = _predictions(classifier, sample_ids, emb)
    split = set(sample_ids)
    num_classes = corpus.label_space.num_classes
    per_annotator: dict[str, list[tuple[str, int]]] = {}
    for t in corpus.triples:
        if t.sample_id in split:
            per_annotator.setdefault(t.annotator_id, []).append((t.sample_id, t.label))
    if not per_annotator:
        raise ValueError("no annotations in the given split")
    f1_by: dict[str, float] = {}
    js_by: dict[str, float] = {}
    eye = np.eye(num_classes, dtype=np.float64)
    for aid in sorted(per_annotator):
        pairs = per_annotator[aid]
        gold = [label for _, label in pairs]
        rows = np.stack([preds[sid] for sid, _ in pairs])
        pred = list(np.argmax(rows, axis=1))
        f1_by[aid] = macro_f1(gold, pred, num_classes)
        js_by[aid] = float(np.mean(_js_rows(eye[gold], rows)))
    return f1_by, js_by


def evaluate_report(
    classifier: SoftLabelClassifier, sample_ids, corpus: Corpus, emb: EmbeddingMatrix
) -> MetricReport:
    """Full metric suite over one split: overall, annotator means, worst-off."""
    f1, js = evaluate_overall(classifier, sample_ids, corpus, emb)
    f1_by, js_by = evaluate_per_annotator(classifier, sample_ids, corpus, emb)
    return MetricReport(
        f1_macro=f1,
        js_mean=js,
        f1_per_annotator=float(np.mean(list(f1_by.values()))),
        js_per_annotator=float(np.mean(list(js_by.values()))),
        f1_worst=worst_off(f1_by, "low"),
        js_worst=worst_off(js_by, "high"),
        n_annotators_evaluated=len(f1_by),
    )
