"""Crowd-annotated corpus: triples, samples, annotators, splits, and pools."""

from __future__ import annotations

import bisect
import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class LabelSpace:
    """Ordered label names; class indices are positions in ``names``."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(str(n) for n in self.names)
        if len(names) < 2:
            raise ValueError("label space needs at least two classes")
        if len(set(names)) != len(names):
            raise ValueError("label names must be unique")
        if any(not n for n in names):
            raise ValueError("label names must be non-empty")
        object.__setattr__(self, "names", names)

    @property
    def num_classes(self) -> int:
        return len(self.names)

    def index_of(self, label: str | int) -> int:
        """Map a label name or an integer index (possibly as text) to its class index."""
        if isinstance(label, (int, np.integer)):
            idx = int(label)
        else:
            text = str(label).strip()
            if text in self.names:
                return self.names.index(text)
            try:
                idx = int(text)
            except ValueError:
                raise ValueError(f"unknown label {label!r}") from None
        if not 0 <= idx < len(self.names):
            raise ValueError(f"label index {idx} outside [0, {len(self.names)})")
        return idx

    def one_hot(self, class_index: int) -> np.ndarray:
        if not 0 <= class_index < self.num_classes:
            raise ValueError(f"class index {class_index} outside [0, {self.num_classes})")
        vec = np.zeros(self.num_classes, dtype=np.float64)
        vec[class_index] = 1.0
        return vec


@dataclass(frozen=True)
class AnnotationTriple:
    """One annotation event: annotator ``annotator_id`` gave ``label`` to ``sample_id``."""

    sample_id: str
    annotator_id: str
    label: int


@dataclass
class SampleRecord:
    sample_id: str
    annotation_ids: list[int] = field(default_factory=list)
    text: str | None = None


@dataclass
class AnnotatorProfile:
    annotator_id: str
    annotation_ids: list[int] = field(default_factory=list)


class Corpus:
    """Immutable-after-build view of a crowd-annotated dataset.

    Holds the full triple list plus per-sample and per-annotator indexes into
    it.  Every sample and every annotator is backed by at least one triple,
    and each (sample, annotator) pair may be annotated at most once.
    """

    def __init__(
        self,
        label_space: LabelSpace,
        triples: list[AnnotationTriple],
        texts: dict[str, str] | None = None,
    ):
        if not triples:
            raise ValueError("corpus needs at least one annotation")
        self.label_space = label_space
        self.triples = list(triples)
        self.samples: dict[str, SampleRecord] = {}
        self.annotators: dict[str, AnnotatorProfile] = {}
        seen: set[tuple[str, str]] = set()
        for i, t in enumerate(self.triples):
            if not 0 <= t.label < label_space.num_classes:
                raise ValueError(
                    f"annotation {i}: label {t.label} outside [0, {label_space.num_classes})"
                )
            pair = (t.sample_id, t.annotator_id)
            if pair in seen:
                raise ValueError(f"duplicate annotation for {pair}")
            seen.add(pair)
            rec = self.samples.get(t.sample_id)
            if rec is None:
                rec = self.samples[t.sample_id] = SampleRecord(t.sample_id)
            rec.annotation_ids.append(i)
            prof = self.annotators.get(t.annotator_id)
            if prof is None:
                prof = self.annotators[t.annotator_id] = AnnotatorProfile(t.annotator_id)
            prof.annotation_ids.append(i)
        if texts:
            unknown = sorted(set(texts) - set(self.samples))
            if unknown:
                raise ValueError(f"texts reference unknown sample ids: {unknown[:5]}")
            for sid, text in texts.items():
                self.samples[sid].text = text

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def n_annotators(self) -> int:
        return len(self.annotators)

    @property
    def n_annotations(self) -> int:
        return len(self.triples)

    @property
    def mean_annotations_per_sample(self) -> float:
        return self.n_annotations / self.n_samples

    def sample_ids(self) -> list[str]:
        return sorted(self.samples)

    def labels_for(self, sample_id: str, annotation_ids=None) -> np.ndarray:
        """Integer labels of the given annotations (default: all for the sample)."""
        if annotation_ids is None:
            annotation_ids = self.samples[sample_id].annotation_ids
        return np.array([self.triples[i].label for i in annotation_ids], dtype=np.int64)


def load_texts(path) -> dict[str, str]:
    """Read a JSON-lines file of ``{"sample_id": ..., "text": ...}`` records."""
    texts: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if "sample_id" not in obj or "text" not in obj:
                raise ValueError(f"{path}:{lineno}: record needs sample_id and text")
            sid = str(obj["sample_id"])
            if sid in texts:
                raise ValueError(f"{path}:{lineno}: duplicate sample_id {sid!r}")
            texts[sid] = str(obj["text"])
    return texts


def load_corpus(annotations_path, label_space: LabelSpace, texts_path=None) -> Corpus:
    """Load a corpus from an annotations CSV (``sample_id,annotator_id,label``).

    Labels may be class names or integer indices into ``label_space``.  An
    optional JSON-lines texts file attaches raw text per sample; text ids must
    be a subset of the annotated sample ids.
    """
    triples: list[AnnotationTriple] = []
    seen: set[tuple[str, str]] = set()
    with open(annotations_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["sample_id", "annotator_id", "label"]:
            raise ValueError(
                f"{annotations_path}: expected header sample_id,annotator_id,label"
            )
        for lineno, row in enumerate(reader, 2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise ValueError(f"{annotations_path}:{lineno}: expected 3 fields, got {len(row)}")
            sid, aid, label = (f.strip() for f in row)
            if not sid or not aid:
                raise ValueError(f"{annotations_path}:{lineno}: empty sample or annotator id")
            if (sid, aid) in seen:
                raise ValueError(
                    f"{annotations_path}:{lineno}: duplicate annotation for ({sid!r}, {aid!r})"
                )
            seen.add((sid, aid))
            try:
                cls = label_space.index_of(label)
            except ValueError as exc:
                raise ValueError(f"{annotations_path}:{lineno}: {exc}") from None
            triples.append(AnnotationTriple(sid, aid, cls))
    if not triples:
        raise ValueError(f"{annotations_path}: no annotations found")
    texts = load_texts(texts_path) if texts_path is not None else None
    return Corpus(label_space, triples, texts)


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint sample-id sets for train/validation/test, plus the seed used."""

    train_ids: tuple[str, ...]
    val_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    seed: int

    def __post_init__(self):
        all_ids = self.train_ids + self.val_ids + self.test_ids
        if len(set(all_ids)) != len(all_ids):
            raise ValueError("split parts must be disjoint")
        if not self.train_ids or not self.val_ids or not self.test_ids:
            raise ValueError("every split part must be non-empty")


def split_corpus(corpus: Corpus, seed: int) -> SplitSpec:
    """Split sample ids 80/10/10 by a seeded shuffle of the sorted id list.

    Part sizes are floor(0.8 n) / floor(0.1 n) / remainder, so all samples are
    used exactly once.  Annotations follow their sample.  Needs n >= 10 so no
    part comes out empty.
    """
    ids = corpus.sample_ids()
    n = len(ids)
    if n < 10:
        raise ValueError(f"need at least 10 samples to split, got {n}")
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [ids[i] for i in order]
    n_train = math.floor(0.8 * n)
    n_val = math.floor(0.1 * n)
    return SplitSpec(
        train_ids=tuple(shuffled[:n_train]),
        val_ids=tuple(shuffled[n_train : n_train + n_val]),
        test_ids=tuple(shuffled[n_train + n_val :]),
        seed=seed,
    )


def soft_label_from_labels(labels, num_classes: int) -> np.ndarray:
    """Relative label frequencies over ``num_classes`` (at least one label required)."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("cannot aggregate zero annotations")
    if labels.min() < 0 or labels.max() >= num_classes:
        raise ValueError("label outside class range")
    counts = np.bincount(labels, minlength=num_classes).astype(np.float64)
    return counts / counts.sum()


def check_soft_label(probs, num_classes: int | None = None) -> np.ndarray:
    """Validate a probability vector (non-negative, sums to 1 within 1e-9)."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1:
        raise ValueError("probability vector must be 1-D")
    if num_classes is not None and probs.shape[0] != num_classes:
        raise ValueError(f"expected {num_classes} classes, got {probs.shape[0]}")
    if probs.size == 0 or np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, abs_tol=1e-9):
        raise ValueError("not a probability vector")
    return probs


def aggregate_soft_label(corpus: Corpus, sample_id: str, annotation_ids=None) -> np.ndarray:
    """Soft label of a sample: per-class annotation counts normalised to sum 1.

    ``annotation_ids`` restricts the aggregate to a subset of the sample's
    annotations (e.g. the consumed ones); default is all of them.
    """
    if sample_id not in corpus.samples:
        raise KeyError(f"unknown sample id {sample_id!r}")
    if annotation_ids is None:
        annotation_ids = corpus.samples[sample_id].annotation_ids
    labels = corpus.labels_for(sample_id, annotation_ids)
    return soft_label_from_labels(labels, corpus.label_space.num_classes)


def majority_label(soft_label) -> int:
    """Most frequent class; ties break toward the lowest class index."""
    probs = check_soft_label(soft_label)
    return int(np.argmax(probs))


def annotation_entropy(soft_label) -> float:
    """Shannon entropy (nats) of a soft label, with 0 * log 0 = 0."""
    probs = check_soft_label(soft_label)
    nz = probs[probs > 0]
    return float(-np.sum(nz * np.log(nz)))


class LabeledPool:
    """Consumed annotations, grouped by sample, with running per-annotator tallies.

    Tracks everything the annotator-selection strategies need to read without
    rescanning: per-annotator consumed annotation ids, per-annotator label
    counts, and pool-wide label counts.
    """

    def __init__(self, corpus: Corpus):
        self.corpus = corpus
        self.by_sample: dict[str, list[int]] = {}
        self.by_annotator: dict[str, list[int]] = {}
        self.annotator_label_counts: dict[str, np.ndarray] = {}
        self.label_counts = np.zeros(corpus.label_space.num_classes, dtype=np.int64)
        self.n_consumed = 0
        self._history_sids: dict[str, list[str]] = {}

    def add(self, annotation_id: int) -> None:
        t = self.corpus.triples[annotation_id]
        self.by_sample.setdefault(t.sample_id, []).append(annotation_id)
        self.by_annotator.setdefault(t.annotator_id, []).append(annotation_id)
        counts = self.annotator_label_counts.get(t.annotator_id)
        if counts is None:
            counts = self.annotator_label_counts[t.annotator_id] = np.zeros(
                self.corpus.label_space.num_classes, dtype=np.int64
            )
        counts[t.label] += 1
        self.label_counts[t.label] += 1
        self.n_consumed += 1
        bisect.insort(self._history_sids.setdefault(t.annotator_id, []), t.sample_id)

    def sample_ids(self) -> list[str]:
        return sorted(self.by_sample)

    def consumed_soft_label(self, sample_id: str) -> np.ndarray:
        return aggregate_soft_label(self.corpus, sample_id, self.by_sample[sample_id])

    def history(self, annotator_id: str) -> list[int]:
        """Annotation ids this annotator has had consumed so far (may be empty)."""
        return self.by_annotator.get(annotator_id, [])

    def history_sample_ids(self, annotator_id: str) -> list[str]:
        """Sample ids of the annotator's consumed annotations, kept sorted."""
        return self._history_sids.get(annotator_id, [])

    def history_pairs(self, annotator_id: str) -> list[tuple[str, int]]:
        """(sample_id, label) for each of the annotator's consumed annotations."""
        return [
            (self.corpus.triples[i].sample_id, self.corpus.triples[i].label)
            for i in self.by_annotator.get(annotator_id, [])
        ]


class UnlabeledPool:
    """Per-sample sets of not-yet-consumed annotation ids for the train split."""

    def __init__(self, corpus: Corpus, sample_ids) -> None:
        self.corpus = corpus
        self.remaining: dict[str, dict[str, list[int]]] = {}
        for sid in sample_ids:
            if sid not in corpus.samples:
                raise KeyError(f"unknown sample id {sid!r}")
            per_annotator: dict[str, list[int]] = {}
            for aid_idx in corpus.samples[sid].annotation_ids:
                t = corpus.triples[aid_idx]
                per_annotator.setdefault(t.annotator_id, []).append(aid_idx)
            self.remaining[sid] = per_annotator

    @property
    def n_remaining(self) -> int:
        return sum(
            len(ids) for per in self.remaining.values() for ids in per.values()
        )

    def sample_ids(self) -> list[str]:
        """Samples that still have at least one unconsumed annotation, sorted."""
        return sorted(self.remaining)

    def remaining_ids(self, sample_id: str) -> list[int]:
        per = self.remaining.get(sample_id, {})
        return sorted(i for ids in per.values() for i in ids)

    def available_annotators(self, sample_id: str) -> list[str]:
        """Annotators with an unconsumed annotation on the sample, sorted by id."""
        return sorted(self.remaining.get(sample_id, {}))

    def pop(self, sample_id: str, annotator_id: str) -> int:
        """Remove and return the annotation id of (sample, annotator).

        Drops the sample from the pool once nothing remains for it.
        """
        per = self.remaining.get(sample_id)
        if not per or annotator_id not in per:
            raise KeyError(f"no remaining annotation for ({sample_id!r}, {annotator_id!r})")
        ids = per[annotator_id]
        ids.sort()
        annotation_id = ids.pop(0)
        if not ids:
            del per[annotator_id]
        if not per:
            del self.remaining[sample_id]
        return annotation_id

    def pop_all(self, sample_id: str) -> list[int]:
        """Remove and return every remaining annotation id of a sample."""
        per = self.remaining.get(sample_id)
        if not per:
            raise KeyError(f"no remaining annotations for {sample_id!r}")
        ids = sorted(i for chunk in per.values() for i in chunk)
        del self.remaining[sample_id]
        return ids

    def pop_exact(self, annotation_id: int) -> int:
        """Remove one specific annotation id (used by the uniform warmup draw)."""
        t = self.corpus.triples[annotation_id]
        per = self.remaining.get(t.sample_id)
        if not per or annotation_id not in per.get(t.annotator_id, ()):
            raise KeyError(f"annotation {annotation_id} not in the pool")
        ids = per[t.annotator_id]
        ids.remove(annotation_id)
        if not ids:
            del per[t.annotator_id]
        if not per:
            del self.remaining[t.sample_id]
        return annotation_id

    def all_remaining_ids(self) -> list[int]:
        """Every unconsumed annotation id, in a deterministic (sorted) order."""
        out: list[int] = []
        for sid in sorted(self.remaining):
            out.extend(self.remaining_ids(sid))
        return out


def make_pools(corpus: Corpus, train_ids) -> tuple[LabeledPool, UnlabeledPool]:
    """Fresh labeled/unlabeled pools over the train split (nothing consumed yet)."""
    return LabeledPool(corpus), UnlabeledPool(corpus, train_ids)


def consume(labeled: LabeledPool, unlabeled: UnlabeledPool, sample_id: str, annotator_id: str) -> int:
    """Move one (sample, annotator) annotation from unlabeled to labeled."""
    annotation_id = unlabeled.pop(sample_id, annotator_id)
    labeled.add(annotation_id)
    return annotation_id


def consume_all(labeled: LabeledPool, unlabeled: UnlabeledPool, sample_id: str) -> list[int]:
    """Move every remaining annotation of a sample from unlabeled to labeled."""
    ids = unlabeled.pop_all(sample_id)
    for i in ids:
        labeled.add(i)
    return ids
