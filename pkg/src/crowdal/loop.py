"""Experiment protocols: passive training, oracle AL, and annotator-centric AL.

Every mode shares the same skeleton: split the corpus by sample, consume
annotations into the labeled pool according to the mode's rules, retrain on
the soft labels aggregated from *consumed* annotations, evaluate on the
validation split after each iteration, and finally pick the checkpoint with
the best (lowest) validation JS.  Validation and test metrics always target
the full annotation distributions; the budget only constrains training data.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .annotators import ANNOTATOR_STRATEGY_TOKENS, select_annotator
from .corpus import (
    Corpus,
    LabeledPool,
    SplitSpec,
    UnlabeledPool,
    consume,
    consume_all,
    make_pools,
    split_corpus,
)
from .embeddings import EmbeddingMatrix
from .metrics import EntropyAlignment, MetricReport, entropy_alignment, evaluate_report
from .model import SoftLabelClassifier, TrainConfig
from .sampling import SAMPLE_STRATEGY_TOKENS, batch_size, select_random, select_uncertainty

MODE_TOKENS = ("passive", "al_oracle", "acal")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs beyond the data itself.

    ``split_seed``/``model_seed``/``strategy_seed`` drive, respectively, the
    corpus split, parameter initialization, and every stochastic selection
    (warmup, random batches, tie-breaking).  ``train.epochs`` is ignored by
    the loops: active modes train ``epochs_per_round`` per iteration and
    passive mode trains epoch by epoch up to ``max_epochs``.
    """

    mode: str
    sample_strategy: str = "random"
    annotator_strategy: str = "random"
    num_iterations: int = 10
    epochs_per_round: int = 20
    max_epochs: int = 50
    warm_start: bool = True
    batch_override: int | None = None
    train: TrainConfig = field(default_factory=TrainConfig)
    split_seed: int = 0
    model_seed: int = 0
    strategy_seed: int = 0
    label_names: tuple[str, ...] | None = None
    paths: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        if self.mode not in MODE_TOKENS:
            raise ValueError(f"mode: unknown token {self.mode!r}; expected one of {MODE_TOKENS}")
        if self.sample_strategy not in SAMPLE_STRATEGY_TOKENS:
            raise ValueError(
                f"sample_strategy: unknown token {self.sample_strategy!r};"
                f" expected one of {SAMPLE_STRATEGY_TOKENS}"
            )
        if self.mode == "acal" and self.annotator_strategy not in ANNOTATOR_STRATEGY_TOKENS:
            raise ValueError(
                f"annotator_strategy: unknown token {self.annotator_strategy!r};"
                f" expected one of {ANNOTATOR_STRATEGY_TOKENS}"
            )
        if self.num_iterations < 1:
            raise ValueError("num_iterations: must be >= 1")
        if self.epochs_per_round < 1:
            raise ValueError("epochs_per_round: must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs: must be >= 1")
        if self.batch_override is not None and self.batch_override < 1:
            raise ValueError("batch_override: must be >= 1 when given")
        return self


@dataclass
class BudgetLedger:
    """Consumed-annotation counts, one entry per completed iteration."""

    consumed_per_iteration: list[int] = field(default_factory=list)

    @property
    def cumulative(self) -> int:
        return sum(self.consumed_per_iteration)

    def add(self, count: int) -> None:
        if count < 0:
            raise ValueError("cannot consume a negative count")
        self.consumed_per_iteration.append(count)


@dataclass(frozen=True)
class IterationLog:
    iteration: int
    budget: int
    report: MetricReport
    alignment: EntropyAlignment
    checkpoint: dict


@dataclass(frozen=True)
class CheckpointSelection:
    best_iteration: int
    best_validation_js: float
    budget_at_best: int


def warmup(
    labeled: LabeledPool, unlabeled: UnlabeledPool, b: int, rng: np.random.Generator
) -> int:
    """Consume min(b, remaining) annotations uniformly over all unconsumed triples."""
    remaining = unlabeled.all_remaining_ids()
    if not remaining:
        raise ValueError("unlabeled pool is empty")
    k = min(b, len(remaining))
    picked = rng.choice(len(remaining), size=k, replace=False)
    for i in picked:
        labeled.add(unlabeled.pop_exact(remaining[i]))
    return k


def select_best_checkpoint(logs: list[IterationLog]) -> CheckpointSelection:
    """Entry with minimal validation JS; ties go to the earliest iteration."""
    if not logs:
        raise ValueError("no iterations logged")
    best = min(logs, key=lambda entry: (entry.report.js_mean, entry.iteration))
    return CheckpointSelection(best.iteration, best.report.js_mean, best.budget)


def budget_delta(budget_at_best: int, total_annotations: int) -> float:
    """Signed percentage change vs consuming everything (negative = savings)."""
    if total_annotations <= 0:
        raise ValueError("total_annotations must be > 0")
    return 100.0 * (budget_at_best - total_annotations) / total_annotations


def train_annotation_count(corpus: Corpus, split: SplitSpec) -> int:
    """Number of annotations attached to train-split samples."""
    return sum(len(corpus.samples[sid].annotation_ids) for sid in split.train_ids)


def _round_train_config(config: ExperimentConfig) -> TrainConfig:
    return dataclasses.replace(config.train, epochs=config.epochs_per_round)


def _consumed_arrays(labeled: LabeledPool, emb: EmbeddingMatrix) -> tuple[np.ndarray, np.ndarray]:
    ids = labeled.sample_ids()
    X = emb.matrix(ids)
    Y = np.stack([labeled.consumed_soft_label(sid) for sid in ids])
    return X, Y


def _retrain(
    classifier: SoftLabelClassifier,
    config: ExperimentConfig,
    labeled: LabeledPool,
    emb: EmbeddingMatrix,
) -> SoftLabelClassifier:
    """One round of training on all consumed data; fresh parameters unless warm-starting."""
    if not config.warm_start:
        classifier = SoftLabelClassifier(
            classifier.n_features,
            classifier.n_classes,
            seed=config.model_seed,
            train_config=classifier.train_config,
        )
    X, Y = _consumed_arrays(labeled, emb)
    return classifier.fit(X, Y)


def _log_iteration(
    logs: list[IterationLog],
    iteration: int,
    ledger: BudgetLedger,
    classifier: SoftLabelClassifier,
    labeled: LabeledPool,
    corpus: Corpus,
    emb: EmbeddingMatrix,
    split: SplitSpec,
) -> None:
    logs.append(
        IterationLog(
            iteration=iteration,
            budget=ledger.cumulative,
            report=evaluate_report(classifier, split.val_ids, corpus, emb),
            alignment=entropy_alignment(labeled, corpus),
            checkpoint=classifier.to_checkpoint(),
        )
    )


def _run_active(
    config: ExperimentConfig, corpus: Corpus, emb: EmbeddingMatrix, oracle: bool
) -> tuple[list[IterationLog], CheckpointSelection]:
    """Shared body of the oracle-AL and annotator-centric loops.

    Iteration 0 is the warmup; afterwards each iteration selects a batch of
    samples, consumes one annotation per sample (or all of them in oracle
    mode), retrains on every consumed annotation, and logs validation
    metrics.  The run ends after ``num_iterations`` or when the pool runs
    dry, whichever comes first.
    """
    config.validate()
    split = split_corpus(corpus, config.split_seed)
    labeled, unlabeled = make_pools(corpus, split.train_ids)
    total_train = unlabeled.n_remaining
    b = config.batch_override or batch_size(total_train, len(split.train_ids))
    rng = np.random.default_rng(config.strategy_seed)
    classifier = SoftLabelClassifier(
        emb.dim,
        corpus.label_space.num_classes,
        seed=config.model_seed,
        train_config=_round_train_config(config),
    )
    ledger = BudgetLedger()
    logs: list[IterationLog] = []

    ledger.add(warmup(labeled, unlabeled, b, rng))
    classifier = _retrain(classifier, config, labeled, emb)
    _log_iteration(logs, 0, ledger, classifier, labeled, corpus, emb, split)

    for iteration in range(1, config.num_iterations + 1):
        if not unlabeled.remaining:
            break
        if config.sample_strategy == "random":
            batch = select_random(unlabeled, b, rng)
        else:
            batch = select_uncertainty(unlabeled, b, classifier, emb)
        consumed = 0
        for sid in batch.sample_ids:
            if oracle:
                consumed += len(consume_all(labeled, unlabeled, sid))
            else:
                choice = select_annotator(
                    config.annotator_strategy,
                    sid,
                    unlabeled,
                    labeled,
                    emb,
                    corpus.label_space,
                    rng,
                )
                consume(labeled, unlabeled, sid, choice.annotator_id)
                consumed += 1
        ledger.add(consumed)
        classifier = _retrain(classifier, config, labeled, emb)
        _log_iteration(logs, iteration, ledger, classifier, labeled, corpus, emb, split)

    return logs, select_best_checkpoint(logs)


def run_acal(
    config: ExperimentConfig, corpus: Corpus, emb: EmbeddingMatrix
) -> tuple[list[IterationLog], CheckpointSelection]:
    """Annotator-centric AL: one chosen annotator labels each selected sample."""
    if config.mode != "acal":
        raise ValueError(f"mode: expected 'acal', got {config.mode!r}")
    return _run_active(config, corpus, emb, oracle=False)


def run_al_oracle(
    config: ExperimentConfig, corpus: Corpus, emb: EmbeddingMatrix
) -> tuple[list[IterationLog], CheckpointSelection]:
    """Oracle AL: each selected sample yields its full annotation distribution."""
    if config.mode != "al_oracle":
        raise ValueError(f"mode: expected 'al_oracle', got {config.mode!r}")
    return _run_active(config, corpus, emb, oracle=True)


def run_passive(
    config: ExperimentConfig, corpus: Corpus, emb: EmbeddingMatrix
) -> tuple[list[IterationLog], CheckpointSelection]:
    """Train on the full train split, logging per epoch, with early stopping.

    Stops after 3 consecutive epochs without strict improvement of the
    validation JS, or at ``max_epochs``.  Every log entry carries the full
    train-annotation budget.  Each epoch's shuffle derives from
    ``train.shuffle_seed`` plus the epoch index, so the whole trajectory is
    reproducible while still reshuffling between epochs.
    """
    if config.mode != "passive":
        raise ValueError(f"mode: expected 'passive', got {config.mode!r}")
    config.validate()
    split = split_corpus(corpus, config.split_seed)
    labeled, unlabeled = make_pools(corpus, split.train_ids)
    for annotation_id in unlabeled.all_remaining_ids():
        labeled.add(unlabeled.pop_exact(annotation_id))
    total = labeled.n_consumed
    X, Y = _consumed_arrays(labeled, emb)
    alignment = entropy_alignment(labeled, corpus)
    classifier = SoftLabelClassifier(
        emb.dim,
        corpus.label_space.num_classes,
        seed=config.model_seed,
        train_config=config.train,
    )
    logs: list[IterationLog] = []
    best_js = float("inf")
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        classifier.train_config = dataclasses.replace(
            config.train, epochs=1, shuffle_seed=config.train.shuffle_seed + epoch - 1
        )
        classifier.fit(X, Y)
        report = evaluate_report(classifier, split.val_ids, corpus, emb)
        logs.append(IterationLog(epoch, total, report, alignment, classifier.to_checkpoint()))
        if report.js_mean < best_js:
            best_js = report.js_mean
            stale = 0
        else:
            stale += 1
            if stale >= 3:
                break
    return logs, select_best_checkpoint(logs)


def run_experiment(
    config: ExperimentConfig, corpus: Corpus, emb: EmbeddingMatrix
) -> tuple[list[IterationLog], CheckpointSelection]:
    """Dispatch one run by mode token."""
    runners = {"passive": run_passive, "al_oracle": run_al_oracle, "acal": run_acal}
    config.validate()
    return runners[config.mode](config, corpus, emb)


ITERATION_CSV_HEADER = (
    "iteration,budget,f1,js,f1_a,js_a,f1_w,js_w,align_low,align_ok,align_high"
)


def iteration_csv_lines(logs: list[IterationLog]) -> list[str]:
    """Render logs as CSV lines (full float precision, bit-stable across reruns)."""
    lines = [ITERATION_CSV_HEADER]
    for entry in logs:
        cells = [str(entry.iteration), str(entry.budget)]
        cells += entry.report.to_csv_row()
        cells += [
            repr(entry.alignment.proportion_low),
            repr(entry.alignment.proportion_aligned),
            repr(entry.alignment.proportion_high),
        ]
        lines.append(",".join(cells))
    return lines


def write_iteration_csv(logs: list[IterationLog], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(iteration_csv_lines(logs)) + "\n")
