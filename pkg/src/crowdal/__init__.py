"""Annotator-centric active learning over crowd-annotated corpora.

The package simulates annotation collection as a two-stage choice — first
which samples to annotate, then which annotator labels each one — trains a
linear soft-label classifier on whatever has been collected, and scores the
result with disagreement-aware metrics (distributional divergence,
per-annotator and worst-off views, entropy alignment).
"""

from .annotators import (
    AnnotatorChoice,
    minority_label,
    select_annotator,
    select_label_minority,
    select_random_annotator,
    select_representation_diversity,
    select_semantic_diversity,
)
from .corpus import (
    AnnotationTriple,
    AnnotatorProfile,
    Corpus,
    LabeledPool,
    LabelSpace,
    SampleRecord,
    SplitSpec,
    UnlabeledPool,
    aggregate_soft_label,
    annotation_entropy,
    consume,
    consume_all,
    load_corpus,
    load_texts,
    majority_label,
    make_pools,
    split_corpus,
)
from .embeddings import (
    AnnotatorRepresentation,
    EmbeddingMatrix,
    PrincipalComponents,
    annotator_representation,
    cosine_similarity,
    load_embeddings,
    mean_similarity_to_history,
    write_embeddings,
)
from .loop import (
    ITERATION_CSV_HEADER,
    BudgetLedger,
    CheckpointSelection,
    ExperimentConfig,
    IterationLog,
    budget_delta,
    iteration_csv_lines,
    run_acal,
    run_al_oracle,
    run_experiment,
    run_passive,
    select_best_checkpoint,
    train_annotation_count,
    warmup,
    write_iteration_csv,
)
from .metrics import (
    EntropyAlignment,
    MetricReport,
    entropy_alignment,
    entropy_bin,
    evaluate_overall,
    evaluate_per_annotator,
    evaluate_report,
    js_divergence,
    macro_f1,
    worst_off,
)
from .model import SoftLabelClassifier, TrainConfig
from .sampling import SampleBatch, batch_size, select_random, select_uncertainty
from .synthdata import PopulationSpec, generate_population, ground_truth_js, write_population

__version__ = "0.1.0"

__all__ = [
    "AnnotationTriple",
    "AnnotatorChoice",
    "AnnotatorProfile",
    "AnnotatorRepresentation",
    "BudgetLedger",
    "ITERATION_CSV_HEADER",
    "CheckpointSelection",
    "Corpus",
    "EmbeddingMatrix",
    "EntropyAlignment",
    "ExperimentConfig",
    "IterationLog",
    "LabelSpace",
    "LabeledPool",
    "MetricReport",
    "PopulationSpec",
    "PrincipalComponents",
    "SampleBatch",
    "SampleRecord",
    "SoftLabelClassifier",
    "SplitSpec",
    "TrainConfig",
    "UnlabeledPool",
    "aggregate_soft_label",
    "annotation_entropy",
    "annotator_representation",
    "batch_size",
    "budget_delta",
    "iteration_csv_lines",
    "consume",
    "consume_all",
    "cosine_similarity",
    "entropy_alignment",
    "entropy_bin",
    "evaluate_overall",
    "evaluate_per_annotator",
    "evaluate_report",
    "generate_population",
    "ground_truth_js",
    "js_divergence",
    "load_corpus",
    "load_embeddings",
    "load_texts",
    "macro_f1",
    "majority_label",
    "make_pools",
    "mean_similarity_to_history",
    "minority_label",
    "run_acal",
    "run_al_oracle",
    "run_experiment",
    "run_passive",
    "select_annotator",
    "select_best_checkpoint",
    "train_annotation_count",
    "select_label_minority",
    "select_random",
    "select_random_annotator",
    "select_representation_diversity",
    "select_semantic_diversity",
    "select_uncertainty",
    "split_corpus",
    "warmup",
    "worst_off",
    "write_embeddings",
    "write_iteration_csv",
    "write_population",
]
