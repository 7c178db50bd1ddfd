"""Command-line entry point: seeded experiment runs, synthetic data, reports.

Exit codes: 0 on success, 2 when a config or input fails validation (the
message names the offending field), 1 on other failures such as I/O errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .corpus import LabelSpace, load_corpus, split_corpus
from .embeddings import load_embeddings
from .loop import (
    ExperimentConfig,
    budget_delta,
    run_experiment,
    train_annotation_count,
    write_iteration_csv,
)
from .metrics import evaluate_report
from .model import SoftLabelClassifier, TrainConfig
from .synthdata import PopulationSpec, generate_population, write_population

_CONFIG_FIELDS = {
    "mode", "sample_strategy", "annotator_strategy", "labels", "annotations",
    "embeddings", "texts", "num_iterations", "epochs_per_round", "max_epochs",
    "warm_start", "batch_override", "learning_rate", "train_batch_size",
    "weight_decay", "shuffle_seed", "seeds", "out_dir",
}


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON: {exc}") from None


def _write_json(path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_seed_triples(raw) -> list[tuple[int, int, int]]:
    """Accept [s, ...] or [[split, model, strategy], ...]; ints expand to triples."""
    if not isinstance(raw, list) or not raw:
        raise ValueError("seeds: must be a non-empty list")
    triples = []
    for entry in raw:
        if isinstance(entry, int):
            triples.append((entry, entry, entry))
        elif isinstance(entry, list) and len(entry) == 3 and all(isinstance(x, int) for x in entry):
            triples.append(tuple(entry))
        else:
            raise ValueError(f"seeds: each entry must be an int or [split, model, strategy], got {entry!r}")
    return triples


def _resolve_run_config(doc: dict) -> dict:
    """Validate the run-config JSON document and fill defaults."""
    if not isinstance(doc, dict):
        raise ValueError("config: top level must be a JSON object")
    unknown = sorted(set(doc) - _CONFIG_FIELDS)
    if unknown:
        raise ValueError(f"config: unknown fields {unknown}")
    for required in ("mode", "labels", "annotations", "embeddings"):
        if required not in doc:
            raise ValueError(f"{required}: missing required config field")
    labels = doc["labels"]
    if not isinstance(labels, list) or len(labels) < 2:
        raise ValueError("labels: must list at least two class names")
    resolved = {
        "mode": doc["mode"],
        "sample_strategy": doc.get("sample_strategy", "random"),
        "annotator_strategy": doc.get("annotator_strategy", "random"),
        "labels": [str(x) for x in labels],
        "annotations": str(doc["annotations"]),
        "embeddings": str(doc["embeddings"]),
        "texts": str(doc["texts"]) if doc.get("texts") else None,
        "num_iterations": int(doc.get("num_iterations", 10)),
        "epochs_per_round": int(doc.get("epochs_per_round", 20)),
        "max_epochs": int(doc.get("max_epochs", 50)),
        "warm_start": bool(doc.get("warm_start", True)),
        "batch_override": int(doc["batch_override"]) if doc.get("batch_override") else None,
        "learning_rate": float(doc.get("learning_rate", 1e-5)),
        "train_batch_size": int(doc.get("train_batch_size", 128)),
        "weight_decay": float(doc.get("weight_decay", 0.0)),
        "shuffle_seed": int(doc.get("shuffle_seed", 0)),
        "seeds": _parse_seed_triples(doc.get("seeds", [0, 1, 2])),
        "out_dir": str(doc.get("out_dir", "runs")),
    }
    _experiment_config(resolved, resolved["seeds"][0])  # surface field errors early
    return resolved


def _experiment_config(resolved: dict, seeds: tuple[int, int, int]) -> ExperimentConfig:
    try:
        train = TrainConfig(
            learning_rate=resolved["learning_rate"],
            epochs=resolved["epochs_per_round"],
            batch_size=resolved["train_batch_size"],
            weight_decay=resolved["weight_decay"],
            shuffle_seed=resolved["shuffle_seed"],
        )
    except ValueError as exc:
        raise ValueError(f"train config: {exc}") from None
    return ExperimentConfig(
        mode=resolved["mode"],
        sample_strategy=resolved["sample_strategy"],
        annotator_strategy=resolved["annotator_strategy"],
        num_iterations=resolved["num_iterations"],
        epochs_per_round=resolved["epochs_per_round"],
        max_epochs=resolved["max_epochs"],
        warm_start=resolved["warm_start"],
        batch_override=resolved["batch_override"],
        train=train,
        split_seed=seeds[0],
        model_seed=seeds[1],
        strategy_seed=seeds[2],
        label_names=tuple(resolved["labels"]),
        paths={"annotations": resolved["annotations"], "embeddings": resolved["embeddings"]},
    ).validate()


def _config_echo(resolved: dict) -> dict:
    echo = dict(resolved)
    echo["seeds"] = [list(s) for s in resolved["seeds"]]
    return echo


def _seed_worker(payload: tuple) -> dict:
    """Run one seed triple end to end and write its run directory."""
    resolved, seeds, run_dir = payload
    config = _experiment_config(resolved, seeds)
    label_space = LabelSpace(tuple(resolved["labels"]))
    corpus = load_corpus(resolved["annotations"], label_space, resolved["texts"])
    emb = load_embeddings(resolved["embeddings"], expected_ids=corpus.sample_ids())
    logs, selection = run_experiment(config, corpus, emb)
    split = split_corpus(corpus, config.split_seed)
    best_log = next(e for e in logs if e.iteration == selection.best_iteration)
    classifier = SoftLabelClassifier.from_checkpoint(best_log.checkpoint)
    test_report = evaluate_report(classifier, split.test_ids, corpus, emb)
    total = train_annotation_count(corpus, split)
    summary = {
        "mode": config.mode,
        "sample_strategy": config.sample_strategy,
        "annotator_strategy": config.annotator_strategy if config.mode == "acal" else None,
        "seeds": {"split": seeds[0], "model": seeds[1], "strategy": seeds[2]},
        "best_iteration": selection.best_iteration,
        "best_validation_js": selection.best_validation_js,
        "budget_at_best": selection.budget_at_best,
        "total_train_annotations": total,
        "delta_pct": budget_delta(selection.budget_at_best, total),
        "n_iterations_logged": len(logs),
        "test": test_report.to_dict(),
    }
    os.makedirs(run_dir, exist_ok=True)
    write_iteration_csv(logs, os.path.join(run_dir, "iterations.csv"))
    _write_json(os.path.join(run_dir, "checkpoint.json"), best_log.checkpoint)
    _write_json(os.path.join(run_dir, "summary.json"), summary)
    return summary


_AVERAGED_KEYS = ("best_iteration", "best_validation_js", "budget_at_best", "delta_pct")


def _averaged_summary(resolved: dict, summaries: list[dict], run_names: list[str]) -> dict:
    n = len(summaries)
    mean = lambda values: sum(values) / n
    return {
        "n_runs": n,
        "mode": resolved["mode"],
        "sample_strategy": resolved["sample_strategy"],
        "annotator_strategy": (
            resolved["annotator_strategy"] if resolved["mode"] == "acal" else None
        ),
        "test": {
            key: mean([s["test"][key] for s in summaries]) for key in summaries[0]["test"]
        },
        **{key: mean([s[key] for s in summaries]) for key in _AVERAGED_KEYS},
        "total_train_annotations": summaries[0]["total_train_annotations"],
        "runs": run_names,
        "config": _config_echo(resolved),
    }


def cmd_run(config_path, out_dir=None, seeds_override=None, jobs: int = 1) -> int:
    """Execute the configured experiment once per seed triple and average."""
    resolved = _resolve_run_config(_read_json(config_path))
    if seeds_override:
        resolved["seeds"] = seeds_override
    out = out_dir or resolved["out_dir"]
    os.makedirs(out, exist_ok=True)
    run_names = [f"run_{i:02d}" for i in range(len(resolved["seeds"]))]
    payloads = [
        (resolved, seeds, os.path.join(out, name))
        for name, seeds in zip(run_names, resolved["seeds"])
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_seed_worker, payloads))
    else:
        summaries = []
        for payload in payloads:
            summaries.append(_seed_worker(payload))
            print(f"finished {payload[2]}", file=sys.stderr)
    _write_json(os.path.join(out, "summary.json"), _averaged_summary(resolved, summaries, run_names))
    print(f"wrote {len(summaries)} runs + averaged summary under {out}", file=sys.stderr)
    return 0


def cmd_synth(spec_path, out_dir) -> int:
    """Generate a synthetic population and write its three data files."""
    doc = _read_json(spec_path)
    if not isinstance(doc, dict):
        raise ValueError("population spec: top level must be a JSON object")
    spec = PopulationSpec.from_dict(doc)
    corpus, emb, truth = generate_population(spec)
    paths = write_population(out_dir, corpus, emb, truth)
    print(
        f"wrote {corpus.n_annotations} annotations over {corpus.n_samples} samples"
        f" to {out_dir}",
        file=sys.stderr,
    )
    for p in sorted(paths.values()):
        print(p, file=sys.stderr)
    return 0


_REPORT_COLUMNS = ("strategy", "f1", "js", "f1_a", "js_a", "f1_w", "js_w", "delta_pct")


def _strategy_label(summary: dict) -> str:
    mode = summary.get("mode", "?")
    if mode == "acal":
        return f"acal:{summary.get('sample_strategy')}+{summary.get('annotator_strategy')}"
    if mode == "al_oracle":
        return f"al_oracle:{summary.get('sample_strategy')}"
    return str(mode)


def cmd_report(run_dirs, out_path=None) -> int:
    """Tabulate final test metrics and budget deltas across run directories."""
    if not run_dirs:
        raise ValueError("report: need at least one run directory")
    rows = []
    for d in run_dirs:
        summary_path = os.path.join(d, "summary.json")
        if not os.path.exists(summary_path):
            raise ValueError(f"{d}: no summary.json (not a completed run directory)")
        summary = _read_json(summary_path)
        if "test" not in summary or "delta_pct" not in summary:
            raise ValueError(f"{summary_path}: missing test metrics")
        rows.append(
            [_strategy_label(summary)]
            + [f"{summary['test'][k]:.4f}" for k in ("f1", "js", "f1_a", "js_a", "f1_w", "js_w")]
            + [f"{summary['delta_pct']:.1f}"]
        )
    widths = [
        max(len(_REPORT_COLUMNS[c]), max(len(r[c]) for r in rows))
        for c in range(len(_REPORT_COLUMNS))
    ]
    header = "  ".join(name.ljust(widths[i]) for i, name in enumerate(_REPORT_COLUMNS))
    print(header)
    print("  ".join("-" * w for w in widths))
    for r in rows:
        print("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)))
    csv_lines = [",".join(_REPORT_COLUMNS)] + [",".join(r) for r in rows]
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(csv_lines) + "\n")
    else:
        print()
        print("\n".join(csv_lines))
    return 0


def _parse_seeds_flag(text: str) -> list[tuple[int, int, int]]:
    try:
        return _parse_seed_triples([int(x) for x in text.split(",") if x.strip() != ""])
    except ValueError as exc:
        raise ValueError(f"--seeds: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdal",
        description="Annotator-centric active-learning experiments on crowd-annotated data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured experiment across seeds")
    p_run.add_argument("--config", required=True, help="experiment config JSON")
    p_run.add_argument("--out", default=None, help="output directory (default: config out_dir)")
    p_run.add_argument("--seeds", default=None, help="comma-separated seed list overriding the config")
    p_run.add_argument("--jobs", type=int, default=1, help="parallel seed runs")

    p_synth = sub.add_parser("synth", help="generate a synthetic population")
    p_synth.add_argument("--config", required=True, help="population spec JSON")
    p_synth.add_argument("--out", required=True, help="output directory")

    p_report = sub.add_parser("report", help="tabulate completed runs")
    p_report.add_argument("dirs", nargs="+", help="run directories with summary.json")
    p_report.add_argument("--out", default=None, help="write the CSV table here")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            seeds = _parse_seeds_flag(args.seeds) if args.seeds else None
            return cmd_run(args.config, args.out, seeds, jobs=max(1, args.jobs))
        if args.command == "synth":
            return cmd_synth(args.config, args.out)
        return cmd_report(args.dirs, args.out)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
