"""Encode a texts file into the embeddings CSV format, and validate such CSVs."""

from __future__ import annotations

import csv
import json
import math
import os
import sys
import tempfile

import numpy as np

from .encoders import DEFAULT_MODEL, get_encoder


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _read_texts(texts_path) -> list[tuple[str, str]]:
    """Parse a JSON-lines texts file into ordered (sample_id, text) pairs."""
    rows: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(texts_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: not valid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or "sample_id" not in obj or "text" not in obj:
                raise ValueError(
                    f'line {lineno}: expected an object with "sample_id" and "text"'
                )
            sid, text = str(obj["sample_id"]), obj["text"]
            if not isinstance(text, str):
                raise ValueError(f"line {lineno}: text must be a string")
            if not sid:
                raise ValueError(f"line {lineno}: sample_id must be non-empty")
            if sid in seen:
                raise ValueError(f"line {lineno}: duplicate sample_id {sid!r}")
            seen.add(sid)
            rows.append((sid, text))
    if not rows:
        raise ValueError("texts file has no records")
    return rows


def encode_corpus(
    texts_path, out_path, model_name: str = DEFAULT_MODEL, batch_size: int = 64
) -> int:
    """Embed every line of a texts file and write the embeddings CSV.

    Returns a process exit code: 0 on success, 1 on I/O failure, 2 on bad
    input or an unavailable encoder. The output is written atomically, so a
    failed run never leaves a partial CSV behind.
    """
    if batch_size < 1:
        return _fail("batch size must be >= 1")
    try:
        rows = _read_texts(texts_path)
    except OSError as exc:
        print(f"error: cannot read {texts_path}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        return _fail(f"{texts_path}: {exc}")

    try:
        encoder = get_encoder(model_name)
    except RuntimeError as exc:
        return _fail(str(exc))

    vectors = np.asarray(encoder.encode([text for _, text in rows], batch_size=batch_size))
    if vectors.ndim != 2 or vectors.shape[0] != len(rows):
        return _fail(
            f"encoder {model_name!r} returned shape {vectors.shape}, "
            f"expected ({len(rows)}, dim)"
        )
    if not np.all(np.isfinite(vectors)):
        return _fail(f"encoder {model_name!r} produced non-finite values")

    dim = vectors.shape[1]
    out_dir = os.path.dirname(os.path.abspath(out_path))
    try:
        os.makedirs(out_dir, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=out_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["sample_id"] + [f"v{i}" for i in range(dim)])
                for (sid, _), vec in zip(rows, vectors):
                    writer.writerow([sid] + [repr(float(x)) for x in vec])
            os.replace(tmp_path, out_path)
        except BaseException:
            os.unlink(tmp_path)
            raise
    except OSError as exc:
        print(f"error: cannot write {out_path}: {exc}", file=sys.stderr)
        return 1
    print(f"encoded {len(rows)} texts -> {out_path} (dim={dim})")
    return 0


def verify_embeddings(csv_path) -> int:
    """Check an embeddings CSV: header shape, row widths, finite floats, unique ids.

    Returns 0 and prints the dimension and row count when the file is
    well-formed; otherwise prints the first violation (with its line number)
    and returns nonzero.
    """
    try:
        fh = open(csv_path, newline="", encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {csv_path}: {exc}", file=sys.stderr)
        return 1
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return _fail(f"{csv_path}: empty file, expected a header row")
        if len(header) < 2 or header[0] != "sample_id":
            return _fail(
                f"{csv_path}: line 1: header must be sample_id followed by "
                f"at least one vector column"
            )
        dim = len(header) - 1
        seen: set[str] = set()
        n_rows = 0
        for lineno, row in enumerate(reader, start=2):
            if len(row) != dim + 1:
                return _fail(
                    f"{csv_path}: line {lineno}: expected {dim + 1} fields, got {len(row)}"
                )
            sid = row[0]
            if not sid:
                return _fail(f"{csv_path}: line {lineno}: empty sample_id")
            if sid in seen:
                return _fail(f"{csv_path}: line {lineno}: duplicate sample_id {sid!r}")
            seen.add(sid)
            for name, cell in zip(header[1:], row[1:]):
                try:
                    value = float(cell)
                except ValueError:
                    return _fail(
                        f"{csv_path}: line {lineno}: column {name}: "
                        f"not a number ({cell!r})"
                    )
                if not math.isfinite(value):
                    return _fail(
                        f"{csv_path}: line {lineno}: column {name}: non-finite value"
                    )
            n_rows += 1
    print(f"ok: {n_rows} rows, dim={dim}")
    return 0
