"""Command line entry points: encode a texts file, verify an embeddings CSV."""

from __future__ import annotations

import argparse

from .encoders import DEFAULT_MODEL
from .prep import encode_corpus, verify_embeddings


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-prep",
        description="convert raw-text corpora into embedding CSVs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_encode = sub.add_parser("encode", help="embed a JSON-lines texts file")
    p_encode.add_argument("--in", dest="texts", required=True, help="texts.jsonl input")
    p_encode.add_argument("--out", required=True, help="embeddings CSV output")
    p_encode.add_argument(
        "--model",
        default=DEFAULT_MODEL,
        help=f"encoder name (default: {DEFAULT_MODEL}; hashing:<dim> runs offline)",
    )
    p_encode.add_argument("--batch", type=int, default=64, help="encoder batch size")

    p_verify = sub.add_parser("verify", help="validate an embeddings CSV")
    p_verify.add_argument("--in", dest="csv_path", required=True, help="embeddings CSV")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "encode":
        return encode_corpus(args.texts, args.out, args.model, args.batch)
    return verify_embeddings(args.csv_path)


if __name__ == "__main__":
    raise SystemExit(main())
