"""Sentence encoder registry: a real transformer backend and an offline stand-in."""

from __future__ import annotations

import hashlib
import re

import numpy as np

DEFAULT_MODEL = "sentence-transformers/all-MiniLM-L6-v2"

_TOKEN = re.compile(r"[a-z0-9]+")


class HashingEncoder:
    """Deterministic bag-of-tokens encoder with no model files.

    Each token is hashed into one of ``dim`` signed buckets and the result
    is L2-normalized, so identical strings always map to identical vectors.
    Useful for tests and air-gapped runs; not a semantic embedding.
    """

    def __init__(self, dim: int) -> None:
        if dim < 1:
            raise ValueError("hashing encoder dimension must be >= 1")
        self.dim = int(dim)

    def _one(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in _TOKEN.findall(text.lower()):
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=5).digest()
            bucket = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] & 1 else -1.0
            vec[bucket] += sign
        norm = float(np.linalg.norm(vec))
        return vec / norm if norm > 0 else vec

    def encode(self, texts, batch_size: int = 64) -> np.ndarray:
        return np.stack([self._one(t) for t in texts]) if texts else np.zeros((0, self.dim))


class SentenceTransformerEncoder:
    """Thin wrapper over ``sentence_transformers`` models."""

    def __init__(self, model_name: str) -> None:
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise RuntimeError(
                f"cannot load encoder {model_name!r}: sentence-transformers is not installed "
                "(pip install 'embed_prep[model]')"
            ) from exc
        try:
            self.model = SentenceTransformer(model_name)
        except Exception as exc:
            raise RuntimeError(f"cannot load encoder {model_name!r}: {exc}") from exc

    def encode(self, texts, batch_size: int = 64) -> np.ndarray:
        return np.asarray(
            self.model.encode(
                list(texts),
                batch_size=batch_size,
                show_progress_bar=False,
                convert_to_numpy=True,
            ),
            dtype=np.float64,
        )


def get_encoder(model_name: str):
    """Resolve an encoder by name.

    ``hashing:<dim>`` selects the offline hashing encoder; anything else is
    treated as a sentence-transformers model name.
    """
    if model_name.startswith("hashing:"):
        spec = model_name.split(":", 1)[1]
        try:
            dim = int(spec)
        except ValueError:
            raise RuntimeError(
                f"cannot load encoder {model_name!r}: expected hashing:<positive integer>"
            ) from None
        if dim < 1:
            raise RuntimeError(
                f"cannot load encoder {model_name!r}: expected hashing:<positive integer>"
            )
        return HashingEncoder(dim)
    return SentenceTransformerEncoder(model_name)
