"""Turn raw-text corpora into the embeddings CSV consumed by annotation experiments."""

from .encoders import DEFAULT_MODEL, HashingEncoder, SentenceTransformerEncoder, get_encoder
from .prep import encode_corpus, verify_embeddings

__all__ = [
    "DEFAULT_MODEL",
    "HashingEncoder",
    "SentenceTransformerEncoder",
    "encode_corpus",
    "get_encoder",
    "verify_embeddings",
]
