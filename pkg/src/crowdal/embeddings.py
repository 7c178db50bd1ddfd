"""Sample embeddings, similarity helpers, annotator representations, and PCA."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .corpus import LabelSpace


class EmbeddingMatrix:
    """Fixed-dimension embedding vectors keyed by sample id."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        if not vectors:
            raise ValueError("embedding matrix needs at least one vector")
        ids = sorted(vectors)
        dims = {np.asarray(v).shape for v in vectors.values()}
        if len(dims) != 1 or len(next(iter(dims))) != 1:
            raise ValueError(f"inconsistent embedding shapes: {sorted(dims)}")
        self.ids: tuple[str, ...] = tuple(ids)
        self._index = {sid: i for i, sid in enumerate(ids)}
        self._data = np.stack([np.asarray(vectors[sid], dtype=np.float64) for sid in ids])
        if not np.all(np.isfinite(self._data)):
            raise ValueError("embeddings contain non-finite values")

    @property
    def dim(self) -> int:
        return self._data.shape[1]

    def __contains__(self, sample_id: str) -> bool:
        return sample_id in self._index

    def vector(self, sample_id: str) -> np.ndarray:
        try:
            return self._data[self._index[sample_id]]
        except KeyError:
            raise KeyError(f"no embedding for sample {sample_id!r}") from None

    def matrix(self, sample_ids) -> np.ndarray:
        """Rows for the given ids, in the given order, shape (len(ids), dim)."""
        rows = [self._index[sid] for sid in sample_ids]
        return self._data[rows]


def load_embeddings(path, expected_ids=None) -> EmbeddingMatrix:
    """Load an embeddings CSV with header ``sample_id,v0,...,v{d-1}``.

    Every id in ``expected_ids`` must be present; extra rows are allowed.
    Rejects duplicate ids, dimension mismatches, and non-finite values.
    """
    vectors: dict[str, np.ndarray] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0].strip() != "sample_id" or len(header) < 2:
            raise ValueError(f"{path}: expected header sample_id,v0,...,v{{d-1}}")
        dim = len(header) - 1
        expected_cols = [f"v{i}" for i in range(dim)]
        if [h.strip() for h in header[1:]] != expected_cols:
            raise ValueError(f"{path}: vector columns must be v0..v{dim - 1} in order")
        for lineno, row in enumerate(reader, 2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != dim + 1:
                raise ValueError(
                    f"{path}:{lineno}: expected {dim + 1} fields, got {len(row)}"
                )
            sid = row[0].strip()
            if sid in vectors:
                raise ValueError(f"{path}:{lineno}: duplicate sample_id {sid!r}")
            try:
                vec = np.array([float(x) for x in row[1:]], dtype=np.float64)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-numeric vector component") from None
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"{path}:{lineno}: non-finite vector component")
            vectors[sid] = vec
    if not vectors:
        raise ValueError(f"{path}: no embedding rows found")
    if expected_ids is not None:
        missing = sorted(set(expected_ids) - set(vectors))
        if missing:
            raise ValueError(f"{path}: missing embeddings for {missing[:5]}")
    return EmbeddingMatrix(vectors)


def write_embeddings(path, vectors: dict[str, np.ndarray]) -> None:
    """Write vectors as an embeddings CSV (ids sorted, full float precision)."""
    ids = sorted(vectors)
    if not ids:
        raise ValueError("nothing to write")
    dim = len(np.asarray(vectors[ids[0]]))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id"] + [f"v{i}" for i in range(dim)])
        for sid in ids:
            vec = np.asarray(vectors[sid], dtype=np.float64)
            if vec.shape != (dim,):
                raise ValueError(f"vector for {sid!r} has shape {vec.shape}, expected ({dim},)")
            writer.writerow([sid] + [repr(float(x)) for x in vec])


def cosine_similarity(u, v) -> float:
    """Cosine similarity in [-1, 1]; defined as 0.0 when either norm is 0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def cosine_to_many(matrix: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Cosine of each matrix row against ``v`` (zero-norm pairs give 0.0)."""
    matrix = np.asarray(matrix, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    norms = np.sqrt(np.einsum("ij,ij->i", matrix, matrix))
    nv = float(np.linalg.norm(v))
    out = np.zeros(matrix.shape[0], dtype=np.float64)
    if nv == 0.0:
        return out
    ok = norms > 0.0
    out[ok] = (matrix[ok] @ v) / (norms[ok] * nv)
    return out


def mean_similarity_to_history(sample_id: str, history_sample_ids, emb: EmbeddingMatrix) -> float:
    """Mean cosine similarity between one sample and an annotator's history.

    The history is canonicalised by sorting and the mean uses exact
    summation, so annotators whose histories hold the same samples get
    bitwise-identical scores no matter the order the annotations arrived in.
    """
    history = sorted(history_sample_ids)
    if not history:
        raise ValueError("history is empty")
    sims = cosine_to_many(emb.matrix(history), emb.vector(sample_id))
    return math.fsum(sims.tolist()) / len(history)


@dataclass(frozen=True)
class AnnotatorRepresentation:
    """Mean of [embedding ; one-hot(label)] over an annotator's consumed annotations."""

    annotator_id: str
    vector: np.ndarray
    history_size: int


def annotator_representation(
    annotator_id: str,
    consumed,
    emb: EmbeddingMatrix,
    label_space: LabelSpace,
) -> AnnotatorRepresentation:
    """Build an annotator's representation from (sample_id, label) pairs.

    Each consumed annotation contributes the sample embedding concatenated
    with the one-hot of the label the annotator gave; the representation is
    the mean of those rows (canonically ordered, like the history mean).
    """
    pairs = sorted((str(sid), int(lbl)) for sid, lbl in consumed)
    if not pairs:
        raise ValueError(f"annotator {annotator_id!r} has no consumed annotations")
    rows = np.empty((len(pairs), emb.dim + label_space.num_classes), dtype=np.float64)
    for i, (sid, lbl) in enumerate(pairs):
        rows[i, : emb.dim] = emb.vector(sid)
        rows[i, emb.dim :] = label_space.one_hot(lbl)
    return AnnotatorRepresentation(annotator_id, rows.mean(axis=0), len(pairs))


class PrincipalComponents(TransformerMixin, BaseEstimator):
    """PCA via eigendecomposition of the sample covariance matrix.

    Keeps at most ``n_components`` directions, ordered by decreasing
    eigenvalue, and never more than the effective rank of the centred data
    (eigenvalues below ``rank_tol`` times the largest are treated as zero).
    Component signs follow the convention that the first coordinate with
    magnitude above ``rank_tol`` is positive, so fits are reproducible.
    """

    def __init__(self, n_components: int = 10, rank_tol: float = 1e-9):
        self.n_components = n_components
        self.rank_tol = rank_tol

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {X.shape}")
        if X.shape[0] < 2:
            raise ValueError("need at least 2 rows to fit")
        if not np.all(np.isfinite(X)):
            raise ValueError("input contains non-finite values")
        if self.n_components < 1:
            raise ValueError("n_components must be >= 1")
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        cov = (centered.T @ centered) / (X.shape[0] - 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        eigvals = eigvals[::-1]
        eigvecs = eigvecs[:, ::-1]
        cutoff = self.rank_tol * max(eigvals[0], 0.0)
        rank = int(np.sum(eigvals > max(cutoff, 0.0)))
        k = min(self.n_components, rank)
        components = eigvecs[:, :k].T.copy()
        for row in components:
            nz = np.flatnonzero(np.abs(row) > self.rank_tol)
            if nz.size and row[nz[0]] < 0:
                row *= -1.0
        self.components_ = components
        self.explained_variance_ = eigvals[:k].copy()
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "components_"):
            raise NotFittedError("fit must be called before transform")
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        projected = (X - self.mean_) @ self.components_.T
        return projected[0] if single else projected
