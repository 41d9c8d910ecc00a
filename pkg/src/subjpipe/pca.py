"""Principal component analysis for embedding dimensionality reduction.

sklearn-style transformer: fit on the training split only, then transform
every split with the fitted model.  Components follow a fixed sign
convention (largest-magnitude entry positive) so fits are reproducible.
"""
from __future__ import annotations

import struct

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .embedstore import EmbeddingMatrix
from .errors import DomainError, FormatError, TruncationError

MAGIC = b"SPCA"
VERSION = 1


class PcaReducer(BaseEstimator, TransformerMixin):
    """Project centered data onto its top principal axes.

    Parameters
    ----------
    n_components : int
        Number of axes kept; must satisfy n_components <= min(n - 1, d).

    Attributes
    ----------
    mean_ : (d,) column means of the training data.
    components_ : (k, d) orthonormal principal axes, variance-sorted.
    explained_variance_ : (k,) sample variances along each axis (n - 1
        denominator), non-increasing.
    total_variance_ : total sample variance of the training data.
    """

    def __init__(self, n_components: int = 110):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise DomainError(f"expected a 2-D matrix, got shape {X.shape}")
        n, d = X.shape
        if n < 2:
            raise DomainError("need at least 2 rows to fit")
        k = self.n_components
        if not 1 <= k <= min(n - 1, d):
            raise DomainError(f"n_components={k} outside [1, min(n-1, d)={min(n - 1, d)}]")
        self.mean_ = X.mean(axis=0)
        centered = X - self.mean_
        _, s, vt = np.linalg.svd(centered, full_matrices=False)
        components = vt[:k]
        # sign convention: largest-magnitude entry of each axis is positive
        for row in components:
            pivot = np.argmax(np.abs(row))
            if row[pivot] < 0:
                row *= -1.0
        self.components_ = components
        self.explained_variance_ = s[:k] ** 2 / (n - 1)
        self.total_variance_ = float(np.sum(s**2) / (n - 1))
        return self

    def _check_fitted(self):
        if not hasattr(self, "components_"):
            raise DomainError("PcaReducer is not fitted")

    def transform(self, X):
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.components_.shape[1]:
            raise DomainError(f"expected shape (*, {self.components_.shape[1]}), got {X.shape}")
        return (X - self.mean_) @ self.components_.T

    def inverse_transform(self, X):
        self._check_fitted()
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.components_.shape[0]:
            raise DomainError(f"expected shape (*, {self.components_.shape[0]}), got {X.shape}")
        return X @ self.components_ + self.mean_

    def explained_variance_ratio(self) -> float:
        self._check_fitted()
        if self.total_variance_ == 0.0:
            raise DomainError("explained variance ratio undefined for constant data")
        return float(np.sum(self.explained_variance_) / self.total_variance_)

    def transform_embeddings(self, m: EmbeddingMatrix) -> EmbeddingMatrix:
        """Reduce an embedding matrix, preserving ids."""
        reduced = self.transform(m.rows.astype(np.float64))
        return EmbeddingMatrix(ids=m.ids, rows=reduced.astype(np.float32))


def save_pca(model: PcaReducer) -> bytes:
    model._check_fitted()
    k, d = model.components_.shape
    out = bytearray()
    out += MAGIC
    out.append(VERSION)
    out += struct.pack("<II", k, d)
    out += np.ascontiguousarray(model.mean_, dtype="<f4").tobytes()
    out += np.ascontiguousarray(model.components_, dtype="<f4").tobytes()
    out += np.ascontiguousarray(model.explained_variance_, dtype="<f4").tobytes()
    out += struct.pack("<f", model.total_variance_)
    return bytes(out)


def load_pca(raw: bytes) -> PcaReducer:
    if raw[:4] != MAGIC:
        raise FormatError(f"bad magic {raw[:4]!r}, expected {MAGIC!r}")
    if raw[4] != VERSION:
        raise FormatError(f"unsupported version {raw[4]}")
    k, d = struct.unpack_from("<II", raw, 5)
    need = 13 + 4 * (d + k * d + k + 1)
    if len(raw) < need:
        raise TruncationError(f"container needs {need} bytes, got {len(raw)}")
    offset = 13
    mean = np.frombuffer(raw, dtype="<f4", count=d, offset=offset).astype(np.float64)
    offset += 4 * d
    components = (
        np.frombuffer(raw, dtype="<f4", count=k * d, offset=offset).astype(np.float64).reshape(k, d)
    )
    offset += 4 * k * d
    variances = np.frombuffer(raw, dtype="<f4", count=k, offset=offset).astype(np.float64)
    offset += 4 * k
    (total,) = struct.unpack_from("<f", raw, offset)
    model = PcaReducer(n_components=k)
    model.mean_ = mean
    model.components_ = components
    model.explained_variance_ = variances
    model.total_variance_ = float(total)
    return model
