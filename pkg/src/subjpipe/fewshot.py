"""Dual-stage few-shot training over frozen embeddings.

Stage 1 fits a linear adapter by full-batch descent on a cosine-similarity
regression loss over generated contrastive pairs (the classification head
does not exist yet).  Stage 2 trains the elastic-net head on the adapted
embeddings while the adapter stays frozen.  A single-stage regime skips
stage 1 (identity adapter).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .corpus import LabeledDataset, stratified_sample
from .embedstore import EmbeddingMatrix, aligned_rows
from .errors import DomainError, FormatError, TrainingError, TruncationError
from .glmnet import ElasticNetLogistic, TrainConfig, fit_saga
from .pairgen import PairExample, PairGenConfig, generate_pairs

MAGIC = b"SADP"
VERSION = 1


class Regime(Enum):
    SINGLE_STAGE = "single_stage"
    DUAL_STAGE = "dual_stage"


@dataclass(frozen=True)
class AdapterModel:
    matrix: np.ndarray  # (d, d)
    trained_epochs: int = 0
    final_loss: float = 0.0

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DomainError(f"adapter matrix must be square, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise DomainError("adapter matrix contains non-finite values")
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "AdapterModel":
        return cls(matrix=np.eye(dim))


@dataclass(frozen=True)
class FewShotConfig:
    n_per_class: int
    regime: Regime = Regime.DUAL_STAGE
    adapter_epochs: int = 50
    learning_rate: float = 1e-2
    seed: int = 0
    head_config: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.n_per_class <= 0:
            raise DomainError("n_per_class must be positive")
        if self.adapter_epochs <= 0 or self.learning_rate <= 0:
            raise DomainError("adapter_epochs and learning_rate must be positive")


def adapter_forward(a: AdapterModel, e: np.ndarray) -> np.ndarray:
    e = np.asarray(e, dtype=np.float64)
    if e.shape[-1] != a.dim:
        raise DomainError(f"expected dimension {a.dim}, got {e.shape[-1]}")
    return e @ a.matrix.T


def _pair_arrays(pairs: list[PairExample], m: EmbeddingMatrix):
    index = m.row_index()
    ia = [index[p.id_a] for p in pairs]
    ib = [index[p.id_b] for p in pairs]
    rows = m.rows.astype(np.float64)
    targets = np.array([p.target for p in pairs])
    return rows[ia], rows[ib], targets


def _cosine_residuals(a: AdapterModel, ea, eb, targets):
    u = ea @ a.matrix.T
    v = eb @ a.matrix.T
    nu = np.linalg.norm(u, axis=1)
    nv = np.linalg.norm(v, axis=1)
    if np.any(nu == 0.0) or np.any(nv == 0.0):
        raise DomainError("adapted embedding with zero norm")
    cos = np.sum(u * v, axis=1) / (nu * nv)
    return u, v, nu, nv, cos, cos - targets


def pair_loss(a: AdapterModel, pairs: list[PairExample], m: EmbeddingMatrix) -> float:
    """Mean squared error between adapted cosines and pair targets."""
    ea, eb, targets = _pair_arrays(pairs, m)
    *_, residuals = _cosine_residuals(a, ea, eb, targets)
    return float(np.mean(residuals**2))


def pair_loss_gradient(a: AdapterModel, pairs: list[PairExample], m: EmbeddingMatrix) -> np.ndarray:
    """Exact gradient of pair_loss with respect to the adapter matrix.

    Uses the cosine quotient rule: with u = A e_a and v = A e_b,
    d cos/du = v / (|u||v|) - cos * u / |u|^2, and symmetrically for v.
    """
    ea, eb, targets = _pair_arrays(pairs, m)
    u, v, nu, nv, cos, residuals = _cosine_residuals(a, ea, eb, targets)
    inv = 1.0 / (nu * nv)
    gu = v * inv[:, None] - u * (cos / nu**2)[:, None]
    gv = u * inv[:, None] - v * (cos / nv**2)[:, None]
    scale = 2.0 * residuals / len(targets)
    return (gu * scale[:, None]).T @ ea + (gv * scale[:, None]).T @ eb


def train_adapter(ds: LabeledDataset, m: EmbeddingMatrix, cfg: FewShotConfig) -> AdapterModel:
    """Full-batch descent from identity with a step-halving safeguard.

    The loss sequence is non-increasing by construction: any step that
    would increase the loss is retried at half the rate until it does not.
    """
    pairs = generate_pairs(ds, m, PairGenConfig(n_per_class=cfg.n_per_class, seed=cfg.seed))
    ea, eb, targets = _pair_arrays(pairs, m)
    matrix = np.eye(m.dim)
    lr = cfg.learning_rate
    adapter = AdapterModel(matrix=matrix)
    loss = pair_loss(adapter, pairs, m)
    epochs_done = 0
    for _ in range(cfg.adapter_epochs):
        grad = pair_loss_gradient(adapter, pairs, m)
        while True:
            candidate = AdapterModel(matrix=adapter.matrix - lr * grad)
            new_loss = pair_loss(candidate, pairs, m)
            if not np.isfinite(new_loss):
                raise TrainingError("adapter training diverged (non-finite loss)")
            if new_loss <= loss:
                break
            lr /= 2.0
            if lr < 1e-18:
                candidate, new_loss = adapter, loss
                break
        adapter, loss = candidate, new_loss
        epochs_done += 1
    return AdapterModel(matrix=adapter.matrix, trained_epochs=epochs_done, final_loss=loss)


def train_fewshot(
    ds: LabeledDataset, m: EmbeddingMatrix, cfg: FewShotConfig
) -> tuple[AdapterModel, ElasticNetLogistic]:
    """Run the configured regime; the head never updates the adapter."""
    subset = stratified_sample(ds, cfg.n_per_class, cfg.seed)
    if cfg.regime is Regime.DUAL_STAGE:
        adapter = train_adapter(ds, m, cfg)
    else:
        adapter = AdapterModel.identity(m.dim)
    features = adapter_forward(adapter, aligned_rows(subset, m))
    head = fit_saga(features, [s.label for s in subset], cfg.head_config)
    return adapter, head


def save_adapter(a: AdapterModel) -> bytes:
    out = bytearray()
    out += MAGIC
    out.append(VERSION)
    out += struct.pack("<I", a.dim)
    out += np.ascontiguousarray(a.matrix, dtype="<f8").tobytes()
    return bytes(out)


def load_adapter(raw: bytes) -> AdapterModel:
    if raw[:4] != MAGIC:
        raise FormatError(f"bad magic {raw[:4]!r}, expected {MAGIC!r}")
    if raw[4] != VERSION:
        raise FormatError(f"unsupported version {raw[4]}")
    (d,) = struct.unpack_from("<I", raw, 5)
    need = 9 + 8 * d * d
    if len(raw) < need:
        raise TruncationError(f"container needs {need} bytes, got {len(raw)}")
    matrix = np.frombuffer(raw, dtype="<f8", count=d * d, offset=9).reshape(d, d).copy()
    return AdapterModel(matrix=matrix)
