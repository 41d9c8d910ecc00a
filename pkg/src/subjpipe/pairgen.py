"""Contrastive training pairs with blended similarity targets.

The target of a pair mixes two equally weighted components: the cosine
similarity of the stored embeddings and a same-class indicator.  With the
default weight 0.5 the target is 0.5*cos(a, b) + 0.5*[class(a) == class(b)].
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import LabeledDataset, stratified_sample
from .embedstore import EmbeddingMatrix, aligned_rows
from .errors import DomainError, ParseError, ValidationError

PAIRS_HEADER = ("id_a", "id_b", "target")


@dataclass(frozen=True)
class PairExample:
    id_a: str
    id_b: str
    target: float

    def __post_init__(self):
        if self.id_a == self.id_b:
            raise ValidationError(f"self-pair on id {self.id_a!r}")
        # w*cos + (1-w)*indicator with w in [0, 1] always lands in [-1, 1];
        # at the default w = 0.5 the attainable range is [-0.5, 1.0]
        if not -1.0 - 1e-9 <= self.target <= 1.0 + 1e-9:
            raise ValidationError(f"pair target {self.target} outside [-1, 1]")


@dataclass(frozen=True)
class PairGenConfig:
    n_per_class: int
    similarity_weight: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_per_class <= 0:
            raise DomainError("n_per_class must be positive")
        if not 0.0 <= self.similarity_weight <= 1.0:
            raise DomainError("similarity_weight must lie in [0, 1]")

    @property
    def label_weight(self) -> float:
        return 1.0 - self.similarity_weight


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DomainError("cosine undefined for a zero-norm vector")
    return float(a @ b / (na * nb))


def similarity_label(original_similarity: float, same_class: bool, cfg: PairGenConfig) -> float:
    if not -1.0 - 1e-12 <= original_similarity <= 1.0 + 1e-12:
        raise DomainError(f"similarity {original_similarity} outside [-1, 1]")
    return cfg.similarity_weight * original_similarity + cfg.label_weight * (1.0 if same_class else 0.0)


def generate_pairs(ds: LabeledDataset, m: EmbeddingMatrix, cfg: PairGenConfig) -> list[PairExample]:
    """All ordered pairs over a stratified 2N sample: exactly 2N(2N-1) pairs.

    Both directions (a, b) and (b, a) are emitted; cosine symmetry makes
    their targets equal.  Deterministic for a given seed.
    """
    sample = stratified_sample(ds, cfg.n_per_class, cfg.seed)
    rows = aligned_rows(sample, m)
    labels = [s.label for s in sample]
    ids = sample.ids
    pairs = []
    for i in range(len(sample)):
        for j in range(len(sample)):
            if i == j:
                continue
            sim = cosine(rows[i], rows[j])
            target = similarity_label(sim, labels[i] is labels[j], cfg)
            pairs.append(PairExample(id_a=ids[i], id_b=ids[j], target=target))
    return pairs


def write_pairs(pairs: list[PairExample]) -> str:
    lines = ["\t".join(PAIRS_HEADER)]
    lines.extend(f"{p.id_a}\t{p.id_b}\t{p.target:.6f}" for p in pairs)
    return "\n".join(lines) + "\n"


def read_pairs(raw: bytes | str) -> list[PairExample]:
    text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    lines = text.splitlines()
    if not lines or tuple(lines[0].split("\t")) != PAIRS_HEADER:
        raise ParseError("expected header id_a<TAB>id_b<TAB>target", line=1)
    pairs = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 fields, got {len(fields)}", line=lineno)
        try:
            target = float(fields[2])
        except ValueError:
            raise ParseError(f"bad target {fields[2]!r}", line=lineno)
        pairs.append(PairExample(id_a=fields[0], id_b=fields[1], target=target))
    return pairs
