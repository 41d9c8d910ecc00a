"""Shared builders for synthetic datasets and embeddings."""
from __future__ import annotations

import numpy as np

from subjpipe.corpus import Label, LabeledDataset, Sentence, Split
from subjpipe.embedstore import EmbeddingMatrix


def make_dataset(n_subj, n_obj, name="synthetic", split=Split.TRAIN, prefix="s"):
    sentences = []
    for i in range(n_subj):
        sentences.append(Sentence(id=f"{prefix}{i}", text=f"subjective sample {i}", label=Label.SUBJ))
    for i in range(n_obj):
        sentences.append(Sentence(id=f"{prefix}o{i}", text=f"objective sample {i}", label=Label.OBJ))
    return LabeledDataset(name=name, split=split, sentences=tuple(sentences))


def make_embeddings(ids, dim, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingMatrix(ids=tuple(ids), rows=rng.normal(size=(len(ids), dim)).astype(np.float32))


def two_cluster_corpus(n_per_class, dim, seed=0, separation=4.0, name="clusters", split=Split.TRAIN, prefix="c"):
    """Linearly separable SUBJ/OBJ clusters around +/- separation/2 * e1."""
    rng = np.random.default_rng(seed)
    sentences = []
    rows = []
    center = np.zeros(dim)
    center[0] = separation / 2.0
    for i in range(n_per_class):
        sentences.append(Sentence(id=f"{prefix}s{i}", text=f"cluster subj {i}", label=Label.SUBJ))
        rows.append(center + rng.normal(scale=0.5, size=dim))
    for i in range(n_per_class):
        sentences.append(Sentence(id=f"{prefix}o{i}", text=f"cluster obj {i}", label=Label.OBJ))
        rows.append(-center + rng.normal(scale=0.5, size=dim))
    ds = LabeledDataset(name=name, split=split, sentences=tuple(sentences))
    m = EmbeddingMatrix(ids=tuple(s.id for s in sentences), rows=np.array(rows, dtype=np.float32))
    return ds, m
