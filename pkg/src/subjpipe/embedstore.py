"""Id-aligned embedding matrices and their binary container format.

The on-disk format ("SEMB", version 1) is the boundary between the external
neural encoder and the numerical pipeline:

    magic   4 bytes  b"SEMB"
    version 1 byte   0x01
    n       u32 LE   row count
    d       u32 LE   embedding dimension
    ids     n records: u16 LE byte-length + UTF-8 bytes
    rows    n*d IEEE-754 binary32 LE, row-major

No padding, no checksum.  Storage is float32; downstream math promotes to
float64.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .corpus import LabeledDataset
from .errors import AlignmentError, DomainError, FormatError, TruncationError, ValidationError

MAGIC = b"SEMB"
VERSION = 1


@dataclass(frozen=True)
class EmbeddingMatrix:
    ids: tuple[str, ...]
    rows: np.ndarray  # (n, d) float32

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        rows = np.asarray(self.rows, dtype=np.float32)
        if rows.ndim != 2:
            raise ValidationError(f"rows must be 2-D, got shape {rows.shape}")
        object.__setattr__(self, "rows", rows)
        if len(self.ids) != rows.shape[0]:
            raise ValidationError(f"{len(self.ids)} ids but {rows.shape[0]} rows")
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("duplicate ids in embedding matrix")
        if any(not i for i in self.ids):
            raise ValidationError("empty id in embedding matrix")
        if rows.shape[1] == 0:
            raise ValidationError("embedding dimension must be positive")
        if not np.all(np.isfinite(rows)):
            raise ValidationError("embedding matrix contains non-finite values")

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    def __len__(self) -> int:
        return self.rows.shape[0]

    def row_index(self) -> dict[str, int]:
        return {sid: i for i, sid in enumerate(self.ids)}


def write_embeddings(m: EmbeddingMatrix) -> bytes:
    """Deterministic, bit-exact encoding of a valid matrix."""
    out = bytearray()
    out += MAGIC
    out.append(VERSION)
    out += struct.pack("<II", len(m), m.dim)
    for sid in m.ids:
        encoded = sid.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValidationError(f"id {sid!r} exceeds 65535 UTF-8 bytes")
        out += struct.pack("<H", len(encoded))
        out += encoded
    out += np.ascontiguousarray(m.rows, dtype="<f4").tobytes()
    return bytes(out)


def read_embeddings(raw: bytes) -> EmbeddingMatrix:
    if raw[:4] != MAGIC:
        raise FormatError(f"bad magic {raw[:4]!r}, expected {MAGIC!r}")
    if len(raw) < 13:
        raise TruncationError("stream shorter than the fixed header")
    if raw[4] != VERSION:
        raise FormatError(f"unsupported version {raw[4]}")
    n, d = struct.unpack_from("<II", raw, 5)
    offset = 13
    ids = []
    for _ in range(n):
        if offset + 2 > len(raw):
            raise TruncationError("stream ended inside the id table")
        (length,) = struct.unpack_from("<H", raw, offset)
        offset += 2
        if offset + length > len(raw):
            raise TruncationError("stream ended inside an id record")
        ids.append(raw[offset : offset + length].decode("utf-8"))
        offset += length
    payload = n * d * 4
    if len(raw) - offset < payload:
        raise TruncationError(
            f"declared {n}x{d} values need {payload} bytes, only {len(raw) - offset} present"
        )
    if len(raw) - offset > payload:
        raise FormatError(f"{len(raw) - offset - payload} trailing bytes after the value block")
    rows = np.frombuffer(raw, dtype="<f4", count=n * d, offset=offset).reshape(n, d)
    return EmbeddingMatrix(ids=tuple(ids), rows=rows.copy())


def align(ds: LabeledDataset, m: EmbeddingMatrix) -> np.ndarray:
    """Map each dataset position to its embedding row index.

    Extra matrix rows are permitted and ignored, so one embedding file can
    serve several dataset splits.
    """
    index = m.row_index()
    out = np.empty(len(ds), dtype=np.intp)
    for pos, s in enumerate(ds):
        if s.id not in index:
            raise AlignmentError(f"no embedding row for id {s.id!r}")
        out[pos] = index[s.id]
    return out


def aligned_rows(ds: LabeledDataset, m: EmbeddingMatrix) -> np.ndarray:
    """Embedding rows in dataset order, promoted to float64."""
    return m.rows[align(ds, m)].astype(np.float64)


def subset(m: EmbeddingMatrix, ids: list[str]) -> EmbeddingMatrix:
    index = m.row_index()
    missing = [i for i in ids if i not in index]
    if missing:
        raise AlignmentError(f"no embedding row for id {missing[0]!r}")
    picks = [index[i] for i in ids]
    return EmbeddingMatrix(ids=tuple(ids), rows=m.rows[picks])
