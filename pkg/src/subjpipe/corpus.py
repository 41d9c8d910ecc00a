"""Labeled sentence datasets: parsing, stats, merging, stratified sampling.

All operations are pure; datasets are immutable after construction and keep
insertion order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, ParseError, ValidationError

TSV_HEADER = ("sentence_id", "sentence", "label")


class Label(Enum):
    SUBJ = "SUBJ"
    OBJ = "OBJ"

    @classmethod
    def parse(cls, raw: str) -> "Label":
        try:
            return cls[raw.strip().upper()]
        except KeyError:
            raise ValidationError(f"unknown label {raw!r}; expected SUBJ or OBJ")


class Split(Enum):
    TRAIN = "TRAIN"
    VAL = "VAL"
    TEST = "TEST"


@dataclass(frozen=True)
class Sentence:
    id: str
    text: str
    label: Label
    language: str = "en"

    def __post_init__(self):
        if not self.id:
            raise ValidationError("sentence id must be non-empty")
        if not self.text.strip():
            raise ValidationError(f"sentence {self.id!r}: text empty after trim")

    @property
    def word_count(self) -> int:
        return len(self.text.split())


@dataclass(frozen=True)
class LabeledDataset:
    name: str
    split: Split
    sentences: tuple[Sentence, ...]

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))
        seen = set()
        for s in self.sentences:
            if s.id in seen:
                raise ValidationError(f"duplicate sentence id {s.id!r}")
            seen.add(s.id)

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.sentences]

    def by_label(self, label: Label) -> list[Sentence]:
        return [s for s in self.sentences if s.label is label]


@dataclass(frozen=True)
class DatasetStats:
    count_per_class: dict[Label, int]
    class_fraction: dict[Label, float]
    mean_word_count: float
    _sorted_word_counts: tuple[int, ...] = field(repr=False, default=())

    def word_count_quantile(self, q: float) -> int:
        """Nearest-rank quantile of per-sentence word counts."""
        if not 0.0 <= q <= 1.0:
            raise DomainError(f"quantile {q} outside [0, 1]")
        counts = self._sorted_word_counts
        rank = max(1, math.ceil(q * len(counts)))
        return counts[rank - 1]


def parse_dataset(
    raw: bytes | str,
    language: str = "en",
    split: Split = Split.TRAIN,
    name: str = "dataset",
) -> LabeledDataset:
    """Parse the tab-separated distribution format into a LabeledDataset.

    Expected layout: a header line ``sentence_id<TAB>sentence<TAB>label``
    followed by one record per line.  Labels are normalized
    case-insensitively; tabs and newlines are forbidden inside fields.
    """
    text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty input, expected a header line")
    header = tuple(lines[0].rstrip("\n").split("\t"))
    if header != TSV_HEADER:
        raise ParseError(f"bad header {header!r}, expected {TSV_HEADER!r}", line=1)
    sentences = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(fields)}", line=lineno)
        sid, sentence, label_raw = fields
        if sid in seen:
            raise ValidationError(f"line {lineno}: duplicate sentence id {sid!r}")
        seen.add(sid)
        try:
            sentences.append(
                Sentence(id=sid, text=sentence.strip(), label=Label.parse(label_raw), language=language)
            )
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
    return LabeledDataset(name=name, split=split, sentences=tuple(sentences))


def serialize_dataset(ds: LabeledDataset) -> str:
    lines = ["\t".join(TSV_HEADER)]
    lines.extend(f"{s.id}\t{s.text}\t{s.label.value}" for s in ds)
    return "\n".join(lines) + "\n"


def dataset_stats(ds: LabeledDataset) -> DatasetStats:
    if len(ds) == 0:
        raise DomainError("cannot compute stats of an empty dataset")
    counts = {lab: 0 for lab in Label}
    word_counts = []
    for s in ds:
        counts[s.label] += 1
        word_counts.append(s.word_count)
    n = len(ds)
    return DatasetStats(
        count_per_class=counts,
        class_fraction={lab: c / n for lab, c in counts.items()},
        mean_word_count=sum(word_counts) / n,
        _sorted_word_counts=tuple(sorted(word_counts)),
    )


def merge_datasets(
    parts: list[LabeledDataset],
    exclusion: LabeledDataset | None = None,
    name: str = "merged",
    split: Split = Split.TRAIN,
) -> LabeledDataset:
    """Concatenate datasets, dropping any sentence present in ``exclusion``.

    A sentence is excluded when its exact trimmed text or its id matches a
    member of the exclusion set; this guards merged multilingual training
    sets against leaking evaluation sentences.  Ids are prefixed with the
    source dataset name to keep them unique across parts.
    """
    if not parts:
        raise DomainError("merge requires at least one dataset")
    excluded_texts: set[str] = set()
    excluded_ids: set[str] = set()
    if exclusion is not None:
        excluded_texts = {s.text.strip() for s in exclusion}
        excluded_ids = {s.id for s in exclusion}
    merged = []
    for part in parts:
        for s in part:
            if s.text.strip() in excluded_texts or s.id in excluded_ids:
                continue
            merged.append(Sentence(id=f"{part.name}:{s.id}", text=s.text, label=s.label, language=s.language))
    if not merged:
        raise DomainError("merge produced an empty dataset")
    return LabeledDataset(name=name, split=split, sentences=tuple(merged))


def stratified_sample(ds: LabeledDataset, n_per_class: int, seed: int) -> LabeledDataset:
    """Draw exactly ``n_per_class`` sentences of each label, seeded.

    Selection uses a seeded pseudorandom permutation per class; the output
    keeps the original dataset order, so the same seed always yields the
    same dataset.
    """
    if n_per_class <= 0:
        raise DomainError("n_per_class must be positive")
    rng = np.random.default_rng(seed)
    chosen: set[str] = set()
    for label in (Label.OBJ, Label.SUBJ):
        members = ds.by_label(label)
        if len(members) < n_per_class:
            raise DomainError(
                f"need {n_per_class} {label.value} sentences, dataset has {len(members)}"
            )
        picks = rng.permutation(len(members))[:n_per_class]
        chosen.update(members[i].id for i in picks)
    sampled = tuple(s for s in ds if s.id in chosen)
    return LabeledDataset(name=f"{ds.name}_sample{n_per_class}", split=ds.split, sentences=sampled)
