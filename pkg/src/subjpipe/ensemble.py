"""Majority voting over prediction sets from independent models."""
from __future__ import annotations

from dataclasses import dataclass

from .corpus import Label
from .errors import DomainError, ParseError, ValidationError

PRED_HEADER = ("sentence_id", "label")
PRED_HEADER_PROB = ("sentence_id", "label", "prob")


@dataclass(frozen=True)
class PredictionSet:
    model_name: str
    predictions: dict[str, Label]  # insertion-ordered
    probabilities: dict[str, float] | None = None

    def __post_init__(self):
        if self.probabilities is not None:
            if set(self.probabilities) != set(self.predictions):
                raise ValidationError("probability ids differ from prediction ids")

    def ids(self) -> list[str]:
        return list(self.predictions)


def read_predictions(raw: bytes | str, model_name: str) -> PredictionSet:
    text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty predictions file", line=1)
    header = tuple(lines[0].split("\t"))
    if header == PRED_HEADER:
        with_prob = False
    elif header == PRED_HEADER_PROB:
        with_prob = True
    else:
        raise ParseError(f"bad header {header!r}", line=1)
    predictions: dict[str, Label] = {}
    probabilities: dict[str, float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(fields)}", line=lineno)
        sid = fields[0]
        if sid in predictions:
            raise ValidationError(f"line {lineno}: duplicate id {sid!r}")
        try:
            predictions[sid] = Label.parse(fields[1])
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from exc
        if with_prob:
            try:
                prob = float(fields[2])
            except ValueError:
                raise ValidationError(f"line {lineno}: bad probability {fields[2]!r}")
            if not 0.0 <= prob <= 1.0:
                raise ValidationError(f"line {lineno}: probability {prob} outside [0, 1]")
            probabilities[sid] = prob
    return PredictionSet(
        model_name=model_name,
        predictions=predictions,
        probabilities=probabilities if with_prob else None,
    )


def write_predictions(ps: PredictionSet) -> str:
    with_prob = ps.probabilities is not None
    lines = ["\t".join(PRED_HEADER_PROB if with_prob else PRED_HEADER)]
    for sid, label in ps.predictions.items():
        if with_prob:
            lines.append(f"{sid}\t{label.value}\t{ps.probabilities[sid]:.6f}")
        else:
            lines.append(f"{sid}\t{label.value}")
    return "\n".join(lines) + "\n"


def majority_vote(voters: list[PredictionSet]) -> PredictionSet:
    """Per-id plurality vote; even-split ties resolve to OBJ.

    Voters must share an identical id set.  The output is permutation
    invariant in the voter order and carries no probabilities.
    """
    if not voters:
        raise DomainError("majority vote needs at least one voter")
    reference = set(voters[0].predictions)
    for voter in voters[1:]:
        diff = reference.symmetric_difference(voter.predictions)
        if diff:
            raise DomainError(
                f"voter {voter.model_name!r} id set differs at {sorted(diff)[0]!r}"
            )
    combined: dict[str, Label] = {}
    for sid in voters[0].predictions:
        subj = sum(1 for v in voters if v.predictions[sid] is Label.SUBJ)
        obj = len(voters) - subj
        combined[sid] = Label.SUBJ if subj > obj else Label.OBJ
    return PredictionSet(
        model_name="+".join(v.model_name for v in voters),
        predictions=combined,
    )
