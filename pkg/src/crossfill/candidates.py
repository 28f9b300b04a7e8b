"""Ranked model predictions and derivation of slot-length candidate sets."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .grid import Puzzle, Slot
from .textnorm import normalize

DEFAULT_TOP_K = 20


class PredictionsFormatError(ValueError):
    """Raised for documents that violate the predictions JSON schema."""


@dataclass(frozen=True)
class PredictionSet:
    """Raw ranked prediction strings per slot, rank 1 first."""

    by_slot: dict[str, tuple[str, ...]]

    def predictions_for(self, slot_id: str) -> tuple[str, ...]:
        return self.by_slot.get(slot_id, ())


@dataclass(frozen=True)
class Candidate:
    """One slot-length candidate with the rank/offset of its source prediction."""

    text: str
    rank: int
    offset: int


@dataclass(frozen=True)
class CandidateSet:
    """Deduplicated, length-exact candidate strings for one slot, in rank order."""

    slot_id: str
    length: int
    candidates: tuple[Candidate, ...]

    def strings(self) -> tuple[str, ...]:
        return tuple(c.text for c in self.candidates)

    def __contains__(self, text: str) -> bool:
        return any(c.text == text for c in self.candidates)

    def __len__(self) -> int:
        return len(self.candidates)


def load_predictions(
    document: str,
    puzzle: Puzzle | None = None,
    k: int = DEFAULT_TOP_K,
) -> PredictionSet:
    """Parse the predictions JSON format, keeping the top `k` per slot.

    The document is an array of {"slot": id, "predictions": [...]} objects.
    With a puzzle given, slot ids are checked against it; rank order is
    preserved exactly as read.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise PredictionsFormatError(f"not valid JSON: {exc}") from None
    if not isinstance(data, list):
        raise PredictionsFormatError("top-level value must be an array")

    by_slot: dict[str, tuple[str, ...]] = {}
    for i, raw in enumerate(data):
        if not isinstance(raw, dict):
            raise PredictionsFormatError(f"entry {i} is not an object")
        try:
            slot_id = raw["slot"]
            predictions = raw["predictions"]
        except KeyError as exc:
            raise PredictionsFormatError(
                f"entry {i} missing required field {exc.args[0]!r}"
            ) from None
        if not isinstance(slot_id, str):
            raise PredictionsFormatError(f"entry {i} slot id must be a string")
        if not isinstance(predictions, list) or not all(
            isinstance(p, str) for p in predictions
        ):
            raise PredictionsFormatError(
                f"entry {i} predictions must be an array of strings"
            )
        if slot_id in by_slot:
            raise PredictionsFormatError(f"duplicate predictions for slot {slot_id!r}")
        if puzzle is not None and slot_id not in puzzle.slot_map:
            raise PredictionsFormatError(f"unknown slot {slot_id!r}")
        by_slot[slot_id] = tuple(predictions[:k])
    return PredictionSet(by_slot)


def derive_candidates(slot: Slot, predictions: tuple[str, ...] | list[str]) -> CandidateSet:
    """Candidates for a slot: every slot-length substring of each prediction.

    Each prediction is normalized first so punctuation and spaces do not
    break character runs; substrings come out in (rank, left-to-right offset)
    order with duplicates dropped, keeping the earliest occurrence.
    """
    length = slot.length
    seen: set[str] = set()
    found: list[Candidate] = []
    for rank, raw in enumerate(predictions, start=1):
        text = normalize(raw)
        for offset in range(len(text) - length + 1):
            sub = text[offset : offset + length]
            if sub not in seen:
                seen.add(sub)
                found.append(Candidate(text=sub, rank=rank, offset=offset))
    return CandidateSet(slot_id=slot.id, length=length, candidates=tuple(found))


def derive_all_candidates(
    puzzle: Puzzle, predictions: PredictionSet
) -> dict[str, CandidateSet]:
    """Candidate sets for every slot of a puzzle (empty where unpredicted)."""
    return {
        slot.id: derive_candidates(slot, predictions.predictions_for(slot.id))
        for slot in puzzle.slots
    }


def serialize_predictions(predictions: PredictionSet) -> str:
    """Render a PredictionSet to the predictions JSON document format."""
    data = [
        {"slot": slot_id, "predictions": list(preds)}
        for slot_id, preds in predictions.by_slot.items()
    ]
    return json.dumps(data, indent=2) + "\n"
