"""Evaluation metrics for clue answering (EM/In at top-k) and puzzle solving."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .relaxation import RelaxedPuzzle
from .solver import Solution
from .textnorm import normalize

QA_METRICS = ("em", "em_norm", "in", "in_norm")
DEFAULT_K_VALUES = (1, 10, 20)

DenominatorMode = str  # "original" | "retained"


def em_at_k(
    truth: str,
    predictions: tuple[str, ...] | list[str],
    k: int,
    normalized: bool = False,
) -> bool:
    """Exact match: does any of the first k predictions equal the truth?

    The truth is compared in its stored normalized form; predictions are
    normalized first only when `normalized` is set.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    for raw in predictions[:k]:
        candidate = normalize(raw) if normalized else raw
        if candidate == truth:
            return True
    return False


def in_at_k(
    truth: str,
    predictions: tuple[str, ...] | list[str],
    k: int,
    normalized: bool = False,
) -> bool:
    """Contains: does the truth occur as a contiguous substring of a top-k prediction?"""
    if k < 1:
        raise ValueError("k must be >= 1")
    for raw in predictions[:k]:
        candidate = normalize(raw) if normalized else raw
        if truth in candidate:
            return True
    return False


@dataclass(frozen=True)
class QAResult:
    """Per-clue flags for every metric at every requested k."""

    truth: str
    predictions: tuple[str, ...]
    flags: dict[str, dict[int, bool]]

    def flag(self, metric: str, k: int) -> bool:
        return self.flags[metric][k]


def evaluate_clue(
    truth: str,
    predictions: tuple[str, ...] | list[str],
    k_values: tuple[int, ...] = DEFAULT_K_VALUES,
) -> QAResult:
    """Score one clue's ranked predictions against its ground-truth answer."""
    truth_norm = normalize(truth)
    if not truth_norm:
        raise ValueError(f"truth {truth!r} normalizes to the empty string")
    preds = tuple(predictions)
    flags = {
        "em": {k: em_at_k(truth_norm, preds, k) for k in k_values},
        "em_norm": {k: em_at_k(truth_norm, preds, k, normalized=True) for k in k_values},
        "in": {k: in_at_k(truth_norm, preds, k) for k in k_values},
        "in_norm": {k: in_at_k(truth_norm, preds, k, normalized=True) for k in k_values},
    }
    return QAResult(truth=truth_norm, predictions=preds, flags=flags)


@dataclass(frozen=True)
class PuzzleScore:
    """Accuracy and removal fractions for one solved puzzle, all in [0, 1]."""

    acc_char: float
    acc_word: float
    rem_word: float
    rem_char: float

    def as_dict(self) -> dict[str, float]:
        return {
            "acc_word": self.acc_word,
            "acc_char": self.acc_char,
            "rem_word": self.rem_word,
            "rem_char": self.rem_char,
        }


def score_puzzle(
    truth_solution: dict,
    predicted: Solution,
    relaxed: RelaxedPuzzle,
    denominator: DenominatorMode = "original",
) -> PuzzleScore:
    """Score a (possibly partial) predicted solution against the full truth.

    `truth_solution` maps every white cell of the original puzzle to its
    symbol. With the default "original" denominator, removed content counts
    as incorrect: accuracies divide by the original totals, so acc_word can
    never exceed 1 - rem_word. The "retained" mode divides by the retained
    totals instead (empty retained sets score 0.0).
    """
    if denominator not in ("original", "retained"):
        raise ValueError(f"unknown denominator mode {denominator!r}")
    puzzle = relaxed.base
    white = set(puzzle.geometry.white_cells)
    if set(truth_solution) != white:
        raise ValueError("truth solution must cover exactly the white cells")
    if set(predicted.assignment) != set(relaxed.retained_cells):
        raise ValueError(
            "predicted solution must cover exactly the retained cells "
            f"({len(predicted.assignment)} covered, {len(relaxed.retained_cells)} retained)"
        )

    correct_cells = sum(
        1
        for cell in relaxed.retained_cells
        if predicted.assignment[cell] == truth_solution[cell]
    )
    correct_words = 0
    for slot_id in relaxed.retained_slots:
        slot = puzzle.slot_map[slot_id]
        truth_word = "".join(truth_solution[cell] for cell in slot.cells)
        if predicted.chosen.get(slot_id) == truth_word:
            correct_words += 1

    total_words = len(puzzle.slots)
    total_cells = len(white)
    if denominator == "original":
        word_denom, cell_denom = total_words, total_cells
    else:
        word_denom = len(relaxed.retained_slots)
        cell_denom = len(relaxed.retained_cells)

    return PuzzleScore(
        acc_char=correct_cells / cell_denom if cell_denom else 0.0,
        acc_word=correct_words / word_denom if word_denom else 0.0,
        rem_word=len(relaxed.removed_slots) / total_words,
        rem_char=len(relaxed.removed_cells) / total_cells,
    )


@dataclass(frozen=True)
class MetricsReport:
    """Aggregated metrics, mirroring the four-metric x top-k table layout."""

    qa: dict[str, dict[int, float]] | None = None
    puzzle: dict[str, float] | None = None
    k_values: tuple[int, ...] = DEFAULT_K_VALUES

    def to_json_dict(self) -> dict:
        report: dict = {}
        if self.qa is not None:
            report["qa"] = {
                metric: {str(k): round(self.qa[metric][k], 4) for k in self.k_values}
                for metric in QA_METRICS
            }
        if self.puzzle is not None:
            report["puzzle"] = {
                name: round(value, 4) for name, value in self.puzzle.items()
            }
        return report

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def aggregate_qa(
    results: list[QAResult], k_values: tuple[int, ...] = DEFAULT_K_VALUES
) -> MetricsReport:
    """Micro-average over clues: the fraction with a true flag at each k."""
    if not results:
        raise ValueError("no clue results to aggregate")
    qa = {
        metric: {
            k: sum(r.flag(metric, k) for r in results) / len(results)
            for k in k_values
        }
        for metric in QA_METRICS
    }
    return MetricsReport(qa=qa, k_values=k_values)


def aggregate_puzzles(scores: list[PuzzleScore]) -> MetricsReport:
    """Macro-average over puzzles: the unweighted mean of each score field."""
    if not scores:
        raise ValueError("no puzzle scores to aggregate")
    fields = ("acc_word", "acc_char", "rem_word", "rem_char")
    puzzle = {
        name: sum(getattr(s, name) for s in scores) / len(scores) for name in fields
    }
    return MetricsReport(puzzle=puzzle)
