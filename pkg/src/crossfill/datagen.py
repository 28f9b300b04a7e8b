"""Synthetic puzzle, answer-key, and noisy-prediction generation for testing.

Everything is deterministic given the spec seed: geometry, fill, and
candidate noise each draw from their own stream derived from it, so a
(spec, seed) pair reproduces byte-identical puzzle and prediction files.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from enum import Enum

from .candidates import CandidateSet, PredictionSet, derive_candidates
from .grid import (
    ClueEntry,
    Coord,
    GridGeometry,
    Puzzle,
    build_puzzle,
    extract_slots,
)
from .solver import build_model, is_valid_solution, solve
from .textnorm import Lexicon

_MAX_LAYOUT_ATTEMPTS = 60

VOWELS = "AEIOU"
CONSONANTS = "BCDFGHJKLMNPQRSTVWXYZ"
# Relative English letter frequencies, used to make synthetic words cross well.
_VOWEL_WEIGHTS = [8.2, 12.7, 7.0, 7.5, 2.8]
_CONSONANT_WEIGHTS = [
    1.5, 2.8, 4.3, 2.2, 2.0, 6.1, 0.15, 0.77, 4.0, 2.4, 6.7, 1.9,
    0.095, 6.0, 6.3, 9.1, 0.98, 2.4, 0.15, 2.0, 0.074,
]

_DEFAULT_LEXICON_SIZES = {
    2: 400,
    3: 3000,
    4: 7000,
    5: 10000,
    6: 11000,
    7: 11000,
    8: 11000,
}


class GenerationError(RuntimeError):
    """Raised when a spec cannot be realized (infeasible layout or lexicon)."""


class Symmetry(Enum):
    NONE = "none"
    ROTATIONAL180 = "rot180"


@dataclass(frozen=True)
class GenSpec:
    """Parameters controlling synthetic puzzle and prediction generation."""

    rows: int
    cols: int
    lexicon: Lexicon
    block_fraction: float = 0.0
    symmetry: Symmetry = Symmetry.NONE
    truth_inclusion_p: float = 1.0
    distractors_per_slot: int = 5
    seed: int = 0
    min_slot_length: int = 2
    max_slot_length: int | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.block_fraction < 1:
            raise ValueError("block_fraction must be in [0, 1)")
        if not 0 <= self.truth_inclusion_p <= 1:
            raise ValueError("truth_inclusion_p must be in [0, 1]")
        if self.distractors_per_slot < 0:
            raise ValueError("distractors_per_slot must be >= 0")
        if self.max_slot_length is not None and (
            self.max_slot_length < self.min_slot_length
        ):
            raise ValueError("max_slot_length must be >= min_slot_length")

    @classmethod
    def nyt_style(cls, lexicon: Lexicon, seed: int = 0, **overrides) -> GenSpec:
        """A 15x15 spec tuned to land on newspaper-style grid statistics."""
        params = dict(
            rows=15,
            cols=15,
            lexicon=lexicon,
            block_fraction=0.178,
            symmetry=Symmetry.ROTATIONAL180,
            min_slot_length=3,
            max_slot_length=8,
            seed=seed,
        )
        params.update(overrides)
        return cls(**params)


def generate_geometry(spec: GenSpec) -> GridGeometry:
    """Place blocks honoring symmetry, connectivity, and run-length bounds.

    Layouts with a run shorter than min_slot_length in a splittable
    direction, a run longer than max_slot_length, or a disconnected white
    region are rejected and retried up to a bounded number of times.
    """
    if spec.rows < spec.min_slot_length and spec.cols < spec.min_slot_length:
        raise GenerationError(
            f"a {spec.rows}x{spec.cols} grid cannot hold any slot of length "
            f">= {spec.min_slot_length}"
        )
    rng = random.Random(f"{spec.seed}/geometry")
    target = round(spec.block_fraction * spec.rows * spec.cols)
    for _ in range(_MAX_LAYOUT_ATTEMPTS):
        blocks = _try_layout(spec, rng, target)
        if blocks is not None:
            return GridGeometry(spec.rows, spec.cols, frozenset(blocks))
    raise GenerationError(
        f"could not place {target} blocks on a {spec.rows}x{spec.cols} grid "
        f"under the run-length and connectivity constraints"
    )


def _try_layout(spec: GenSpec, rng: random.Random, target: int) -> set[Coord] | None:
    rows, cols = spec.rows, spec.cols
    blocks: set[Coord] = set()
    failures = 0
    max_failures = 6 * rows * cols
    while len(blocks) < target and failures < max_failures:
        cell = _pick_candidate(spec, rng, blocks)
        pair = {cell, _mate(spec, cell)} - blocks
        if not pair:
            failures += 1
            continue
        if len(blocks) + len(pair) > target:
            center = (rows // 2, cols // 2)
            if (
                rows % 2 == 1
                and cols % 2 == 1
                and center not in blocks
                and _acceptable(spec, blocks | {center})
            ):
                blocks.add(center)
            break
        candidate = blocks | pair
        if _acceptable(spec, candidate):
            blocks = candidate
        else:
            failures += 1
    if len(blocks) < target - 1:
        return None
    if _overlong_runs(spec, blocks):
        return None
    return blocks


def _mate(spec: GenSpec, cell: Coord) -> Coord:
    if spec.symmetry is Symmetry.ROTATIONAL180:
        return (spec.rows - 1 - cell[0], spec.cols - 1 - cell[1])
    return cell


def _pick_candidate(spec: GenSpec, rng: random.Random, blocks: set[Coord]) -> Coord:
    overlong = _overlong_runs(spec, blocks)
    if overlong:
        run = overlong[rng.randrange(len(overlong))]
        # Valid split points leave each side either empty or >= min long.
        min_len = spec.min_slot_length
        last = len(run) - 1
        positions = [
            i
            for i in range(len(run))
            if (i == 0 or i >= min_len) and (last - i == 0 or last - i >= min_len)
        ]
        return run[positions[rng.randrange(len(positions))]]
    return (rng.randrange(spec.rows), rng.randrange(spec.cols))


def _overlong_runs(spec: GenSpec, blocks: set[Coord]) -> list[tuple[Coord, ...]]:
    if spec.max_slot_length is None:
        return []
    return [
        run
        for run in _all_runs(spec.rows, spec.cols, blocks)
        if len(run) > spec.max_slot_length
    ]


def _all_runs(rows: int, cols: int, blocks: set[Coord]):
    for r in range(rows):
        run = []
        for c in range(cols):
            if (r, c) not in blocks:
                run.append((r, c))
            elif run:
                yield tuple(run)
                run = []
        if run:
            yield tuple(run)
    for c in range(cols):
        run = []
        for r in range(rows):
            if (r, c) not in blocks:
                run.append((r, c))
            elif run:
                yield tuple(run)
                run = []
        if run:
            yield tuple(run)


def _acceptable(spec: GenSpec, blocks: set[Coord]) -> bool:
    """Connectivity plus minimum run length in every splittable direction."""
    rows, cols = spec.rows, spec.cols
    if len(blocks) >= rows * cols:
        return False
    min_len = spec.min_slot_length
    check_across = cols >= min_len
    check_down = rows >= min_len
    for run in _all_runs(rows, cols, blocks):
        is_across = len(run) == 1 or run[0][0] == run[1][0]
        required = check_across if is_across else check_down
        if required and len(run) < min_len:
            return False
    return _connected(rows, cols, blocks)


def _connected(rows: int, cols: int, blocks: set[Coord]) -> bool:
    whites = [(r, c) for r in range(rows) for c in range(cols) if (r, c) not in blocks]
    if not whites:
        return False
    seen = {whites[0]}
    frontier = deque(seen)
    while frontier:
        r, c = frontier.popleft()
        for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            cell = (nr, nc)
            if 0 <= nr < rows and 0 <= nc < cols and cell not in blocks and cell not in seen:
                seen.add(cell)
                frontier.append(cell)
    return len(seen) == len(whites)


def fill_grid(
    geometry: GridGeometry,
    lexicon: Lexicon,
    seed: int = 0,
    min_slot_length: int = 2,
) -> Puzzle:
    """Produce a complete valid fill where every answer is a lexicon word.

    The production solver does the filling over whole-lexicon candidate
    lists (one seeded shuffle per slot), which doubles as a stress test;
    the result is re-checked against the model before being returned.
    """
    slots = extract_slots(geometry, min_slot_length)
    rng = random.Random(f"{seed}/fill")
    by_length: dict[int, list[str]] = {}
    for slot in slots:
        if slot.length not in by_length:
            words = lexicon.words_of_length(slot.length)
            if not words:
                raise GenerationError(
                    f"lexicon has no words of length {slot.length} (slot {slot.id})"
                )
            by_length[slot.length] = words
    empty = build_puzzle(geometry, min_slot_length=min_slot_length)
    per_slot = {}
    for slot in slots:
        shuffled = list(by_length[slot.length])
        rng.shuffle(shuffled)
        per_slot[slot.id] = tuple(shuffled)
    model = build_model(empty, per_slot)
    solutions = solve(model, limit=1)
    if not solutions:
        raise GenerationError("geometry is unfillable under the given lexicon")
    solution = solutions[0]
    if not is_valid_solution(model, solution):
        raise GenerationError("generated fill failed the constraint re-check")

    clues = {
        slot.id: ClueEntry(
            slot_id=slot.id,
            text=f"Auto-generated clue for answer {slot.id}",
            answer=solution.chosen[slot.id],
        )
        for slot in slots
    }
    return build_puzzle(geometry, clues, min_slot_length=min_slot_length)


@dataclass(frozen=True)
class GeneratedPredictions:
    """Noisy ranked predictions plus the realized truth-inclusion bookkeeping."""

    predictions: PredictionSet
    candidates: dict[str, CandidateSet]
    truth_included: dict[str, bool]

    @property
    def realized_exclusion_fraction(self) -> float:
        if not self.truth_included:
            return 0.0
        excluded = sum(1 for inc in self.truth_included.values() if not inc)
        return excluded / len(self.truth_included)


def emit_candidates(puzzle: Puzzle, spec: GenSpec) -> GeneratedPredictions:
    """Sample ranked predictions per slot from the spec's noise model.

    With probability truth_inclusion_p the true answer lands at a uniformly
    random rank among distractors drawn (without replacement) from
    same-length lexicon words distinct from the truth.
    """
    rng = random.Random(f"{spec.seed}/candidates")
    key = puzzle.answer_key()
    by_slot: dict[str, tuple[str, ...]] = {}
    truth_included: dict[str, bool] = {}
    candidate_sets: dict[str, CandidateSet] = {}
    for slot in puzzle.slots:
        truth = key[slot.id]
        pool = [w for w in spec.lexicon.words_of_length(slot.length) if w != truth]
        if len(pool) < spec.distractors_per_slot:
            raise GenerationError(
                f"lexicon has only {len(pool)} length-{slot.length} words "
                f"besides the truth; {spec.distractors_per_slot} distractors requested"
            )
        predictions = rng.sample(pool, spec.distractors_per_slot)
        include = rng.random() < spec.truth_inclusion_p
        if include:
            predictions.insert(rng.randint(0, len(predictions)), truth)
        by_slot[slot.id] = tuple(predictions)
        truth_included[slot.id] = include
        candidate_sets[slot.id] = derive_candidates(slot, predictions)
    prediction_set = PredictionSet(by_slot)
    return GeneratedPredictions(
        predictions=prediction_set,
        candidates=candidate_sets,
        truth_included=truth_included,
    )


@dataclass(frozen=True)
class GeneratedPuzzle:
    puzzle: Puzzle
    emitted: GeneratedPredictions


def generate_puzzle(spec: GenSpec) -> GeneratedPuzzle:
    """Full pipeline: geometry, solver-backed fill, then noisy predictions."""
    geometry = generate_geometry(spec)
    puzzle = fill_grid(
        geometry, spec.lexicon, seed=spec.seed, min_slot_length=spec.min_slot_length
    )
    return GeneratedPuzzle(puzzle=puzzle, emitted=emit_candidates(puzzle, spec))


def random_lexicon(
    seed: int = 0, sizes: dict[int, int] | None = None
) -> Lexicon:
    """Deterministic synthetic lexicon of English-like words.

    Words alternate vowels and consonants stochastically with realistic
    letter frequencies so that crossing constraints stay satisfiable.
    Frequencies are integer-valued for exact tie-break arithmetic.
    """
    rng = random.Random(f"{seed}/lexicon")
    sizes = dict(_DEFAULT_LEXICON_SIZES) if sizes is None else sizes
    entries: dict[str, float] = {}
    for length in sorted(sizes):
        wanted = sizes[length]
        made = 0
        attempts = 0
        limit = wanted * 50
        while made < wanted and attempts < limit:
            attempts += 1
            word = _random_word(rng, length)
            if word not in entries:
                entries[word] = float(rng.randint(1, 1000))
                made += 1
        if made < wanted:
            raise GenerationError(
                f"could not generate {wanted} distinct words of length {length}"
            )
    return Lexicon(entries)


def _random_word(rng: random.Random, length: int) -> str:
    letters = []
    vowel = rng.random() < 0.4
    for _ in range(length):
        if vowel:
            letters.append(rng.choices(VOWELS, weights=_VOWEL_WEIGHTS)[0])
            vowel = rng.random() < 0.25
        else:
            letters.append(rng.choices(CONSONANTS, weights=_CONSONANT_WEIGHTS)[0])
            vowel = rng.random() < 0.75
    return "".join(letters)
