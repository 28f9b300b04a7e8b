"""Oracle pre-filter that removes unsolvable slots so a partial solution exists."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .grid import Coord, Puzzle
from .solver import Solution, build_model, solve


class MissingAnswerKeyError(ValueError):
    """The oracle filter needs a ground-truth answer for every slot."""


@dataclass(frozen=True)
class RelaxedPuzzle:
    """A puzzle with truth-lacking slots removed, plus their exclusive cells.

    A cell is removed only when every slot covering it was removed; retained
    slots keep all of their cells.
    """

    base: Puzzle
    removed_slots: frozenset[str]
    removed_cells: frozenset[Coord]

    @cached_property
    def retained_slots(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.base.slots if s.id not in self.removed_slots)

    @cached_property
    def retained_cells(self) -> frozenset[Coord]:
        return frozenset(self.base.geometry.white_cells) - self.removed_cells


def oracle_filter(puzzle: Puzzle, candidates: dict) -> RelaxedPuzzle:
    """Retain exactly the slots whose candidate set contains the true answer.

    Requires a complete answer key. Removal is single-pass: dropping a slot
    never invalidates a retained one, because retained slots keep all cells.
    """
    try:
        key = puzzle.answer_key()
    except ValueError as exc:
        raise MissingAnswerKeyError(str(exc)) from None

    removed = set()
    for slot in puzzle.slots:
        candidate_set = candidates.get(slot.id)
        strings = (
            candidate_set.strings()
            if hasattr(candidate_set, "strings")
            else tuple(candidate_set or ())
        )
        if key[slot.id] not in strings:
            removed.add(slot.id)

    retained_cover = {
        cell
        for slot in puzzle.slots
        if slot.id not in removed
        for cell in slot.cells
    }
    removed_cells = {
        cell
        for slot in puzzle.slots
        if slot.id in removed
        for cell in slot.cells
        if cell not in retained_cover
    }
    return RelaxedPuzzle(
        base=puzzle,
        removed_slots=frozenset(removed),
        removed_cells=frozenset(removed_cells),
    )


def solve_relaxed(
    relaxed: RelaxedPuzzle, candidates: dict, limit: int | None = 1
) -> Solution:
    """Solve the constraint model restricted to the retained slots.

    The first solution comes back (or the nosat sentinel; that outcome is
    reported, not masked, although after oracle filtering the ground-truth
    assignment always witnesses satisfiability). Removed cells are absent
    from the assignment.
    """
    model = build_model(relaxed.base, candidates, include=relaxed.retained_slots)
    solutions = solve(model, limit=limit)
    if not solutions:
        return Solution.nosat()
    return solutions[0]


def solve_relaxed_all(
    relaxed: RelaxedPuzzle, candidates: dict, limit: int | None = None
) -> list[Solution]:
    """All (or up to `limit`) solutions of the relaxed model, for uniqueness checks."""
    model = build_model(relaxed.base, candidates, include=relaxed.retained_slots)
    return solve(model, limit=limit)
