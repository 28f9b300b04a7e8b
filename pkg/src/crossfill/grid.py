"""Puzzle grid model: geometry, slots, crossings, and the JSON file format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import NamedTuple

from .textnorm import normalize

Coord = tuple[int, int]

BLACK = "#"
EMPTY = "."
CELL_SYMBOLS = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789")

DEFAULT_MIN_SLOT_LENGTH = 2


class PuzzleFormatError(ValueError):
    """Raised for documents that violate the puzzle JSON schema or its invariants."""


class Direction(str, Enum):
    ACROSS = "across"
    DOWN = "down"


@dataclass(frozen=True)
class GridGeometry:
    """Rectangular grid shape with a set of blocked (black) cells."""

    rows: int
    cols: int
    blocked: frozenset[Coord]

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        for r, c in self.blocked:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"blocked cell ({r}, {c}) outside the grid")
        if not self.white_cells:
            raise ValueError("grid has no white cells")

    @cached_property
    def white_cells(self) -> tuple[Coord, ...]:
        """All non-blocked coordinates in row-major order."""
        return tuple(
            (r, c)
            for r in range(self.rows)
            for c in range(self.cols)
            if (r, c) not in self.blocked
        )

    def is_white(self, cell: Coord) -> bool:
        r, c = cell
        return 0 <= r < self.rows and 0 <= c < self.cols and cell not in self.blocked


@dataclass(frozen=True)
class Slot:
    """A maximal run of white cells holding one Across or Down answer."""

    id: str
    number: int
    direction: Direction
    cells: tuple[Coord, ...]

    @property
    def start(self) -> Coord:
        return self.cells[0]

    @property
    def length(self) -> int:
        return len(self.cells)


class Crossing(NamedTuple):
    """One cell shared by two slots: slot_a.cells[offset_a] == slot_b.cells[offset_b]."""

    slot_a: str
    offset_a: int
    slot_b: str
    offset_b: int


@dataclass(frozen=True)
class ClueEntry:
    """Clue text for one slot, optionally with the normalized ground-truth answer."""

    slot_id: str
    text: str
    answer: str | None = None
    category: str | None = None


@dataclass(frozen=True)
class Puzzle:
    """An immutable parsed puzzle: geometry, derived slots/crossings, clues, answers.

    `fill` maps a cell to its ground-truth symbol and combines grid pre-fill
    with the per-clue answers; it is complete when every white cell is covered.
    """

    geometry: GridGeometry
    slots: tuple[Slot, ...]
    clues: dict[str, ClueEntry] = field(default_factory=dict)
    crossings: tuple[Crossing, ...] = ()
    fill: dict[Coord, str] = field(default_factory=dict)

    @cached_property
    def slot_map(self) -> dict[str, Slot]:
        return {slot.id: slot for slot in self.slots}

    def answer_for(self, slot_id: str) -> str | None:
        """Ground-truth answer for a slot, read from its fill cells when complete."""
        slot = self.slot_map[slot_id]
        symbols = [self.fill.get(cell) for cell in slot.cells]
        if any(s is None for s in symbols):
            return None
        return "".join(symbols)

    def answer_key(self) -> dict[str, str]:
        """Answers for all slots; raises if any slot lacks one."""
        key = {}
        for slot in self.slots:
            answer = self.answer_for(slot.id)
            if answer is None:
                raise ValueError(f"puzzle has no ground-truth answer for {slot.id}")
            key[slot.id] = answer
        return key

    def has_complete_answer_key(self) -> bool:
        return all(cell in self.fill for cell in self.geometry.white_cells)


def slot_id_sort_key(slot_id: str) -> tuple[int, str]:
    """Natural ordering for ids like '17-Across': by number, then direction."""
    number, _, direction = slot_id.partition("-")
    return (int(number), direction)


def extract_slots(
    geometry: GridGeometry, min_slot_length: int = DEFAULT_MIN_SLOT_LENGTH
) -> tuple[Slot, ...]:
    """Derive the maximal white runs of length >= min_slot_length.

    Slots are numbered by the standard crossword rule: every cell that starts
    a slot gets the next number in row-major order, shared by an Across and a
    Down slot starting at the same cell. The result is ordered by
    (start row, start col, direction).
    """
    if min_slot_length < 1:
        raise ValueError("min_slot_length must be >= 1")
    runs: dict[Coord, list[tuple[Direction, tuple[Coord, ...]]]] = {}
    for direction in (Direction.ACROSS, Direction.DOWN):
        for cells in _maximal_runs(geometry, direction):
            if len(cells) >= min_slot_length:
                runs.setdefault(cells[0], []).append((direction, cells))

    slots = []
    number = 0
    for start in sorted(runs):
        number += 1
        for direction, cells in sorted(runs[start], key=lambda dc: dc[0].value):
            slots.append(
                Slot(
                    id=f"{number}-{direction.value.capitalize()}",
                    number=number,
                    direction=direction,
                    cells=cells,
                )
            )
    slots.sort(key=lambda s: (s.start, s.direction.value))
    return tuple(slots)


def _maximal_runs(geometry: GridGeometry, direction: Direction):
    """Yield every maximal run of white cells in one direction (any length)."""
    outer, inner = (
        (geometry.rows, geometry.cols)
        if direction is Direction.ACROSS
        else (geometry.cols, geometry.rows)
    )
    for o in range(outer):
        run: list[Coord] = []
        for i in range(inner):
            cell = (o, i) if direction is Direction.ACROSS else (i, o)
            if geometry.is_white(cell):
                run.append(cell)
            elif run:
                yield tuple(run)
                run = []
        if run:
            yield tuple(run)


def compute_crossings(slots: tuple[Slot, ...] | list[Slot]) -> tuple[Crossing, ...]:
    """One Crossing per cell shared by two slots, without symmetric duplicates.

    Ordered by the first slot's position in the input, then its offset.
    """
    owners: dict[Coord, list[tuple[int, int]]] = {}
    for index, slot in enumerate(slots):
        for offset, cell in enumerate(slot.cells):
            owners.setdefault(cell, []).append((index, offset))
    crossings = []
    for index, slot in enumerate(slots):
        for offset, cell in enumerate(slot.cells):
            for other_index, other_offset in owners[cell]:
                if other_index > index:
                    crossings.append(
                        Crossing(slot.id, offset, slots[other_index].id, other_offset)
                    )
    return tuple(crossings)


def build_puzzle(
    geometry: GridGeometry,
    clues: dict[str, ClueEntry] | None = None,
    fill: dict[Coord, str] | None = None,
    min_slot_length: int = DEFAULT_MIN_SLOT_LENGTH,
) -> Puzzle:
    """Assemble and validate a Puzzle from its parts, deriving slots and crossings.

    Clue answers are merged into the fill; conflicts between answers at a
    shared cell, answers of the wrong length, clues for unknown slots, and
    white cells not covered by any slot are all rejected.
    """
    slots = extract_slots(geometry, min_slot_length)
    slot_map = {slot.id: slot for slot in slots}

    covered = {cell for slot in slots for cell in slot.cells}
    for cell in geometry.white_cells:
        if cell not in covered:
            raise PuzzleFormatError(
                f"white cell {cell} is not covered by any slot "
                f"(min_slot_length={min_slot_length})"
            )

    merged_fill = dict(fill or {})
    for cell, symbol in merged_fill.items():
        if not geometry.is_white(cell):
            raise PuzzleFormatError(f"pre-filled cell {cell} is not a white cell")
        if symbol not in CELL_SYMBOLS:
            raise PuzzleFormatError(f"invalid symbol {symbol!r} at {cell}")

    clues = dict(clues or {})
    for slot_id, clue in clues.items():
        if slot_id not in slot_map:
            raise PuzzleFormatError(f"clue references unknown slot {slot_id!r}")
        if clue.slot_id != slot_id:
            raise PuzzleFormatError(
                f"clue keyed {slot_id!r} carries slot_id {clue.slot_id!r}"
            )
        if clue.answer is None:
            continue
        slot = slot_map[slot_id]
        answer = normalize(clue.answer)
        if len(answer) != slot.length:
            raise PuzzleFormatError(
                f"answer for {slot_id} has normalized length {len(answer)}, "
                f"slot length is {slot.length}"
            )
        for cell, symbol in zip(slot.cells, answer):
            existing = merged_fill.get(cell)
            if existing is not None and existing != symbol:
                raise PuzzleFormatError(
                    f"conflicting answers at cell {cell}: {existing!r} vs {symbol!r} "
                    f"(slot {slot_id})"
                )
            merged_fill[cell] = symbol

    return Puzzle(
        geometry=geometry,
        slots=slots,
        clues=clues,
        crossings=compute_crossings(slots),
        fill=merged_fill,
    )


def parse_puzzle(
    document: str, min_slot_length: int = DEFAULT_MIN_SLOT_LENGTH
) -> Puzzle:
    """Parse the puzzle JSON format into a validated Puzzle.

    Slots and crossings are derived from the grid, never read from the
    document; clue numbering is recomputed with the standard numbering rule.
    Cells marked for multi-character entry (rebus) are rejected.
    """
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise PuzzleFormatError(f"not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise PuzzleFormatError("top-level value must be an object")
    try:
        rows = data["rows"]
        cols = data["cols"]
        grid_rows = data["grid"]
    except KeyError as exc:
        raise PuzzleFormatError(f"missing required field {exc.args[0]!r}") from None
    if not isinstance(rows, int) or not isinstance(cols, int):
        raise PuzzleFormatError("'rows' and 'cols' must be integers")
    if not isinstance(grid_rows, list) or len(grid_rows) != rows:
        raise PuzzleFormatError(f"'grid' must be an array of {rows} strings")

    blocked = set()
    fill = {}
    for r, row_text in enumerate(grid_rows):
        if not isinstance(row_text, str):
            raise PuzzleFormatError(f"grid row {r} is not a string")
        if "[" in row_text or "]" in row_text:
            raise PuzzleFormatError(
                f"grid row {r} marks a multi-character (rebus) cell; "
                "rebus puzzles are rejected"
            )
        if len(row_text) != cols:
            raise PuzzleFormatError(
                f"grid row {r} has length {len(row_text)}, expected {cols}"
            )
        for c, ch in enumerate(row_text):
            if ch == BLACK:
                blocked.add((r, c))
            elif ch == EMPTY:
                pass
            elif ch in CELL_SYMBOLS:
                fill[(r, c)] = ch
            else:
                raise PuzzleFormatError(
                    f"invalid grid character {ch!r} at row {r}, col {c}"
                )

    try:
        geometry = GridGeometry(rows=rows, cols=cols, blocked=frozenset(blocked))
    except ValueError as exc:
        raise PuzzleFormatError(str(exc)) from None

    slots = extract_slots(geometry, min_slot_length)
    by_number = {(slot.number, slot.direction): slot for slot in slots}

    clues: dict[str, ClueEntry] = {}
    for i, raw in enumerate(data.get("clues", [])):
        if not isinstance(raw, dict):
            raise PuzzleFormatError(f"clue {i} is not an object")
        try:
            number = raw["number"]
            direction_text = raw["direction"]
            text = raw["text"]
        except KeyError as exc:
            raise PuzzleFormatError(
                f"clue {i} missing required field {exc.args[0]!r}"
            ) from None
        try:
            direction = Direction(direction_text)
        except ValueError:
            raise PuzzleFormatError(
                f"clue {i} has invalid direction {direction_text!r}"
            ) from None
        slot = by_number.get((number, direction))
        if slot is None:
            raise PuzzleFormatError(
                f"clue {i} references nonexistent slot {number} {direction.value}"
            )
        if slot.id in clues:
            raise PuzzleFormatError(f"duplicate clue for slot {slot.id}")
        answer = raw.get("answer")
        if answer is not None and not isinstance(answer, str):
            raise PuzzleFormatError(f"clue {i} answer must be a string")
        clues[slot.id] = ClueEntry(
            slot_id=slot.id,
            text=str(text),
            answer=normalize(answer) if answer is not None else None,
            category=raw.get("category"),
        )

    return build_puzzle(geometry, clues, fill, min_slot_length)


def serialize_puzzle(puzzle: Puzzle) -> str:
    """Render a Puzzle back to the JSON document format (round-trip safe)."""
    grid_rows = []
    for r in range(puzzle.geometry.rows):
        chars = []
        for c in range(puzzle.geometry.cols):
            if (r, c) in puzzle.geometry.blocked:
                chars.append(BLACK)
            else:
                chars.append(puzzle.fill.get((r, c), EMPTY))
        grid_rows.append("".join(chars))

    clues = []
    for slot_id in sorted(puzzle.clues, key=slot_id_sort_key):
        clue = puzzle.clues[slot_id]
        slot = puzzle.slot_map[slot_id]
        entry: dict = {
            "number": slot.number,
            "direction": slot.direction.value,
            "text": clue.text,
        }
        if clue.answer is not None:
            entry["answer"] = clue.answer
        if clue.category is not None:
            entry["category"] = clue.category
        clues.append(entry)

    document = {
        "rows": puzzle.geometry.rows,
        "cols": puzzle.geometry.cols,
        "grid": grid_rows,
        "clues": clues,
    }
    return json.dumps(document, indent=2) + "\n"


def full_interlock(puzzle: Puzzle) -> bool:
    """True when every white cell lies on both an Across and a Down slot.

    Full-size newspaper grids have this property; small or sparse grids
    usually do not, so it is a report, not an invariant.
    """
    across = set()
    down = set()
    for slot in puzzle.slots:
        target = across if slot.direction is Direction.ACROSS else down
        target.update(slot.cells)
    return all(cell in across and cell in down for cell in puzzle.geometry.white_cells)
