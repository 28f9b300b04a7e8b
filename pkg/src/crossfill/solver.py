"""Finite-domain constraint engine that fills grids from per-slot candidate lists.

Every white cell in scope is a variable over the 36-symbol alphabet A-Z/0-9;
each slot contributes a disjunction over its candidate strings. Crossing
consistency is implicit because crossing slots share cell variables. Search
assigns whole slots (fewest-candidates-first) with propagation to a fixpoint
after every choice.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

from .grid import Coord, Puzzle, Slot, slot_id_sort_key

ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
FULL_DOMAIN = frozenset(ALPHABET)


class EmptyCandidatesError(ValueError):
    """A slot in scope has no candidates; apply the oracle relaxation filter first."""


class Status(Enum):
    SAT = "sat"
    NOSAT = "nosat"


@dataclass(frozen=True)
class CellVariable:
    """One grid cell with its remaining symbol domain."""

    coordinate: Coord
    domain: frozenset[str]


@dataclass(frozen=True)
class Solution:
    """A satisfying assignment: one symbol per in-scope cell, one candidate per slot."""

    status: Status
    assignment: dict[Coord, str]
    chosen: dict[str, str]

    @property
    def is_sat(self) -> bool:
        return self.status is Status.SAT

    @classmethod
    def nosat(cls) -> Solution:
        return cls(status=Status.NOSAT, assignment={}, chosen={})


@dataclass(frozen=True)
class ConstraintModel:
    """Cell variables plus the per-slot candidate disjunctions over them."""

    slots: tuple[Slot, ...]
    candidates: dict[str, tuple[str, ...]]
    domains: dict[Coord, frozenset[str]]

    @property
    def variables(self) -> tuple[CellVariable, ...]:
        return tuple(
            CellVariable(coord, self.domains[coord]) for coord in sorted(self.domains)
        )


def build_model(
    puzzle: Puzzle,
    candidates: dict,
    include: list[str] | set[str] | tuple[str, ...] | None = None,
) -> ConstraintModel:
    """Build the constraint model for a puzzle (or for a subset of its slots).

    `candidates` maps slot id to a CandidateSet or a plain sequence of
    strings; duplicates are dropped keeping the first occurrence. Every slot
    in scope must have at least one candidate of exactly the slot length.
    """
    if include is None:
        in_scope = puzzle.slots
    else:
        wanted = set(include)
        unknown = wanted - set(puzzle.slot_map)
        if unknown:
            raise ValueError(f"unknown slot ids: {sorted(unknown)}")
        in_scope = tuple(slot for slot in puzzle.slots if slot.id in wanted)

    per_slot: dict[str, tuple[str, ...]] = {}
    for slot in in_scope:
        raw = candidates.get(slot.id)
        strings = raw.strings() if hasattr(raw, "strings") else tuple(raw or ())
        deduped = tuple(dict.fromkeys(strings))
        if not deduped:
            raise EmptyCandidatesError(
                f"slot {slot.id} has an empty candidate list; "
                "filter unsolvable slots with the oracle relaxation first"
            )
        for text in deduped:
            if len(text) != slot.length:
                raise ValueError(
                    f"candidate {text!r} for {slot.id} has length {len(text)}, "
                    f"expected {slot.length}"
                )
            if not set(text) <= FULL_DOMAIN:
                raise ValueError(f"candidate {text!r} for {slot.id} not over A-Z/0-9")
        per_slot[slot.id] = deduped

    domains = {cell: FULL_DOMAIN for slot in in_scope for cell in slot.cells}
    return ConstraintModel(slots=in_scope, candidates=per_slot, domains=domains)


class _SearchState:
    """Mutable candidate lists and domains shared copy-on-write across branches."""

    __slots__ = ("topology", "cand", "domains")

    def __init__(self, topology: _Topology, cand: list[tuple[str, ...]], domains: dict):
        self.topology = topology
        self.cand = cand
        self.domains = domains

    def child(self) -> _SearchState:
        return _SearchState(self.topology, list(self.cand), dict(self.domains))

    def propagate(self, dirty: list[int]) -> bool:
        """Run the pruning fixpoint starting from the given slots.

        A candidate dies when any of its letters is missing from the matching
        cell domain; a cell domain narrows to the letters the surviving
        candidates still offer at that offset. Returns False on a wipeout.
        Sound: a value present in any solution is never removed.
        """
        slot_cells = self.topology.slot_cells
        cell_slots = self.topology.cell_slots
        queue = deque(dirty)
        queued = set(dirty)
        while queue:
            si = queue.popleft()
            queued.discard(si)
            cells = slot_cells[si]
            words = self.cand[si]
            doms = [self.domains[cell] for cell in cells]
            if any(len(d) < len(ALPHABET) for d in doms):
                kept = tuple(
                    w for w in words if all(w[i] in doms[i] for i in range(len(cells)))
                )
            else:
                kept = words
            if not kept:
                return False
            self.cand[si] = kept
            for i, cell in enumerate(cells):
                at_offset = {w[i] for w in kept}
                narrowed = doms[i] & at_offset
                if not narrowed:
                    return False
                if narrowed != doms[i]:
                    self.domains[cell] = narrowed
                    for sj, _ in cell_slots[cell]:
                        if sj != si and sj not in queued:
                            queue.append(sj)
                            queued.add(sj)
        return True


class _Topology:
    """Immutable slot/cell wiring shared by all search states of one model."""

    def __init__(self, model: ConstraintModel):
        self.slots = model.slots
        self.slot_cells = [slot.cells for slot in model.slots]
        self.order_keys = [slot_id_sort_key(slot.id) for slot in model.slots]
        cell_slots: dict[Coord, list[tuple[int, int]]] = {}
        for si, slot in enumerate(model.slots):
            for offset, cell in enumerate(slot.cells):
                cell_slots.setdefault(cell, []).append((si, offset))
        self.cell_slots = {cell: tuple(v) for cell, v in cell_slots.items()}

    def initial_state(self, model: ConstraintModel) -> _SearchState:
        cand = [model.candidates[slot.id] for slot in self.slots]
        return _SearchState(self, cand, dict(model.domains))


def propagate(model: ConstraintModel) -> ConstraintModel | None:
    """Prune the model to its propagation fixpoint; None when inconsistent."""
    topology = _Topology(model)
    state = topology.initial_state(model)
    if not state.propagate(list(range(len(model.slots)))):
        return None
    return ConstraintModel(
        slots=model.slots,
        candidates={slot.id: state.cand[si] for si, slot in enumerate(model.slots)},
        domains={cell: state.domains[cell] for cell in model.domains},
    )


def solve(model: ConstraintModel, limit: int | None = 1) -> list[Solution]:
    """Depth-first search for up to `limit` solutions (None for all of them).

    Branching picks the unassigned slot with the fewest surviving candidates
    (ties: lowest slot id) and tries its candidates in stored order, so
    higher-ranked predictions win among equally consistent fills. The result
    order is deterministic; an empty list means no solution exists (nosat).
    """
    if limit is not None and limit < 1:
        raise ValueError("limit must be >= 1 or None")
    topology = _Topology(model)
    state = topology.initial_state(model)
    if not state.propagate(list(range(len(model.slots)))):
        return []
    solutions: list[Solution] = []
    _search(state, solutions, limit)
    return solutions


def _search(state: _SearchState, out: list[Solution], limit: int | None) -> None:
    topology = state.topology
    branch = None
    best = None
    for si, words in enumerate(state.cand):
        if len(words) > 1:
            key = (len(words), topology.order_keys[si])
            if best is None or key < best:
                best = key
                branch = si
    if branch is None:
        out.append(_extract_solution(state))
        return
    for word in state.cand[branch]:
        child = state.child()
        child.cand[branch] = (word,)
        if child.propagate([branch]) and _search_done(child, out, limit):
            return


def _search_done(state: _SearchState, out: list[Solution], limit: int | None) -> bool:
    _search(state, out, limit)
    return limit is not None and len(out) >= limit


def _extract_solution(state: _SearchState) -> Solution:
    chosen = {}
    assignment: dict[Coord, str] = {}
    for si, slot in enumerate(state.topology.slots):
        word = state.cand[si][0]
        chosen[slot.id] = word
        for cell, symbol in zip(slot.cells, word):
            assignment[cell] = symbol
    return Solution(status=Status.SAT, assignment=assignment, chosen=chosen)


def is_valid_solution(model: ConstraintModel, solution: Solution) -> bool:
    """Re-check a solution against the model's own constraints.

    Verifies candidate membership, exact slot length, and symbol agreement
    at every shared cell (read directly off the assignment).
    """
    if not solution.is_sat:
        return False
    if set(solution.assignment) != set(model.domains):
        return False
    for slot in model.slots:
        word = solution.chosen.get(slot.id)
        if word is None or word not in model.candidates[slot.id]:
            return False
        if len(word) != slot.length:
            return False
        if any(solution.assignment[cell] != w for cell, w in zip(slot.cells, word)):
            return False
    return True
