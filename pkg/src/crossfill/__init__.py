"""Crossword constraint solver and evaluation harness for ranked answer candidates."""

from .candidates import (
    Candidate,
    CandidateSet,
    PredictionSet,
    PredictionsFormatError,
    derive_all_candidates,
    derive_candidates,
    load_predictions,
)
from .datagen import GenerationError, GenSpec, Symmetry, generate_puzzle, random_lexicon
from .grid import (
    ClueEntry,
    Crossing,
    Direction,
    GridGeometry,
    Puzzle,
    PuzzleFormatError,
    Slot,
    compute_crossings,
    extract_slots,
    parse_puzzle,
    serialize_puzzle,
)
from .metrics import (
    MetricsReport,
    PuzzleScore,
    QAResult,
    aggregate_puzzles,
    aggregate_qa,
    em_at_k,
    evaluate_clue,
    in_at_k,
    score_puzzle,
)
from .relaxation import MissingAnswerKeyError, RelaxedPuzzle, oracle_filter, solve_relaxed
from .solver import (
    ConstraintModel,
    EmptyCandidatesError,
    Solution,
    Status,
    build_model,
    propagate,
    solve,
)
from .textnorm import Lexicon, LexiconFormatError, SplitResult, normalize, split_answer

__version__ = "0.1.0"
