"""Command-line entry point wiring parsing, solving, metrics, and generation."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .candidates import (
    PredictionsFormatError,
    derive_all_candidates,
    load_predictions,
    serialize_predictions,
)
from .datagen import (
    GenerationError,
    GenSpec,
    Symmetry,
    generate_puzzle,
    random_lexicon,
)
from .grid import Puzzle, PuzzleFormatError, parse_puzzle, serialize_puzzle, slot_id_sort_key
from .metrics import (
    DEFAULT_K_VALUES,
    PuzzleScore,
    aggregate_puzzles,
    aggregate_qa,
    evaluate_clue,
    score_puzzle,
)
from .relaxation import (
    MissingAnswerKeyError,
    RelaxedPuzzle,
    oracle_filter,
    solve_relaxed_all,
)
from .solver import EmptyCandidatesError, Solution
from .textnorm import Lexicon, LexiconFormatError, normalize, split_answer

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOSAT = 2

_INPUT_ERRORS = (
    PuzzleFormatError,
    PredictionsFormatError,
    LexiconFormatError,
    MissingAnswerKeyError,
    EmptyCandidatesError,
    GenerationError,
    OSError,
)


class InputError(ValueError):
    """Malformed CLI input (truth files, manifests, flag combinations)."""


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, *_INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


class _Parser(argparse.ArgumentParser):
    # Usage problems are input errors; keep exit code 2 reserved for nosat.
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crossfill", description=__doc__)
    sub = parser.add_subparsers(required=True, metavar="COMMAND")

    solve = sub.add_parser("solve", help="fill one puzzle from ranked predictions")
    solve.add_argument("puzzle", type=Path)
    solve.add_argument("predictions", type=Path)
    solve.add_argument("--k", type=int, default=20, help="top-k predictions to keep")
    solve.add_argument(
        "--oracle",
        action="store_true",
        help="pre-filter slots whose candidates lack the true answer",
    )
    solve.add_argument("--limit", type=int, default=1, help="solutions to search for")
    solve.add_argument("--denominator", choices=("original", "retained"), default="original")
    solve.add_argument("--min-slot-length", type=int, default=2)
    solve.add_argument("--json", action="store_true", help="JSON-only stdout")
    solve.add_argument("-o", "--output", type=Path, help="also write the JSON here")
    solve.set_defaults(func=cmd_solve)

    eval_qa = sub.add_parser("eval-qa", help="score clue answering at top-k")
    eval_qa.add_argument("truth", type=Path)
    eval_qa.add_argument("predictions", type=Path)
    eval_qa.add_argument("--k", type=int, default=20)
    eval_qa.add_argument("--jobs", type=int, default=1)
    eval_qa.add_argument("--json", action="store_true")
    eval_qa.add_argument("-o", "--output", type=Path)
    eval_qa.set_defaults(func=cmd_eval_qa)

    eval_puzzle = sub.add_parser(
        "eval-puzzle", help="score whole-puzzle solving over a manifest of pairs"
    )
    eval_puzzle.add_argument("manifest", type=Path)
    eval_puzzle.add_argument("--k", type=int, default=20)
    eval_puzzle.add_argument("--denominator", choices=("original", "retained"), default="original")
    eval_puzzle.add_argument("--min-slot-length", type=int, default=2)
    eval_puzzle.add_argument("--jobs", type=int, default=1)
    eval_puzzle.add_argument("--json", action="store_true")
    eval_puzzle.add_argument("-o", "--output", type=Path)
    eval_puzzle.set_defaults(func=cmd_eval_puzzle)

    gen = sub.add_parser("gen", help="generate a synthetic puzzle plus predictions")
    gen.add_argument("--rows", type=int, default=15)
    gen.add_argument("--cols", type=int, default=15)
    gen.add_argument("--block-fraction", type=float, default=0.178)
    gen.add_argument("--symmetry", choices=("none", "rot180"), default="rot180")
    gen.add_argument("--min-slot-length", type=int, default=3)
    gen.add_argument("--max-slot-length", type=int, default=8)
    gen.add_argument("--no-max-slot-length", action="store_true")
    gen.add_argument("--truth-p", type=float, default=1.0)
    gen.add_argument("--distractors", type=int, default=5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--lexicon", type=Path, help="lexicon file (default: synthetic)")
    gen.add_argument("--json", action="store_true")
    gen.add_argument("-o", "--output", type=Path, required=True, help="output directory")
    gen.set_defaults(func=cmd_gen)

    split = sub.add_parser("split", help="segment a merged answer string")
    split.add_argument("string")
    split.add_argument("--lexicon", type=Path, required=True)
    split.add_argument("--json", action="store_true")
    split.set_defaults(func=cmd_split)

    return parser


def _emit(args, document: dict, human_lines: list[str]) -> None:
    text = json.dumps(document, indent=2) + "\n"
    if args.json:
        sys.stdout.write(text)
    else:
        for line in human_lines:
            print(line)
    if getattr(args, "output", None):
        args.output.write_text(text, encoding="utf-8")


def _render_grid(puzzle: Puzzle, assignment: dict) -> list[str]:
    rows = []
    for r in range(puzzle.geometry.rows):
        chars = []
        for c in range(puzzle.geometry.cols):
            if (r, c) in puzzle.geometry.blocked:
                chars.append("#")
            else:
                chars.append(assignment.get((r, c), "_"))
        rows.append("".join(chars))
    return rows


def _solve_pipeline(
    puzzle: Puzzle, predictions_text: str, k: int, oracle: bool, limit: int | None
) -> tuple[RelaxedPuzzle, list[Solution]]:
    predictions = load_predictions(predictions_text, puzzle=puzzle, k=k)
    candidate_sets = derive_all_candidates(puzzle, predictions)
    if oracle:
        relaxed = oracle_filter(puzzle, candidate_sets)
    else:
        relaxed = RelaxedPuzzle(
            base=puzzle, removed_slots=frozenset(), removed_cells=frozenset()
        )
    return relaxed, solve_relaxed_all(relaxed, candidate_sets, limit=limit)


def cmd_solve(args) -> int:
    puzzle = parse_puzzle(
        args.puzzle.read_text(encoding="utf-8"), min_slot_length=args.min_slot_length
    )
    predictions_text = args.predictions.read_text(encoding="utf-8")
    relaxed, solutions = _solve_pipeline(
        puzzle, predictions_text, args.k, args.oracle, args.limit
    )

    document: dict = {
        "status": "sat" if solutions else "nosat",
        "removed_slots": sorted(relaxed.removed_slots, key=slot_id_sort_key),
        "removed_cells": sorted(list(c) for c in relaxed.removed_cells),
    }
    human = []
    if not solutions:
        human.append("nosat: no assignment satisfies the constraints")
        _emit(args, document, human)
        return EXIT_NOSAT

    first = solutions[0]
    grid = _render_grid(puzzle, first.assignment)
    document["grid"] = grid
    document["chosen"] = {
        slot_id: first.chosen[slot_id]
        for slot_id in sorted(first.chosen, key=slot_id_sort_key)
    }
    if args.limit is None or args.limit > 1:
        document["solutions"] = [
            {"grid": _render_grid(puzzle, s.assignment), "chosen": dict(s.chosen)}
            for s in solutions
        ]
    human.append("status: sat")
    human.extend(grid)
    if relaxed.removed_slots:
        human.append(f"removed slots: {len(relaxed.removed_slots)}")

    if puzzle.has_complete_answer_key():
        score = score_puzzle(puzzle.fill, first, relaxed, denominator=args.denominator)
        document["score"] = {k: round(v, 4) for k, v in score.as_dict().items()}
        human.append(
            "acc_word={acc_word:.4f} acc_char={acc_char:.4f} "
            "rem_word={rem_word:.4f} rem_char={rem_char:.4f}".format(**score.as_dict())
        )
    _emit(args, document, human)
    return EXIT_OK


def _load_truth_file(path: Path) -> list[tuple[str, str]]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(data, list):
        raise InputError(f"{path}: top-level value must be an array")
    seen = set()
    out = []
    for i, raw in enumerate(data):
        if not isinstance(raw, dict) or "slot" not in raw or "answer" not in raw:
            raise InputError(f"{path}: entry {i} must have 'slot' and 'answer'")
        slot_id = raw["slot"]
        if slot_id in seen:
            raise InputError(f"{path}: duplicate clue id {slot_id!r}")
        seen.add(slot_id)
        out.append((slot_id, raw["answer"]))
    return out


def _score_clue_batch(batch: list[tuple[str, tuple[str, ...]]]) -> list:
    return [evaluate_clue(truth, preds, DEFAULT_K_VALUES) for truth, preds in batch]


def cmd_eval_qa(args) -> int:
    truths = _load_truth_file(args.truth)
    predictions = load_predictions(
        args.predictions.read_text(encoding="utf-8"), k=args.k
    )
    pairs = []
    for slot_id, answer in truths:
        preds = predictions.predictions_for(slot_id)
        if not preds:
            print(f"warning: no predictions for {slot_id}", file=sys.stderr)
        pairs.append((answer, preds))

    if args.jobs > 1 and len(pairs) > 1:
        chunks = [pairs[i :: args.jobs] for i in range(args.jobs)]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            scored_chunks = list(pool.map(_score_clue_batch, chunks))
        # Undo the round-robin striping to restore input order.
        results = [None] * len(pairs)
        for offset, chunk in enumerate(scored_chunks):
            for j, result in enumerate(chunk):
                results[offset + j * args.jobs] = result
    else:
        results = _score_clue_batch(pairs)

    report = aggregate_qa(results, DEFAULT_K_VALUES)
    document = report.to_json_dict()
    human = ["metric  " + "  ".join(f"top-{k}" for k in report.k_values)]
    for metric, by_k in document["qa"].items():
        human.append(
            f"{metric:<8}" + "  ".join(f"{by_k[str(k)]:.4f}" for k in report.k_values)
        )
    _emit(args, document, human)
    return EXIT_OK


def _load_manifest(path: Path) -> list[tuple[Path, Path]]:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(data, list) or not data:
        raise InputError(f"{path}: manifest must be a non-empty array")
    base = path.parent
    pairs = []
    for i, raw in enumerate(data):
        if not isinstance(raw, dict) or "puzzle" not in raw or "predictions" not in raw:
            raise InputError(f"{path}: entry {i} must have 'puzzle' and 'predictions'")
        pairs.append((base / raw["puzzle"], base / raw["predictions"]))
    return pairs


def _eval_one_puzzle(task: tuple[str, str, int, str, int]) -> dict:
    puzzle_path, predictions_path, k, denominator, min_slot_length = task
    puzzle = parse_puzzle(
        Path(puzzle_path).read_text(encoding="utf-8"), min_slot_length=min_slot_length
    )
    relaxed, solutions = _solve_pipeline(
        puzzle,
        Path(predictions_path).read_text(encoding="utf-8"),
        k,
        oracle=True,
        limit=1,
    )
    if not solutions:
        return {"status": "nosat", "puzzle": str(puzzle_path)}
    score = score_puzzle(puzzle.fill, solutions[0], relaxed, denominator=denominator)
    return {"status": "sat", "puzzle": str(puzzle_path), **score.as_dict()}


def cmd_eval_puzzle(args) -> int:
    pairs = _load_manifest(args.manifest)
    tasks = [
        (str(p), str(q), args.k, args.denominator, args.min_slot_length)
        for p, q in pairs
    ]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_eval_one_puzzle, tasks))
    else:
        rows = [_eval_one_puzzle(task) for task in tasks]

    nosat = [row for row in rows if row["status"] == "nosat"]
    if nosat:
        print(f"error: {len(nosat)} puzzle(s) had no solution", file=sys.stderr)
        return EXIT_NOSAT

    scores = [
        PuzzleScore(
            acc_char=row["acc_char"],
            acc_word=row["acc_word"],
            rem_word=row["rem_word"],
            rem_char=row["rem_char"],
        )
        for row in rows
    ]
    report = aggregate_puzzles(scores)
    document = report.to_json_dict()
    document["per_puzzle"] = [
        {key: (round(val, 4) if isinstance(val, float) else val) for key, val in row.items()}
        for row in rows
    ]
    human = [
        "puzzle metrics (macro over {} puzzles):".format(len(scores)),
        "  "
        + " ".join(f"{name}={value:.4f}" for name, value in document["puzzle"].items()),
    ]
    _emit(args, document, human)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.lexicon:
        lexicon = Lexicon.load(args.lexicon)
    else:
        lexicon = random_lexicon(seed=args.seed)
    spec = GenSpec(
        rows=args.rows,
        cols=args.cols,
        lexicon=lexicon,
        block_fraction=args.block_fraction,
        symmetry=Symmetry.ROTATIONAL180 if args.symmetry == "rot180" else Symmetry.NONE,
        truth_inclusion_p=args.truth_p,
        distractors_per_slot=args.distractors,
        seed=args.seed,
        min_slot_length=args.min_slot_length,
        max_slot_length=None if args.no_max_slot_length else args.max_slot_length,
    )
    generated = generate_puzzle(spec)
    puzzle = generated.puzzle

    outdir = args.output
    outdir.mkdir(parents=True, exist_ok=True)
    puzzle_path = outdir / "puzzle.json"
    predictions_path = outdir / "predictions.json"
    puzzle_path.write_text(serialize_puzzle(puzzle), encoding="utf-8")
    predictions_path.write_text(
        serialize_predictions(generated.emitted.predictions), encoding="utf-8"
    )

    white = len(puzzle.geometry.white_cells)
    total = puzzle.geometry.rows * puzzle.geometry.cols
    document = {
        "puzzle": str(puzzle_path),
        "predictions": str(predictions_path),
        "slots": len(puzzle.slots),
        "filled_fraction": round(white / total, 4),
        "truth_excluded_fraction": round(
            generated.emitted.realized_exclusion_fraction, 4
        ),
        "seed": args.seed,
    }
    human = [
        f"wrote {puzzle_path} and {predictions_path}",
        f"slots: {document['slots']}  filled: {document['filled_fraction']:.2%}  "
        f"truth excluded: {document['truth_excluded_fraction']:.2%}",
    ]
    if args.json:
        sys.stdout.write(json.dumps(document, indent=2) + "\n")
    else:
        for line in human:
            print(line)
    return EXIT_OK


def cmd_split(args) -> int:
    lexicon = Lexicon.load(args.lexicon)
    result = split_answer(normalize(args.string), lexicon)
    if args.json:
        document = {"words": list(result.words), "segmented": result.segmented}
        sys.stdout.write(json.dumps(document, indent=2) + "\n")
    else:
        print(" ".join(result.words))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
