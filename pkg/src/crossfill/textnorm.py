"""Answer-string normalization and dictionary-based splitting of merged answers."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from pathlib import Path

_ALLOWED = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789")


class LexiconFormatError(ValueError):
    """Raised when a lexicon file does not follow the WORD<TAB>frequency format."""


def normalize(text: str) -> str:
    """Reduce arbitrary text to the canonical A-Z/0-9 answer form.

    Applies Unicode canonical decomposition, strips combining marks,
    uppercases, then drops every character outside A-Z and 0-9. The result
    is idempotent and never longer than the input.
    """
    decomposed = unicodedata.normalize("NFD", text)
    stripped = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    return "".join(ch for ch in stripped.upper() if ch in _ALLOWED)


@dataclass(frozen=True)
class Lexicon:
    """Word list with relative corpus frequencies, keyed by normalized form."""

    entries: dict[str, float]

    def __post_init__(self) -> None:
        for word, freq in self.entries.items():
            if not word or normalize(word) != word:
                raise ValueError(f"lexicon word not in normalized form: {word!r}")
            if freq < 0:
                raise ValueError(f"negative frequency for {word!r}: {freq}")

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def frequency(self, word: str) -> float:
        return self.entries[word]

    def words_of_length(self, length: int) -> list[str]:
        """All entries of exactly `length` characters, in insertion order."""
        return [w for w in self.entries if len(w) == length]

    @classmethod
    def from_pairs(cls, pairs) -> Lexicon:
        """Build a lexicon from (word, frequency) pairs, normalizing words.

        Frequencies of entries that collide after normalization are summed.
        """
        entries: dict[str, float] = {}
        for word, freq in pairs:
            norm = normalize(word)
            if not norm:
                raise LexiconFormatError(f"word normalizes to empty string: {word!r}")
            if freq < 0:
                raise LexiconFormatError(f"negative frequency for {word!r}: {freq}")
            entries[norm] = entries.get(norm, 0.0) + float(freq)
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> Lexicon:
        """Load a UTF-8 lexicon file with one WORD<TAB>frequency entry per line."""
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                word, sep, freq_text = line.partition("\t")
                if not sep:
                    raise LexiconFormatError(f"{path}:{lineno}: missing tab separator")
                try:
                    freq = float(freq_text)
                except ValueError:
                    raise LexiconFormatError(
                        f"{path}:{lineno}: bad frequency {freq_text!r}"
                    ) from None
                pairs.append((word, freq))
        return cls.from_pairs(pairs)

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for word, freq in self.entries.items():
                fh.write(f"{word}\t{freq}\n")


@dataclass(frozen=True)
class SplitResult:
    """Outcome of splitting a merged answer string.

    `segmented` is False when no full segmentation into lexicon words exists
    and the input was returned unsplit.
    """

    words: tuple[str, ...]
    segmented: bool

    def __iter__(self):
        return iter(self.words)


def split_answer(merged: str, lexicon: Lexicon) -> SplitResult:
    """Split a merged answer string into lexicon words.

    Among all full segmentations the result has the fewest words; ties are
    broken by the highest arithmetic mean of word frequencies, then by the
    lexicographically earliest word sequence. When no full segmentation
    exists the input comes back as a single unsplit word.
    """
    if normalize(merged) != merged:
        raise ValueError(f"input is not normalized: {merged!r}")
    if not merged:
        return SplitResult((), True)

    n = len(merged)
    # best[i]: (word_count, -total_frequency, words) for merged[:i], or None.
    # With the word count fixed, maximizing the mean frequency equals
    # maximizing the total, so the tuple ordering realizes the tie-break chain.
    best: list[tuple[int, float, tuple[str, ...]] | None] = [None] * (n + 1)
    best[0] = (0, 0.0, ())
    max_len = max(map(len, lexicon.entries), default=0)
    for i in range(1, n + 1):
        for j in range(max(0, i - max_len), i):
            prefix = best[j]
            if prefix is None:
                continue
            word = merged[j:i]
            if word not in lexicon:
                continue
            count, neg_total, words = prefix
            candidate = (
                count + 1,
                neg_total - lexicon.frequency(word),
                words + (word,),
            )
            if best[i] is None or candidate < best[i]:
                best[i] = candidate
    if best[n] is None:
        return SplitResult((merged,), False)
    return SplitResult(best[n][2], True)
