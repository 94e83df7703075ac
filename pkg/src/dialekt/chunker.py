"""Character-symbol encoding of word chunks.

A chunk of up to k consecutive dialect words becomes one training
example: the characters of the words with "_" marking word boundaries,
e.g. ["kan", "jo", "nåo"] -> k a n _ j o _ n å o.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .aligner import TokenPair

BOUNDARY = "_"

MIN_CHUNK_SIZE = 1
MAX_CHUNK_SIZE = 5


class ChunkError(ValueError):
    pass


@dataclass(frozen=True)
class ChunkExample:
    """Parallel source/target symbol sequences for one chunk."""

    source: tuple[str, ...]
    target: tuple[str, ...]
    k: int


def to_char_sequence(words: Sequence[str]) -> list[str]:
    """Characters of each word in order, with "_" between words."""
    symbols: list[str] = []
    for word in words:
        if BOUNDARY in word:
            raise ChunkError(
                f"word {word!r} contains the reserved boundary symbol "
                f"{BOUNDARY!r}"
            )
        if not word or any(ch.isspace() for ch in word):
            raise ChunkError(f"invalid word {word!r}: empty or has whitespace")
        if symbols:
            symbols.append(BOUNDARY)
        symbols.extend(word)
    return symbols


def from_char_sequence(symbols: Iterable[str]) -> list[str]:
    """Inverse of to_char_sequence, in repair mode: repeated boundaries
    collapse and leading/trailing boundaries are trimmed."""
    words: list[str] = []
    current: list[str] = []
    for sym in symbols:
        if sym == BOUNDARY:
            if current:
                words.append("".join(current))
                current = []
        else:
            current.append(sym)
    if current:
        words.append("".join(current))
    return words


def _validate_chunk_size(k: int) -> None:
    if not MIN_CHUNK_SIZE <= k <= MAX_CHUNK_SIZE:
        raise ChunkError(
            f"chunk size must be in {MIN_CHUNK_SIZE}..{MAX_CHUNK_SIZE}, got {k}"
        )


def make_examples(
    line: Sequence[TokenPair],
    k: int,
    stride: Optional[int] = None,
    keep_final_short: bool = True,
) -> list[ChunkExample]:
    """Window a paired line into chunk examples of size k.

    Windows are consecutive and non-overlapping by default (stride=k);
    the final window may be shorter unless keep_final_short is False.
    Multi-word normalizations contribute extra boundary symbols on the
    target side. At k=1, pairs whose normalized side is empty are
    dropped: a single-word model cannot be trained to emit nothing.
    """
    _validate_chunk_size(k)
    if not line:
        raise ChunkError("cannot chunk an empty line")
    step = k if stride is None else stride
    if step < 1:
        raise ChunkError(f"stride must be >= 1, got {step}")

    examples = []
    for start in range(0, len(line), step):
        window = line[start : start + k]
        if not window:
            break
        if len(window) < k and not keep_final_short:
            continue
        if k == 1 and not window[0].normalized:
            continue
        source = to_char_sequence([p.dialect for p in window])
        target_words = [w for p in window for w in p.normalized.split()]
        target = to_char_sequence(target_words)
        examples.append(ChunkExample(tuple(source), tuple(target), k))
    return examples


def window_tokens(tokens: Sequence[str], k: int) -> list[list[str]]:
    """The chunking applied at inference time: consecutive k-word windows."""
    _validate_chunk_size(k)
    return [list(tokens[i : i + k]) for i in range(0, len(tokens), k)]


def write_examples(examples: Sequence[ChunkExample], source_path, target_path) -> None:
    """Parallel text files, one example per line, symbols space-separated."""
    with open(source_path, "w", encoding="utf-8") as src, open(
        target_path, "w", encoding="utf-8"
    ) as tgt:
        for ex in examples:
            src.write(" ".join(ex.source) + "\n")
            tgt.write(" ".join(ex.target) + "\n")


def read_examples(source_path, target_path, k: int) -> list[ChunkExample]:
    _validate_chunk_size(k)
    with open(source_path, encoding="utf-8") as src:
        source_lines = src.read().splitlines()
    with open(target_path, encoding="utf-8") as tgt:
        target_lines = tgt.read().splitlines()
    if len(source_lines) != len(target_lines):
        raise ChunkError(
            f"source and target files differ in length: "
            f"{len(source_lines)} vs {len(target_lines)}"
        )
    examples = []
    for s_line, t_line in zip(source_lines, target_lines):
        examples.append(
            ChunkExample(tuple(s_line.split()), tuple(t_line.split()), k)
        )
    return examples
