"""Symbol vocabulary shared by the encoder and decoder."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3
PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK)


class VocabularyError(ValueError):
    pass


@dataclass(frozen=True)
class Vocabulary:
    """Bijective symbol<->id map; specials occupy ids 0..3."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if self.symbols[: len(SPECIALS)] != SPECIALS:
            raise VocabularyError(f"ids 0..3 must be {SPECIALS}")
        if len(set(self.symbols)) != len(self.symbols):
            raise VocabularyError("duplicate symbols in vocabulary")

    @cached_property
    def symbol_to_id(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.symbols)}

    @property
    def size(self) -> int:
        return len(self.symbols)

    def id_of(self, symbol: str) -> int:
        """Dense id for a symbol; unknown symbols map to UNK."""
        return self.symbol_to_id.get(symbol, UNK_ID)

    def encode(self, symbols: Iterable[str]) -> list[int]:
        table = self.symbol_to_id
        return [table.get(s, UNK_ID) for s in symbols]

    def decode(self, ids: Iterable[int]) -> list[str]:
        """Symbols for ids, dropping the special ids."""
        return [
            self.symbols[i]
            for i in ids
            if 0 <= i < len(self.symbols) and i >= len(SPECIALS)
        ]


def build_vocab(examples: Sequence) -> Vocabulary:
    """Union of source and target symbols, specials first, rest sorted.

    Deterministic: two builds on the same data give the same mapping.
    """
    if not examples:
        raise VocabularyError("cannot build a vocabulary from no examples")
    seen: set[str] = set()
    for ex in examples:
        seen.update(ex.source)
        seen.update(ex.target)
    for special in SPECIALS:
        if special in seen:
            raise VocabularyError(f"data contains reserved symbol {special!r}")
    for sym in seen:
        if sym.isspace() or sym == "":
            raise VocabularyError(f"whitespace symbol {sym!r} in data")
    return Vocabulary(SPECIALS + tuple(sorted(seen)))
