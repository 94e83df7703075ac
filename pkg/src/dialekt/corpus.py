"""Corpus ingestion, cleaning, tokenization, and train/test splitting.

The corpus file format is tab-separated UTF-8 with a header row
``region<TAB>dialect<TAB>normalized`` (an optional fourth ``line_id``
column is accepted). Cleaning lowercases, rewrites digit and symbol
sequences through a user-supplied table, strips punctuation, and fails
closed on anything non-alphabetic that survives.
"""

from __future__ import annotations

import math
import random
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence


class CorpusError(ValueError):
    """Base class for corpus loading and cleaning failures."""


class CorpusParseError(CorpusError):
    """Structurally malformed corpus file (wrong column count, bad header)."""


class CorpusValidationError(CorpusError):
    """Well-formed row with inadmissible content (unknown region, duplicate id)."""


class CleanlinessError(CorpusError):
    """Non-alphabetic characters survived cleaning."""

    def __init__(self, offending: Iterable[str], context: str = ""):
        self.offending = sorted(set(offending))
        suffix = f" in {context!r}" if context else ""
        super().__init__(
            f"unrewritten non-alphabetic characters {self.offending}{suffix}; "
            "add entries to the rewrite table"
        )


class Region(Enum):
    """The six admissible dialect regions."""

    NYLAND = "Nyland"
    ALAND = "Åland"
    ABOLAND = "Åboland"
    OSTERBOTTEN = "Österbotten"
    BIRKALAND = "Birkaland"
    KYMMENEDALEN = "Kymmenedalen"

    @classmethod
    def from_label(cls, label: str) -> "Region":
        for region in cls:
            if region.value == label:
                return region
        raise CorpusValidationError(
            f"unknown region {label!r}; expected one of "
            f"{[r.value for r in cls]}"
        )


@dataclass(frozen=True)
class UtteranceRecord:
    """One transcript line: a speaker turn and its hand-normalized form."""

    region: Region
    dialect: str
    normalized: str
    line_id: str


@dataclass(frozen=True)
class Corpus:
    records: tuple[UtteranceRecord, ...]

    def __post_init__(self):
        seen: set[str] = set()
        for rec in self.records:
            if rec.line_id in seen:
                raise CorpusValidationError(f"duplicate line_id {rec.line_id!r}")
            seen.add(rec.line_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


@dataclass(frozen=True)
class TokenizedPair:
    """A cleaned, tokenized utterance. ``region`` is None for synthetic data."""

    dialect_tokens: tuple[str, ...]
    normalized_tokens: tuple[str, ...]
    region: Optional[Region] = None


@dataclass(frozen=True)
class SplitCorpus:
    train: tuple[TokenizedPair, ...]
    test: tuple[TokenizedPair, ...]
    seed: int
    ratio: float


_HEADER_3 = ["region", "dialect", "normalized"]
_HEADER_4 = ["region", "dialect", "normalized", "line_id"]


def load_corpus(path) -> Corpus:
    """Read a corpus TSV into a Corpus of UtteranceRecords.

    Rows have 3 tab-separated fields (region, dialect, normalized); a
    4th line_id field is accepted and otherwise ids are the 1-based data
    row number. An empty file yields an empty corpus.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        return Corpus(())

    header = lines[0].split("\t")
    if header == _HEADER_3:
        ncols = 3
    elif header == _HEADER_4:
        ncols = 4
    else:
        raise CorpusParseError(
            f"line 1: bad header {lines[0]!r}; expected "
            f"{chr(9).join(_HEADER_3)!r}"
        )

    records = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if raw == "":
            continue
        fields = raw.split("\t")
        if len(fields) != ncols:
            raise CorpusParseError(
                f"line {lineno}: expected {ncols} tab-separated fields, "
                f"got {len(fields)}"
            )
        region = Region.from_label(fields[0])
        dialect, normalized = fields[1], fields[2]
        if not dialect.strip() or not normalized.strip():
            raise CorpusValidationError(
                f"line {lineno}: empty dialect or normalized field"
            )
        line_id = fields[3] if ncols == 4 else str(lineno - 1)
        records.append(UtteranceRecord(region, dialect, normalized, line_id))
    return Corpus(tuple(records))


RewriteTable = Sequence[tuple[str, str]]


def load_rewrite_table(path) -> list[tuple[str, str]]:
    """Read a two-column TSV ``surface<TAB>replacement`` rewrite table."""
    table = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise CorpusParseError(
                    f"rewrite table line {lineno}: expected 2 fields, "
                    f"got {len(fields)}"
                )
            table.append((fields[0], fields[1]))
    return table


def _as_pairs(table: Optional[RewriteTable | Mapping[str, str]]) -> list[tuple[str, str]]:
    if table is None:
        return []
    if isinstance(table, Mapping):
        return list(table.items())
    return list(table)


_WS_RE = re.compile(r"\s+")


def clean_text(text: str, rewrite_table: Optional[RewriteTable | Mapping[str, str]] = None) -> str:
    """Lowercase, rewrite non-alphabetic sequences, and strip punctuation.

    Digit and symbol sequences must be covered by the rewrite table;
    anything non-alphabetic left after rewriting raises CleanlinessError
    rather than being silently kept. The output contains only letters,
    single spaces, and word-internal apostrophes.
    """
    pairs = _as_pairs(rewrite_table)
    out = unicodedata.normalize("NFC", text).lower()
    out = out.replace("’", "'")
    # longest surface first so e.g. "1932" wins over "1"
    for surface, replacement in sorted(pairs, key=lambda p: len(p[0]), reverse=True):
        out = out.replace(surface, replacement)

    kept: list[str] = []
    offending: list[str] = []
    n = len(out)
    for idx, ch in enumerate(out):
        cat = unicodedata.category(ch)
        if cat.startswith("L"):
            kept.append(ch)
        elif ch.isspace():
            kept.append(" ")
        elif ch == "'":
            prev_ok = idx > 0 and unicodedata.category(out[idx - 1]).startswith("L")
            next_ok = idx + 1 < n and unicodedata.category(out[idx + 1]).startswith("L")
            if prev_ok and next_ok:
                kept.append(ch)
            # otherwise stray quote punctuation: drop
        elif cat.startswith("P"):
            pass  # punctuation is deleted outright
        else:
            offending.append(ch)
    if offending:
        raise CleanlinessError(offending, context=text)
    return _WS_RE.sub(" ", "".join(kept)).strip()


def tokenize(text: str) -> list[str]:
    """Split cleaned text on whitespace runs; never yields empty tokens."""
    return text.split()


def tokenize_corpus(
    corpus: Corpus,
    rewrite_table: Optional[RewriteTable | Mapping[str, str]] = None,
) -> list[TokenizedPair]:
    """Clean and tokenize every record; both sides must stay non-empty."""
    pairs = []
    for rec in corpus:
        d = tokenize(clean_text(rec.dialect, rewrite_table))
        n = tokenize(clean_text(rec.normalized, rewrite_table))
        if not d or not n:
            raise CorpusValidationError(
                f"line_id {rec.line_id}: text empty after cleaning"
            )
        pairs.append(TokenizedPair(tuple(d), tuple(n), rec.region))
    return pairs


def split_train_test(
    pairs: Sequence[TokenizedPair],
    ratio: float = 0.7,
    seed: int = 3435,
    stratified: bool = False,
) -> SplitCorpus:
    """Seeded line-level shuffle; the first ceil(ratio*N) lines go to train.

    With stratified=True the split is done per region (regionless pairs
    form their own stratum); the default matches an unstratified shuffle
    of the whole corpus.
    """
    if not pairs:
        raise CorpusError("cannot split an empty corpus")
    if not 0.0 < ratio < 1.0:
        raise CorpusError(f"ratio must be in (0, 1), got {ratio}")

    rng = random.Random(seed)

    def split_group(group: list[TokenizedPair]):
        indices = list(range(len(group)))
        rng.shuffle(indices)
        # exact arithmetic so float dust cannot push the boundary
        n_train = math.ceil(Fraction(ratio) * len(group))
        return (
            [group[i] for i in indices[:n_train]],
            [group[i] for i in indices[n_train:]],
        )

    if stratified:
        groups: dict[str, list[TokenizedPair]] = {}
        for p in pairs:
            key = p.region.value if p.region is not None else "￿"
            groups.setdefault(key, []).append(p)
        train: list[TokenizedPair] = []
        test: list[TokenizedPair] = []
        for key in sorted(groups):
            tr, te = split_group(groups[key])
            train.extend(tr)
            test.extend(te)
    else:
        train, test = split_group(list(pairs))
    return SplitCorpus(tuple(train), tuple(test), seed, ratio)


@dataclass(frozen=True)
class CharRule:
    """Regex rewrite applied to each standard word (standard -> dialect)."""

    pattern: str
    replacement: str
    prob: float = 1.0


@dataclass(frozen=True)
class ContractionRule:
    """Two adjacent standard words realized as one dialect token."""

    words: tuple[str, str]
    contraction: str
    prob: float = 1.0


SynthRule = CharRule | ContractionRule


def perturb_word(word: str, rules: Sequence[SynthRule], rng: random.Random) -> str:
    out = word
    for rule in rules:
        if not isinstance(rule, CharRule):
            continue
        if rule.prob >= 1.0 or rng.random() < rule.prob:
            out = re.sub(rule.pattern, rule.replacement, out)
    return out


def generate_synthetic_corpus(
    rules: Sequence[SynthRule],
    lexicon: Sequence[str],
    n_lines: int,
    seed: int,
    min_words: int = 3,
    max_words: int = 8,
) -> list[TokenizedPair]:
    """Sample standard-word lines and derive the dialect side by rule.

    Character rules perturb single words, so token counts match on both
    sides; contraction rules merge a declared adjacent standard pair
    into one dialect token. Deterministic for a fixed seed.
    """
    if not lexicon:
        raise CorpusError("synthetic corpus needs a non-empty lexicon")
    contractions = {
        r.words: r for r in rules if isinstance(r, ContractionRule)
    }
    rng = random.Random(seed)
    pairs = []
    for _ in range(n_lines):
        length = rng.randint(min_words, max_words)
        standard = [rng.choice(lexicon) for _ in range(length)]
        dialect: list[str] = []
        i = 0
        while i < len(standard):
            rule = (
                contractions.get((standard[i], standard[i + 1]))
                if i + 1 < len(standard)
                else None
            )
            if rule is not None and (rule.prob >= 1.0 or rng.random() < rule.prob):
                dialect.append(rule.contraction)
                i += 2
            else:
                dialect.append(perturb_word(standard[i], rules, rng))
                i += 1
        pairs.append(TokenizedPair(tuple(dialect), tuple(standard), None))
    return pairs


def save_pairs(pairs: Iterable[TokenizedPair], path) -> None:
    """Write tokenized pairs, one utterance per line.

    Columns: ``dialect tokens<TAB>normalized tokens`` plus a trailing
    region column when the pair has one.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for p in pairs:
            row = [" ".join(p.dialect_tokens), " ".join(p.normalized_tokens)]
            if p.region is not None:
                row.append(p.region.value)
            fh.write("\t".join(row) + "\n")


def load_pairs(path) -> list[TokenizedPair]:
    """Read a tokenized-pairs file (2 or 3 columns per line)."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) not in (2, 3):
                raise CorpusParseError(
                    f"pairs file line {lineno}: expected 2 or 3 fields, "
                    f"got {len(fields)}"
                )
            region = Region.from_label(fields[2]) if len(fields) == 3 else None
            dialect = tuple(fields[0].split())
            normalized = tuple(fields[1].split())
            if not dialect or not normalized:
                raise CorpusValidationError(
                    f"pairs file line {lineno}: empty token list"
                )
            pairs.append(TokenizedPair(dialect, normalized, region))
    return pairs
