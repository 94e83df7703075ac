"""Statistical token alignment for unequal-length dialect/normalized lines.

A lexical translation table t(normalized | dialect) is estimated by EM
under a fixed diagonal-preference distortion prior, in the spirit of the
reparameterized-model-2 family of fast word aligners. Each normalized
token is then Viterbi-aligned to one dialect token (or NULL) and the
links are projected into per-dialect-token pairs.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .corpus import TokenizedPair

NULL_TOKEN = "<NULL>"
_DEFAULT_ROW_TOKEN = "<OTHER>"

ALIGNER_FORMAT_HEADER = "dialekt-aligner v1"


class AlignerError(ValueError):
    pass


class AlignerFormatError(AlignerError):
    """Unreadable or version-mismatched aligner model file."""


@dataclass(frozen=True)
class AlignerConfig:
    diagonal_tension: float = 4.0
    p_null: float = 0.08
    smoothing_alpha: float = 0.01
    em_iterations: int = 5

    def __post_init__(self):
        if self.diagonal_tension < 0:
            raise AlignerError("diagonal_tension must be >= 0")
        if not 0.0 <= self.p_null < 1.0:
            raise AlignerError("p_null must be in [0, 1)")
        if self.smoothing_alpha < 0:
            raise AlignerError("smoothing_alpha must be >= 0")
        if self.em_iterations < 1:
            raise AlignerError("em_iterations must be >= 1")


@dataclass(frozen=True)
class AlignmentLink:
    """One normalized-token position linked to a dialect position or NULL."""

    target_index: int
    source_index: Optional[int]


@dataclass(frozen=True)
class TokenPair:
    """A dialect token and its normalization (possibly empty or multi-word)."""

    dialect: str
    normalized: str


@lru_cache(maxsize=4096)
def _distortion_row(i: int, m: int, n: int, tension: float, p_null: float) -> tuple[float, ...]:
    # p(j | i) for j = 0..n-1; NULL mass is p_null on top
    weights = [math.exp(-tension * abs(i / m - j / n)) for j in range(n)]
    z = sum(weights)
    return tuple((1.0 - p_null) * w / z for w in weights)


def distortion_prob(
    i: int,
    j: Optional[int],
    m: int,
    n: int,
    config: AlignerConfig,
) -> float:
    """Diagonal-preference prior for aligning target position i to source j.

    NULL (j=None) receives p_null; real positions share the remaining
    mass proportionally to exp(-tension * |i/m - j/n|). The returned
    values over {NULL} + {0..n-1} sum to 1.
    """
    if m <= 0 or n <= 0:
        raise AlignerError(f"line lengths must be positive, got m={m} n={n}")
    if not 0 <= i < m:
        raise AlignerError(f"target position {i} out of range for length {m}")
    if j is None:
        return config.p_null
    if not 0 <= j < n:
        raise AlignerError(f"source position {j} out of range for length {n}")
    return _distortion_row(i, m, n, config.diagonal_tension, config.p_null)[j]


@dataclass
class AlignmentModel:
    """Sparse translation table plus per-source default mass for unseen targets."""

    translation: dict[str, dict[str, float]]
    default_prob: dict[str, float]
    source_vocab: frozenset[str]
    target_vocab: frozenset[str]
    config: AlignerConfig
    log_likelihoods: list[float] = field(default_factory=list)

    def prob(self, target: str, source: Optional[str]) -> float:
        """t(target | source); source=None means NULL. Backs off to uniform
        over the target vocabulary for tokens unseen in training."""
        uniform = 1.0 / max(1, len(self.target_vocab))
        if target not in self.target_vocab:
            return uniform
        key = NULL_TOKEN if source is None else source
        row = self.translation.get(key)
        if row is None:
            return uniform
        return row.get(target, self.default_prob.get(key, 0.0))

    def row_sum(self, source: Optional[str]) -> float:
        """Total probability mass of one table row over the whole target vocab."""
        key = NULL_TOKEN if source is None else source
        row = self.translation.get(key)
        if row is None:
            return 1.0
        explicit = sum(row.values())
        rest = (len(self.target_vocab) - len(row)) * self.default_prob.get(key, 0.0)
        return explicit + rest


def _line_posteriors(
    dialect: Sequence[str],
    normalized: Sequence[str],
    prob,
    config: AlignerConfig,
):
    """Yield (i, posteriors over sources + NULL, likelihood) per target token."""
    n, m = len(dialect), len(normalized)
    for i, e_tok in enumerate(normalized):
        row = _distortion_row(i, m, n, config.diagonal_tension, config.p_null)
        terms = [row[j] * prob(e_tok, f_tok) for j, f_tok in enumerate(dialect)]
        null_term = config.p_null * prob(e_tok, None)
        total = sum(terms) + null_term
        yield i, terms, null_term, total


def train_aligner(
    pairs: Sequence[TokenizedPair],
    config: AlignerConfig = AlignerConfig(),
) -> AlignmentModel:
    """EM estimation of the translation table with the distortion prior fixed.

    Initialization is uniform, so training is deterministic. The model
    records the corpus log-likelihood measured at the start of each
    iteration; without smoothing that sequence never decreases.
    """
    usable = [p for p in pairs if p.dialect_tokens and p.normalized_tokens]
    if not usable:
        raise AlignerError("cannot train an aligner on an empty corpus")

    target_vocab = frozenset(t for p in usable for t in p.normalized_tokens)
    source_vocab = frozenset(t for p in usable for t in p.dialect_tokens)
    n_targets = len(target_vocab)
    alpha = config.smoothing_alpha

    model = AlignmentModel(
        translation={},
        default_prob={},
        source_vocab=source_vocab,
        target_vocab=target_vocab,
        config=config,
    )

    for _ in range(config.em_iterations):
        counts: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
        totals: dict[str, float] = defaultdict(float)
        log_likelihood = 0.0
        for pair in usable:
            dialect = pair.dialect_tokens
            for i, terms, null_term, total in _line_posteriors(
                dialect, pair.normalized_tokens, model.prob, config
            ):
                e_tok = pair.normalized_tokens[i]
                log_likelihood += math.log(total)
                for j, term in enumerate(terms):
                    if term > 0.0:
                        post = term / total
                        counts[dialect[j]][e_tok] += post
                        totals[dialect[j]] += post
                if null_term > 0.0:
                    post = null_term / total
                    counts[NULL_TOKEN][e_tok] += post
                    totals[NULL_TOKEN] += post
        model.log_likelihoods.append(log_likelihood)

        translation: dict[str, dict[str, float]] = {}
        default_prob: dict[str, float] = {}
        for source in [*source_vocab, NULL_TOKEN]:
            denom = totals.get(source, 0.0) + alpha * n_targets
            if denom <= 0.0:
                # no evidence and no smoothing: stay uniform
                translation[source] = {}
                default_prob[source] = 1.0 / n_targets
                continue
            translation[source] = {
                e: (c + alpha) / denom for e, c in counts.get(source, {}).items()
            }
            default_prob[source] = alpha / denom
        model.translation = translation
        model.default_prob = default_prob

    return model


def corpus_log_likelihood(model: AlignmentModel, pairs: Sequence[TokenizedPair]) -> float:
    """Sum over target tokens of log p(token | line) under the model."""
    total = 0.0
    for pair in pairs:
        if not pair.dialect_tokens or not pair.normalized_tokens:
            continue
        for _, _, _, line_total in _line_posteriors(
            pair.dialect_tokens, pair.normalized_tokens, model.prob, model.config
        ):
            total += math.log(line_total)
    return total


def viterbi_align(
    model: AlignmentModel,
    dialect_tokens: Sequence[str],
    normalized_tokens: Sequence[str],
) -> list[AlignmentLink]:
    """Per-target argmax over sources and NULL; ties prefer the smallest
    source position and a real position over NULL."""
    if not dialect_tokens or not normalized_tokens:
        raise AlignerError("viterbi_align needs non-empty token lists")
    n, m = len(dialect_tokens), len(normalized_tokens)
    config = model.config
    links = []
    for i, e_tok in enumerate(normalized_tokens):
        row = _distortion_row(i, m, n, config.diagonal_tension, config.p_null)
        best_j: Optional[int] = None
        best_score = -1.0
        for j, f_tok in enumerate(dialect_tokens):
            score = row[j] * model.prob(e_tok, f_tok)
            if score > best_score:
                best_score = score
                best_j = j
        null_score = config.p_null * model.prob(e_tok, None)
        if null_score > best_score:
            best_j = None
        links.append(AlignmentLink(target_index=i, source_index=best_j))
    return links


def project_token_pairs(
    dialect_tokens: Sequence[str],
    normalized_tokens: Sequence[str],
    links: Sequence[AlignmentLink],
) -> list[TokenPair]:
    """Turn target->source links into one TokenPair per dialect token.

    Every normalized token lands in exactly one pair, in target order.
    NULL-linked tokens attach to the dialect token that most recently
    received a link, or to the first dialect token when none has yet.
    """
    buckets: list[list[tuple[int, str]]] = [[] for _ in dialect_tokens]
    last_linked: Optional[int] = None
    for link in sorted(links, key=lambda l: l.target_index):
        token = normalized_tokens[link.target_index]
        if link.source_index is None:
            dest = last_linked if last_linked is not None else 0
        else:
            dest = link.source_index
            last_linked = dest
        buckets[dest].append((link.target_index, token))
    return [
        TokenPair(
            dialect=dialect_tokens[j],
            normalized=" ".join(tok for _, tok in sorted(bucket)),
        )
        for j, bucket in enumerate(buckets)
    ]


def pair_line(pair: TokenizedPair, model: AlignmentModel) -> list[TokenPair]:
    """Equal-length lines zip positionally; only unequal lines are aligned."""
    if len(pair.dialect_tokens) == len(pair.normalized_tokens):
        return [
            TokenPair(d, n)
            for d, n in zip(pair.dialect_tokens, pair.normalized_tokens)
        ]
    links = viterbi_align(model, pair.dialect_tokens, pair.normalized_tokens)
    return project_token_pairs(pair.dialect_tokens, pair.normalized_tokens, links)


def save_aligner(model: AlignmentModel, path) -> None:
    """Versioned flat file: header, config comments, then
    ``source<TAB>target<TAB>prob`` rows with 17 significant digits."""
    cfg = model.config
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(ALIGNER_FORMAT_HEADER + "\n")
        fh.write(f"# diagonal_tension={cfg.diagonal_tension!r}\n")
        fh.write(f"# p_null={cfg.p_null!r}\n")
        fh.write(f"# smoothing_alpha={cfg.smoothing_alpha!r}\n")
        fh.write(f"# em_iterations={cfg.em_iterations}\n")
        fh.write(f"# source_vocab_size={len(model.source_vocab)}\n")
        fh.write(f"# target_vocab_size={len(model.target_vocab)}\n")
        for source in sorted(model.translation):
            row = model.translation[source]
            for target in sorted(row):
                fh.write(f"{source}\t{target}\t{row[target]:.17g}\n")
            fh.write(
                f"{source}\t{_DEFAULT_ROW_TOKEN}\t"
                f"{model.default_prob.get(source, 0.0):.17g}\n"
            )


def load_aligner(path) -> AlignmentModel:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != ALIGNER_FORMAT_HEADER:
            raise AlignerFormatError(
                f"bad aligner file header {header!r}; expected "
                f"{ALIGNER_FORMAT_HEADER!r}"
            )
        meta: dict[str, str] = {}
        translation: dict[str, dict[str, float]] = {}
        default_prob: dict[str, float] = {}
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("# "):
                key, _, value = line[2:].partition("=")
                meta[key] = value
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise AlignerFormatError(
                    f"line {lineno}: expected source, target, prob"
                )
            source, target, prob_text = fields
            try:
                prob = float(prob_text)
            except ValueError as exc:
                raise AlignerFormatError(
                    f"line {lineno}: bad probability {prob_text!r}"
                ) from exc
            if target == _DEFAULT_ROW_TOKEN:
                default_prob[source] = prob
                translation.setdefault(source, {})
            else:
                translation.setdefault(source, {})[target] = prob

    try:
        config = AlignerConfig(
            diagonal_tension=float(meta["diagonal_tension"]),
            p_null=float(meta["p_null"]),
            smoothing_alpha=float(meta["smoothing_alpha"]),
            em_iterations=int(meta["em_iterations"]),
        )
    except KeyError as exc:
        raise AlignerFormatError(f"missing config entry {exc}") from exc

    source_vocab = frozenset(k for k in translation if k != NULL_TOKEN)
    target_vocab = frozenset(
        t for row in translation.values() for t in row
    )
    for key, expected in (
        ("source_vocab_size", len(source_vocab)),
        ("target_vocab_size", len(target_vocab)),
    ):
        if key in meta and int(meta[key]) != expected:
            raise AlignerFormatError(
                f"{key} mismatch: file says {meta[key]}, rows give {expected}"
            )
    return AlignmentModel(
        translation=translation,
        default_prob=default_prob,
        source_vocab=source_vocab,
        target_vocab=target_vocab,
        config=config,
    )
