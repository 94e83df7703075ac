"""Word-level edit-distance scoring and the chunk-size experiment matrix.

WER = (S + D + I) / (S + D + C) and accuracy = C / (S + D + C), both
computed from one minimal-cost alignment per line and micro-averaged by
summing counts over the corpus before dividing. Both are ratios here;
reports display them multiplied by 100.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Iterable, Optional, Sequence

from .aligner import AlignerConfig, train_aligner, pair_line
from .chunker import make_examples
from .corpus import Region, TokenizedPair
from .model.network import ModelConfig
from .model.train import train_model
from .model.decode import normalize_tokens


class EvalError(ValueError):
    pass


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class EditCounts:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    correct: int = 0

    def __post_init__(self):
        for name in ("substitutions", "deletions", "insertions", "correct"):
            if getattr(self, name) < 0:
                raise EvalError(f"{name} must be non-negative")

    def __add__(self, other: "EditCounts") -> "EditCounts":
        return EditCounts(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.correct + other.correct,
        )

    @property
    def reference_length(self) -> int:
        return self.substitutions + self.deletions + self.correct

    @property
    def hypothesis_length(self) -> int:
        return self.substitutions + self.insertions + self.correct


def word_edit_counts(reference: Sequence[str], hypothesis: Sequence[str]) -> EditCounts:
    """Counts from one minimal-cost word alignment of hypothesis to reference.

    Unit costs for substitution, deletion, insertion; zero for a match.
    When several minimal alignments exist the backtrace prefers
    match > substitution > deletion > insertion, so counts are
    deterministic; the total cost S+D+I is the Levenshtein distance
    either way.
    """
    m, n = len(reference), len(hypothesis)
    dist = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        dist[i][0] = i
    for j in range(1, n + 1):
        dist[0][j] = j
    for i in range(1, m + 1):
        row = dist[i]
        prev = dist[i - 1]
        ref_word = reference[i - 1]
        for j in range(1, n + 1):
            diag = prev[j - 1] + (0 if ref_word == hypothesis[j - 1] else 1)
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)

    S = D = I = C = 0
    i, j = m, n
    while i > 0 or j > 0:
        if i > 0 and j > 0 and reference[i - 1] == hypothesis[j - 1] \
                and dist[i][j] == dist[i - 1][j - 1]:
            C += 1
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and dist[i][j] == dist[i - 1][j - 1] + 1:
            S += 1
            i, j = i - 1, j - 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            D += 1
            i -= 1
        else:
            I += 1
            j -= 1
    return EditCounts(S, D, I, C)


def wer(counts: EditCounts) -> float:
    """(S + D + I) / (S + D + C), as a ratio; can exceed 1."""
    denom = counts.reference_length
    if denom == 0:
        raise EvalError("WER is undefined for an empty reference")
    return (counts.substitutions + counts.deletions + counts.insertions) / denom


def accuracy(counts: EditCounts) -> float:
    """C / (S + D + C): the share of reference words reproduced exactly."""
    denom = counts.reference_length
    if denom == 0:
        raise EvalError("accuracy is undefined for an empty reference")
    return counts.correct / denom


@dataclass(frozen=True)
class ScoredCounts:
    counts: EditCounts
    wer: float
    accuracy: float

    @classmethod
    def from_counts(cls, counts: EditCounts) -> "ScoredCounts":
        return cls(counts, wer(counts), accuracy(counts))


@dataclass(frozen=True)
class EvalReport:
    system_label: str
    counts: EditCounts
    wer: float
    accuracy: float
    per_region: dict[Region, ScoredCounts]


NormalizeFn = Callable[[Sequence[str]], Sequence[str]]


def evaluate_system(
    normalize_fn: NormalizeFn,
    test_pairs: Sequence[TokenizedPair],
    system_label: str = "system",
) -> EvalReport:
    """Score a tokens->tokens function against gold normalizations.

    Edit counts are summed over all lines (and per region) before the
    ratios are taken. The identity function gives the no-normalization
    baseline.
    """
    if not test_pairs:
        raise EvalError("cannot evaluate on an empty test set")
    total = EditCounts()
    regional: dict[Region, EditCounts] = {}
    for pair in test_pairs:
        hypothesis = list(normalize_fn(list(pair.dialect_tokens)))
        counts = word_edit_counts(pair.normalized_tokens, hypothesis)
        total = total + counts
        if pair.region is not None:
            regional[pair.region] = regional.get(pair.region, EditCounts()) + counts
    return EvalReport(
        system_label=system_label,
        counts=total,
        wer=wer(total),
        accuracy=accuracy(total),
        per_region={r: ScoredCounts.from_counts(c) for r, c in sorted(
            regional.items(), key=lambda item: item[0].value)},
    )


def baseline_report(test_pairs: Sequence[TokenizedPair]) -> EvalReport:
    return evaluate_system(lambda tokens: tokens, test_pairs, "no normalization")


def run_experiment_matrix(
    train_pairs: Sequence[TokenizedPair],
    test_pairs: Sequence[TokenizedPair],
    chunk_sizes: Iterable[int],
    model_config: ModelConfig,
    aligner_config: Optional[AlignerConfig] = None,
) -> list[EvalReport]:
    """Baseline row plus one trained-and-scored row per chunk size.

    The token aligner is fit on train and test together (it is an
    unsupervised preprocessing step and is only used to build training
    examples); every model shares model_config.seed so the rows are
    comparable.
    """
    sizes = sorted(set(chunk_sizes))
    reports = [baseline_report(test_pairs)]
    alignment = train_aligner(
        list(train_pairs) + list(test_pairs), aligner_config or AlignerConfig()
    )
    for k in sizes:
        label = f"chunk of {k}"
        try:
            examples = [
                ex
                for pair in train_pairs
                for ex in make_examples(pair_line(pair, alignment), k)
            ]
            model, _ = train_model(examples, model_config)
            report = evaluate_system(
                lambda tokens: normalize_tokens(model, tokens), test_pairs, label
            )
        except Exception as exc:
            raise ExperimentError(f"{label}: {exc}") from exc
        reports.append(report)
    return reports


def format_report_table(reports: Sequence[EvalReport]) -> str:
    """Human-readable table; WER and accuracy are shown x100."""
    label_width = max(len(r.system_label) for r in reports)
    lines = [f"{'system':<{label_width}}  {'WER':>8}  {'accuracy':>8}"]
    for r in reports:
        lines.append(
            f"{r.system_label:<{label_width}}  {100 * r.wer:>8.2f}  "
            f"{100 * r.accuracy:>7.1f}%"
        )
    return "\n".join(lines)


def format_report_kv(reports: Sequence[EvalReport]) -> str:
    """Machine-readable key=value blocks, one per system."""
    blocks = []
    for r in reports:
        lines = [
            f"[system {r.system_label}]",
            f"S={r.counts.substitutions}",
            f"D={r.counts.deletions}",
            f"I={r.counts.insertions}",
            f"C={r.counts.correct}",
            f"wer={100 * r.wer:.17g}",
            f"accuracy={100 * r.accuracy:.17g}",
        ]
        for region, scored in r.per_region.items():
            prefix = f"region.{region.value}"
            lines.extend(
                [
                    f"{prefix}.S={scored.counts.substitutions}",
                    f"{prefix}.D={scored.counts.deletions}",
                    f"{prefix}.I={scored.counts.insertions}",
                    f"{prefix}.C={scored.counts.correct}",
                    f"{prefix}.wer={100 * scored.wer:.17g}",
                    f"{prefix}.accuracy={100 * scored.accuracy:.17g}",
                ]
            )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
