"""Command-line pipeline: preprocess, align, chunk, train, normalize,
evaluate, experiment, synth.

Stages communicate through files so each is independently runnable and
resumable. Diagnostics go to stderr, data to stdout, and the exit code
is 0 exactly when the command succeeded. All randomness is funneled
through --seed (default 3435).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import aligner as aligner_mod
from . import chunker, corpus, evaluation
from .model import (
    ModelConfig,
    beam_decode,
    load_model,
    normalize_tokens,
    save_model,
    train_model,
)


class CliError(RuntimeError):
    pass


def _model_config(args) -> ModelConfig:
    return ModelConfig(
        embedding_dim=args.embedding_dim,
        hidden_dim=args.hidden_dim,
        encoder_layers=args.encoder_layers,
        decoder_layers=args.decoder_layers,
        dropout=args.dropout,
        seed=args.seed,
        train_steps=args.steps,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        beam_width=args.beam_width,
        max_decode_len=args.max_decode_len,
    )


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    defaults = ModelConfig()
    parser.add_argument("--embedding-dim", type=int, default=defaults.embedding_dim)
    parser.add_argument("--hidden-dim", type=int, default=defaults.hidden_dim)
    parser.add_argument("--encoder-layers", type=int, default=defaults.encoder_layers)
    parser.add_argument("--decoder-layers", type=int, default=defaults.decoder_layers)
    parser.add_argument("--dropout", type=float, default=defaults.dropout)
    parser.add_argument("--steps", type=int, default=defaults.train_steps,
                        help="number of training steps")
    parser.add_argument("--batch-size", type=int, default=defaults.batch_size)
    parser.add_argument("--learning-rate", type=float, default=defaults.learning_rate)
    parser.add_argument("--beam-width", type=int, default=defaults.beam_width)
    parser.add_argument("--max-decode-len", type=int, default=defaults.max_decode_len)


def _add_aligner_flags(parser: argparse.ArgumentParser) -> None:
    defaults = aligner_mod.AlignerConfig()
    parser.add_argument("--tension", type=float, default=defaults.diagonal_tension,
                        help="diagonal preference strength")
    parser.add_argument("--p-null", type=float, default=defaults.p_null)
    parser.add_argument("--alpha", type=float, default=defaults.smoothing_alpha,
                        help="add-alpha smoothing on translation counts")
    parser.add_argument("--iterations", type=int, default=defaults.em_iterations)


def _aligner_config(args) -> aligner_mod.AlignerConfig:
    return aligner_mod.AlignerConfig(
        diagonal_tension=args.tension,
        p_null=args.p_null,
        smoothing_alpha=args.alpha,
        em_iterations=args.iterations,
    )


def cmd_preprocess(args) -> int:
    table = corpus.load_rewrite_table(args.rewrites) if args.rewrites else []
    loaded = corpus.load_corpus(args.corpus)
    pairs = []
    rewritten: list[str] = []
    rejected: list[str] = []
    for rec in loaded:
        applied = [
            f"line {rec.line_id}: {surface!r} -> {replacement!r}"
            for surface, replacement in table
            if surface in rec.dialect.lower() or surface in rec.normalized.lower()
        ]
        try:
            dialect = corpus.tokenize(corpus.clean_text(rec.dialect, table))
            normalized = corpus.tokenize(corpus.clean_text(rec.normalized, table))
        except corpus.CleanlinessError as exc:
            raise CliError(f"line {rec.line_id}: {exc}") from exc
        if not dialect or not normalized:
            rejected.append(f"line {rec.line_id}: empty after cleaning")
            continue
        rewritten.extend(applied)
        pairs.append(
            corpus.TokenizedPair(tuple(dialect), tuple(normalized), rec.region)
        )
    corpus.save_pairs(pairs, args.out)

    report_lines = [
        f"rows_total={len(loaded)}",
        f"rows_written={len(pairs)}",
        f"rows_rewritten={len(rewritten)}",
        f"rows_rejected={len(rejected)}",
        "[rewritten]",
        *rewritten,
        "[rejected]",
        *rejected,
    ]
    report = "\n".join(report_lines) + "\n"
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report)
    else:
        sys.stdout.write(report)
    return 0


def cmd_align(args) -> int:
    pairs = corpus.load_pairs(args.pairs)
    model = aligner_mod.train_aligner(pairs, _aligner_config(args))
    aligner_mod.save_aligner(model, args.out)
    lls = ", ".join(f"{ll:.2f}" for ll in model.log_likelihoods)
    print(f"aligner trained on {len(pairs)} lines; log-likelihood per iteration: {lls}",
          file=sys.stderr)
    return 0


def cmd_chunk(args) -> int:
    pairs = corpus.load_pairs(args.pairs)
    if args.aligner:
        alignment = aligner_mod.load_aligner(args.aligner)
    else:
        # equal-length lines zip positionally; the aligner only matters
        # for unequal lines, and is fit on this same file when omitted
        alignment = aligner_mod.train_aligner(pairs, _aligner_config(args))
    examples = [
        ex
        for pair in pairs
        for ex in chunker.make_examples(
            aligner_mod.pair_line(pair, alignment), args.chunk_size
        )
    ]
    chunker.write_examples(examples, args.source_out, args.target_out)
    print(f"wrote {len(examples)} examples", file=sys.stderr)
    return 0


def cmd_train(args) -> int:
    examples = chunker.read_examples(args.source, args.target, args.chunk_size)
    model, report = train_model(examples, _model_config(args))
    save_model(model, args.out)
    print(
        f"trained {report.steps_run} steps; "
        f"final training loss {report.final_training_loss:.4f} nats/symbol",
        file=sys.stderr,
    )
    return 0


def cmd_normalize(args) -> int:
    model = load_model(args.model)
    stream = open(args.input, encoding="utf-8") if args.input else sys.stdin
    try:
        for line in stream:
            tokens = [
                t.replace(chunker.BOUNDARY, "") for t in line.split()
            ]
            tokens = [t for t in tokens if t]
            out = normalize_tokens(model, tokens) if tokens else []
            sys.stdout.write(" ".join(out) + "\n")
    finally:
        if args.input:
            stream.close()
    return 0


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    pairs = corpus.load_pairs(args.pairs)
    reports = [evaluation.baseline_report(pairs)] if args.baseline else []
    reports.append(
        evaluation.evaluate_system(
            lambda tokens: normalize_tokens(model, tokens), pairs, args.label
        )
    )
    sys.stdout.write(evaluation.format_report_table(reports) + "\n")
    if args.kv_out:
        with open(args.kv_out, "w", encoding="utf-8") as fh:
            fh.write(evaluation.format_report_kv(reports))
    return 0


def cmd_experiment(args) -> int:
    pairs = corpus.load_pairs(args.pairs)
    split = corpus.split_train_test(
        pairs, ratio=args.ratio, seed=args.seed, stratified=args.stratified
    )
    reports = evaluation.run_experiment_matrix(
        split.train, split.test, args.chunk_sizes, _model_config(args),
        _aligner_config(args),
    )
    table = evaluation.format_report_table(reports) + "\n"
    sys.stdout.write(table)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(table)
    if args.kv_out:
        with open(args.kv_out, "w", encoding="utf-8") as fh:
            fh.write(evaluation.format_report_kv(reports))
    return 0


def _load_rules(path) -> list[corpus.SynthRule]:
    rules: list[corpus.SynthRule] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            kind = fields[0]
            if kind == "char" and len(fields) in (3, 4):
                prob = float(fields[3]) if len(fields) == 4 else 1.0
                rules.append(corpus.CharRule(fields[1], fields[2], prob))
            elif kind == "contraction" and len(fields) in (3, 4):
                words = tuple(fields[1].split())
                if len(words) != 2:
                    raise CliError(
                        f"rules line {lineno}: contraction needs two words"
                    )
                prob = float(fields[3]) if len(fields) == 4 else 1.0
                rules.append(corpus.ContractionRule(words, fields[2], prob))
            else:
                raise CliError(
                    f"rules line {lineno}: expected "
                    "'char<TAB>pattern<TAB>replacement[<TAB>prob]' or "
                    "'contraction<TAB>w1 w2<TAB>token[<TAB>prob]'"
                )
    return rules


def cmd_synth(args) -> int:
    with open(args.lexicon, encoding="utf-8") as fh:
        lexicon = [w for w in (line.strip() for line in fh) if w]
    rules = _load_rules(args.rules) if args.rules else []
    pairs = corpus.generate_synthetic_corpus(rules, lexicon, args.lines, args.seed)
    corpus.save_pairs(pairs, args.out)
    print(f"wrote {len(pairs)} synthetic lines", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dialekt",
        description="Dialect transcript normalization pipeline.",
    )
    parser.add_argument("--seed", type=int, default=3435,
                        help="seed for every random choice (default 3435)")
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; execution is "
                             "single-threaded and bit-reproducible")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="clean, tokenize, and pair a corpus TSV")
    p.add_argument("--corpus", required=True)
    p.add_argument("--rewrites", help="surface<TAB>replacement table for digits etc.")
    p.add_argument("--out", required=True, help="tokenized-pairs output file")
    p.add_argument("--report", help="cleanliness report file (default: stdout)")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("align", help="train the token aligner on a pairs file")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    _add_aligner_flags(p)
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("chunk", help="emit parallel source/target example files")
    p.add_argument("--pairs", required=True)
    p.add_argument("--aligner", help="trained aligner file; fit in-place if omitted")
    p.add_argument("--chunk-size", type=int, required=True,
                   choices=range(chunker.MIN_CHUNK_SIZE, chunker.MAX_CHUNK_SIZE + 1))
    p.add_argument("--source-out", required=True)
    p.add_argument("--target-out", required=True)
    _add_aligner_flags(p)
    p.set_defaults(func=cmd_chunk)

    p = sub.add_parser("train", help="train a normalization model")
    p.add_argument("--source", required=True, help="source example file")
    p.add_argument("--target", required=True, help="target example file")
    p.add_argument("--chunk-size", type=int, required=True,
                   choices=range(chunker.MIN_CHUNK_SIZE, chunker.MAX_CHUNK_SIZE + 1))
    p.add_argument("--out", required=True, help="model output file")
    _add_model_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("normalize", help="normalize text, line by line")
    p.add_argument("--model", required=True)
    p.add_argument("--input", help="read from this file instead of stdin")
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("evaluate", help="score a model on a pairs file")
    p.add_argument("--model", required=True)
    p.add_argument("--pairs", required=True)
    p.add_argument("--label", default="model")
    p.add_argument("--baseline", action="store_true",
                   help="also print the no-normalization row")
    p.add_argument("--kv-out", help="machine-readable report file")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("experiment",
                       help="split, train one model per chunk size, and report")
    p.add_argument("--pairs", required=True)
    p.add_argument("--chunks", default="1,2,3,4,5",
                   help="comma-separated chunk sizes (default 1,2,3,4,5)")
    p.add_argument("--ratio", type=float, default=0.7)
    p.add_argument("--stratified", action="store_true",
                   help="split per region instead of over the whole corpus")
    p.add_argument("--out", help="table output file")
    p.add_argument("--kv-out", help="machine-readable report file")
    _add_model_flags(p)
    _add_aligner_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("synth", help="generate a rule-perturbed synthetic corpus")
    p.add_argument("--lexicon", required=True, help="one standard word per line")
    p.add_argument("--rules", help="rule file; omit for an identity corpus")
    p.add_argument("--lines", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "experiment":
        try:
            args.chunk_sizes = sorted({int(k) for k in args.chunks.split(",")})
        except ValueError:
            parser.error(f"--chunks must be comma-separated integers, got {args.chunks!r}")
        bad = [k for k in args.chunk_sizes
               if not chunker.MIN_CHUNK_SIZE <= k <= chunker.MAX_CHUNK_SIZE]
        if bad:
            parser.error(f"chunk sizes {bad} outside "
                         f"{chunker.MIN_CHUNK_SIZE}..{chunker.MAX_CHUNK_SIZE}")
    if args.threads != 1:
        print("note: execution is single-threaded; ignoring --threads",
              file=sys.stderr)
    try:
        return args.func(args)
    except (CliError, ValueError, RuntimeError, OSError) as exc:
        print(f"dialekt {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
