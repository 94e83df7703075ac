"""dialekt: normalization of dialectal Finland Swedish transcripts.

A numpy library covering the whole pipeline: corpus cleanup and
tokenization, EM token alignment for unequal-length lines, character
chunk encoding, a from-scratch LSTM encoder-decoder with attention, and
WER/accuracy evaluation.
"""

from . import aligner, chunker, corpus, evaluation, model

from .corpus import (
    CharRule,
    ContractionRule,
    Corpus,
    Region,
    SplitCorpus,
    TokenizedPair,
    UtteranceRecord,
    clean_text,
    generate_synthetic_corpus,
    load_corpus,
    split_train_test,
    tokenize,
    tokenize_corpus,
)
from .aligner import (
    AlignerConfig,
    AlignmentLink,
    AlignmentModel,
    TokenPair,
    distortion_prob,
    pair_line,
    project_token_pairs,
    train_aligner,
    viterbi_align,
)
from .chunker import (
    ChunkExample,
    from_char_sequence,
    make_examples,
    to_char_sequence,
)
from .evaluation import (
    EditCounts,
    EvalReport,
    accuracy,
    evaluate_system,
    run_experiment_matrix,
    wer,
    word_edit_counts,
)
from .model import (
    ModelConfig,
    NormalizerModel,
    TrainReport,
    Vocabulary,
    beam_decode,
    build_vocab,
    load_model,
    normalize_tokens,
    save_model,
    train_model,
)

__version__ = "0.1.0"
