from .vocab import (
    BOS,
    BOS_ID,
    EOS,
    EOS_ID,
    PAD,
    PAD_ID,
    SPECIALS,
    UNK,
    UNK_ID,
    Vocabulary,
    VocabularyError,
    build_vocab,
)
from .network import (
    AttentionResult,
    Batch,
    ModelConfig,
    NetworkError,
    NormalizerModel,
    Seq2SeqNetwork,
    attention_context,
    init_parameters,
    make_batch,
    parameter_shapes,
    validate_parameters,
)
from .train import TrainReport, TrainingError, dataset_loss, train_model
from .decode import DecodeError, beam_decode, normalize_tokens
from .storage import MODEL_FORMAT_HEADER, ModelFormatError, load_model, save_model

__all__ = [
    "AttentionResult",
    "Batch",
    "BOS",
    "BOS_ID",
    "DecodeError",
    "EOS",
    "EOS_ID",
    "MODEL_FORMAT_HEADER",
    "ModelConfig",
    "ModelFormatError",
    "NetworkError",
    "NormalizerModel",
    "PAD",
    "PAD_ID",
    "SPECIALS",
    "Seq2SeqNetwork",
    "TrainReport",
    "TrainingError",
    "UNK",
    "UNK_ID",
    "Vocabulary",
    "VocabularyError",
    "attention_context",
    "beam_decode",
    "build_vocab",
    "dataset_loss",
    "init_parameters",
    "load_model",
    "make_batch",
    "normalize_tokens",
    "parameter_shapes",
    "save_model",
    "train_model",
    "validate_parameters",
]
