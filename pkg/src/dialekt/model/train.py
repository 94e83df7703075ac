"""Teacher-forced training with seeded SGD.

All randomness (parameter init, shuffling, batch order, dropout) is
drawn from one generator seeded with config.seed, so a single-threaded
run is bit-reproducible. Gradients are clipped to a global norm and the
learning rate halves when the windowed mean loss stops improving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..chunker import ChunkExample
from .network import (
    ModelConfig,
    NormalizerModel,
    Seq2SeqNetwork,
    init_parameters,
    make_batch,
)
from .vocab import Vocabulary, build_vocab


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainReport:
    steps_run: int
    final_training_loss: float
    loss_curve: list[tuple[int, float]]


def dataset_loss(
    network: Seq2SeqNetwork,
    src_ids: Sequence[Sequence[int]],
    tgt_ids: Sequence[Sequence[int]],
    batch_size: int,
) -> float:
    """Mean per-symbol cross-entropy over a whole dataset, eval mode."""
    total = 0.0
    symbols = 0.0
    for start in range(0, len(src_ids), batch_size):
        batch = make_batch(
            src_ids[start : start + batch_size],
            tgt_ids[start : start + batch_size],
        )
        loss, cache = network.forward(batch)
        total += loss * cache["denom"]
        symbols += cache["denom"]
    return total / symbols


def train_model(
    examples: Sequence[ChunkExample],
    config: ModelConfig,
    vocab: Optional[Vocabulary] = None,
) -> tuple[NormalizerModel, TrainReport]:
    """Train a normalizer on chunk examples; returns the model and a report.

    The reported final_training_loss is a full eval-mode pass over the
    training examples, not the last noisy batch loss.
    """
    if not examples:
        raise TrainingError("no training examples")
    chunk_sizes = {ex.k for ex in examples}
    if len(chunk_sizes) != 1:
        raise TrainingError(f"mixed chunk sizes in training data: {sorted(chunk_sizes)}")
    chunk_size = chunk_sizes.pop()

    if vocab is None:
        vocab = build_vocab(examples)
    src_ids = [vocab.encode(ex.source) for ex in examples]
    tgt_ids = [vocab.encode(ex.target) for ex in examples]

    rng = np.random.default_rng(config.seed)
    params = init_parameters(config, vocab.size, rng)
    network = Seq2SeqNetwork(config, vocab.size, params)
    dropout_rng = rng if config.dropout > 0.0 else None

    n = len(examples)
    lr = config.learning_rate
    loss_curve: list[tuple[int, float]] = []
    window: list[float] = []
    prev_window_mean: Optional[float] = None
    perm: Optional[np.ndarray] = None
    pos = 0

    for step in range(1, config.train_steps + 1):
        if perm is None or pos >= n:
            perm = rng.permutation(n)
            pos = 0
        idx = perm[pos : pos + config.batch_size]
        pos += config.batch_size

        batch = make_batch([src_ids[i] for i in idx], [tgt_ids[i] for i in idx])
        loss, cache = network.forward(batch, dropout_rng=dropout_rng)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite training loss at step {step}")
        grads = network.backward(cache)

        norm = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
        if not math.isfinite(norm):
            raise TrainingError(f"non-finite gradients at step {step}")
        scale = lr * min(1.0, config.max_grad_norm / max(norm, 1e-12))
        for name, grad in grads.items():
            params[name] -= scale * grad

        if step % config.report_every == 0 or step == config.train_steps:
            loss_curve.append((step, float(loss)))
        window.append(float(loss))
        if len(window) >= config.plateau_window:
            mean = sum(window) / len(window)
            if prev_window_mean is not None and mean >= prev_window_mean:
                lr *= config.lr_decay
            prev_window_mean = mean
            window = []

    final_loss = dataset_loss(network, src_ids, tgt_ids, config.batch_size)
    model = NormalizerModel(config, vocab, params, chunk_size)
    report = TrainReport(
        steps_run=config.train_steps,
        final_training_loss=float(final_loss),
        loss_curve=loss_curve,
    )
    return model, report
