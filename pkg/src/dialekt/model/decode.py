"""Length-normalized beam search and token-level normalization."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..chunker import from_char_sequence, to_char_sequence, window_tokens
from .network import NormalizerModel
from .vocab import BOS_ID, EOS_ID, PAD_ID, UNK_ID


class DecodeError(ValueError):
    pass


def beam_decode(
    model: NormalizerModel,
    source_symbols: Sequence[str],
    beam_width: Optional[int] = None,
    max_decode_len: Optional[int] = None,
) -> list[str]:
    """Decode one source symbol sequence into target symbols.

    Hypotheses are ranked by mean per-symbol log probability (EOS
    included), which counters the bias toward short outputs. Output is
    capped at max_decode_len content symbols, UNK is never emitted, and
    ties break toward the smaller symbol id, so decoding is
    deterministic. beam_width=1 is exactly the greedy rollout.
    """
    width = model.config.beam_width if beam_width is None else beam_width
    cap = model.config.max_decode_len if max_decode_len is None else max_decode_len
    if width < 1:
        raise DecodeError(f"beam width must be >= 1, got {width}")
    if not source_symbols:
        raise DecodeError("cannot decode an empty source")

    vocab = model.vocab
    net = model.network
    ids = vocab.encode(source_symbols)
    memory, src_mask, state = net.start_decoder(ids)

    prev_ids = np.array([BOS_ID], dtype=np.int64)
    seqs: list[tuple[int, ...]] = [()]
    scores = np.zeros(1, dtype=np.float64)
    finished: list[tuple[float, tuple[int, ...]]] = []

    for _ in range(cap):
        log_probs, state, _ = net.decode_step(prev_ids, state, memory, src_mask)
        log_probs[:, [PAD_ID, BOS_ID, UNK_ID]] = -np.inf
        nb, V = log_probs.shape
        cand = (scores[:, None] + log_probs).ravel()
        beam_of = np.arange(nb).repeat(V)
        sym_of = np.tile(np.arange(V), nb)
        # primary: score desc; ties: smaller symbol id, then smaller beam
        order = np.lexsort((beam_of, sym_of, -cand))

        new_seqs: list[tuple[int, ...]] = []
        new_scores: list[float] = []
        new_from: list[int] = []
        new_prev: list[int] = []
        top_is_eos = False
        for rank, flat in enumerate(order):
            if len(new_seqs) >= width:
                break
            score = float(cand[flat])
            if score == -np.inf:
                break
            b, s = int(beam_of[flat]), int(sym_of[flat])
            if s == EOS_ID:
                finished.append((score / (len(seqs[b]) + 1), seqs[b]))
                if rank == 0:
                    top_is_eos = True
                continue
            new_seqs.append(seqs[b] + (s,))
            new_scores.append(score)
            new_from.append(b)
            new_prev.append(s)

        if top_is_eos or not new_seqs:
            # the best continuation is to stop: accept the finished set
            seqs = []
            break
        state = net.select_state(state, np.array(new_from, dtype=np.int64))
        seqs = new_seqs
        scores = np.array(new_scores, dtype=np.float64)
        prev_ids = np.array(new_prev, dtype=np.int64)

    if not finished:
        # cap reached with nothing finished: rank truncated hypotheses
        finished = [(scores[i] / max(1, len(seqs[i])), seqs[i]) for i in range(len(seqs))]
    best = min(finished, key=lambda f: (-f[0], f[1]))
    return [vocab.symbols[i] for i in best[1]]


def normalize_tokens(model: NormalizerModel, tokens: Sequence[str]) -> list[str]:
    """Window tokens by the model's chunk size, translate each window's
    character sequence, and stitch the decoded words back together.

    Characters outside the vocabulary go through UNK; this never raises
    on unseen input.
    """
    if not tokens:
        return []
    out: list[str] = []
    for window in window_tokens(tokens, model.chunk_size):
        symbols = to_char_sequence(window)
        decoded = beam_decode(model, symbols)
        out.extend(from_char_sequence(decoded))
    return out
