"""Character-level encoder-decoder network in plain numpy.

Architecture: shared symbol embeddings, a stacked bi-directional LSTM
encoder (forward/backward states concatenated, width 2H), a stacked
unidirectional LSTM decoder whose initial states are a learned linear
map of the final encoder states, and general global attention:

    score_j    = h_t' Wa M_j
    weights    = softmax over source positions (padding masked out)
    context    = sum_j weights_j M_j
    attentional= tanh(Wc [context ; h_t])

Everything runs in float64. The backward pass is written by hand and is
validated against central finite differences in the test suite. The
input-side and weight-gradient matmuls are batched over all timesteps;
only the recurrent matmul runs inside the time loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .vocab import BOS_ID, EOS_ID, PAD_ID, Vocabulary

DTYPE = np.float64

ATTENTION_KIND = "general global"


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    embedding_dim: int = 64
    hidden_dim: int = 128
    encoder_layers: int = 2
    decoder_layers: int = 2
    dropout: float = 0.3
    attention: str = ATTENTION_KIND
    seed: int = 3435
    train_steps: int = 5000
    batch_size: int = 64
    learning_rate: float = 5.0
    beam_width: int = 5
    max_decode_len: int = 100
    max_grad_norm: float = 1.0
    lr_decay: float = 0.5
    plateau_window: int = 500
    report_every: int = 50

    def __post_init__(self):
        for name in (
            "embedding_dim",
            "hidden_dim",
            "encoder_layers",
            "decoder_layers",
            "train_steps",
            "batch_size",
            "beam_width",
            "max_decode_len",
            "plateau_window",
            "report_every",
        ):
            value = getattr(self, name)
            if not isinstance(value, int) or value < (0 if name == "train_steps" else 1):
                raise NetworkError(f"{name} must be a positive integer, got {value!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise NetworkError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.attention != ATTENTION_KIND:
            raise NetworkError(
                f"attention is fixed to {ATTENTION_KIND!r}, got {self.attention!r}"
            )
        if self.learning_rate <= 0 or self.max_grad_norm <= 0:
            raise NetworkError("learning_rate and max_grad_norm must be positive")
        if not 0.0 < self.lr_decay <= 1.0:
            raise NetworkError(f"lr_decay must be in (0, 1], got {self.lr_decay}")


def parameter_shapes(config: ModelConfig, vocab_size: int) -> dict[str, tuple[int, ...]]:
    """Name -> shape for every weight tensor, in creation order."""
    E, H = config.embedding_dim, config.hidden_dim
    shapes: dict[str, tuple[int, ...]] = {"embedding": (vocab_size, E)}
    for layer in range(config.encoder_layers):
        in_dim = E if layer == 0 else 2 * H
        for direction in ("fwd", "bwd"):
            prefix = f"enc_{layer}_{direction}"
            shapes[f"{prefix}_W"] = (4 * H, in_dim)
            shapes[f"{prefix}_U"] = (4 * H, H)
            shapes[f"{prefix}_b"] = (4 * H,)
    for layer in range(config.decoder_layers):
        in_dim = E if layer == 0 else H
        shapes[f"dec_{layer}_W"] = (4 * H, in_dim)
        shapes[f"dec_{layer}_U"] = (4 * H, H)
        shapes[f"dec_{layer}_b"] = (4 * H,)
    shapes["attn_Wa"] = (H, 2 * H)
    shapes["attn_Wc"] = (H, 3 * H)
    for layer in range(config.decoder_layers):
        shapes[f"bridge_h_{layer}"] = (H, 2 * H)
        shapes[f"bridge_c_{layer}"] = (H, 2 * H)
    shapes["out_W"] = (vocab_size, H)
    shapes["out_b"] = (vocab_size,)
    return shapes


def init_parameters(
    config: ModelConfig, vocab_size: int, rng: np.random.Generator
) -> dict[str, np.ndarray]:
    """Uniform(-0.1, 0.1) init in a fixed order; forget-gate biases +1."""
    H = config.hidden_dim
    params: dict[str, np.ndarray] = {}
    for name, shape in parameter_shapes(config, vocab_size).items():
        params[name] = rng.uniform(-0.1, 0.1, size=shape).astype(DTYPE)
        if name.endswith("_b"):
            params[name][H : 2 * H] += 1.0
    return params


def validate_parameters(
    params: dict[str, np.ndarray], config: ModelConfig, vocab_size: int
) -> None:
    expected = parameter_shapes(config, vocab_size)
    if set(params) != set(expected):
        missing = sorted(set(expected) - set(params))
        extra = sorted(set(params) - set(expected))
        raise NetworkError(f"parameter set mismatch: missing={missing} extra={extra}")
    for name, shape in expected.items():
        if tuple(params[name].shape) != shape:
            raise NetworkError(
                f"parameter {name} has shape {params[name].shape}, expected {shape}"
            )
        if not np.all(np.isfinite(params[name])):
            raise NetworkError(f"parameter {name} contains non-finite values")


def _sigmoid(x):
    # exp overflow for very negative inputs saturates to exactly 0, which
    # is the right limit
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


def _log_softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    return shifted - log_z


@dataclass(frozen=True)
class Batch:
    src: np.ndarray
    src_mask: np.ndarray
    dec_in: np.ndarray
    gold: np.ndarray
    gold_mask: np.ndarray


def make_batch(src_seqs: Sequence[Sequence[int]], tgt_seqs: Sequence[Sequence[int]]) -> Batch:
    """Pad id sequences into one teacher-forcing batch.

    Decoder input is BOS + target, gold output is target + EOS; padding
    uses PAD and is masked out of the loss.
    """
    if len(src_seqs) != len(tgt_seqs) or not src_seqs:
        raise NetworkError("need equal, non-zero numbers of source and target sequences")
    if any(len(s) == 0 for s in src_seqs):
        raise NetworkError("empty source sequence in batch")
    B = len(src_seqs)
    Ts = max(len(s) for s in src_seqs)
    Tt = max(len(t) for t in tgt_seqs) + 1
    src = np.full((B, Ts), PAD_ID, dtype=np.int64)
    src_mask = np.zeros((B, Ts), dtype=DTYPE)
    dec_in = np.full((B, Tt), PAD_ID, dtype=np.int64)
    gold = np.full((B, Tt), PAD_ID, dtype=np.int64)
    gold_mask = np.zeros((B, Tt), dtype=DTYPE)
    for r, (s, t) in enumerate(zip(src_seqs, tgt_seqs)):
        src[r, : len(s)] = s
        src_mask[r, : len(s)] = 1.0
        dec_in[r, 0] = BOS_ID
        dec_in[r, 1 : len(t) + 1] = t
        gold[r, : len(t)] = t
        gold[r, len(t)] = EOS_ID
        gold_mask[r, : len(t) + 1] = 1.0
    return Batch(src, src_mask, dec_in, gold, gold_mask)


@dataclass(frozen=True)
class AttentionResult:
    context: np.ndarray
    weights: np.ndarray
    attentional: np.ndarray


def attention_context(
    decoder_state: np.ndarray,
    encoder_states: np.ndarray,
    W_a: np.ndarray,
    W_c: np.ndarray,
    mask: Optional[np.ndarray] = None,
) -> AttentionResult:
    """General global attention for one decoder state over one source.

    decoder_state is (H,), encoder_states is (Ts, 2H). Returns the
    context vector, the softmax weights, and tanh(Wc [context ; state]).
    """
    scores = encoder_states @ (decoder_state @ W_a)
    if mask is not None:
        scores = np.where(mask > 0, scores, -np.inf)
    shifted = scores - scores.max()
    expd = np.exp(shifted)
    weights = expd / expd.sum()
    context = weights @ encoder_states
    attentional = np.tanh(W_c @ np.concatenate([context, decoder_state]))
    return AttentionResult(context, weights, attentional)


class _GateCache:
    """Per-timestep quantities one LSTM direction needs for backward."""

    __slots__ = ("i", "f", "o", "g", "c_prev", "h_prev", "tc")

    def __init__(self, i, f, o, g, c_prev, h_prev, tc):
        self.i, self.f, self.o, self.g = i, f, o, g
        self.c_prev, self.h_prev, self.tc = c_prev, h_prev, tc


def _gates_forward(z, c_prev):
    """Gate math for preactivations z (B, 4H), packing [i, f, o, g]."""
    H = c_prev.shape[1]
    sg = _sigmoid(z[:, : 3 * H])
    i = sg[:, :H]
    f = sg[:, H : 2 * H]
    o = sg[:, 2 * H :]
    g = np.tanh(z[:, 3 * H :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, i, f, o, g, tc


def _gates_backward(dh, dc_in, gate: _GateCache):
    """Returns (dz, dc_prev) for one step; dz has packing [i, f, o, g]."""
    i, f, o, g, tc = gate.i, gate.f, gate.o, gate.g, gate.tc
    do = dh * tc
    dc = dc_in + dh * o * (1.0 - tc * tc)
    dz = np.concatenate(
        [
            (dc * g) * i * (1.0 - i),
            (dc * gate.c_prev) * f * (1.0 - f),
            do * o * (1.0 - o),
            (dc * i) * (1.0 - g * g),
        ],
        axis=1,
    )
    return dz, dc * f


class Seq2SeqNetwork:
    """Forward/backward passes over padded batches, plus decoding steps."""

    def __init__(self, config: ModelConfig, vocab_size: int, params: dict[str, np.ndarray]):
        validate_parameters(params, config, vocab_size)
        self.config = config
        self.vocab_size = vocab_size
        self.params = params

    # ---------- shared pieces ----------

    def _dropout(self, x, rng):
        if rng is None or self.config.dropout <= 0.0:
            return x, None
        keep = 1.0 - self.config.dropout
        mask = (rng.random(x.shape) < keep).astype(DTYPE) / keep
        return x * mask, mask

    def _run_lstm_dir(self, inputs, mask, prefix, reverse):
        """One direction of one layer with masked state updates.

        The input transformation x W' runs as a single matmul over all
        timesteps; only the recurrent term h U' stays in the loop.
        """
        P = self.params
        W, U, b = P[f"{prefix}_W"], P[f"{prefix}_U"], P[f"{prefix}_b"]
        B, T, D = inputs.shape
        H = self.config.hidden_dim
        z_in = (inputs.reshape(B * T, D) @ W.T).reshape(B, T, 4 * H) + b
        h = np.zeros((B, H), dtype=DTYPE)
        c = np.zeros((B, H), dtype=DTYPE)
        order = range(T - 1, -1, -1) if reverse else range(T)
        outputs = np.zeros((B, T, H), dtype=DTYPE)
        h_prevs = np.zeros((B, T, H), dtype=DTYPE)
        gates: dict[int, _GateCache] = {}
        for t in order:
            z = z_in[:, t] + h @ U.T
            h_new, c_new, i, f, o, g, tc = _gates_forward(z, c)
            gates[t] = _GateCache(i, f, o, g, c, h, tc)
            h_prevs[:, t] = h
            m = mask[:, t : t + 1]
            h = m * h_new + (1.0 - m) * h
            c = m * c_new + (1.0 - m) * c
            outputs[:, t] = h
        return {
            "inputs": inputs,
            "h_prevs": h_prevs,
            "outputs": outputs,
            "final_h": h,
            "final_c": c,
            "gates": gates,
            "order": list(order),
            "prefix": prefix,
        }

    def _backward_lstm_dir(self, run, mask, d_outputs, d_final_h, d_final_c, grads):
        P = self.params
        prefix = run["prefix"]
        W, U = P[f"{prefix}_W"], P[f"{prefix}_U"]
        inputs = run["inputs"]
        B, T, D = inputs.shape
        H = self.config.hidden_dim
        dz_all = np.zeros((B, T, 4 * H), dtype=DTYPE)
        dh = d_final_h
        dc = d_final_c
        for t in reversed(run["order"]):
            dh_out = dh + d_outputs[:, t]
            dc_out = dc
            m = mask[:, t : t + 1]
            dz, dc_prev = _gates_backward(m * dh_out, m * dc_out, run["gates"][t])
            dz_all[:, t] = dz
            dh = (1.0 - m) * dh_out + dz @ U
            dc = (1.0 - m) * dc_out + dc_prev
        flat_dz = dz_all.reshape(B * T, 4 * H)
        grads[f"{prefix}_W"] += flat_dz.T @ inputs.reshape(B * T, D)
        grads[f"{prefix}_U"] += flat_dz.T @ run["h_prevs"].reshape(B * T, H)
        grads[f"{prefix}_b"] += flat_dz.sum(axis=0)
        return (flat_dz @ W).reshape(B, T, D)

    # ---------- encoder ----------

    def _encode_batch(self, src, src_mask, dropout_rng=None):
        P = self.params
        cfg = self.config
        layer_input = P["embedding"][src]
        layers = []
        for layer in range(cfg.encoder_layers):
            fwd = self._run_lstm_dir(layer_input, src_mask, f"enc_{layer}_fwd", reverse=False)
            bwd = self._run_lstm_dir(layer_input, src_mask, f"enc_{layer}_bwd", reverse=True)
            out = np.concatenate([fwd["outputs"], bwd["outputs"]], axis=2)
            entry = {"fwd": fwd, "bwd": bwd, "drop_mask": None}
            if layer < cfg.encoder_layers - 1:
                out, entry["drop_mask"] = self._dropout(out, dropout_rng)
            layers.append(entry)
            layer_input = out
        memory = layer_input
        top = layers[-1]
        final_h = np.concatenate([top["fwd"]["final_h"], top["bwd"]["final_h"]], axis=1)
        final_c = np.concatenate([top["fwd"]["final_c"], top["bwd"]["final_c"]], axis=1)
        return memory, final_h, final_c, layers

    def _backward_encoder(self, layers, src, src_mask, d_memory, d_final_h, d_final_c, grads):
        cfg = self.config
        H = cfg.hidden_dim
        B = src.shape[0]
        zero = np.zeros((B, H), dtype=DTYPE)
        d_out = d_memory
        for layer in reversed(range(cfg.encoder_layers)):
            entry = layers[layer]
            if layer < cfg.encoder_layers - 1 and entry["drop_mask"] is not None:
                d_out = d_out * entry["drop_mask"]
            top_layer = layer == cfg.encoder_layers - 1
            d_in_fwd = self._backward_lstm_dir(
                entry["fwd"],
                src_mask,
                d_out[:, :, :H],
                d_final_h[:, :H] if top_layer else zero,
                d_final_c[:, :H] if top_layer else zero,
                grads,
            )
            d_in_bwd = self._backward_lstm_dir(
                entry["bwd"],
                src_mask,
                d_out[:, :, H:],
                d_final_h[:, H:] if top_layer else zero,
                d_final_c[:, H:] if top_layer else zero,
                grads,
            )
            d_out = d_in_fwd + d_in_bwd
        np.add.at(grads["embedding"], src, d_out)

    def encode_sequence(self, ids: Sequence[int]) -> np.ndarray:
        """Per-position top-layer encoder states (Ts, 2H) for one sequence."""
        if len(ids) == 0:
            raise NetworkError("cannot encode an empty source")
        src = np.asarray([ids], dtype=np.int64)
        mask = np.ones((1, len(ids)), dtype=DTYPE)
        memory, _, _, _ = self._encode_batch(src, mask)
        return memory[0]

    # ---------- bridge ----------

    def _bridge(self, final_h, final_c):
        P = self.params
        h0 = [final_h @ P[f"bridge_h_{l}"].T for l in range(self.config.decoder_layers)]
        c0 = [final_c @ P[f"bridge_c_{l}"].T for l in range(self.config.decoder_layers)]
        return h0, c0

    # ---------- teacher-forced loss ----------

    def forward(self, batch: Batch, dropout_rng: Optional[np.random.Generator] = None):
        """Mean per-symbol cross-entropy under teacher forcing.

        Returns (loss, cache); pass the cache to backward() for the
        gradients. dropout_rng=None runs in eval mode.
        """
        P = self.params
        cfg = self.config
        L = cfg.decoder_layers
        H = cfg.hidden_dim
        memory, final_h, final_c, enc_layers = self._encode_batch(
            batch.src, batch.src_mask, dropout_rng
        )
        h, c = self._bridge(final_h, final_c)

        x_dec = P["embedding"][batch.dec_in]
        Wa, Wc = P["attn_Wa"], P["attn_Wc"]
        out_W, out_b = P["out_W"], P["out_b"]
        B, Tt = batch.dec_in.shape

        denom = batch.gold_mask.sum()
        if denom <= 0:
            raise NetworkError("batch contains no target symbols")

        # input-side preactivations for decoder layer 0, all steps at once
        W0 = P["dec_0_W"]
        z0_in = (x_dec.reshape(B * Tt, -1) @ W0.T).reshape(B, Tt, 4 * H) + P["dec_0_b"]

        src_neg_inf = np.where(batch.src_mask > 0, 0.0, -np.inf)
        steps = []
        loss_sum = 0.0
        rows = np.arange(B)
        for t in range(Tt):
            cells = []
            drop_masks = []
            inp = None
            for layer in range(L):
                if layer == 0:
                    z = z0_in[:, t] + h[0] @ P["dec_0_U"].T
                else:
                    z = (
                        inp @ P[f"dec_{layer}_W"].T
                        + h[layer] @ P[f"dec_{layer}_U"].T
                        + P[f"dec_{layer}_b"]
                    )
                h_new, c_new, i, f, o, g, tc = _gates_forward(z, c[layer])
                cells.append(_GateCache(i, f, o, g, c[layer], h[layer], tc))
                h[layer], c[layer] = h_new, c_new
                if layer < L - 1:
                    inp, dm = self._dropout(h_new, dropout_rng)
                    drop_masks.append((inp, dm))
            top_h = h[L - 1]

            hWa = top_h @ Wa
            scores = np.einsum("bd,btd->bt", hWa, memory) + src_neg_inf
            scores -= scores.max(axis=1, keepdims=True)
            expd = np.exp(scores)
            attn = expd / expd.sum(axis=1, keepdims=True)
            context = np.einsum("bt,btd->bd", attn, memory)
            cat = np.concatenate([context, top_h], axis=1)
            attentional = np.tanh(cat @ Wc.T)

            logits = attentional @ out_W.T + out_b
            log_probs = _log_softmax(logits)
            loss_sum -= (
                log_probs[rows, batch.gold[:, t]] * batch.gold_mask[:, t]
            ).sum()

            steps.append(
                {
                    "cells": cells,
                    "drop_masks": drop_masks,
                    "top_h": top_h,
                    "hWa": hWa,
                    "attn": attn,
                    "cat": cat,
                    "attentional": attentional,
                    "probs": np.exp(log_probs),
                }
            )

        loss = loss_sum / denom
        cache = {
            "batch": batch,
            "memory": memory,
            "final_h": final_h,
            "final_c": final_c,
            "enc_layers": enc_layers,
            "x_dec": x_dec,
            "steps": steps,
            "denom": denom,
        }
        return loss, cache

    def backward(self, cache) -> dict[str, np.ndarray]:
        """Gradients of the cached loss w.r.t. every parameter tensor."""
        P = self.params
        cfg = self.config
        L = cfg.decoder_layers
        H = cfg.hidden_dim
        batch: Batch = cache["batch"]
        memory = cache["memory"]
        steps = cache["steps"]
        denom = cache["denom"]
        B, Tt = batch.dec_in.shape

        grads = {name: np.zeros_like(arr) for name, arr in P.items()}
        Wa, Wc, out_W = P["attn_Wa"], P["attn_Wc"], P["out_W"]

        d_memory = np.zeros_like(memory)
        d_h = [np.zeros((B, H), dtype=DTYPE) for _ in range(L)]
        d_c = [np.zeros((B, H), dtype=DTYPE) for _ in range(L)]
        # per-layer dz collected across steps; weight grads fused afterwards
        dz_all = [np.zeros((B, Tt, 4 * H), dtype=DTYPE) for _ in range(L)]
        rows = np.arange(B)

        for t in reversed(range(Tt)):
            step = steps[t]
            d_logits = step["probs"].copy()
            d_logits[rows, batch.gold[:, t]] -= 1.0
            d_logits *= (batch.gold_mask[:, t] / denom)[:, None]

            grads["out_W"] += d_logits.T @ step["attentional"]
            grads["out_b"] += d_logits.sum(axis=0)
            d_attentional = d_logits @ out_W

            du = d_attentional * (1.0 - step["attentional"] ** 2)
            grads["attn_Wc"] += du.T @ step["cat"]
            d_cat = du @ Wc
            d_context = d_cat[:, : 2 * H]
            d_top = d_cat[:, 2 * H :]

            attn = step["attn"]
            d_attn = np.einsum("bd,btd->bt", d_context, memory)
            d_memory += attn[:, :, None] * d_context[:, None, :]
            d_scores = attn * (d_attn - (attn * d_attn).sum(axis=1, keepdims=True))
            d_hWa = np.einsum("bt,btd->bd", d_scores, memory)
            d_memory += d_scores[:, :, None] * step["hWa"][:, None, :]
            grads["attn_Wa"] += step["top_h"].T @ d_hWa
            d_top = d_top + d_hWa @ Wa.T

            d_from_above = None
            for layer in reversed(range(L)):
                if layer == L - 1:
                    dh_layer = d_top + d_h[layer]
                else:
                    dm = step["drop_masks"][layer][1]
                    d_drop = d_from_above if dm is None else d_from_above * dm
                    dh_layer = d_drop + d_h[layer]
                dz, dc_prev = _gates_backward(dh_layer, d_c[layer], step["cells"][layer])
                dz_all[layer][:, t] = dz
                d_h[layer] = dz @ P[f"dec_{layer}_U"]
                d_c[layer] = dc_prev
                if layer > 0:
                    d_from_above = dz @ P[f"dec_{layer}_W"]

        # fused weight gradients for the decoder stacks
        for layer in range(L):
            flat_dz = dz_all[layer].reshape(B * Tt, 4 * H)
            if layer == 0:
                layer_inputs = cache["x_dec"]
            else:
                layer_inputs = np.stack(
                    [steps[t]["drop_masks"][layer - 1][0] for t in range(Tt)], axis=1
                )
            h_prevs = np.stack(
                [steps[t]["cells"][layer].h_prev for t in range(Tt)], axis=1
            )
            D_in = layer_inputs.shape[2]
            grads[f"dec_{layer}_W"] += flat_dz.T @ layer_inputs.reshape(B * Tt, D_in)
            grads[f"dec_{layer}_U"] += flat_dz.T @ h_prevs.reshape(B * Tt, H)
            grads[f"dec_{layer}_b"] += flat_dz.sum(axis=0)
        d_x_dec = (dz_all[0].reshape(B * Tt, 4 * H) @ P["dec_0_W"]).reshape(
            B, Tt, cfg.embedding_dim
        )
        np.add.at(grads["embedding"], batch.dec_in, d_x_dec)

        d_final_h = np.zeros((B, 2 * H), dtype=DTYPE)
        d_final_c = np.zeros((B, 2 * H), dtype=DTYPE)
        for layer in range(L):
            grads[f"bridge_h_{layer}"] += d_h[layer].T @ cache["final_h"]
            grads[f"bridge_c_{layer}"] += d_c[layer].T @ cache["final_c"]
            d_final_h += d_h[layer] @ P[f"bridge_h_{layer}"]
            d_final_c += d_c[layer] @ P[f"bridge_c_{layer}"]

        self._backward_encoder(
            cache["enc_layers"], batch.src, batch.src_mask,
            d_memory, d_final_h, d_final_c, grads,
        )
        return grads

    # ---------- decoding ----------

    def start_decoder(self, ids: Sequence[int]):
        """Encode one source sequence and return (memory, src_mask, state)."""
        if len(ids) == 0:
            raise NetworkError("cannot decode from an empty source")
        src = np.asarray([ids], dtype=np.int64)
        mask = np.ones((1, len(ids)), dtype=DTYPE)
        memory, final_h, final_c, _ = self._encode_batch(src, mask)
        h, c = self._bridge(final_h, final_c)
        return memory, mask, (h, c)

    @staticmethod
    def select_state(state, indices):
        h, c = state
        return [x[indices] for x in h], [x[indices] for x in c]

    def decode_step(self, prev_ids, state, memory, src_mask):
        """One decoder step on a beam batch.

        prev_ids is (nb,), the states are per-layer (nb, H) arrays, and
        memory/src_mask have a leading dim of 1 or nb. Returns the log
        probability rows, the new state, and the attention weights.
        """
        P = self.params
        L = self.config.decoder_layers
        h, c = state
        nb = len(prev_ids)
        if memory.shape[0] == 1 and nb > 1:
            memory = np.broadcast_to(memory, (nb,) + memory.shape[1:])
            src_mask = np.broadcast_to(src_mask, (nb, src_mask.shape[1]))
        inp = P["embedding"][np.asarray(prev_ids, dtype=np.int64)]
        new_h, new_c = [], []
        for layer in range(L):
            z = (
                inp @ P[f"dec_{layer}_W"].T
                + h[layer] @ P[f"dec_{layer}_U"].T
                + P[f"dec_{layer}_b"]
            )
            h_new, c_new, *_ = _gates_forward(z, c[layer])
            new_h.append(h_new)
            new_c.append(c_new)
            inp = h_new
        top_h = new_h[-1]
        hWa = top_h @ P["attn_Wa"]
        scores = np.einsum("bd,btd->bt", hWa, memory)
        scores = np.where(src_mask > 0, scores, -np.inf)
        scores = scores - scores.max(axis=1, keepdims=True)
        expd = np.exp(scores)
        attn = expd / expd.sum(axis=1, keepdims=True)
        context = np.einsum("bt,btd->bd", attn, memory)
        attentional = np.tanh(np.concatenate([context, top_h], axis=1) @ P["attn_Wc"].T)
        logits = attentional @ P["out_W"].T + P["out_b"]
        return _log_softmax(logits), (new_h, new_c), attn


@dataclass
class NormalizerModel:
    """A trained normalizer: config, vocabulary, weights, and chunk size."""

    config: ModelConfig
    vocab: Vocabulary
    parameters: dict[str, np.ndarray] = field(repr=False)
    chunk_size: int = 1

    @cached_property
    def network(self) -> Seq2SeqNetwork:
        return Seq2SeqNetwork(self.config, self.vocab.size, self.parameters)

    def encode(self, source_ids: Sequence[int]) -> np.ndarray:
        """Top-layer bi-directional encoder states, one row per position."""
        return self.network.encode_sequence(source_ids)
