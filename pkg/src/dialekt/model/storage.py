"""Versioned on-disk model container.

Layout: a UTF-8 header (format line, config block, vocabulary listing),
then each parameter tensor as a text descriptor line followed by raw
little-endian float64 bytes, then a crc32 of the tensor payload and an
end marker. Loading verifies structure, checksum, and tensor shapes, so
a truncated or corrupted file fails instead of yielding a broken model.
"""

from __future__ import annotations

import dataclasses
import zlib
from pathlib import Path

import numpy as np

from .network import ModelConfig, NormalizerModel, validate_parameters
from .vocab import Vocabulary

MODEL_FORMAT_HEADER = "dialekt-model v1"

_FIELD_CASTS = {"int": int, "float": float, "str": str}


class ModelFormatError(ValueError):
    pass


def save_model(model: NormalizerModel, path) -> None:
    cfg_items = dataclasses.asdict(model.config)
    cfg_items["chunk_size"] = model.chunk_size
    names = sorted(model.parameters)
    with open(path, "wb") as fh:
        def line(text: str) -> None:
            fh.write(text.encode("utf-8") + b"\n")

        line(MODEL_FORMAT_HEADER)
        line(f"config {len(cfg_items)}")
        for key, value in cfg_items.items():
            line(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
        line(f"vocab {model.vocab.size}")
        for i, symbol in enumerate(model.vocab.symbols):
            line(f"{i}\t{symbol}")
        line(f"tensors {len(names)}")
        crc = 0
        for name in names:
            arr = np.ascontiguousarray(model.parameters[name], dtype="<f8")
            line(f"{name}\tfloat64\t{' '.join(str(d) for d in arr.shape)}")
            buf = arr.tobytes()
            crc = zlib.crc32(buf, crc)
            fh.write(buf)
        line(f"crc32 {crc}")
        line("end")


def load_model(path) -> NormalizerModel:
    data = Path(path).read_bytes()
    pos = 0

    def read_line() -> str:
        nonlocal pos
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise ModelFormatError("truncated model file")
        try:
            text = data[pos:nl].decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelFormatError("corrupted model header") from exc
        pos = nl + 1
        return text

    def expect_count(tag: str) -> int:
        text = read_line()
        parts = text.split(" ")
        if len(parts) != 2 or parts[0] != tag:
            raise ModelFormatError(f"expected '{tag} <count>', got {text!r}")
        return int(parts[1])

    header = read_line()
    if header != MODEL_FORMAT_HEADER:
        raise ModelFormatError(
            f"unsupported model file header {header!r}; "
            f"this build reads {MODEL_FORMAT_HEADER!r}"
        )

    raw_config: dict[str, str] = {}
    for _ in range(expect_count("config")):
        key, sep, value = read_line().partition("=")
        if not sep:
            raise ModelFormatError(f"bad config line for key {key!r}")
        raw_config[key] = value

    vocab_size = expect_count("vocab")
    symbols = []
    for i in range(vocab_size):
        idx_text, sep, symbol = read_line().partition("\t")
        if not sep or int(idx_text) != i:
            raise ModelFormatError(f"vocabulary ids must be dense, broke at {i}")
        symbols.append(symbol)
    vocab = Vocabulary(tuple(symbols))

    params: dict[str, np.ndarray] = {}
    crc = 0
    for _ in range(expect_count("tensors")):
        fields = read_line().split("\t")
        if len(fields) != 3 or fields[1] != "float64":
            raise ModelFormatError(f"bad tensor descriptor {fields!r}")
        name = fields[0]
        shape = tuple(int(d) for d in fields[2].split(" "))
        nbytes = 8 * int(np.prod(shape))
        if pos + nbytes > len(data):
            raise ModelFormatError(f"truncated tensor payload for {name}")
        buf = data[pos : pos + nbytes]
        pos += nbytes
        crc = zlib.crc32(buf, crc)
        params[name] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()

    crc_line = read_line()
    if not crc_line.startswith("crc32 ") or int(crc_line[6:]) != crc:
        raise ModelFormatError("tensor payload checksum mismatch")
    if read_line() != "end":
        raise ModelFormatError("missing end marker")

    try:
        chunk_size = int(raw_config.pop("chunk_size"))
        kwargs = {}
        for field in dataclasses.fields(ModelConfig):
            cast = _FIELD_CASTS[str(field.type)]
            kwargs[field.name] = cast(raw_config[field.name])
        config = ModelConfig(**kwargs)
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"bad config block: {exc}") from exc

    validate_parameters(params, config, vocab.size)
    return NormalizerModel(config, vocab, params, chunk_size)
