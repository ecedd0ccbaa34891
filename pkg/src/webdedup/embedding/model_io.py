"""Binary model container.

Layout (little-endian)::

    b"W2EMB" | u32 version | u8 kind
    hyperparams: u32 dim, u32 epochs, u32 negative, f64 initial_lr, f64 final_lr, u32 min_count, i64 seed
    vocab: u32 size, then per token: u32 byte-length, utf-8 bytes, u64 count
    matrix word_out: u32 rows, u32 cols, f32 data
    matrix doc_vectors: u32 rows, u32 cols, f32 data
    u32 crc32 of everything above
"""

from __future__ import annotations

import io
import struct
import zlib
from pathlib import Path

import numpy as np

from ..dom import EmbeddingKind
from .._fileio import atomic_write_bytes
from ..errors import FormatError, VersionMismatch
from .dbow import Doc2VecModel, Hyperparams
from .vocab import Vocabulary

MAGIC = b"W2EMB"
FORMAT_VERSION = 1

_HYPER = struct.Struct("<IIIddIq")


def dumps_model(model: Doc2VecModel) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<IB", FORMAT_VERSION, int(model.kind)))
    h = model.hyper
    buf.write(_HYPER.pack(h.dim, h.epochs, h.negative_samples, h.initial_lr, h.final_lr, h.min_count, h.seed))
    buf.write(struct.pack("<I", len(model.vocab)))
    for tok, count in zip(model.vocab.tokens, model.vocab.counts):
        raw = tok.encode("utf-8")
        buf.write(struct.pack("<I", len(raw)))
        buf.write(raw)
        buf.write(struct.pack("<Q", count))
    for mat in (model.word_out_vectors, model.doc_vectors):
        mat = np.ascontiguousarray(mat, dtype="<f4")
        buf.write(struct.pack("<II", *mat.shape))
        buf.write(mat.tobytes())
    payload = buf.getvalue()
    return payload + struct.pack("<I", zlib.crc32(payload))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("model file is truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))


def loads_model(data: bytes) -> Doc2VecModel:
    if data[: len(MAGIC)] != MAGIC:
        raise VersionMismatch("not a W2EMB model file (bad magic)")
    r = _Reader(data)
    r.take(len(MAGIC))
    version, kind = r.unpack("<IB")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"unsupported model format version {version} (expected {FORMAT_VERSION})")
    if len(data) < 4 or zlib.crc32(data[:-4]) != struct.unpack("<I", data[-4:])[0]:
        raise FormatError("model file checksum mismatch (truncated or corrupted)")
    try:
        kind = EmbeddingKind(kind)
        dim, epochs, neg, lr0, lr1, min_count, seed = r.unpack(_HYPER.format)
        hyper = Hyperparams(dim, epochs, neg, lr0, lr1, min_count, seed)
        (size,) = r.unpack("<I")
        tokens, counts = [], []
        for _ in range(size):
            (n,) = r.unpack("<I")
            tokens.append(r.take(n).decode("utf-8"))
            counts.append(r.unpack("<Q")[0])
        mats = []
        for _ in range(2):
            rows, cols = r.unpack("<II")
            mats.append(np.frombuffer(r.take(rows * cols * 4), dtype="<f4").reshape(rows, cols).astype(np.float32))
    except (ValueError, UnicodeDecodeError) as exc:
        raise FormatError(f"undecodable model file: {exc}") from exc
    return Doc2VecModel(kind, Vocabulary(tokens, counts), mats[0], mats[1], hyper)


def save_model(model: Doc2VecModel, path):
    atomic_write_bytes(path, dumps_model(model))


def load_model(path) -> Doc2VecModel:
    return loads_model(Path(path).read_bytes())
