"""Classifier bundle container.

Layout (little-endian)::

    b"W2SAF" | u32 version | u8 len + ascii classifier kind
    u8 n_kinds + n_kinds bytes (EmbeddingKind values, canonical order)
    u8 degenerate flag | u32 len + pickled estimator | u32 crc32
"""

from __future__ import annotations

import pickle
import struct
import zlib
from pathlib import Path

from .._fileio import atomic_write_bytes
from ..dom import EmbeddingKind
from ..errors import FormatError, VersionMismatch
from .classifiers import TrainedClassifier, canonical_kind

MAGIC = b"W2SAF"
FORMAT_VERSION = 1


def dumps_classifier(c: TrainedClassifier) -> bytes:
    kind = c.kind.encode("ascii")
    payload = pickle.dumps(c.estimator, protocol=4)
    parts = [
        MAGIC,
        struct.pack("<IB", FORMAT_VERSION, len(kind)),
        kind,
        struct.pack("<B", len(c.feature_set)),
        bytes(int(k) for k in c.feature_set),
        struct.pack("<BI", int(c.degenerate), len(payload)),
        payload,
    ]
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def loads_classifier(data: bytes) -> TrainedClassifier:
    if data[: len(MAGIC)] != MAGIC:
        raise VersionMismatch("not a W2SAF classifier bundle (bad magic)")
    pos = len(MAGIC)
    try:
        version, klen = struct.unpack_from("<IB", data, pos)
        if version != FORMAT_VERSION:
            raise VersionMismatch(f"unsupported bundle version {version} (expected {FORMAT_VERSION})")
        if zlib.crc32(data[:-4]) != struct.unpack("<I", data[-4:])[0]:
            raise FormatError("classifier bundle checksum mismatch (truncated or corrupted)")
        pos += 5
        kind = canonical_kind(data[pos : pos + klen].decode("ascii"))
        pos += klen
        (n,) = struct.unpack_from("<B", data, pos)
        pos += 1
        kinds = tuple(EmbeddingKind(b) for b in data[pos : pos + n])
        pos += n
        degenerate, plen = struct.unpack_from("<BI", data, pos)
        pos += 5
        estimator = pickle.loads(data[pos : pos + plen])
    except (struct.error, ValueError, pickle.UnpicklingError, EOFError) as exc:
        if isinstance(exc, (VersionMismatch, FormatError)):
            raise
        raise FormatError(f"undecodable classifier bundle: {exc}") from exc
    return TrainedClassifier(kind, estimator, kinds, bool(degenerate))


def save_classifier(c: TrainedClassifier, path):
    atomic_write_bytes(path, dumps_classifier(c))


def load_classifier(path) -> TrainedClassifier:
    return loads_classifier(Path(path).read_bytes())
