"""Named-tensor archive used for model checkpoints.

Layout (little-endian)::

    magic b"SIMASTCK" | u32 version | u32 n + n bytes UTF-8 JSON metadata | u32 count
    count x ( u16 n + n bytes UTF-8 name | u8 ndim | ndim x u64 dim | float64 data, row-major )
"""

from __future__ import annotations

import io
import json
import logging
import struct
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import numpy as np

from simast_review.errors import ReviewDataError
from simast_review.nn.tensor import Array


logger = logging.getLogger(__name__)

MAGIC = b"SIMASTCK"
VERSION = 1


def _read(stream: io.BytesIO, fmt: str) -> tuple[Any, ...]:
    size = struct.calcsize(fmt)
    chunk = stream.read(size)
    if len(chunk) != size:
        raise ReviewDataError("checkpoint archive is truncated")
    return struct.unpack(fmt, chunk)


def save_archive(
    path: str | Path, tensors: Mapping[str, Array], metadata: Mapping[str, Any] | None = None
) -> None:
    buffer = io.BytesIO()
    buffer.write(MAGIC)
    meta = json.dumps(dict(metadata or {}), sort_keys=True).encode("utf-8")
    buffer.write(struct.pack("<II", VERSION, len(meta)))
    buffer.write(meta)
    buffer.write(struct.pack("<I", len(tensors)))
    for name, array in tensors.items():
        encoded = name.encode("utf-8")
        data = np.ascontiguousarray(array, dtype="<f8")
        buffer.write(struct.pack("<H", len(encoded)))
        buffer.write(encoded)
        buffer.write(struct.pack("<B", data.ndim))
        buffer.write(struct.pack(f"<{data.ndim}Q", *data.shape))
        buffer.write(data.tobytes(order="C"))
    Path(path).write_bytes(buffer.getvalue())
    logger.info("Saved %d tensors to %s", len(tensors), path)


def load_archive(path: str | Path) -> tuple[dict[str, Array], dict[str, Any]]:
    """Return ``(tensors, metadata)`` read from ``path``."""
    stream = io.BytesIO(Path(path).read_bytes())
    if stream.read(len(MAGIC)) != MAGIC:
        raise ReviewDataError(f"{path} is not a checkpoint archive")
    version, meta_size = _read(stream, "<II")
    if version != VERSION:
        raise ReviewDataError(f"unsupported checkpoint version {version}")
    raw_meta = stream.read(meta_size)
    try:
        metadata = json.loads(raw_meta.decode("utf-8")) if meta_size else {}
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ReviewDataError("checkpoint metadata is not valid JSON") from exc

    tensors: dict[str, Array] = {}
    (count,) = _read(stream, "<I")
    for _ in range(count):
        (name_size,) = _read(stream, "<H")
        try:
            name = stream.read(name_size).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ReviewDataError(f"{path}: tensor name is not valid UTF-8") from exc
        (ndim,) = _read(stream, "<B")
        shape = _read(stream, f"<{ndim}Q") if ndim else ()
        size = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        raw = stream.read(size * 8)
        if len(raw) != size * 8:
            raise ReviewDataError("checkpoint archive is truncated")
        tensors[name] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)
    return tensors, metadata
