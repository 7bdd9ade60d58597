"""Binary checkpoint format shared by the TTS model and the NLU classifier.

Layout: the magic bytes ``AMTTS1``, a little-endian uint32 header length,
a UTF-8 JSON header describing tensor names/shapes and arbitrary metadata
(model config, optimizer/schedule state), then the raw tensor payloads as
little-endian float32 arrays concatenated in header order.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"AMTTS1"
_DTYPE = "<f4"


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, tensors: dict, meta: dict | None = None) -> None:
    """Write named arrays plus a JSON metadata block.

    `tensors` maps name -> array-like; insertion order defines payload
    order.  Values are stored as float32 regardless of input dtype.
    """
    entries = []
    payloads = []
    for name, value in tensors.items():
        arr = np.ascontiguousarray(np.asarray(value, dtype=np.float64), dtype=_DTYPE)
        entries.append({"name": name, "shape": list(arr.shape)})
        payloads.append(arr.tobytes())
    header = {
        "format": 1,
        "dtype": _DTYPE,
        "tensors": entries,
        "meta": meta or {},
    }
    blob = json.dumps(header, ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for p in payloads:
            fh.write(p)


def load_checkpoint(path):
    """Read a checkpoint; returns (tensors: dict[str, float64 array], meta: dict)."""
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 4 or data[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file (bad magic)")
    off = len(MAGIC)
    (hlen,) = struct.unpack_from("<I", data, off)
    off += 4
    if off + hlen > len(data):
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(data[off : off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: corrupt header: {e}") from e
    off += hlen

    tensors = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 4
        if off + nbytes > len(data):
            raise CheckpointError(f"{path}: truncated payload for {entry['name']!r}")
        arr = np.frombuffer(data, dtype=_DTYPE, count=count, offset=off)
        tensors[entry["name"]] = arr.reshape(shape).astype(np.float64)
        off += nbytes
    if off != len(data):
        raise CheckpointError(f"{path}: {len(data) - off} trailing bytes")
    return tensors, header.get("meta", {})
