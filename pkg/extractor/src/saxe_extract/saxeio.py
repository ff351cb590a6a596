"""Writers for the file formats shared with the axis toolkit.

The binary vector format (magic "SAXE", little-endian): u32 version, u32
dim, u64 record count, then per record a u16 key length, UTF-8 key bytes,
and dim float32 values.  Records are written sorted by (word, context id),
splitting keys at the first "|".  Context files are JSON lines with one
record per sentence.
"""

from __future__ import annotations

import json
import struct

import numpy as np

MAGIC = b"SAXE"
VERSION = 1

_HEADER = struct.Struct("<4sIIQ")
_KEYLEN = struct.Struct("<H")


def _sort_key(key: str) -> tuple[str, str]:
    word, sep, ctx = key.partition("|")
    return (word, ctx if sep else "")


def write_vectors(records: dict[str, list[np.ndarray]] | list, dim: int, path) -> None:
    """Write keyed float32 vectors; accepts a key->vectors map or (key, vec) pairs."""
    if isinstance(records, dict):
        flat = [(k, v) for k, vecs in records.items() for v in vecs]
    else:
        flat = list(records)
    flat.sort(key=lambda kv: _sort_key(kv[0]))
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, dim, len(flat)))
        for key, vec in flat:
            arr = np.asarray(vec, dtype="<f4")
            if arr.shape != (dim,):
                raise ValueError(f"vector for {key!r} has shape {arr.shape}, want ({dim},)")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"vector for {key!r} has non-finite values")
            raw = key.encode("utf-8")
            fh.write(_KEYLEN.pack(len(raw)))
            fh.write(raw)
            fh.write(arr.tobytes())


def write_context_records(rows: list[dict], path) -> None:
    """One context record per line: id, adjective, tokens, target index, prob maps."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def read_requests(path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from None
    return rows
