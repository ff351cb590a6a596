"""Embedding storage: the SAXE binary file format, pooling, and z-scoring.

File layout (all integers little-endian):

    magic   4 bytes  b"SAXE"
    version u32      currently 1
    dim     u32      vector dimensionality, > 0
    count   u64      number of records
    record  u16 key length, UTF-8 key bytes, dim * float32

A key is either a bare word ("good") or a word plus context id joined by
"|" ("good|ctx0001").  The same key may appear in several records; loading
groups them into a list in file order.  Writers emit records sorted by
(word part, context part) so identical sets always serialize identically.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .utils import check_matrix, check_vector

MAGIC = b"SAXE"
VERSION = 1
STD_FLOOR = 1e-8

_HEADER = struct.Struct("<4sIIQ")
_KEYLEN = struct.Struct("<H")

KEY_SEP = "|"


class SaxeFormatError(ValueError):
    """Raised for malformed embedding files; message carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


def context_key(word: str, context_id: str) -> str:
    """Compose the storage key for one occurrence of a word."""
    if KEY_SEP in word:
        raise ValueError(f"word may not contain {KEY_SEP!r}: {word!r}")
    return f"{word}{KEY_SEP}{context_id}"


def split_key(key: str) -> tuple[str, str | None]:
    """Split a storage key into (word, context_id-or-None)."""
    word, sep, ctx = key.partition(KEY_SEP)
    return (word, ctx if sep else None)


class EmbeddingSet:
    """An ordered map from key to one or more fixed-dimension vectors.

    Vectors are held as float32, exactly as serialized, so a write/load
    round trip is bit-exact.  Instances are treated as immutable once
    loaded and can be shared freely across workers.
    """

    def __init__(self, dim: int):
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = int(dim)
        self._entries: dict[str, list[np.ndarray]] = {}

    @property
    def entries(self) -> dict[str, list[np.ndarray]]:
        return self._entries

    def add(self, key: str, values) -> None:
        arr = np.asarray(values)
        if arr.ndim != 1 or arr.size != self.dim:
            raise ValueError(f"embedding for {key!r} has shape {arr.shape}, expected ({self.dim},)")
        arr = arr.astype(np.float32, copy=True)
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"embedding for {key!r} contains non-finite values")
        self._entries.setdefault(key, []).append(arr)

    def get(self, key: str) -> list[np.ndarray]:
        return self._entries.get(key, [])

    def keys(self):
        return self._entries.keys()

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def n_embeddings(self) -> int:
        return sum(len(v) for v in self._entries.values())

    def iter_records(self) -> Iterator[tuple[str, np.ndarray]]:
        for key, vecs in self._entries.items():
            for vec in vecs:
                yield key, vec

    def stacked(self) -> np.ndarray:
        """All embeddings in iteration order as an (n, dim) float64 matrix."""
        if self.n_embeddings == 0:
            return np.empty((0, self.dim))
        return np.stack([v for _, v in self.iter_records()]).astype(np.float64)

    def write(self, path) -> None:
        records = sorted(self.iter_records(), key=lambda kv: _sort_key(kv[0]))
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, self.dim, len(records)))
            for key, vec in records:
                raw = key.encode("utf-8")
                if len(raw) > 0xFFFF:
                    raise ValueError(f"key too long: {key[:40]!r}...")
                fh.write(_KEYLEN.pack(len(raw)))
                fh.write(raw)
                fh.write(vec.astype("<f4", copy=False).tobytes())

    @classmethod
    def load(cls, path) -> "EmbeddingSet":
        data = Path(path).read_bytes()
        if len(data) < _HEADER.size:
            raise SaxeFormatError("truncated header", len(data))
        magic, version, dim, count = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise SaxeFormatError(f"bad magic {magic!r}", 0)
        if version != VERSION:
            raise SaxeFormatError(f"unsupported format version {version}", 4)
        if dim == 0:
            raise SaxeFormatError("dim must be positive", 8)
        out = cls(dim)
        pos = _HEADER.size
        vec_bytes = 4 * dim
        for i in range(count):
            if pos + _KEYLEN.size > len(data):
                raise SaxeFormatError(f"truncated record {i}: missing key length", pos)
            (klen,) = _KEYLEN.unpack_from(data, pos)
            pos += _KEYLEN.size
            if pos + klen > len(data):
                raise SaxeFormatError(f"truncated record {i}: key needs {klen} bytes", pos)
            try:
                key = data[pos : pos + klen].decode("utf-8")
            except UnicodeDecodeError:
                raise SaxeFormatError(f"record {i} key is not valid UTF-8", pos) from None
            pos += klen
            if pos + vec_bytes > len(data):
                raise SaxeFormatError(
                    f"truncated record {i}: dim {dim} needs {vec_bytes} bytes", pos
                )
            vec = np.frombuffer(data, dtype="<f4", count=dim, offset=pos).copy()
            pos += vec_bytes
            if not np.all(np.isfinite(vec)):
                raise SaxeFormatError(f"record {i} ({key!r}) has non-finite values", pos - vec_bytes)
            out._entries.setdefault(key, []).append(vec)
        if pos != len(data):
            raise SaxeFormatError(f"{len(data) - pos} trailing bytes after last record", pos)
        return out


def _sort_key(key: str) -> tuple[str, str]:
    word, ctx = split_key(key)
    return (word, ctx or "")


def mean_pool(parts) -> np.ndarray:
    """Componentwise mean of a non-empty list of equal-dimension vectors."""
    if len(parts) == 0:
        raise ValueError("mean_pool of an empty list")
    stack = np.stack([check_vector(p, name="part") for p in parts])
    if stack.ndim != 2:
        raise ValueError("mean_pool parts must share one dimension")
    return stack.mean(axis=0)


@dataclass(frozen=True)
class ZScoreStats:
    """Per-dimension mean and (floored) population standard deviation."""

    mean: np.ndarray
    std: np.ndarray
    sample_count: int

    @property
    def dim(self) -> int:
        return self.mean.size

    def __post_init__(self):
        object.__setattr__(self, "mean", check_vector(self.mean, name="mean"))
        object.__setattr__(self, "std", check_vector(self.std, name="std"))
        if self.std.size != self.mean.size:
            raise ValueError("mean and std lengths differ")
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")
        if np.any(self.std <= 0):
            raise ValueError("std components must be positive after flooring")


def compute_zscore_stats(eset: EmbeddingSet) -> ZScoreStats:
    """Mean and population std over every embedding in the set.

    Components with std below STD_FLOOR are clamped to STD_FLOOR so that
    constant dimensions never blow up downstream divisions.
    """
    n = eset.n_embeddings
    if n < 2:
        raise ValueError(f"need at least 2 embeddings for z-score stats, got {n}")
    data = eset.stacked()
    mean = data.mean(axis=0)
    std = data.std(axis=0)  # population (ddof=0)
    std = np.maximum(std, STD_FLOOR)
    return ZScoreStats(mean=mean, std=std, sample_count=n)


def zscore(values, stats: ZScoreStats) -> np.ndarray:
    """Standardize a vector by per-dimension corpus mean and std."""
    arr = check_vector(values, name="embedding", dim=stats.dim)
    return (arr - stats.mean) / stats.std


def zscore_inverse(values, stats: ZScoreStats) -> np.ndarray:
    arr = check_vector(values, name="embedding", dim=stats.dim)
    return arr * stats.std + stats.mean


def save_stats(stats: ZScoreStats, path) -> None:
    payload = {
        "dim": stats.dim,
        "sample_count": stats.sample_count,
        "mean": stats.mean.tolist(),
        "std": stats.std.tolist(),
    }
    Path(path).write_text(json.dumps(payload) + "\n", encoding="utf-8")


def load_stats(path) -> ZScoreStats:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return ZScoreStats(
        mean=np.asarray(payload["mean"], dtype=np.float64),
        std=np.asarray(payload["std"], dtype=np.float64),
        sample_count=int(payload["sample_count"]),
    )


class EmbeddingZScorer(BaseEstimator, TransformerMixin):
    """Sklearn-style standardizer backed by the same floored population std.

    Unlike StandardScaler this keeps the STD_FLOOR clamp, so transform and
    inverse_transform round-trip on constant dimensions too.
    """

    def __init__(self, std_floor: float = STD_FLOOR):
        self.std_floor = std_floor

    def fit(self, X, y=None):
        X = check_matrix(X, min_rows=2)
        self.stats_ = ZScoreStats(
            mean=X.mean(axis=0),
            std=np.maximum(X.std(axis=0), self.std_floor),
            sample_count=X.shape[0],
        )
        return self

    def transform(self, X):
        X = check_matrix(X)
        return (X - self.stats_.mean) / self.stats_.std

    def inverse_transform(self, X):
        X = check_matrix(X)
        return X * self.stats_.std + self.stats_.mean
