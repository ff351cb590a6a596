"""Shared helpers: deterministic seed derivation and input validation."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(root: int, *labels: object) -> int:
    """Derive an independent 64-bit seed from a root seed and a label path.

    Hash-based so the result depends only on (root, labels), never on the
    order in which work items are scheduled.
    """
    h = hashlib.sha256()
    h.update(str(int(root)).encode("utf-8"))
    for label in labels:
        h.update(b"\x00")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "little")


def check_vector(values, *, name: str = "vector", dim: int | None = None) -> np.ndarray:
    """Validate a 1-D finite float vector and return it as float64."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if dim is not None and arr.size != dim:
        raise ValueError(f"{name} has dim {arr.size}, expected {dim}")
    return arr


def check_matrix(values, *, name: str = "X", min_rows: int = 1) -> np.ndarray:
    """Validate a 2-D finite float matrix and return it as float64."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < min_rows:
        raise ValueError(f"{name} needs at least {min_rows} rows, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def cosine(a, b) -> float:
    """Cosine similarity of two vectors; zero-norm inputs are an error."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine undefined for zero-norm vector")
    return float(np.dot(a, b) / (na * nb))


def fmt_num(value: float) -> str:
    """Shared numeric formatting for reports, TSVs, and chart labels."""
    return format(float(value), ".6g")
