"""Input validation helpers shared by the engines, estimator, and CLI."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from .vocab import ALL_SINGLE_BYTES, Vocabulary


def as_document_bytes(document) -> bytes:
    """Coerce a document to raw bytes; str is encoded as UTF-8."""
    if isinstance(document, bytes):
        return document
    if isinstance(document, (bytearray, memoryview)):
        return bytes(document)
    if isinstance(document, str):
        return document.encode("utf-8")
    raise TypeError(f"document must be bytes or str, got {type(document).__name__}")


def check_complete(vocab: Vocabulary) -> None:
    """Require all 256 single-byte tokens (segmentation totality)."""
    if not vocab.is_complete:
        missing = next(b for b in ALL_SINGLE_BYTES if b not in vocab)
        raise ValueError(
            f"vocabulary is not segmentation-complete: single-byte token 0x{missing.hex()} is missing"
        )


def check_width_cap(L: int | None, vocab: Vocabulary) -> int:
    """Resolve and validate the max token width for a DP scan."""
    if L is None:
        L = vocab.max_token_len
    if not 1 <= L <= 255:
        raise ValueError(f"L must be in [1, 255], got {L}")
    return int(L)


def check_weights(vocab: Vocabulary, weights) -> np.ndarray:
    """Validate per-token costs: one finite positive value per vocab token."""
    if isinstance(weights, Mapping):
        arr = np.full(len(vocab), np.nan, dtype=np.float64)
        for tid, w in weights.items():
            arr[tid] = w
    else:
        arr = np.asarray(weights, dtype=np.float64)
    if arr.shape != (len(vocab),):
        raise ValueError(f"expected {len(vocab)} weights, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        bad = int(np.argmin(np.where(np.isfinite(arr), arr, -np.inf)))
        raise ValueError(f"weights must be finite and positive (token id {bad} is {arr[bad]!r})")
    return arr
