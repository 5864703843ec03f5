"""Vocabulary data model and its file format.

A vocabulary is an ordered collection of unique byte-string tokens; a
token's id is its position. Tokens are capped at ``max_token_len`` bytes.
A vocabulary used for segmentation must additionally contain all 256
single-byte tokens so every input stays representable.

File format (UTF-8 text, LF line endings, no trailing whitespace):

    pathpiece-vocab v1 L=<int> complete=<0|1>
    <token as lowercase hex>[ <count>]
    ...

Token id equals line order. Hex keeps arbitrary bytes safe through any
text transport. Files whose header declares completeness must contain all
single-byte tokens; tokens longer than L are rejected, never truncated.
"""

from __future__ import annotations

import os
import re
from collections.abc import Iterable, Mapping

import numpy as np

_HEADER_RE = re.compile(r"^pathpiece-vocab v1 L=(\d+) complete=([01])$")
_LINE_RE = re.compile(r"^([0-9a-f]+)( (\d+))?$")

ALL_SINGLE_BYTES = tuple(bytes([i]) for i in range(256))


class VocabFormatError(ValueError):
    """Raised for malformed vocabulary files; message carries the line number."""


class Vocabulary:
    """Immutable ordered set of byte-string tokens with exact-match lookup."""

    __slots__ = ("tokens", "max_token_len", "_index", "_table")

    def __init__(self, tokens: Iterable[bytes], max_token_len: int = 16):
        toks = tuple(bytes(t) for t in tokens)
        if max_token_len < 1:
            raise ValueError("max_token_len must be >= 1")
        if max_token_len > 255:
            raise ValueError("max_token_len must be <= 255")
        index: dict[bytes, int] = {}
        for i, t in enumerate(toks):
            if not t:
                raise ValueError(f"token {i} is empty")
            if len(t) > max_token_len:
                raise ValueError(
                    f"token {i} ({t.hex()}) is {len(t)} bytes, longer than L={max_token_len}"
                )
            if t in index:
                raise ValueError(f"duplicate token {t.hex()} at ids {index[t]} and {i}")
            index[t] = i
        self.tokens = toks
        self.max_token_len = max_token_len
        self._index = index
        self._table = None  # packed lookup structure, built lazily

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __contains__(self, token: bytes) -> bool:
        return token in self._index

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Vocabulary)
            and self.tokens == other.tokens
            and self.max_token_len == other.max_token_len
        )

    def __hash__(self):
        return hash((self.tokens, self.max_token_len))

    def token_id(self, token: bytes) -> int | None:
        """Id of an exact byte-string, or None when absent."""
        return self._index.get(bytes(token))

    def token_bytes(self, token_id: int) -> bytes:
        return self.tokens[token_id]

    def decode(self, token_ids: Iterable[int]) -> bytes:
        """Concatenate token bytes; the lossless inverse of segmentation."""
        return b"".join(self.tokens[i] for i in token_ids)

    @property
    def is_complete(self) -> bool:
        """True when all 256 single-byte tokens are present."""
        return all(b in self._index for b in ALL_SINGLE_BYTES)

    def subset(self, token_ids: Iterable[int]) -> "Vocabulary":
        """New vocabulary keeping the given ids, in this vocabulary's order."""
        keep = sorted(set(token_ids))
        return Vocabulary((self.tokens[i] for i in keep), self.max_token_len)


def save_vocab(vocab: Vocabulary, path: str | os.PathLike, counts: Mapping[int, int] | np.ndarray | None = None) -> None:
    """Write a vocabulary (optionally with per-token counts) bit-exactly."""
    lines = [f"pathpiece-vocab v1 L={vocab.max_token_len} complete={1 if vocab.is_complete else 0}"]
    for i, tok in enumerate(vocab.tokens):
        if counts is None:
            lines.append(tok.hex())
        else:
            c = counts[i] if not isinstance(counts, Mapping) else counts.get(i, 0)
            lines.append(f"{tok.hex()} {int(c)}")
    payload = "\n".join(lines) + "\n"
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(payload)


def load_vocab(path: str | os.PathLike, *, return_counts: bool = False):
    """Load a vocabulary file, validating format, L-cap, and completeness.

    With ``return_counts=True`` returns ``(vocab, counts)`` where counts is
    an int64 array aligned to token ids, or None when the file has no
    count column.
    """
    with open(path, "r", encoding="utf-8", newline="") as f:
        text = f.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise VocabFormatError(f"{path}: empty file")
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise VocabFormatError(f"{path}:1: bad header {lines[0]!r}")
    max_len = int(m.group(1))
    declared_complete = m.group(2) == "1"

    tokens: list[bytes] = []
    counts: list[int] = []
    has_counts: bool | None = None
    for lineno, line in enumerate(lines[1:], start=2):
        lm = _LINE_RE.match(line)
        if not lm:
            raise VocabFormatError(f"{path}:{lineno}: malformed token line {line!r}")
        hexpart = lm.group(1)
        if len(hexpart) % 2 != 0:
            raise VocabFormatError(f"{path}:{lineno}: odd-length hex {hexpart!r}")
        tok = bytes.fromhex(hexpart)
        line_has_count = lm.group(3) is not None
        if has_counts is None:
            has_counts = line_has_count
        elif has_counts != line_has_count:
            raise VocabFormatError(f"{path}:{lineno}: inconsistent count column")
        if len(tok) > max_len:
            raise VocabFormatError(
                f"{path}:{lineno}: token {hexpart} is {len(tok)} bytes, longer than L={max_len}"
            )
        tokens.append(tok)
        if line_has_count:
            counts.append(int(lm.group(3)))
    try:
        vocab = Vocabulary(tokens, max_token_len=max_len)
    except ValueError as e:
        raise VocabFormatError(f"{path}: {e}") from None
    if declared_complete and not vocab.is_complete:
        missing = next(b for b in ALL_SINGLE_BYTES if b not in vocab._index)
        raise VocabFormatError(
            f"{path}: header declares complete=1 but single-byte token {missing.hex()} is missing"
        )
    if return_counts:
        return vocab, (np.asarray(counts, dtype=np.int64) if has_counts else None)
    return vocab


def ensure_single_bytes(
    counted_tokens: Mapping[bytes, int],
    capacity: int,
    max_token_len: int = 16,
    select_key=None,
) -> tuple[Vocabulary, np.ndarray]:
    """Top-`capacity` tokens by count, with all 256 single bytes forced in.

    Missing single-byte tokens displace the lowest-ranked non-single-byte
    tokens from the selection (lowest-count under the default ranking);
    the result is ordered by (count desc, shorter first, bytes lex).
    ``select_key`` overrides the ranking used for both selection and
    displacement. Returns the vocabulary and its aligned count array.
    ``capacity`` must be at least 256.
    """
    if capacity < 256:
        raise ValueError(f"capacity must be >= 256, got {capacity}")
    counts = dict(counted_tokens)
    for b in ALL_SINGLE_BYTES:
        counts.setdefault(b, 0)

    def count_order(item: tuple[bytes, int]):
        tok, c = item
        return (-c, len(tok), tok)

    rank = select_key or count_order
    ranked = sorted(counts.items(), key=rank)
    selected = ranked[:capacity]
    chosen = {tok for tok, _ in selected}
    missing = [b for b in ALL_SINGLE_BYTES if b not in chosen]
    if missing:
        # Drop the worst-ranked non-single-byte tokens to make room.
        droppable = sorted(
            (it for it in selected if len(it[0]) > 1), key=rank, reverse=True
        )
        if len(droppable) < len(missing):
            raise ValueError("capacity too small to hold all single-byte tokens")
        drop = {tok for tok, _ in droppable[: len(missing)]}
        selected = [it for it in selected if it[0] not in drop]
        selected.extend((b, counts[b]) for b in missing)
    selected.sort(key=count_order)
    vocab = Vocabulary((tok for tok, _ in selected), max_token_len=max_token_len)
    arr = np.array([c for _, c in selected], dtype=np.int64)
    return vocab, arr
