"""Independent oracles and instance generators for the test suite.

The oracles deliberately avoid the production DP structures: segmentation
minima come from explicit enumeration of every segmentation (small n), and
the omission oracle is an edge-excluded memoized recursion over suffixes.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from pathpiece import Vocabulary

SINGLE_BYTES = [bytes([i]) for i in range(256)]


def complete_vocab(extra_tokens, L=16) -> Vocabulary:
    extras = sorted(set(bytes(t) for t in extra_tokens) - set(SINGLE_BYTES))
    return Vocabulary(SINGLE_BYTES + extras, max_token_len=L)


def all_segmentations(chunk: bytes, vocab: Vocabulary, L: int) -> list[list[tuple[int, int]]]:
    """Every segmentation of the chunk, as lists of inclusive (start, end) spans."""
    n = len(chunk)
    out: list[list[tuple[int, int]]] = []
    acc: list[tuple[int, int]] = []

    def rec(i: int) -> None:
        if i == n:
            out.append(list(acc))
            return
        for w in range(1, min(L, n - i) + 1):
            if chunk[i : i + w] in vocab:
                acc.append((i, i + w - 1))
                rec(i + w)
                acc.pop()

    rec(0)
    return out


def brute_min_tokens(chunk: bytes, vocab: Vocabulary, L: int) -> int:
    segs = all_segmentations(chunk, vocab, L)
    assert segs, "complete vocabulary must admit a segmentation"
    return min(len(s) for s in segs)


def brute_min_excluding(chunk: bytes, vocab: Vocabulary, L: int, s: int, e: int) -> float:
    """Fewest tokens for a segmentation where no token occupies exactly [s, e]."""
    n = len(chunk)

    @lru_cache(maxsize=None)
    def f(i: int) -> float:
        if i == n:
            return 0
        best = math.inf
        for w in range(1, min(L, n - i) + 1):
            if (i, i + w - 1) != (s, e) and chunk[i : i + w] in vocab:
                best = min(best, 1 + f(i + w))
        return best

    return f(0)


def brute_best_weighted_cost(chunk: bytes, vocab: Vocabulary, L: int, costs) -> float:
    """Minimum total cost over every segmentation (enumeration oracle)."""
    best = math.inf
    for seg in all_segmentations(chunk, vocab, L):
        c = sum(costs[vocab.token_id(chunk[a : b + 1])] for a, b in seg)
        best = min(best, c)
    return best


def random_instance(rng: np.random.Generator, max_len=12, alphabet=b"abcd",
                    max_extras=10, L=16, max_extra_width=5):
    """A random chunk plus a complete vocabulary biased toward its substrings."""
    n = int(rng.integers(1, max_len + 1))
    chunk = bytes(rng.choice(list(alphabet), size=n).tolist())
    extras = set()
    for _ in range(int(rng.integers(0, max_extras + 1))):
        w = int(rng.integers(2, max_extra_width + 1))
        if rng.random() < 0.75 and n >= w:
            start = int(rng.integers(0, n - w + 1))
            extras.add(chunk[start : start + w])
        else:
            extras.add(bytes(rng.choice(list(alphabet), size=w).tolist()))
    extras = {t for t in extras if len(t) <= L}
    return chunk, complete_vocab(extras, L=L)
