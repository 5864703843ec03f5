"""JIT-compiled inner loops shared by all segmentation engines.

Tokens live in an open-addressing hash table over a polynomial rolling
hash; candidate substrings are hashed incrementally (O(1) per width) and
verified byte-for-byte on key match, so collisions only cost time, never
correctness. All kernels work on one document at a time, expressed as a
uint8 array plus chunk boundary offsets; dynamic-programming state arrays
are caller-provided and reused across documents.

Index conventions: positions are 0-based; ``pl[e]`` is the shortest path
length in tokens for the chunk prefix ending at ``e`` inclusive, ``bpl[i]``
the shortest length for the chunk suffix starting at ``i``. Widths are
1-based byte counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import int64, njit, uint64

HASH_MULT = np.uint64(0x100000001B3)
SCRAMBLE = np.uint64(0x9E3779B97F4A7C15)
INF32 = np.int32(2**31 - 1)
MAX_WIDTH = 255

TIEBREAK_LONGEST = 0
TIEBREAK_RANDOM = 1

with np.errstate(over="ignore"):
    POWERS = np.ones(MAX_WIDTH + 1, dtype=np.uint64)
    for _i in range(1, MAX_WIDTH + 1):
        POWERS[_i] = POWERS[_i - 1] * HASH_MULT


@dataclass(frozen=True)
class TokenTable:
    """Packed vocabulary: hash slots plus flat token bytes for verification."""

    keys: np.ndarray   # uint64 hash per slot
    vals: np.ndarray   # int32 token id per slot, -1 = empty
    shift: int         # 64 - log2(table size)
    tdata: np.ndarray  # uint8, concatenated token bytes
    toffs: np.ndarray  # int64, len n_tokens + 1
    n_tokens: int


def pack_vocab(vocab) -> TokenTable:
    """Build (or fetch the cached) lookup table for a Vocabulary."""
    if vocab._table is not None:
        return vocab._table
    toks = vocab.tokens
    tdata = np.frombuffer(b"".join(toks), dtype=np.uint8)
    toffs = np.zeros(len(toks) + 1, dtype=np.int64)
    for i, t in enumerate(toks):
        toffs[i + 1] = toffs[i] + len(t)
    size_log2 = max(4, int(np.ceil(np.log2(max(len(toks), 1) * 4))))
    keys, vals = _build_table(tdata, toffs, size_log2)
    table = TokenTable(keys, vals, 64 - size_log2, tdata, toffs, len(toks))
    object.__setattr__(vocab, "_table", table)
    return table


@njit(cache=True)
def _hash_span(data, start, length):
    h = uint64(0)
    for i in range(start, start + length):
        h = h * HASH_MULT + uint64(data[i]) + uint64(1)
    return h


@njit(cache=True)
def _build_table(tdata, toffs, size_log2):
    n = toffs.shape[0] - 1
    size = 1 << size_log2
    keys = np.zeros(size, dtype=np.uint64)
    vals = np.full(size, -1, dtype=np.int32)
    shift = uint64(64 - size_log2)
    for t in range(n):
        h = _hash_span(tdata, toffs[t], toffs[t + 1] - toffs[t])
        idx = int64((h * SCRAMBLE) >> shift)
        while vals[idx] >= 0:
            idx += 1
            if idx == size:
                idx = 0
        keys[idx] = h
        vals[idx] = t
    return keys, vals


@njit(cache=True, inline="always")
def _lookup(h, data, s, w, keys, vals, shift, tdata, toffs):
    idx = int64((h * SCRAMBLE) >> uint64(shift))
    size = keys.shape[0]
    while True:
        v = vals[idx]
        if v < 0:
            return -1
        if keys[idx] == h:
            off = toffs[v]
            if toffs[v + 1] - off == w:
                ok = True
                for j in range(w):
                    if tdata[off + j] != data[s + j]:
                        ok = False
                        break
                if ok:
                    return v
        idx += 1
        if idx == size:
            idx = 0


@njit(cache=True)
def _forward(data, bounds, keys, vals, shift, tdata, toffs, L, powers,
             tiebreak, seed, pl, wid, sc, vt_w, vt_n, want_vt):
    """Shortest-path forward pass over every chunk of a document.

    Scans token end positions left to right and widths 1..L ascending.
    Strict improvements reset the solution count; on ties LONGEST keeps
    the later (wider) token, matching the `new length <= current` update
    rule, while RANDOM reservoir-samples among the sc ties with
    probability 1/sc. A token spanning the whole chunk prefix is the
    s == chunk-start case, handled by treating the predecessor length as
    zero. Returns -1, or the first unreachable position when the
    vocabulary is missing a needed single byte.
    """
    if tiebreak == TIEBREAK_RANDOM:
        np.random.seed(seed)
    for c in range(bounds.shape[0] - 1):
        a = bounds[c]
        b = bounds[c + 1]
        for e in range(a, b):
            best = INF32
            bw = np.int32(0)
            nsol = np.int32(0)
            h = uint64(0)
            wmax = min(L, e - a + 1)
            if want_vt:
                vt_n[e] = 0
            for w in range(1, wmax + 1):
                s = e - w + 1
                h = (uint64(data[s]) + uint64(1)) * powers[w - 1] + h
                tid = _lookup(h, data, s, w, keys, vals, shift, tdata, toffs)
                if tid >= 0:
                    if want_vt and w >= 2:
                        vt_w[e, vt_n[e]] = np.int16(w)
                        vt_n[e] += 1
                    prev = pl[s - 1] if s > a else np.int32(0)
                    nl = prev + np.int32(1)
                    if nl < best:
                        best = nl
                        bw = np.int32(w)
                        nsol = np.int32(1)
                    elif nl == best:
                        nsol += np.int32(1)
                        if tiebreak == TIEBREAK_LONGEST:
                            bw = np.int32(w)
                        else:
                            r = np.random.random()
                            if r <= 1.0 / nsol:
                                bw = np.int32(w)
            pl[e] = best
            wid[e] = np.int16(bw)
            sc[e] = nsol
            if best == INF32:
                return e
    return -1


@njit(cache=True)
def _backward(data, bounds, keys, vals, shift, tdata, toffs, L, powers, bpl):
    """Backward path lengths: bpl[i] = fewest tokens covering i..chunk end."""
    for c in range(bounds.shape[0] - 1):
        a = bounds[c]
        b = bounds[c + 1]
        for i in range(b - 1, a - 1, -1):
            best = INF32
            h = uint64(0)
            wmax = min(L, b - i)
            for w in range(1, wmax + 1):
                h = h * HASH_MULT + uint64(data[i + w - 1]) + uint64(1)
                tid = _lookup(h, data, i, w, keys, vals, shift, tdata, toffs)
                if tid >= 0:
                    nxt = bpl[i + w] if i + w < b else np.int32(0)
                    nl = nxt + np.int32(1)
                    if nl < best:
                        best = nl
            bpl[i] = best
            if best == INF32:
                return i
    return -1


@njit(cache=True)
def _decode(data, bounds, keys, vals, shift, tdata, toffs, wid, out_ids):
    """Materialize token ids from chosen widths, in document order.

    Walks each chunk backwards (widths were chosen relative to token end
    positions), counting first so tokens can be written front-to-back.
    Returns the total token count.
    """
    total = np.int64(0)
    for c in range(bounds.shape[0] - 1):
        a = bounds[c]
        b = bounds[c + 1]
        k = np.int64(0)
        e = b - 1
        while e >= a:
            k += 1
            e -= wid[e]
        pos = total + k
        e = b - 1
        while e >= a:
            w = wid[e]
            s = e - w + 1
            h = _hash_span(data, s, w)
            tid = _lookup(h, data, s, w, keys, vals, shift, tdata, toffs)
            pos -= 1
            out_ids[pos] = tid
            e -= w
        total += k
    return total


@njit(cache=True)
def _greedy(data, bounds, keys, vals, shift, tdata, toffs, L, powers, out_ids):
    """Longest-prefix-match segmentation; returns token count or -(pos)-1."""
    total = np.int64(0)
    for c in range(bounds.shape[0] - 1):
        a = bounds[c]
        b = bounds[c + 1]
        i = a
        while i < b:
            h = uint64(0)
            wmax = min(L, b - i)
            bw = 0
            btid = -1
            for w in range(1, wmax + 1):
                h = h * HASH_MULT + uint64(data[i + w - 1]) + uint64(1)
                tid = _lookup(h, data, i, w, keys, vals, shift, tdata, toffs)
                if tid >= 0:
                    bw = w
                    btid = tid
            if btid < 0:
                return -int64(i) - 1
            out_ids[total] = btid
            total += 1
            i += bw
    return total


@njit(cache=True)
def _weighted_forward(data, bounds, keys, vals, shift, tdata, toffs, L, powers,
                      wcosts, cost, wid):
    """Minimum-total-cost forward pass; ties keep the wider token."""
    for c in range(bounds.shape[0] - 1):
        a = bounds[c]
        b = bounds[c + 1]
        for e in range(a, b):
            best = np.inf
            bw = np.int32(0)
            h = uint64(0)
            wmax = min(L, e - a + 1)
            for w in range(1, wmax + 1):
                s = e - w + 1
                h = (uint64(data[s]) + uint64(1)) * powers[w - 1] + h
                tid = _lookup(h, data, s, w, keys, vals, shift, tdata, toffs)
                if tid >= 0:
                    prev = cost[s - 1] if s > a else 0.0
                    nc = prev + wcosts[tid]
                    if nc <= best:
                        best = nc
                        bw = np.int32(w)
            cost[e] = best
            wid[e] = np.int16(bw)
            if bw == 0:
                return e
    return -1


@njit(cache=True)
def _count_occurrences(data, bounds, keys, vals, shift, tdata, toffs, L, powers, occ):
    """Overlapping within-chunk substring occurrence count per vocab token."""
    for c in range(bounds.shape[0] - 1):
        a = bounds[c]
        b = bounds[c + 1]
        for e in range(a, b):
            h = uint64(0)
            wmax = min(L, e - a + 1)
            for w in range(1, wmax + 1):
                s = e - w + 1
                h = (uint64(data[s]) + uint64(1)) * powers[w - 1] + h
                tid = _lookup(h, data, s, w, keys, vals, shift, tdata, toffs)
                if tid >= 0:
                    occ[tid] += 1
    return -1


@njit(cache=True)
def _mi_document(data, bounds, keys, vals, shift, tdata, toffs, L, powers,
                 pl, wid, sc, vt_w, vt_n, bpl, mi_acc, occ_acc):
    """Minimum-increase accounting for one document.

    Runs the forward pass (LONGEST tie-breaking, with solution counts and
    the per-position lists of token widths) and the backward pass, decodes
    the reference segmentation, and for every decoded occurrence adds its
    minimum increase to ``mi_acc`` and bumps ``occ_acc``. The increase is
    0 outright when more than one optimal token ends at the occurrence's
    end position; otherwise it is the cheaper of forcing an interior
    break (min over pl[j] + bpl[j+1]) and routing through a strict
    superset token (pl[s'-1] + bpl[e'+1] + 1), each measured against the
    chunk's optimal count. Single-byte occurrences are counted but carry
    no increase, as they can never be pruned. Returns -1 or the failing
    position.
    """
    status = _forward(data, bounds, keys, vals, shift, tdata, toffs, L, powers,
                      TIEBREAK_LONGEST, 0, pl, wid, sc, vt_w, vt_n, True)
    if status >= 0:
        return status
    status = _backward(data, bounds, keys, vals, shift, tdata, toffs, L, powers, bpl)
    if status >= 0:
        return status
    for c in range(bounds.shape[0] - 1):
        a = bounds[c]
        b = bounds[c + 1]
        k_chunk = pl[b - 1]
        e = b - 1
        while e >= a:
            w = wid[e]
            s = e - w + 1
            h = _hash_span(data, s, w)
            tid = _lookup(h, data, s, w, keys, vals, shift, tdata, toffs)
            occ_acc[tid] += 1
            if w >= 2:
                if sc[e] > 1:
                    pass  # an alternate optimal token ends here: increase 0
                else:
                    best = INF32
                    for j in range(s, e):
                        cand = pl[j] + bpl[j + 1]
                        if cand < best:
                            best = cand
                    e_hi = min(b - 1, s + L - 1)
                    for e2 in range(e, e_hi + 1):
                        right = bpl[e2 + 1] if e2 + 1 < b else np.int32(0)
                        for vi in range(vt_n[e2]):
                            w2 = vt_w[e2, vi]
                            s2 = e2 - w2 + 1
                            if (s2 < s and e2 >= e) or (s2 <= s and e2 > e):
                                left = pl[s2 - 1] if s2 > a else np.int32(0)
                                cand = left + right + np.int32(1)
                                if cand < best:
                                    best = cand
                    mi_acc[tid] += best - k_chunk
            e -= w
    return -1
