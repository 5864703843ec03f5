"""Segmentation engines.

All engines are lossless: the emitted tokens concatenate back to the
input bytes. The shortest-path engines minimize the token count per
chunk via dynamic programming over the byte DAG; ties are broken either
by the widest token (deterministic) or uniformly at random among the
optimal choices (reservoir selection, reproducible per seed). The greedy
engine takes the longest vocabulary prefix at each point, and the
weighted engine minimizes a per-token cost sum, which with costs
-log p(t) reproduces maximum-likelihood unigram segmentation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .pretokenize import NAMED_MODES, PreTokenMode, chunk_bounds
from .validation import as_document_bytes, check_complete, check_weights, check_width_cap
from .vocab import Vocabulary

MASK64 = (1 << 64) - 1


class TieBreak(enum.IntEnum):
    LONGEST = K.TIEBREAK_LONGEST
    RANDOM = K.TIEBREAK_RANDOM


class Engine(enum.Enum):
    PATHPIECE_L = "pathpiece-l"
    PATHPIECE_R = "pathpiece-r"
    GREEDY = "greedy"
    WEIGHTED = "weighted"

    @classmethod
    def from_name(cls, name: str) -> "Engine":
        for eng in cls:
            if eng.value == name:
                return eng
        known = " | ".join(e.value for e in cls)
        raise ValueError(f"unknown engine {name!r} (expected one of: {known})")


@dataclass
class SegmentationTrace:
    """Per-byte DP state for one chunk (0-based positions).

    pl[e]: fewest tokens covering bytes 0..e; wid[e]: width of the token
    ending at e on the chosen shortest path; sc[e]: how many tokens
    achieve pl[e] at e; vt[e]: widths >= 2 of all vocabulary tokens ending
    at e; bpl[i]: fewest tokens covering bytes i..n-1 (present only after
    a backward pass).
    """

    pl: np.ndarray
    wid: np.ndarray
    sc: np.ndarray
    vt: tuple[tuple[int, ...], ...]
    width_cap: int
    bpl: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.pl.shape[0]

    def decode_spans(self) -> list[tuple[int, int]]:
        """(start, end) inclusive spans of the chosen path, in order."""
        spans = []
        e = self.n - 1
        while e >= 0:
            w = int(self.wid[e])
            spans.append((e - w + 1, e))
            e -= w
        spans.reverse()
        return spans


@dataclass
class Segmentation:
    """An ordered list of token ids plus the bytes they segment."""

    token_ids: list[int]
    source: bytes

    def __len__(self) -> int:
        return len(self.token_ids)

    def token_bytes(self, vocab: Vocabulary) -> list[bytes]:
        return [vocab.tokens[i] for i in self.token_ids]


# Reusable per-process scratch buffers (workers each get their own copy).
_scratch: dict[str, np.ndarray] = {}


def _buf(name: str, n: int, dtype) -> np.ndarray:
    arr = _scratch.get(name)
    if arr is None or arr.shape[0] < n:
        arr = np.empty(max(n + (n >> 2), 1024), dtype=dtype)
        _scratch[name] = arr
    return arr


def _vt_buf(n: int, L: int) -> tuple[np.ndarray, np.ndarray]:
    arr = _scratch.get("vt_w")
    need_cols = max(L - 1, 1)
    if arr is None or arr.shape[0] < n or arr.shape[1] < need_cols:
        arr = np.empty((max(n + (n >> 2), 1024), need_cols), dtype=np.int16)
        _scratch["vt_w"] = arr
    return arr, _buf("vt_n", n, np.int16)


_DUMMY_VT_W = np.empty((1, 1), dtype=np.int16)
_DUMMY_VT_N = np.empty(1, dtype=np.int16)


def _single_chunk_bounds(n: int) -> np.ndarray:
    return np.array([0, n], dtype=np.int64)


def _raise_unreachable(data: np.ndarray, pos: int) -> None:
    raise ValueError(
        f"no vocabulary token ends at byte {pos} (0x{int(data[pos]):02x}); "
        "the vocabulary is missing a required single byte"
    )


def doc_seed(global_seed: int, ordinal: int) -> int:
    """Stable per-document RNG seed: a 64-bit mix of (seed, ordinal).

    Keeps random tie-breaking reproducible independently of parallel
    scheduling.
    """
    x = ((global_seed & MASK64) * 0x9E3779B97F4A7C15 + ordinal + 1) & MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & MASK64
    x ^= x >> 31
    return int(x & 0x7FFFFFFF)


def pathpiece_forward(
    chunk: bytes,
    vocab: Vocabulary,
    L: int | None = None,
    tiebreak: TieBreak = TieBreak.LONGEST,
    rng_seed: int | None = None,
) -> SegmentationTrace:
    """Run the shortest-path forward pass over one chunk.

    Returns the full DP trace (pl, wid, sc, vt). The chunk must be
    non-empty and the vocabulary segmentation-complete.
    """
    if not chunk:
        raise ValueError("chunk must be non-empty")
    check_complete(vocab)
    L = check_width_cap(L, vocab)
    data = np.frombuffer(chunk, dtype=np.uint8)
    n = data.shape[0]
    table = K.pack_vocab(vocab)
    pl = np.empty(n, dtype=np.int32)
    wid = np.empty(n, dtype=np.int16)
    sc = np.empty(n, dtype=np.int32)
    vt_w = np.zeros((n, max(L - 1, 1)), dtype=np.int16)
    vt_n = np.zeros(n, dtype=np.int16)
    seed = 0 if rng_seed is None else int(rng_seed) & 0x7FFFFFFF
    status = K._forward(
        data, _single_chunk_bounds(n), table.keys, table.vals, table.shift,
        table.tdata, table.toffs, L, K.POWERS, int(tiebreak), seed,
        pl, wid, sc, vt_w, vt_n, True,
    )
    if status >= 0:
        _raise_unreachable(data, status)
    vt = tuple(tuple(int(w) for w in vt_w[i, : vt_n[i]]) for i in range(n))
    return SegmentationTrace(pl=pl, wid=wid, sc=sc, vt=vt, width_cap=L)


def pathpiece_backward(chunk: bytes, vocab: Vocabulary, L: int | None = None) -> np.ndarray:
    """Backward path lengths: bpl[i] = fewest tokens covering bytes i..n-1."""
    if not chunk:
        raise ValueError("chunk must be non-empty")
    check_complete(vocab)
    L = check_width_cap(L, vocab)
    data = np.frombuffer(chunk, dtype=np.uint8)
    n = data.shape[0]
    table = K.pack_vocab(vocab)
    bpl = np.empty(n, dtype=np.int32)
    status = K._backward(
        data, _single_chunk_bounds(n), table.keys, table.vals, table.shift,
        table.tdata, table.toffs, L, K.POWERS, bpl,
    )
    if status >= 0:
        _raise_unreachable(data, status)
    return bpl


def analysis_trace(chunk: bytes, vocab: Vocabulary, L: int | None = None) -> SegmentationTrace:
    """Forward trace (LONGEST) plus backward lengths, for omission analysis."""
    trace = pathpiece_forward(chunk, vocab, L)
    trace.bpl = pathpiece_backward(chunk, vocab, L)
    return trace


def decode_path(trace: SegmentationTrace, chunk: bytes, vocab: Vocabulary) -> Segmentation:
    """Materialize the trace's chosen shortest path as token ids."""
    if len(chunk) != trace.n:
        raise ValueError(f"trace is for a {trace.n}-byte chunk, got {len(chunk)} bytes")
    ids = []
    for s, e in trace.decode_spans():
        tid = vocab.token_id(chunk[s : e + 1])
        if tid is None:
            raise ValueError("trace does not match this chunk/vocabulary")
        ids.append(tid)
    return Segmentation(token_ids=ids, source=chunk)


def greedy_segment(chunk: bytes, vocab: Vocabulary, L: int | None = None) -> Segmentation:
    """Repeatedly emit the longest vocabulary token prefixing the rest."""
    check_complete(vocab)
    L = check_width_cap(L, vocab)
    data = np.frombuffer(as_document_bytes(chunk), dtype=np.uint8)
    n = data.shape[0]
    if n == 0:
        return Segmentation(token_ids=[], source=b"")
    table = K.pack_vocab(vocab)
    out = np.empty(n, dtype=np.int32)
    cnt = K._greedy(
        data, _single_chunk_bounds(n), table.keys, table.vals, table.shift,
        table.tdata, table.toffs, L, K.POWERS, out,
    )
    if cnt < 0:
        _raise_unreachable(data, -int(cnt) - 1)
    return Segmentation(token_ids=[int(i) for i in out[:cnt]], source=bytes(chunk))


def weighted_shortest_path(
    chunk: bytes,
    vocab: Vocabulary,
    weights,
    L: int | None = None,
) -> Segmentation:
    """Segmentation minimizing the sum of per-token costs.

    With uniform costs this minimizes the token count; with costs
    -log p(t) it maximizes unigram likelihood. Costs must be finite and
    positive for every vocabulary token.
    """
    check_complete(vocab)
    L = check_width_cap(L, vocab)
    wcosts = check_weights(vocab, weights)
    data = np.frombuffer(as_document_bytes(chunk), dtype=np.uint8)
    n = data.shape[0]
    if n == 0:
        return Segmentation(token_ids=[], source=b"")
    table = K.pack_vocab(vocab)
    cost = np.empty(n, dtype=np.float64)
    wid = np.empty(n, dtype=np.int16)
    status = K._weighted_forward(
        data, _single_chunk_bounds(n), table.keys, table.vals, table.shift,
        table.tdata, table.toffs, L, K.POWERS, wcosts, cost, wid,
    )
    if status >= 0:
        _raise_unreachable(data, status)
    out = np.empty(n, dtype=np.int32)
    cnt = K._decode(
        data, _single_chunk_bounds(n), table.keys, table.vals, table.shift,
        table.tdata, table.toffs, wid, out,
    )
    return Segmentation(token_ids=[int(i) for i in out[:cnt]], source=bytes(chunk))


def _encode_array(
    data: np.ndarray,
    bounds: np.ndarray,
    table: K.TokenTable,
    L: int,
    engine: Engine,
    seed: int = 0,
    wcosts: np.ndarray | None = None,
) -> np.ndarray:
    """Bulk path: ids (int32 copy) for one document given its chunk bounds."""
    n = data.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int32)
    out = _buf("ids", n, np.int32)
    if engine is Engine.GREEDY:
        cnt = K._greedy(data, bounds, table.keys, table.vals, table.shift,
                        table.tdata, table.toffs, L, K.POWERS, out)
        if cnt < 0:
            _raise_unreachable(data, -int(cnt) - 1)
        return out[:cnt].copy()
    if engine is Engine.WEIGHTED:
        cost = _buf("cost", n, np.float64)
        wid = _buf("wid", n, np.int16)
        status = K._weighted_forward(data, bounds, table.keys, table.vals, table.shift,
                                     table.tdata, table.toffs, L, K.POWERS, wcosts, cost, wid)
    else:
        tiebreak = K.TIEBREAK_RANDOM if engine is Engine.PATHPIECE_R else K.TIEBREAK_LONGEST
        pl = _buf("pl", n, np.int32)
        wid = _buf("wid", n, np.int16)
        sc = _buf("sc", n, np.int32)
        status = K._forward(data, bounds, table.keys, table.vals, table.shift,
                            table.tdata, table.toffs, L, K.POWERS, tiebreak, seed,
                            pl, wid, sc, _DUMMY_VT_W, _DUMMY_VT_N, False)
    if status >= 0:
        _raise_unreachable(data, status)
    cnt = K._decode(data, bounds, table.keys, table.vals, table.shift,
                    table.tdata, table.toffs, wid, out)
    return out[:cnt].copy()


def _count_array(
    data: np.ndarray,
    bounds: np.ndarray,
    table: K.TokenTable,
    L: int,
    engine: Engine,
    seed: int = 0,
    wcosts: np.ndarray | None = None,
) -> int:
    """Bulk path: token count only (skips id materialization where possible)."""
    n = data.shape[0]
    if n == 0:
        return 0
    if engine in (Engine.PATHPIECE_L, Engine.PATHPIECE_R):
        tiebreak = K.TIEBREAK_RANDOM if engine is Engine.PATHPIECE_R else K.TIEBREAK_LONGEST
        pl = _buf("pl", n, np.int32)
        wid = _buf("wid", n, np.int16)
        sc = _buf("sc", n, np.int32)
        status = K._forward(data, bounds, table.keys, table.vals, table.shift,
                            table.tdata, table.toffs, L, K.POWERS, tiebreak, seed,
                            pl, wid, sc, _DUMMY_VT_W, _DUMMY_VT_N, False)
        if status >= 0:
            _raise_unreachable(data, status)
        return int(pl[bounds[1:] - 1].sum())
    return int(_encode_array(data, bounds, table, L, engine, seed, wcosts).shape[0])


def segment_document(
    document,
    vocab: Vocabulary,
    mode: PreTokenMode | str = NAMED_MODES["none"],
    engine: Engine | str = Engine.PATHPIECE_L,
    *,
    L: int | None = None,
    seed: int = 0,
    ordinal: int = 0,
    weights=None,
) -> Segmentation:
    """Chunk a document and segment every chunk with the chosen engine.

    Tokens never cross chunk boundaries; the result is the concatenation
    of the chunk-wise segmentations in document order. For the random
    tie-breaking engine, the RNG is seeded from (seed, ordinal) so runs
    are reproducible regardless of scheduling.
    """
    if isinstance(mode, str):
        mode = PreTokenMode.from_name(mode)
    if isinstance(engine, str):
        engine = Engine.from_name(engine)
    check_complete(vocab)
    L = check_width_cap(L, vocab)
    raw = as_document_bytes(document)
    data = np.frombuffer(raw, dtype=np.uint8)
    bounds = chunk_bounds(data, mode)
    wcosts = None
    if engine is Engine.WEIGHTED:
        if weights is None:
            raise ValueError("weighted engine requires weights")
        wcosts = check_weights(vocab, weights)
    table = K.pack_vocab(vocab)
    ids = _encode_array(data, bounds, table, L, engine,
                        seed=doc_seed(seed, ordinal), wcosts=wcosts)
    return Segmentation(token_ids=[int(i) for i in ids], source=raw)


@dataclass
class DocumentCodec:
    """Picklable per-document encoder for corpus-scale runs.

    Holds the packed vocabulary and engine parameters so worker processes
    receive everything once. Instances are callables mapping
    (ordinal, document bytes) to an int32 id array.
    """

    table: K.TokenTable
    L: int
    mode: PreTokenMode
    engine: Engine
    seed: int = 0
    wcosts: np.ndarray | None = None

    @classmethod
    def for_vocab(cls, vocab, mode, engine, *, L=None, seed=0, weights=None):
        if isinstance(mode, str):
            mode = PreTokenMode.from_name(mode)
        if isinstance(engine, str):
            engine = Engine.from_name(engine)
        check_complete(vocab)
        L = check_width_cap(L, vocab)
        wcosts = None
        if engine is Engine.WEIGHTED:
            if weights is None:
                raise ValueError("weighted engine requires weights")
            wcosts = check_weights(vocab, weights)
        return cls(K.pack_vocab(vocab), L, mode, engine, seed, wcosts)

    def _prep(self, document: bytes):
        data = np.frombuffer(document, dtype=np.uint8)
        return data, chunk_bounds(data, self.mode)

    def __call__(self, ordinal: int, document: bytes) -> np.ndarray:
        data, bounds = self._prep(document)
        return _encode_array(data, bounds, self.table, self.L, self.engine,
                             seed=doc_seed(self.seed, ordinal), wcosts=self.wcosts)

    def count(self, ordinal: int, document: bytes) -> int:
        data, bounds = self._prep(document)
        return _count_array(data, bounds, self.table, self.L, self.engine,
                            seed=doc_seed(self.seed, ordinal), wcosts=self.wcosts)
