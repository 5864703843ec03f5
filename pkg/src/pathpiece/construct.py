"""Top-down vocabulary construction.

Starting from a large initial vocabulary (most-frequent byte n-grams or
an externally trained file), the build loop repeatedly segments the
corpus, scores every token occurrence by the minimum increase in token
count its omission would cause, aggregates those scores per token, and
prunes batches of low-increase tokens until the target size is reached.
The per-occurrence score is computed from the forward and backward
shortest-path lengths without re-segmenting: any segmentation avoiding an
occurrence must either break it internally or cover it with a strict
superset token. Interaction effects between omissions within a batch are
deliberately ignored.

The reference segmentation always uses deterministic longest tie-breaking
so builds are reproducible.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import _kernels as K
from .corpus_io import DocumentProcessingError, document_batches, parallel_map_reduce
from .pretokenize import NAMED_MODES, PreTokenMode, chunk_bounds
from .segment import SegmentationTrace, _buf, _vt_buf
from .validation import as_document_bytes, check_complete, check_width_cap
from .vocab import Vocabulary, ensure_single_bytes


@dataclass
class OmissionLedger:
    """Aggregated omission cost per token over a corpus segmentation.

    ``mi[t]`` sums the minimum increases of every occurrence of token t on
    the decoded shortest paths; ``occurrences[t]`` counts those
    occurrences. Tokens never appearing keep mi = 0 and are pruned first.
    Single-byte tokens are counted but carry no mi (they are never
    prunable and their omission cost can be unbounded).
    """

    mi: np.ndarray
    occurrences: np.ndarray

    @property
    def ctc(self) -> int:
        """Total decoded token count, i.e. the corpus token count."""
        return int(self.occurrences.sum())

    def merge(self, other: "OmissionLedger") -> "OmissionLedger":
        return OmissionLedger(self.mi + other.mi, self.occurrences + other.occurrences)


@dataclass(frozen=True)
class PruneSchedule:
    """Target size plus the batch sizing rule for the prune loop."""

    target: int
    batch_fraction: float = 0.25
    min_batch: int = 256

    def __post_init__(self):
        if self.target < 256:
            raise ValueError("target vocabulary size must be >= 256")
        if not 0 < self.batch_fraction <= 1:
            raise ValueError("batch_fraction must be in (0, 1]")
        if self.min_batch < 1:
            raise ValueError("min_batch must be >= 1")

    def next_batch(self, surplus: int) -> int:
        want = max(self.min_batch, math.ceil(self.batch_fraction * surplus))
        return min(want, surplus)


@dataclass(frozen=True)
class ProgressRecord:
    iteration: int
    vocab_size: int
    ctc: int


def _as_stream(corpus) -> Iterable[tuple[int, bytes]]:
    """Normalize a corpus to an (ordinal, bytes) stream.

    Accepts a plain sequence of documents or an already-enumerated stream
    (documents are never tuples, so pair detection is unambiguous).
    """
    if isinstance(corpus, (list, tuple)):
        if corpus and isinstance(corpus[0], tuple):
            return corpus
        return list(enumerate(as_document_bytes(d) for d in corpus))
    return corpus


def _ngram_flush(datas, cids, L, counts):
    data = np.concatenate(datas)
    cid = np.concatenate(cids)
    n = data.shape[0]
    ones = np.bincount(data, minlength=256)
    for b in np.nonzero(ones)[0]:
        tok = bytes([int(b)])
        counts[tok] = counts.get(tok, 0) + int(ones[b])
    for w in range(2, min(L, n) + 1):
        wins = sliding_window_view(data, w)
        valid = cid[: n - w + 1] == cid[w - 1 :]
        if not valid.any():
            continue
        sel = np.ascontiguousarray(wins[valid])
        keys = sel.view(np.dtype((np.void, w)))[:, 0]
        uniq, cnt = np.unique(keys, return_counts=True)
        raw = uniq.tobytes()
        for i in range(uniq.shape[0]):
            tok = raw[i * w : (i + 1) * w]
            counts[tok] = counts.get(tok, 0) + int(cnt[i])


def ngram_counts(
    corpus,
    L: int,
    mode: PreTokenMode | str = NAMED_MODES["none"],
    *,
    batch_bytes: int = 4 << 20,
) -> dict[bytes, int]:
    """Overlapping n-gram counts of widths 1..L, never crossing chunks.

    Memory grows with the number of distinct n-grams; intended for
    moderately sized (or sampled) training corpora.
    """
    if isinstance(mode, str):
        mode = PreTokenMode.from_name(mode)
    counts: dict[bytes, int] = {}
    datas: list[np.ndarray] = []
    cids: list[np.ndarray] = []
    pending = 0
    next_cid = 0
    for _, doc in _as_stream(corpus):
        if not doc:
            continue
        data = np.frombuffer(doc, dtype=np.uint8)
        bounds = chunk_bounds(data, mode)
        nch = bounds.shape[0] - 1
        cids.append(np.repeat(np.arange(next_cid, next_cid + nch), np.diff(bounds)))
        next_cid += nch
        datas.append(data)
        pending += data.shape[0]
        if pending >= batch_bytes:
            _ngram_flush(datas, cids, L, counts)
            datas, cids, pending = [], [], 0
    if datas:
        _ngram_flush(datas, cids, L, counts)
    return counts


def init_vocab_ngrams(
    corpus,
    L: int = 16,
    size: int = 262_144,
    mode: PreTokenMode | str = NAMED_MODES["none"],
    *,
    weight_by_length: bool = False,
) -> tuple[Vocabulary, np.ndarray]:
    """Initial vocabulary: the `size` most frequent byte n-grams, widths 1..L.

    Single-byte tokens are forced in, displacing the lowest-count
    non-single-byte candidates. Ties rank shorter-first then by bytes.
    ``weight_by_length`` switches the selection rank to count * width (an
    alternative some trainers use); the displacement rule stays
    count-based.
    """
    counts = ngram_counts(corpus, L, mode)
    if not counts:
        raise ValueError("corpus is empty: no n-grams to count")
    select_key = None
    if weight_by_length:
        select_key = lambda item: (-item[1] * len(item[0]), len(item[0]), item[0])
    return ensure_single_bytes(counts, size, max_token_len=L, select_key=select_key)


def _need_backward(trace: SegmentationTrace) -> np.ndarray:
    if trace.bpl is None:
        raise ValueError("trace has no backward lengths; use analysis_trace() or pathpiece_backward()")
    return trace.bpl


def min_increase_break(trace: SegmentationTrace, s: int, e: int) -> float:
    """Minimum token-count increase from forcing a boundary inside [s, e].

    Spans are 0-based inclusive. Infinite for single-byte spans (no
    interior break exists).
    """
    bpl = _need_backward(trace)
    if e <= s:
        return math.inf
    k_opt = int(trace.pl[trace.n - 1])
    best = min(int(trace.pl[j]) + int(bpl[j + 1]) for j in range(s, e))
    return best - k_opt


def min_increase_superset(trace: SegmentationTrace, s: int, e: int, L: int | None = None) -> float:
    """Minimum increase from covering [s, e] with a strict superset token.

    Candidate ends run over [e, s+L-1]; widths come from the trace's
    per-position token lists. Infinite when no strict superset token
    exists (including any span already at the width cap).
    """
    bpl = _need_backward(trace)
    if L is None:
        L = trace.width_cap
    n = trace.n
    k_opt = int(trace.pl[n - 1])
    best = math.inf
    for e2 in range(e, min(n - 1, s + L - 1) + 1):
        right = int(bpl[e2 + 1]) if e2 + 1 < n else 0
        for w2 in trace.vt[e2]:
            s2 = e2 - w2 + 1
            if (s2 < s and e2 >= e) or (s2 <= s and e2 > e):
                left = int(trace.pl[s2 - 1]) if s2 > 0 else 0
                cand = left + right + 1
                if cand < best:
                    best = cand
    return best - k_opt if math.isfinite(best) else math.inf


def min_increase_occurrence(trace: SegmentationTrace, k: int) -> float:
    """Minimum increase from omitting the k-th token of the decoded path.

    Zero immediately when another optimal token ends at the same position
    (the decoder could simply pick it); otherwise the cheaper of the
    interior-break and superset alternatives.
    """
    spans = trace.decode_spans()
    s, e = spans[k]
    if int(trace.sc[e]) > 1:
        return 0
    return min(min_increase_break(trace, s, e), min_increase_superset(trace, s, e))


@dataclass
class MiBatchScorer:
    """Picklable per-batch minimum-increase accumulator for worker processes."""

    table: K.TokenTable
    L: int
    mode: PreTokenMode

    def __call__(self, batch: list[tuple[int, bytes]]) -> tuple[np.ndarray, np.ndarray]:
        m = self.table.n_tokens
        mi = np.zeros(m, dtype=np.int64)
        occ = np.zeros(m, dtype=np.int64)
        for ordinal, doc in batch:
            data = np.frombuffer(doc, dtype=np.uint8)
            n = data.shape[0]
            if n == 0:
                continue
            bounds = chunk_bounds(data, self.mode)
            pl = _buf("pl", n, np.int32)
            wid = _buf("wid", n, np.int16)
            sc = _buf("sc", n, np.int32)
            bpl = _buf("bpl", n, np.int32)
            vt_w, vt_n = _vt_buf(n, self.L)
            t = self.table
            status = K._mi_document(data, bounds, t.keys, t.vals, t.shift, t.tdata,
                                    t.toffs, self.L, K.POWERS, pl, wid, sc,
                                    vt_w, vt_n, bpl, mi, occ)
            if status >= 0:
                err = ValueError(f"unreachable byte at offset {status}")
                raise DocumentProcessingError(ordinal, err)
        return mi, occ


def aggregate_mi(
    corpus,
    vocab: Vocabulary,
    mode: PreTokenMode | str = NAMED_MODES["none"],
    *,
    L: int | None = None,
    workers: int = 1,
    batch_docs: int = 128,
) -> OmissionLedger:
    """Aggregate per-occurrence minimum increases over a whole corpus.

    Uses the deterministic longest-tie reference segmentation. Partial
    ledgers from workers merge by pointwise addition, so the result is
    worker-count invariant.
    """
    if isinstance(mode, str):
        mode = PreTokenMode.from_name(mode)
    check_complete(vocab)
    L = check_width_cap(L, vocab)
    scorer = MiBatchScorer(K.pack_vocab(vocab), L, mode)
    m = len(vocab)
    initial = OmissionLedger(np.zeros(m, dtype=np.int64), np.zeros(m, dtype=np.int64))
    return parallel_map_reduce(
        document_batches(_as_stream(corpus), batch_docs),
        scorer,
        lambda acc, part: OmissionLedger(acc.mi + part[0], acc.occurrences + part[1]),
        initial,
        workers=workers,
    )


def prune_step(vocab: Vocabulary, ledger: OmissionLedger, batch: int) -> Vocabulary:
    """Remove the `batch` tokens with the smallest aggregated increase.

    Single-byte tokens are never removed. Ties break by fewer
    occurrences, then longer byte length, then lexicographic bytes.
    """
    candidates = [i for i, t in enumerate(vocab.tokens) if len(t) > 1]
    if batch > len(candidates):
        raise ValueError(
            f"cannot prune {batch} tokens: only {len(candidates)} non-single-byte tokens exist"
        )
    order = sorted(
        candidates,
        key=lambda i: (
            int(ledger.mi[i]),
            int(ledger.occurrences[i]),
            -len(vocab.tokens[i]),
            vocab.tokens[i],
        ),
    )
    drop = set(order[:batch])
    return vocab.subset(i for i in range(len(vocab)) if i not in drop)


def build_vocab(
    corpus,
    initial: Vocabulary,
    schedule: PruneSchedule,
    mode: PreTokenMode | str = NAMED_MODES["none"],
    *,
    L: int | None = None,
    workers: int = 1,
    progress: Callable[[ProgressRecord], None] | None = None,
) -> Vocabulary:
    """Prune an initial vocabulary down to the scheduled target size.

    Each iteration segments the corpus, aggregates minimum increases, and
    prunes one batch. ``corpus`` may be a sequence of documents or a
    zero-argument callable returning a fresh (ordinal, bytes) stream per
    pass. Progress records (iteration, |V|, CTC) are emitted through the
    callback; CTC is measured under the vocabulary being scored, before
    that iteration's prune. The loop stops exactly at the target size.
    """
    if isinstance(mode, str):
        mode = PreTokenMode.from_name(mode)
    check_complete(initial)
    if len(initial) < schedule.target:
        raise ValueError(f"initial vocabulary ({len(initial)}) smaller than target ({schedule.target})")
    provider = corpus if callable(corpus) else (lambda: _as_stream(corpus))
    vocab = initial
    iteration = 0
    while len(vocab) > schedule.target:
        iteration += 1
        ledger = aggregate_mi(provider(), vocab, mode, L=L, workers=workers)
        if progress is not None:
            progress(ProgressRecord(iteration, len(vocab), ledger.ctc))
        batch = schedule.next_batch(len(vocab) - schedule.target)
        vocab = prune_step(vocab, ledger, batch)
    return vocab
