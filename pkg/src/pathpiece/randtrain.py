"""Random-baseline vocabulary construction by weighted sampling.

Draws a vocabulary of size m from an initial vocabulary without
replacement, proportionally to per-token occurrence probabilities, using
exponential-key reservoir order (key -ln(u)/w, keep the m smallest, which
orders identically to u^(1/w) descending). Tokens whose target
probability exceeds 1/m are infeasible: sampling without replacement can
include them at most once, so their realized frequency saturates near 1.

Single-byte tokens are force-included through the protected set so the
sampled vocabulary stays usable for segmentation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .corpus_io import document_batches, parallel_map_reduce
from .pretokenize import NAMED_MODES, PreTokenMode, chunk_bounds
from .segment import Engine, _encode_array, doc_seed
from .validation import check_complete, check_width_cap
from .vocab import Vocabulary


class CountSource(enum.Enum):
    NGRAM_COUNTS = "ngram"
    SEGMENTED_COUNTS = "segmented"


@dataclass
class SelectionWeights:
    """Normalized target selection probabilities per token id."""

    p: np.ndarray

    def __post_init__(self):
        total = float(self.p.sum())
        if not np.isfinite(total) or abs(total - 1.0) > 1e-9:
            raise ValueError(f"selection probabilities must sum to 1 (got {total!r})")
        if np.any(self.p < 0):
            raise ValueError("selection probabilities must be non-negative")

    def infeasible(self, m: int) -> np.ndarray:
        """Mask of overweight items: p > 1/m cannot reach its target."""
        return self.p > 1.0 / m


@dataclass
class _OccurrenceBatch:
    table: K.TokenTable
    L: int
    mode: PreTokenMode
    source: CountSource
    engine: Engine
    seed: int

    def __call__(self, batch):
        occ = np.zeros(self.table.n_tokens, dtype=np.int64)
        t = self.table
        for ordinal, doc in batch:
            data = np.frombuffer(doc, dtype=np.uint8)
            if data.shape[0] == 0:
                continue
            bounds = chunk_bounds(data, self.mode)
            if self.source is CountSource.NGRAM_COUNTS:
                K._count_occurrences(data, bounds, t.keys, t.vals, t.shift,
                                     t.tdata, t.toffs, self.L, K.POWERS, occ)
            else:
                ids = _encode_array(data, bounds, t, self.L, self.engine,
                                    seed=doc_seed(self.seed, ordinal))
                occ += np.bincount(ids, minlength=occ.shape[0]).astype(np.int64)
        return occ


def occurrence_weights(
    corpus,
    vocab: Vocabulary,
    source: CountSource = CountSource.NGRAM_COUNTS,
    mode: PreTokenMode | str = NAMED_MODES["none"],
    *,
    engine: Engine = Engine.PATHPIECE_L,
    L: int | None = None,
    seed: int = 0,
    workers: int = 1,
) -> SelectionWeights:
    """Target selection probabilities from corpus counts.

    NGRAM_COUNTS counts raw overlapping within-chunk substring occurrences
    of each vocabulary token; SEGMENTED_COUNTS counts tokens in the
    corpus segmentation under the given engine. Counts are normalized to
    sum to 1.
    """
    from .construct import _as_stream

    if isinstance(mode, str):
        mode = PreTokenMode.from_name(mode)
    if source is CountSource.SEGMENTED_COUNTS:
        check_complete(vocab)
    L = check_width_cap(L, vocab)
    counter = _OccurrenceBatch(K.pack_vocab(vocab), L, mode, source, engine, seed)
    occ = parallel_map_reduce(
        document_batches(_as_stream(corpus), 128),
        counter,
        lambda acc, part: acc + part,
        np.zeros(len(vocab), dtype=np.int64),
        workers=workers,
    )
    total = int(occ.sum())
    if total == 0:
        raise ValueError("all token counts are zero; cannot form selection probabilities")
    return SelectionWeights(occ / total)


def sample_without_replacement(
    vocab: Vocabulary,
    weights: SelectionWeights,
    m: int,
    seed: int,
    protected: set[int] | None = None,
) -> Vocabulary:
    """Draw exactly m distinct tokens, weight-proportionally, without replacement.

    Protected token ids (default: all single-byte tokens) are always
    included; the remaining slots are filled by the smallest exponential
    keys -ln(u)/w over the positively weighted unprotected items. The
    draw is bit-deterministic given the seed.
    """
    p = np.asarray(weights.p, dtype=np.float64)
    if p.shape != (len(vocab),):
        raise ValueError(f"weights cover {p.shape[0]} tokens, vocabulary has {len(vocab)}")
    if protected is None:
        protected = {i for i, t in enumerate(vocab.tokens) if len(t) == 1}
    protected_ids = np.array(sorted(protected), dtype=np.int64)
    if protected_ids.size > m:
        raise ValueError(f"m={m} is smaller than the protected set ({protected_ids.size})")

    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random(len(vocab))
    with np.errstate(divide="ignore", invalid="ignore"):
        keys = np.where(p > 0, -np.log(u) / p, np.inf)

    mask = np.ones(len(vocab), dtype=bool)
    mask[protected_ids] = False
    eligible = np.nonzero(mask & (p > 0))[0]
    k = m - protected_ids.size
    if k > eligible.size:
        raise ValueError(
            f"cannot sample {m} tokens: only {eligible.size} positive-weight "
            f"unprotected items plus {protected_ids.size} protected"
        )
    order = np.argsort(keys[eligible], kind="stable")
    chosen = eligible[order[:k]]
    return vocab.subset(np.concatenate([protected_ids, chosen]).tolist())
