"""Intrinsic tokenization metrics and analysis statistics.

Covers the corpus token count (total tokens used to segment a corpus),
Renyi efficiency of the empirical token distribution (order-alpha entropy
normalized by log vocabulary size), Pearson correlation, a one-sided
Wilcoxon signed-rank test with an exact small-n mode, and exact
vocabulary overlap region counts.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .corpus_io import document_batches, parallel_map_reduce
from .pretokenize import NAMED_MODES, PreTokenMode
from .segment import DocumentCodec, Engine
from .vocab import Vocabulary


@dataclass
class TokenDistribution:
    """Empirical token frequencies over a segmented corpus."""

    counts: np.ndarray
    total: int

    def probabilities(self) -> np.ndarray:
        if self.total <= 0:
            raise ValueError("empty distribution")
        return self.counts / self.total


@dataclass(frozen=True)
class MetricsReport:
    ctc: int
    renyi: dict[float, float]
    vocab_size: int


@dataclass
class _CountBatch:
    codec: DocumentCodec

    def __call__(self, batch) -> int:
        return sum(self.codec.count(o, d) for o, d in batch)


@dataclass
class _DistributionBatch:
    codec: DocumentCodec

    def __call__(self, batch) -> np.ndarray:
        occ = np.zeros(self.codec.table.n_tokens, dtype=np.int64)
        for o, d in batch:
            ids = self.codec(o, d)
            occ += np.bincount(ids, minlength=occ.shape[0]).astype(np.int64)
        return occ


def ctc(
    corpus,
    vocab: Vocabulary,
    mode: PreTokenMode | str = NAMED_MODES["none"],
    engine: Engine | str = Engine.PATHPIECE_L,
    *,
    L: int | None = None,
    seed: int = 0,
    weights=None,
    workers: int = 1,
) -> int:
    """Corpus token count: the sum of per-document token counts."""
    from .construct import _as_stream

    codec = DocumentCodec.for_vocab(vocab, mode, engine, L=L, seed=seed, weights=weights)
    return parallel_map_reduce(
        document_batches(_as_stream(corpus), 128),
        _CountBatch(codec),
        lambda acc, part: acc + part,
        0,
        workers=workers,
    )


def token_distribution(
    corpus,
    vocab: Vocabulary,
    mode: PreTokenMode | str = NAMED_MODES["none"],
    engine: Engine | str = Engine.PATHPIECE_L,
    *,
    L: int | None = None,
    seed: int = 0,
    weights=None,
    workers: int = 1,
) -> TokenDistribution:
    """Token frequencies of the corpus segmentation under an engine."""
    from .construct import _as_stream

    codec = DocumentCodec.for_vocab(vocab, mode, engine, L=L, seed=seed, weights=weights)
    counts = parallel_map_reduce(
        document_batches(_as_stream(corpus), 128),
        _DistributionBatch(codec),
        lambda acc, part: acc + part,
        np.zeros(len(vocab), dtype=np.int64),
        workers=workers,
    )
    return TokenDistribution(counts, int(counts.sum()))


def metrics_report(
    corpus,
    vocab: Vocabulary,
    mode: PreTokenMode | str = NAMED_MODES["none"],
    engine: Engine | str = Engine.PATHPIECE_L,
    alphas: Sequence[float] = (1.5, 2.0, 2.5, 3.0, 3.5),
    *,
    L: int | None = None,
    seed: int = 0,
    weights=None,
    workers: int = 1,
) -> MetricsReport:
    """One segmentation pass summarized as CTC plus per-alpha efficiencies."""
    dist = token_distribution(corpus, vocab, mode, engine, L=L, seed=seed,
                              weights=weights, workers=workers)
    return MetricsReport(
        ctc=dist.total,
        renyi={float(a): renyi_efficiency(dist, float(a)) for a in alphas},
        vocab_size=len(vocab),
    )


def renyi_efficiency(
    dist,
    alpha: float,
    vocab_size: int | None = None,
    *,
    normalize_by: str = "vocab",
) -> float:
    """Order-alpha Renyi entropy of the distribution over log vocab size.

    ``dist`` may be a TokenDistribution or an array of counts or
    probabilities. alpha = 1 is the Shannon limit. Normalization uses the
    nominal vocabulary size by default; ``normalize_by="support"`` divides
    by the log of the observed support size instead.
    """
    if isinstance(dist, TokenDistribution):
        counts = dist.counts.astype(np.float64)
        if vocab_size is None:
            vocab_size = counts.shape[0]
    else:
        counts = np.asarray(dist, dtype=np.float64)
        if vocab_size is None:
            raise ValueError("vocab_size is required when passing a raw array")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if counts.ndim != 1 or counts.shape[0] == 0:
        raise ValueError("distribution must be a non-empty 1-d array")
    if np.any(counts < 0) or not np.all(np.isfinite(counts)):
        raise ValueError("distribution entries must be finite and non-negative")
    total = math.fsum(counts.tolist())
    if total <= 0:
        raise ValueError("empty distribution")
    p = counts[counts > 0] / total
    if normalize_by == "support":
        denom_n = p.shape[0]
    elif normalize_by == "vocab":
        denom_n = vocab_size
    else:
        raise ValueError(f"normalize_by must be 'vocab' or 'support', got {normalize_by!r}")
    if denom_n < 2:
        raise ValueError("normalization size must be >= 2")
    if alpha == 1.0:
        entropy = -math.fsum((pi * math.log(pi) for pi in p.tolist()))
    else:
        entropy = math.log(math.fsum(np.power(p, alpha).tolist())) / (1.0 - alpha)
    return entropy / math.log(denom_n)


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("series must be 1-d and of equal length")
    if x.shape[0] < 2:
        raise ValueError("need at least two observations")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc)) * math.sqrt(float(yc @ yc))
    if denom == 0:
        raise ValueError("correlation undefined for a constant series")
    return float((xc @ yc) / denom)


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.shape[0], dtype=np.float64)
    i = 0
    while i < order.shape[0]:
        j = i
        while j + 1 < order.shape[0] and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def wilcoxon_one_sided(diffs, *, exact_limit: int = 20) -> float:
    """One-sided Wilcoxon signed-rank p-value for "first > second".

    Zero differences are discarded; tied absolute values receive average
    ranks. The null distribution is exact (enumerated over all sign
    assignments of the realized ranks) up to ``exact_limit`` non-zero
    differences, and a tie- and continuity-corrected normal approximation
    beyond.
    """
    d = np.asarray(diffs, dtype=np.float64)
    d = d[d != 0]
    n = d.shape[0]
    if n == 0:
        raise ValueError("all differences are zero")
    absd = np.abs(d)
    ranks = _average_ranks(absd)
    w_plus = float(ranks[d > 0].sum())
    if n <= exact_limit:
        # Average ranks are multiples of 1/2; double them to stay integral.
        r2 = np.rint(ranks * 2).astype(np.int64)
        total = int(r2.sum())
        poly = np.zeros(total + 1, dtype=np.int64)
        poly[0] = 1
        for r in r2:
            nxt = poly.copy()
            nxt[r:] += poly[: total + 1 - r]
            poly = nxt
        w2 = int(round(w_plus * 2))
        tail = int(poly[w2:].sum())
        return tail / float(2**n)
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(absd, return_counts=True)
    var -= float(((tie_counts**3 - tie_counts) / 48.0).sum())
    z = (w_plus - mean - 0.5) / math.sqrt(var)
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def vocab_overlap(vocabs: Sequence[Vocabulary]) -> dict[str, int]:
    """Exact token-set cardinality of every intersection region.

    Two vocabularies yield regions a, b, ab; three yield a, b, c, ab, ac,
    bc, abc. Region "ab" counts tokens in exactly sets a and b.
    """
    if len(vocabs) not in (2, 3):
        raise ValueError("vocab_overlap compares 2 or 3 vocabularies")
    labels = "abc"[: len(vocabs)]
    sets = [set(v.tokens) for v in vocabs]
    regions: dict[str, int] = {}
    for mask in range(1, 2 ** len(sets)):
        members = [i for i in range(len(sets)) if mask >> i & 1]
        others = [i for i in range(len(sets)) if not mask >> i & 1]
        region = set.intersection(*(sets[i] for i in members))
        for i in others:
            region -= sets[i]
        regions["".join(labels[i] for i in members)] = len(region)
    return regions
