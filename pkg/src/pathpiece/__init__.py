"""Byte-level lossless subword tokenization toolkit.

Shortest-path segmentation over byte DAGs, top-down minimum-increase
vocabulary construction, pre-tokenization regimes, baseline segmenters
(greedy longest-prefix, weighted shortest path, random-tie variants,
weighted random vocabulary sampling), and intrinsic tokenization metrics.
"""

from .construct import (
    MiBatchScorer,
    OmissionLedger,
    ProgressRecord,
    PruneSchedule,
    aggregate_mi,
    build_vocab,
    init_vocab_ngrams,
    min_increase_break,
    min_increase_occurrence,
    min_increase_superset,
    ngram_counts,
    prune_step,
)
from .corpus_io import (
    CorpusFormatError,
    DocumentProcessingError,
    Framing,
    FramingKind,
    batched,
    jsonl_field,
    parallel_map_reduce,
    stream_documents,
)
from .estimator import PathPieceTokenizer
from .metrics import (
    MetricsReport,
    metrics_report,
    TokenDistribution,
    ctc,
    pearson,
    renyi_efficiency,
    token_distribution,
    vocab_overlap,
    wilcoxon_one_sided,
)
from .pretokenize import NAMED_MODES, Chunk, PreTokenMode, SpaceRule, chunk
from .randtrain import CountSource, SelectionWeights, occurrence_weights, sample_without_replacement
from .segment import (
    Engine,
    Segmentation,
    SegmentationTrace,
    TieBreak,
    analysis_trace,
    decode_path,
    doc_seed,
    greedy_segment,
    pathpiece_backward,
    pathpiece_forward,
    segment_document,
    weighted_shortest_path,
)
from .validation import as_document_bytes, check_complete
from .vocab import VocabFormatError, Vocabulary, ensure_single_bytes, load_vocab, save_vocab

__version__ = "0.1.0"

__all__ = [
    "Chunk",
    "CorpusFormatError",
    "CountSource",
    "DocumentProcessingError",
    "Engine",
    "Framing",
    "FramingKind",
    "MetricsReport",
    "MiBatchScorer",
    "NAMED_MODES",
    "OmissionLedger",
    "PathPieceTokenizer",
    "PreTokenMode",
    "ProgressRecord",
    "PruneSchedule",
    "Segmentation",
    "SegmentationTrace",
    "SelectionWeights",
    "SpaceRule",
    "TieBreak",
    "TokenDistribution",
    "VocabFormatError",
    "Vocabulary",
    "aggregate_mi",
    "analysis_trace",
    "as_document_bytes",
    "batched",
    "build_vocab",
    "check_complete",
    "chunk",
    "ctc",
    "decode_path",
    "doc_seed",
    "ensure_single_bytes",
    "greedy_segment",
    "init_vocab_ngrams",
    "jsonl_field",
    "load_vocab",
    "metrics_report",
    "min_increase_break",
    "min_increase_occurrence",
    "min_increase_superset",
    "ngram_counts",
    "occurrence_weights",
    "parallel_map_reduce",
    "pathpiece_backward",
    "pathpiece_forward",
    "pearson",
    "prune_step",
    "renyi_efficiency",
    "sample_without_replacement",
    "save_vocab",
    "segment_document",
    "stream_documents",
    "token_distribution",
    "vocab_overlap",
    "weighted_shortest_path",
    "wilcoxon_one_sided",
]
