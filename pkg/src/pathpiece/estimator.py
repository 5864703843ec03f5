"""sklearn-style estimator wrapping vocabulary construction and segmentation.

``fit`` builds (or loads) a vocabulary; ``transform`` encodes documents
into token id lists; ``inverse_transform`` restores the exact original
bytes. The estimator composes with sklearn pipelines and ``clone``
because all constructor parameters are stored verbatim.
"""

from __future__ import annotations

import os

from sklearn.base import BaseEstimator, TransformerMixin

from .construct import PruneSchedule, build_vocab, init_vocab_ngrams
from .pretokenize import PreTokenMode
from .segment import Engine, segment_document
from .validation import as_document_bytes, check_complete
from .vocab import Vocabulary, load_vocab


class PathPieceTokenizer(BaseEstimator, TransformerMixin):
    """Byte-level lossless tokenizer with shortest-path segmentation.

    Parameters
    ----------
    vocab_size : target vocabulary size (includes the 256 single bytes).
    max_token_len : widest token in bytes.
    pretokenization : one of none | firstspace | space | firstsp-digit |
        space-digit; tokens never cross the resulting chunk boundaries.
    tie_break : "longest" for deterministic segmentation, "random" for
        seeded uniform choice among equally short paths.
    init_size : size of the n-gram initial vocabulary for construction.
    batch_fraction, min_batch : prune batch sizing per iteration.
    vocabulary : optional pre-built Vocabulary or path to a vocabulary
        file; when given, fit skips construction entirely.
    seed : RNG seed for random tie-breaking.
    workers : parallel worker processes for corpus passes.
    """

    def __init__(
        self,
        vocab_size: int = 32_768,
        max_token_len: int = 16,
        pretokenization: str = "firstspace",
        tie_break: str = "longest",
        init_size: int = 262_144,
        batch_fraction: float = 0.25,
        min_batch: int = 256,
        vocabulary=None,
        seed: int = 0,
        workers: int = 1,
    ):
        self.vocab_size = vocab_size
        self.max_token_len = max_token_len
        self.pretokenization = pretokenization
        self.tie_break = tie_break
        self.init_size = init_size
        self.batch_fraction = batch_fraction
        self.min_batch = min_batch
        self.vocabulary = vocabulary
        self.seed = seed
        self.workers = workers

    def _mode(self) -> PreTokenMode:
        return PreTokenMode.from_name(self.pretokenization)

    def _engine(self) -> Engine:
        if self.tie_break == "longest":
            return Engine.PATHPIECE_L
        if self.tie_break == "random":
            return Engine.PATHPIECE_R
        raise ValueError(f"tie_break must be 'longest' or 'random', got {self.tie_break!r}")

    def fit(self, X, y=None):
        """Build the vocabulary from documents X (or adopt the given one)."""
        self._engine()
        if self.vocabulary is not None:
            if isinstance(self.vocabulary, Vocabulary):
                vocab = self.vocabulary
            elif isinstance(self.vocabulary, (str, os.PathLike)):
                vocab = load_vocab(self.vocabulary)
            else:
                raise TypeError("vocabulary must be a Vocabulary or a path")
            check_complete(vocab)
            self.vocabulary_ = vocab
            return self
        docs = [as_document_bytes(d) for d in X]
        mode = self._mode()
        initial, _ = init_vocab_ngrams(docs, L=self.max_token_len,
                                       size=max(self.init_size, self.vocab_size), mode=mode)
        if len(initial) < self.vocab_size:
            raise ValueError(
                f"corpus yields only {len(initial)} candidate tokens, "
                f"fewer than vocab_size={self.vocab_size}"
            )
        schedule = PruneSchedule(self.vocab_size, self.batch_fraction, self.min_batch)
        self.vocabulary_ = build_vocab(docs, initial, schedule, mode, workers=self.workers)
        return self

    def transform(self, X) -> list[list[int]]:
        """Encode documents into token id lists."""
        self._check_fitted()
        mode = self._mode()
        engine = self._engine()
        return [
            segment_document(doc, self.vocabulary_, mode, engine,
                             seed=self.seed, ordinal=i).token_ids
            for i, doc in enumerate(X)
        ]

    def inverse_transform(self, token_id_lists) -> list[bytes]:
        """Concatenate token bytes back into the original documents."""
        self._check_fitted()
        return [self.vocabulary_.decode(ids) for ids in token_id_lists]

    def _check_fitted(self):
        if not hasattr(self, "vocabulary_"):
            raise RuntimeError("tokenizer is not fitted; call fit() or pass vocabulary=")

    def _more_tags(self):
        return {"X_types": ["string"]}
