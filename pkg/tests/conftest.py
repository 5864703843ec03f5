import numpy as np
import pytest

import pathpiece as pp


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation once so timed tests measure the algorithms."""
    vocab = pp.Vocabulary([bytes([i]) for i in range(256)] + [b"ab"], 16)
    trace = pp.analysis_trace(b"abc", vocab)
    pp.decode_path(trace, b"abc", vocab)
    pp.greedy_segment(b"abc", vocab)
    pp.weighted_shortest_path(b"abc", vocab, np.ones(len(vocab)))
    pp.segment_document(b"a b 1", vocab, "firstsp-digit", pp.Engine.PATHPIECE_R, seed=1)
    pp.aggregate_mi([b"abab"], vocab, "none")
    pp.occurrence_weights([b"ab"], vocab, pp.CountSource.NGRAM_COUNTS)
    yield
