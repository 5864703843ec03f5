import numpy as np
import pytest
from sklearn.base import clone

import pathpiece as pp
from pathpiece import PathPieceTokenizer

from helpers import complete_vocab


@pytest.fixture(scope="module")
def small_corpus():
    rng = np.random.default_rng(149)
    words = [b"the", b"cat", b"sat", b"on", b"a", b"mat", b"rat", b"hat"]
    docs = []
    for _ in range(60):
        n = int(rng.integers(3, 12))
        docs.append(b" ".join(words[int(i)] for i in rng.integers(0, len(words), size=n)))
    return docs


def test_get_set_params_and_clone():
    tok = PathPieceTokenizer(vocab_size=300, pretokenization="space", seed=7)
    params = tok.get_params()
    assert params["vocab_size"] == 300
    assert params["pretokenization"] == "space"
    dup = clone(tok)
    assert dup.get_params() == params
    tok.set_params(vocab_size=512)
    assert tok.vocab_size == 512


def test_fit_with_prebuilt_vocabulary():
    vocab = complete_vocab([b"ab"])
    tok = PathPieceTokenizer(vocabulary=vocab).fit([])
    assert tok.vocabulary_ is vocab


def test_fit_with_vocabulary_file(tmp_path):
    vocab = complete_vocab([b"he", b"ll", b"o "])
    path = tmp_path / "v.vocab"
    pp.save_vocab(vocab, path)
    tok = PathPieceTokenizer(vocabulary=path).fit([])
    assert tok.vocabulary_.tokens == vocab.tokens


def test_transform_round_trip(small_corpus):
    vocab = complete_vocab([b"the", b"cat", b" ", b"at", b"s", b"ma"])
    tok = PathPieceTokenizer(vocabulary=vocab, pretokenization="firstspace")
    tok.fit([])
    ids = tok.transform(small_corpus)
    assert all(isinstance(row, list) for row in ids)
    assert tok.inverse_transform(ids) == small_corpus


def test_transform_accepts_str_documents():
    vocab = complete_vocab([])
    tok = PathPieceTokenizer(vocabulary=vocab).fit([])
    out = tok.transform(["hi", "yo"])
    assert tok.inverse_transform(out) == [b"hi", b"yo"]


def test_fit_builds_vocabulary(small_corpus):
    tok = PathPieceTokenizer(vocab_size=280, init_size=400, pretokenization="firstspace",
                             min_batch=16)
    tok.fit(small_corpus)
    assert len(tok.vocabulary_) == 280
    assert tok.vocabulary_.is_complete
    ids = tok.transform(small_corpus[:5])
    assert tok.inverse_transform(ids) == small_corpus[:5]


def test_random_tie_break_reproducible(small_corpus):
    vocab = complete_vocab([b"the", b"cat", b"at"])
    tok = PathPieceTokenizer(vocabulary=vocab, tie_break="random", seed=5).fit([])
    a = tok.transform(small_corpus[:10])
    b = tok.transform(small_corpus[:10])
    assert a == b


def test_unfitted_raises():
    with pytest.raises(RuntimeError, match="not fitted"):
        PathPieceTokenizer().transform([b"x"])


def test_incomplete_vocabulary_rejected():
    with pytest.raises(ValueError, match="single-byte"):
        PathPieceTokenizer(vocabulary=pp.Vocabulary([b"a", b"b"])).fit([])
