import math
from collections import Counter

import numpy as np
import pytest

import pathpiece as pp
from pathpiece import Engine, PruneSchedule

from helpers import brute_min_excluding, brute_min_tokens, complete_vocab, random_instance


def python_ledger(corpus, vocab, mode):
    """Reference ledger built from the public per-occurrence operations."""
    mi = Counter()
    occ = Counter()
    for doc in corpus:
        for c in pp.chunk(doc, mode):
            tr = pp.analysis_trace(c.data, vocab)
            for k, (s, e) in enumerate(tr.decode_spans()):
                tid = vocab.token_id(c.data[s : e + 1])
                occ[tid] += 1
                if e > s:
                    mi[tid] += pp.min_increase_occurrence(tr, k)
    return mi, occ


class TestInitVocabNgrams:
    def test_sliding_window_counts(self):
        counts = pp.ngram_counts([b"aaaa"], L=2)
        assert counts == {b"a": 4, b"aa": 3}

    def test_aaaa_size_257(self):
        vocab, _ = pp.init_vocab_ngrams([b"aaaa"], L=2, size=257)
        assert len(vocab) == 257
        assert vocab.is_complete and b"aa" in vocab

    def test_single_byte_corpus(self):
        vocab, counts = pp.init_vocab_ngrams([b"z"], L=16, size=256)
        assert len(vocab) == 256
        assert vocab.is_complete
        assert counts[vocab.token_id(b"z")] == 1

    def test_deterministic_tie_breaking(self):
        corpus = [b"abcabc", b"xyzxyz"]
        a, _ = pp.init_vocab_ngrams(corpus, L=4, size=300)
        b, _ = pp.init_vocab_ngrams(corpus, L=4, size=300)
        assert a.tokens == b.tokens

    def test_empty_corpus(self):
        with pytest.raises(ValueError):
            pp.init_vocab_ngrams([b""], L=4, size=300)

    def test_respects_pretokenization(self):
        counts = pp.ngram_counts([b"a b"], L=3, mode=pp.PreTokenMode.from_name("firstspace"))
        assert b"a " not in counts  # would cross the chunk boundary
        assert b" b" in counts and counts[b" b"] == 1

    def test_weight_by_length_flag(self):
        corpus = [b"ababab" * 5 + b"zz" * 20]
        default, _ = pp.init_vocab_ngrams(corpus, L=6, size=260)
        by_len, _ = pp.init_vocab_ngrams(corpus, L=6, size=260, weight_by_length=True)
        assert default.tokens != by_len.tokens


class TestMinIncreaseBreak:
    def test_abab_example(self):
        v = complete_vocab([b"ab"])
        tr = pp.analysis_trace(b"abab", v)
        assert tr.pl.tolist() == [1, 1, 2, 2]
        assert tr.bpl.tolist() == [2, 2, 1, 1]
        assert pp.min_increase_break(tr, 0, 1) == 1

    def test_single_byte_is_infinite(self):
        v = complete_vocab([])
        tr = pp.analysis_trace(b"ab", v)
        assert math.isinf(pp.min_increase_break(tr, 0, 0))

    def test_never_negative(self):
        rng = np.random.default_rng(67)
        for _ in range(200):
            chunk, vocab = random_instance(rng)
            tr = pp.analysis_trace(chunk, vocab)
            for s, e in tr.decode_spans():
                if e > s:
                    assert pp.min_increase_break(tr, s, e) >= 0

    def test_requires_backward(self):
        v = complete_vocab([b"ab"])
        tr = pp.pathpiece_forward(b"ab", v)
        with pytest.raises(ValueError, match="backward"):
            pp.min_increase_break(tr, 0, 1)


class TestMinIncreaseSuperset:
    def test_no_superset_is_infinite(self):
        v = complete_vocab([b"ab", b"abc"])
        tr = pp.analysis_trace(b"abcd", v)
        seg = pp.decode_path(tr, b"abcd", v)
        assert seg.token_bytes(v) == [b"abc", b"d"]
        assert math.isinf(pp.min_increase_superset(tr, 0, 2))
        assert pp.min_increase_break(tr, 0, 2) == 1

    def test_break_on_whole_chunk_token(self):
        v = complete_vocab([b"ab", b"abc"])
        tr = pp.analysis_trace(b"abc", v)
        assert pp.decode_path(tr, b"abc", v).token_bytes(v) == [b"abc"]
        assert math.isinf(pp.min_increase_superset(tr, 0, 2))
        assert pp.min_increase_break(tr, 0, 2) == 1
        assert pp.min_increase_occurrence(tr, 0) == 1

    def test_width_cap_blocks_superset(self):
        # token at full width L: no strictly wider token is permitted
        v = pp.Vocabulary([bytes([i]) for i in range(256)] + [b"ab"], max_token_len=2)
        tr = pp.analysis_trace(b"abc", v, L=2)
        spans = tr.decode_spans()
        assert (0, 1) in spans  # "ab" on the path, width == L
        assert math.isinf(pp.min_increase_superset(tr, 0, 1, L=2))

    def test_superset_starting_at_chunk_start(self):
        # Path ["ab", "cd"]; omitting "ab" can route through "abc" at no cost.
        v = complete_vocab([b"ab", b"abc", b"cd"])
        tr = pp.analysis_trace(b"abcd", v)
        assert pp.decode_path(tr, b"abcd", v).token_bytes(v) == [b"ab", b"cd"]
        assert int(tr.sc[1]) == 1
        assert pp.min_increase_superset(tr, 0, 1) == 0
        assert pp.min_increase_occurrence(tr, 0) == 0

    def test_superset_of_single_byte_occurrence(self):
        v = complete_vocab([b"ab", b"bcd"])
        tr = pp.analysis_trace(b"abcd", v)
        assert pp.decode_path(tr, b"abcd", v).token_bytes(v) == [b"a", b"bcd"]
        assert pp.min_increase_superset(tr, 0, 0) == 1
        assert pp.min_increase_occurrence(tr, 0) == 1


class TestMinIncreaseOccurrence:
    def test_solution_count_shortcut(self):
        v = complete_vocab([b"ab", b"bc"])
        tr = pp.analysis_trace(b"abc", v)
        seg = pp.decode_path(tr, b"abc", v)
        assert seg.token_bytes(v) == [b"a", b"bc"]
        assert int(tr.sc[2]) == 2
        assert pp.min_increase_occurrence(tr, 1) == 0

    def test_abab_per_occurrence(self):
        v = complete_vocab([b"ab"])
        tr = pp.analysis_trace(b"abab", v)
        spans = tr.decode_spans()
        assert spans == [(0, 1), (2, 3)]
        assert pp.min_increase_occurrence(tr, 0) == 1
        assert pp.min_increase_occurrence(tr, 1) == 1

    def test_oracle_equivalence_sample(self):
        rng = np.random.default_rng(71)
        shortcut_cases = superset_cases = 0
        for _ in range(200):
            chunk, vocab = random_instance(rng, max_len=16, max_extras=12)
            L = vocab.max_token_len
            tr = pp.analysis_trace(chunk, vocab)
            k_opt = brute_min_tokens(chunk, vocab, L)
            assert int(tr.pl[-1]) == k_opt
            for k, (s, e) in enumerate(tr.decode_spans()):
                got = pp.min_increase_occurrence(tr, k)
                oracle = brute_min_excluding(chunk, vocab, L, s, e)
                want = oracle - k_opt if math.isfinite(oracle) else math.inf
                assert got == want, (chunk, s, e, got, want)
                if int(tr.sc[e]) > 1:
                    shortcut_cases += 1
                if math.isfinite(pp.min_increase_superset(tr, s, e)):
                    superset_cases += 1
        assert shortcut_cases > 0 and superset_cases > 0


class TestAggregate:
    def test_abab_ledger(self):
        v = complete_vocab([b"ab"])
        ledger = pp.aggregate_mi([b"abab"], v, "none")
        tid = v.token_id(b"ab")
        assert ledger.mi[tid] == 2
        assert ledger.occurrences[tid] == 2
        assert ledger.ctc == 2

    def test_absent_token_zero(self):
        v = complete_vocab([b"ab", b"zz"])
        ledger = pp.aggregate_mi([b"abab"], v, "none")
        assert ledger.mi[v.token_id(b"zz")] == 0
        assert ledger.occurrences[v.token_id(b"zz")] == 0

    def test_document_order_invariance(self):
        v = complete_vocab([b"ab", b"ba", b"aab"])
        docs = [b"aabab", b"baab", b"ababab"]
        a = pp.aggregate_mi(docs, v, "none")
        b = pp.aggregate_mi(list(reversed(docs)), v, "none")
        assert np.array_equal(a.mi, b.mi)
        assert np.array_equal(a.occurrences, b.occurrences)

    def test_partition_linearity(self):
        v = complete_vocab([b"ab", b"ba"])
        docs = [b"abba", b"baab", b"abab", b"bbbb"]
        whole = pp.aggregate_mi(docs, v, "none")
        part = pp.aggregate_mi(docs[:2], v, "none").merge(pp.aggregate_mi(docs[2:], v, "none"))
        assert np.array_equal(whole.mi, part.mi)
        assert np.array_equal(whole.occurrences, part.occurrences)

    def test_matches_per_occurrence_ops(self):
        rng = np.random.default_rng(73)
        mode = pp.PreTokenMode.from_name("firstspace")
        for _ in range(20):
            n_docs = int(rng.integers(1, 6))
            docs = [
                bytes(rng.choice(list(b"ab cd"), size=int(rng.integers(1, 30))).tolist())
                for _ in range(n_docs)
            ]
            extras = {
                bytes(rng.choice(list(b"ab cd"), size=int(rng.integers(2, 5))).tolist())
                for _ in range(8)
            }
            vocab = complete_vocab(extras)
            ledger = pp.aggregate_mi(docs, vocab, mode)
            mi_ref, occ_ref = python_ledger(docs, vocab, mode)
            for tid in range(len(vocab)):
                assert ledger.occurrences[tid] == occ_ref.get(tid, 0)
                if len(vocab.tokens[tid]) > 1:
                    assert ledger.mi[tid] == mi_ref.get(tid, 0)


class TestPrune:
    def _ledger(self, vocab, mi: dict, occ: dict):
        m = np.zeros(len(vocab), dtype=np.int64)
        o = np.zeros(len(vocab), dtype=np.int64)
        for tok, val in mi.items():
            m[vocab.token_id(tok)] = val
        for tok, val in occ.items():
            o[vocab.token_id(tok)] = val
        return pp.OmissionLedger(m, o)

    def test_unique_minimum(self):
        v = complete_vocab([b"ab", b"cd", b"xy"])
        ledger = self._ledger(v, {b"ab": 2, b"cd": 0, b"xy": 5}, {b"ab": 1, b"cd": 1, b"xy": 1})
        out = pp.prune_step(v, ledger, 1)
        assert b"cd" not in out and b"ab" in out and b"xy" in out

    def test_singles_protected(self):
        v = complete_vocab([b"ab"])
        ledger = pp.OmissionLedger(
            np.zeros(len(v), dtype=np.int64), np.zeros(len(v), dtype=np.int64)
        )
        out = pp.prune_step(v, ledger, 1)
        assert len(out) == 256 and out.is_complete and b"ab" not in out

    def test_batch_exact_target(self):
        v = complete_vocab([b"ab", b"cd", b"ef"])
        ledger = pp.OmissionLedger(
            np.zeros(len(v), dtype=np.int64), np.zeros(len(v), dtype=np.int64)
        )
        out = pp.prune_step(v, ledger, 3)
        assert len(out) == 256

    def test_batch_too_large(self):
        v = complete_vocab([b"ab"])
        ledger = pp.OmissionLedger(
            np.zeros(len(v), dtype=np.int64), np.zeros(len(v), dtype=np.int64)
        )
        with pytest.raises(ValueError, match="single-byte"):
            pp.prune_step(v, ledger, 2)

    def test_tie_break_order(self):
        # equal mi: fewer occurrences go first, then longer tokens, then lex
        v = complete_vocab([b"ab", b"cd", b"xyz"])
        ledger = self._ledger(v, {}, {b"ab": 5, b"cd": 0, b"xyz": 0})
        out1 = pp.prune_step(v, ledger, 1)
        assert b"xyz" not in out1  # zero occurrences, longest
        out2 = pp.prune_step(v, ledger, 2)
        assert b"xyz" not in out2 and b"cd" not in out2 and b"ab" in out2


class TestBuildVocab:
    def test_fixed_point(self):
        v = complete_vocab([b"ab", b"cd"])
        records = []
        out = pp.build_vocab([b"abcd"], v, PruneSchedule(len(v)), "none",
                             progress=records.append)
        assert out.tokens == v.tokens
        assert records == []

    def test_toy_build_matches_exhaustive_search(self):
        import itertools

        corpus = [b"abab", b"abab"]
        multi = [b"ab", b"ba", b"aba", b"bab"]
        initial = complete_vocab(multi)
        records = []
        out = pp.build_vocab(corpus, initial, PruneSchedule(258), "none",
                             progress=records.append)
        assert len(out) == 258 and out.is_complete
        final_ctc = pp.ctc(corpus, out, "none", Engine.PATHPIECE_L)
        best = min(
            pp.ctc(corpus, complete_vocab(pair), "none", Engine.PATHPIECE_L)
            for pair in itertools.combinations(multi, 2)
        )
        assert final_ctc == best == 4
        assert [r.ctc for r in records] == sorted(r.ctc for r in records)

    def test_ctc_nondecreasing_and_deterministic(self):
        rng = np.random.default_rng(79)
        docs = [
            bytes(rng.choice(list(b"the and of to a in "), size=60).tolist())
            for _ in range(40)
        ]
        initial, _ = pp.init_vocab_ngrams(docs, L=6, size=500, mode="firstspace")
        schedule = PruneSchedule(300, batch_fraction=0.5, min_batch=32)
        records = []
        out1 = pp.build_vocab(docs, initial, schedule, "firstspace", progress=records.append)
        out2 = pp.build_vocab(docs, initial, schedule, "firstspace")
        assert len(out1) == 300
        assert out1.tokens == out2.tokens
        ctcs = [r.ctc for r in records]
        assert ctcs == sorted(ctcs)
        assert len(records) >= 2

    def test_requires_initial_at_least_target(self):
        v = complete_vocab([])
        with pytest.raises(ValueError):
            pp.build_vocab([b"ab"], v, PruneSchedule(512), "none")

    def test_schedule_validation(self):
        with pytest.raises(ValueError):
            PruneSchedule(100)
        with pytest.raises(ValueError):
            PruneSchedule(256, batch_fraction=0.0)
        with pytest.raises(ValueError):
            PruneSchedule(256, min_batch=0)


def test_ctc_monotone_under_vocab_subset():
    rng = np.random.default_rng(83)
    for _ in range(20):
        docs = [bytes(rng.choice(list(b"abc"), size=20).tolist()) for _ in range(3)]
        chunk, vocab = random_instance(rng, max_len=1)  # vocabulary donor
        multi = [t for t in vocab.tokens if len(t) > 1]
        big = complete_vocab(multi)
        small = complete_vocab(multi[: len(multi) // 2])
        assert set(small.tokens) <= set(big.tokens)
        c_big = pp.ctc(docs, big, "none", Engine.PATHPIECE_L)
        c_small = pp.ctc(docs, small, "none", Engine.PATHPIECE_L)
        assert c_small >= c_big
