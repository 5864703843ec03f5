"""Command-line interface.

Subcommands: segment, build-vocab, randtrain, metrics, compare-vocabs.
Corpus sources are a file path, a directory (one document per file), or
"-" for standard input; framing is line | file | jsonl:<field>.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .construct import PruneSchedule, build_vocab, init_vocab_ngrams
from .corpus_io import Framing, document_batches, parallel_map_reduce, stream_documents
from .metrics import metrics_report, vocab_overlap
from .pretokenize import NAMED_MODES, PreTokenMode
from .randtrain import CountSource, occurrence_weights, sample_without_replacement
from .segment import DocumentCodec, Engine
from .vocab import load_vocab, save_vocab


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", required=True, help="corpus path, directory, or - for stdin")
    p.add_argument("--framing", default="line", help="line | file | jsonl:<field>")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--skip-bad", action="store_true", help="skip malformed corpus lines")


def _corpus_stream(args):
    return stream_documents(args.corpus, Framing.parse(args.framing), skip_bad=args.skip_bad)


def _pretok(name: str) -> PreTokenMode:
    return PreTokenMode.from_name(name)


def _load_init(args, docs, mode: PreTokenMode):
    spec = args.init
    if spec == "ngram":
        return init_vocab_ngrams(docs, L=args.L, size=args.init_size, mode=mode)
    if spec.startswith("file:"):
        return load_vocab(spec[len("file:"):], return_counts=True)
    raise SystemExit(f"--init must be 'ngram' or 'file:<path>', got {spec!r}")


def _weights_from_counts(vocab, counts) -> np.ndarray:
    if counts is None:
        raise SystemExit("weighted engine requires a vocabulary file with a count column")
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0 or np.any(counts <= 0):
        raise SystemExit("weighted engine requires strictly positive counts for every token")
    costs = -np.log(counts / total)
    if np.any(costs <= 0):
        raise SystemExit("degenerate counts: a token has probability 1, cost would be non-positive")
    return costs


def _cmd_segment(args) -> int:
    if args.engine == Engine.WEIGHTED.value:
        vocab, counts = load_vocab(args.vocab, return_counts=True)
        weights = _weights_from_counts(vocab, counts)
    else:
        vocab = load_vocab(args.vocab)
        weights = None
    codec = DocumentCodec.for_vocab(vocab, _pretok(args.pretok), Engine.from_name(args.engine),
                                    L=args.L, seed=args.seed, weights=weights)
    out = sys.stdout
    results = parallel_map_reduce(
        document_batches(_corpus_stream(args), 64),
        _SegmentBatch(codec),
        lambda acc, part: acc + part,
        [],
        workers=args.workers,
    )
    for _, ids in sorted(results, key=lambda r: r[0]):
        if args.emit == "ids":
            out.write(" ".join(str(int(i)) for i in ids))
        else:
            out.write(" ".join(vocab.tokens[int(i)].hex() for i in ids))
        out.write("\n")
    return 0


class _SegmentBatch:
    def __init__(self, codec):
        self.codec = codec

    def __call__(self, batch):
        return [(o, self.codec(o, d)) for o, d in batch]


def _cmd_build_vocab(args) -> int:
    mode = _pretok(args.pretok)
    docs = list(_corpus_stream(args))  # materialized once: stdin cannot be re-read
    initial, _ = _load_init(args, docs, mode)
    schedule = PruneSchedule(args.target, args.batch_fraction, args.min_batch)

    def progress(rec):
        sys.stderr.write(json.dumps(
            {"iter": rec.iteration, "vocab_size": rec.vocab_size, "ctc": rec.ctc}) + "\n")
        sys.stderr.flush()

    final = build_vocab(lambda: iter(docs), initial, schedule, mode,
                        L=args.L, workers=args.workers, progress=progress)
    save_vocab(final, args.out)
    return 0


def _cmd_randtrain(args) -> int:
    mode = _pretok(args.pretok)
    docs = list(_corpus_stream(args))
    initial, _ = _load_init(args, docs, mode)
    source = CountSource.NGRAM_COUNTS if args.counts == "ngram" else CountSource.SEGMENTED_COUNTS
    weights = occurrence_weights(docs, initial, source, mode,
                                 L=args.L, seed=args.seed, workers=args.workers)
    sampled = sample_without_replacement(initial, weights, args.target, args.seed)
    save_vocab(sampled, args.out)
    return 0


def _cmd_metrics(args) -> int:
    if args.engine == Engine.WEIGHTED.value:
        vocab, counts = load_vocab(args.vocab, return_counts=True)
        weights = _weights_from_counts(vocab, counts)
    else:
        vocab = load_vocab(args.vocab)
        weights = None
    alphas = [float(a) for a in args.alpha.split(",") if a]
    report = metrics_report(list(_corpus_stream(args)), vocab, _pretok(args.pretok),
                            Engine.from_name(args.engine), alphas, L=args.L,
                            seed=args.seed, weights=weights, workers=args.workers)
    json.dump(
        {
            "ctc": report.ctc,
            "renyi": {str(a): v for a, v in report.renyi.items()},
            "vocab_size": report.vocab_size,
        },
        sys.stdout,
    )
    sys.stdout.write("\n")
    return 0


def _cmd_compare_vocabs(args) -> int:
    vocabs = [load_vocab(p) for p in args.vocabs]
    json.dump(vocab_overlap(vocabs), sys.stdout)
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathpiece",
                                     description="byte-level lossless subword tokenization toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    modes = " | ".join(NAMED_MODES)
    engines = " | ".join(e.value for e in Engine)

    p = sub.add_parser("segment", help="segment a corpus into token ids")
    _add_corpus_args(p)
    p.add_argument("--vocab", required=True, help="vocabulary file")
    p.add_argument("--pretok", default="none", help=modes)
    p.add_argument("--engine", default="pathpiece-l", help=engines)
    p.add_argument("--emit", choices=("ids", "tokens"), default="ids",
                   help="ids: decimal token ids; tokens: hex token byte-strings")
    p.add_argument("--L", type=int, default=None, help="max token width (default: vocab L)")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("build-vocab", help="construct a vocabulary by iterative pruning")
    _add_corpus_args(p)
    p.add_argument("--init", default="ngram", help="ngram | file:<path>")
    p.add_argument("--init-size", type=int, default=262_144)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--pretok", default="none", help=modes)
    p.add_argument("--L", type=int, default=16)
    p.add_argument("--batch-fraction", type=float, default=0.25)
    p.add_argument("--min-batch", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_vocab)

    p = sub.add_parser("randtrain", help="sample a vocabulary proportionally to counts")
    _add_corpus_args(p)
    p.add_argument("--init", default="ngram", help="ngram | file:<path>")
    p.add_argument("--init-size", type=int, default=262_144)
    p.add_argument("--counts", choices=("ngram", "segmented"), default="ngram")
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--pretok", default="none", help=modes)
    p.add_argument("--L", type=int, default=16)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_randtrain)

    p = sub.add_parser("metrics", help="corpus token count and Renyi efficiencies")
    _add_corpus_args(p)
    p.add_argument("--vocab", required=True)
    p.add_argument("--pretok", default="none", help=modes)
    p.add_argument("--engine", default="pathpiece-l", help=engines)
    p.add_argument("--alpha", default="1.5,2,2.5,3,3.5", help="comma-separated orders")
    p.add_argument("--L", type=int, default=None)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("compare-vocabs", help="exact overlap regions of 2 or 3 vocabularies")
    p.add_argument("vocabs", nargs="+", metavar="VOCAB")
    p.set_defaults(func=_cmd_compare_vocabs)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
