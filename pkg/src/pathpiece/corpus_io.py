"""Streaming corpus ingestion and deterministic parallel fan-out.

Documents are opaque byte-strings; nothing here normalizes, lowercases,
or otherwise rewrites content. Every document carries a dense 0-based
ordinal that is stable across re-reads of the same source, which keeps
corpus-level results worker-count invariant.
"""

from __future__ import annotations

import enum
import json
import multiprocessing
import sys
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass
from pathlib import Path


class FramingKind(enum.Enum):
    LINE = "line"
    FILE = "file"
    JSONL = "jsonl"


@dataclass(frozen=True)
class Framing:
    kind: FramingKind = FramingKind.LINE
    field: str | None = None

    @classmethod
    def parse(cls, spec: str) -> "Framing":
        if spec == "line":
            return cls(FramingKind.LINE)
        if spec == "file":
            return cls(FramingKind.FILE)
        if spec.startswith("jsonl:") and len(spec) > len("jsonl:"):
            return cls(FramingKind.JSONL, spec.split(":", 1)[1])
        raise ValueError(f"bad framing {spec!r} (expected line | file | jsonl:<field>)")


LINE = Framing(FramingKind.LINE)
FILE = Framing(FramingKind.FILE)


def jsonl_field(name: str) -> Framing:
    return Framing(FramingKind.JSONL, name)


class CorpusFormatError(ValueError):
    """Malformed corpus content; message names the offending line."""


class DocumentProcessingError(RuntimeError):
    """A per-document function failed; carries the document ordinal."""

    def __init__(self, ordinal: int, cause: BaseException):
        super().__init__(f"document {ordinal}: {cause!r}")
        self.ordinal = ordinal


def _frame_lines(raw: bytes, framing: Framing, source: str, skip_bad: bool) -> Iterator[bytes]:
    if not raw:
        return
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    if framing.kind is FramingKind.LINE:
        yield from lines
        return
    for lineno, line in enumerate(lines, start=1):
        try:
            obj = json.loads(line)
            value = obj[framing.field]
            if not isinstance(value, str):
                raise TypeError(f"field {framing.field!r} is not a string")
        except Exception as e:
            if skip_bad:
                continue
            raise CorpusFormatError(f"{source}:{lineno}: {e}") from None
        yield value.encode("utf-8")


def stream_documents(
    source: str | Path,
    framing: Framing | str = LINE,
    *,
    skip_bad: bool = False,
) -> Iterator[tuple[int, bytes]]:
    """Yield (ordinal, document bytes) in source order.

    LINE framing yields one document per line, stripping exactly the one
    trailing LF. JSONL framing extracts the named string field of each
    JSON object line (UTF-8 bytes). FILE framing yields the whole file.
    A directory source always uses FILE framing over its files sorted by
    path; "-" reads standard input.
    """
    if isinstance(framing, str):
        framing = Framing.parse(framing)
    if str(source) == "-":
        raw = sys.stdin.buffer.read()
        if framing.kind is FramingKind.FILE:
            docs: Iterable[bytes] = [raw] if raw else []
        else:
            docs = _frame_lines(raw, framing, "<stdin>", skip_bad)
        yield from enumerate(docs)
        return
    path = Path(source)
    if path.is_dir():
        files = sorted(p for p in path.rglob("*") if p.is_file())
        yield from enumerate(p.read_bytes() for p in files)
        return
    if not path.exists():
        raise FileNotFoundError(f"corpus source does not exist: {path}")
    raw = path.read_bytes()
    if framing.kind is FramingKind.FILE:
        yield 0, raw
        return
    yield from enumerate(_frame_lines(raw, framing, str(path), skip_bad))


def batched(stream: Iterable, size: int) -> Iterator[list]:
    """Group a stream into lists of up to `size` items, preserving order."""
    batch: list = []
    for item in stream:
        batch.append(item)
        if len(batch) >= size:
            yield batch
            batch = []
    if batch:
        yield batch


_worker_fn: Callable | None = None


def _init_worker(fn: Callable) -> None:
    global _worker_fn
    _worker_fn = fn


def _run_item(item):
    return _worker_fn(item)


def parallel_map_reduce(
    stream: Iterable,
    item_fn: Callable,
    merge_fn: Callable,
    initial,
    *,
    workers: int = 1,
    chunksize: int = 4,
):
    """Fold ``merge_fn(acc, item_fn(item))`` over a stream, optionally in parallel.

    ``merge_fn`` must be commutative and associative; results are merged
    in stream order, so any worker count produces exactly the sequential
    fold. ``item_fn`` must be picklable when workers > 1 (it is shipped
    once per worker).
    """
    acc = initial
    if workers <= 1:
        for item in stream:
            acc = merge_fn(acc, item_fn(item))
        return acc
    ctx = multiprocessing.get_context("fork" if sys.platform != "win32" else "spawn")
    with ctx.Pool(workers, initializer=_init_worker, initargs=(item_fn,)) as pool:
        for result in pool.imap(_run_item, stream, chunksize=chunksize):
            acc = merge_fn(acc, result)
    return acc


def document_batches(
    corpus: Iterable[tuple[int, bytes]],
    batch_docs: int = 64,
) -> Iterator[list[tuple[int, bytes]]]:
    """Batch an (ordinal, bytes) stream for efficient parallel dispatch."""
    return batched(corpus, batch_docs)


@dataclass
class PerDocument:
    """Wrap a per-document function into a per-batch one with error tagging."""

    fn: Callable

    def __call__(self, batch: list[tuple[int, bytes]]):
        out = []
        for ordinal, data in batch:
            try:
                out.append((ordinal, self.fn(ordinal, data)))
            except Exception as e:
                raise DocumentProcessingError(ordinal, e) from e
        return out
