"""Pre-tokenization: split a document's bytes into chunks.

Chunks are segmented independently downstream; no token ever crosses a
chunk boundary. Rules operate on raw bytes only: "space" means 0x20 and
"digit" means ASCII 0x30-0x39. Other whitespace (tab, newline) is treated
as an ordinary byte, which is a documented limitation of the firstspace
family of modes. Multi-byte UTF-8 codepoints are never split here (no
rule keys on them), though byte-level segmentation may split them later.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

SPACE_BYTE = 0x20
DIGIT_LO = 0x30
DIGIT_HI = 0x39


class SpaceRule(enum.IntEnum):
    NONE = 0
    FIRST_SPACE = 1
    SPACE = 2


@dataclass(frozen=True, slots=True)
class PreTokenMode:
    """A pre-tokenization regime: a space rule plus a digit flag."""

    space_rule: SpaceRule = SpaceRule.NONE
    split_digits: bool = False

    @classmethod
    def from_name(cls, name: str) -> "PreTokenMode":
        try:
            return NAMED_MODES[name]
        except KeyError:
            known = " | ".join(NAMED_MODES)
            raise ValueError(f"unknown pre-tokenization mode {name!r} (expected one of: {known})") from None

    @property
    def name(self) -> str:
        for name, mode in NAMED_MODES.items():
            if mode == self:
                return name
        raise AssertionError("unreachable: all mode combinations are named")


# The five named configurations, keyed by their exact CLI spellings.
NAMED_MODES: dict[str, PreTokenMode] = {
    "none": PreTokenMode(SpaceRule.NONE, False),
    "firstspace": PreTokenMode(SpaceRule.FIRST_SPACE, False),
    "firstsp-digit": PreTokenMode(SpaceRule.FIRST_SPACE, True),
    "space-digit": PreTokenMode(SpaceRule.SPACE, True),
    "space": PreTokenMode(SpaceRule.SPACE, False),
}


@dataclass(frozen=True, slots=True)
class Chunk:
    """A contiguous byte span of a document. `end` is exclusive."""

    start: int
    end: int
    data: bytes

    def __len__(self) -> int:
        return self.end - self.start


def chunk_bounds(data: np.ndarray, mode: PreTokenMode) -> np.ndarray:
    """Chunk boundary offsets for a uint8 array: [0, b1, ..., n].

    Adjacent pairs delimit chunks; an empty document yields a single [0]
    (zero chunks). Boundaries are forced before every space (firstspace
    and space rules), after every space (space rule), and on both sides
    of every ASCII digit when digit splitting is on.
    """
    n = data.shape[0]
    if n == 0:
        return np.zeros(1, dtype=np.int64)
    cuts = [np.array([0, n], dtype=np.int64)]
    if mode.space_rule is not SpaceRule.NONE:
        spaces = np.nonzero(data == SPACE_BYTE)[0]
        cuts.append(spaces)
        if mode.space_rule is SpaceRule.SPACE:
            cuts.append(spaces + 1)
    if mode.split_digits:
        digits = np.nonzero((data >= DIGIT_LO) & (data <= DIGIT_HI))[0]
        cuts.append(digits)
        cuts.append(digits + 1)
    bounds = np.unique(np.concatenate(cuts))
    return bounds[bounds <= n]


def chunk(document: bytes, mode: PreTokenMode) -> list[Chunk]:
    """Split a document into chunks under the given mode.

    Chunks are non-empty, contiguous, non-overlapping, and concatenate to
    exactly the input. An empty document yields an empty list.
    """
    data = np.frombuffer(document, dtype=np.uint8)
    bounds = chunk_bounds(data, mode)
    return [
        Chunk(int(a), int(b), document[a:b])
        for a, b in zip(bounds[:-1], bounds[1:])
    ]
