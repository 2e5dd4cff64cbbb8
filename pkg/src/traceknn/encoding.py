"""Activity alphabet and integer encoding of cases."""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Mapping

import numpy as np

from .log_ingest import RawCase


class UnknownLabelError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    labels: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("alphabet labels must be distinct")

    @property
    def index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)

    @classmethod
    def from_table(cls, table: Mapping[str, int]) -> Alphabet:
        ids = sorted(table.values())
        if ids != list(range(len(table))):
            raise ValueError("alphabet table ids must be exactly 0..size-1")
        return cls(tuple(sorted(table, key=table.__getitem__)))

    def encode(self, activities: Iterable[str]) -> tuple[int, ...]:
        idx = self.index
        return tuple(idx[a.strip()] for a in activities)

    def decode(self, symbols: Iterable[int]) -> list[str]:
        return [self.labels[s] for s in symbols]

    def digest(self) -> str:
        """sha256 over the id-ordered labels; identifies the encoding in reports."""
        return hashlib.sha256("\n".join(self.labels).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Sequence:
    case_id: str
    symbols: tuple[int, ...]

    def __post_init__(self):
        if not self.symbols:
            raise ValueError(f"sequence {self.case_id!r} is empty")

    @property
    def length(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class SequenceCorpus:
    alphabet: Alphabet
    sequences: tuple[Sequence, ...]
    excluded: int = 0

    def __post_init__(self):
        size = len(self.alphabet)
        for s in self.sequences:
            if any(x < 0 or x >= size for x in s.symbols):
                raise ValueError(f"sequence {s.case_id!r} has symbols outside the alphabet")

    @property
    def n(self) -> int:
        return len(self.sequences)

    def packed(self) -> tuple[np.ndarray, np.ndarray]:
        """All symbols concatenated plus an offsets array of length n+1."""
        lengths = np.fromiter((len(s) for s in self.sequences), dtype=np.int64, count=self.n)
        offsets = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(lengths, out=offsets[1:])
        flat = np.fromiter((x for s in self.sequences for x in s.symbols),
                           dtype=np.int64, count=int(offsets[-1]))
        return flat, offsets

    def dump(self) -> str:
        """Debug listing: one `case_id: s0 s1 ...` line per case."""
        return "".join(f"{s.case_id}: {' '.join(map(str, s.symbols))}\n" for s in self.sequences)


def read_alphabet_table(path_or_lines) -> dict[str, int]:
    """Read a `label<TAB>id` table. Blank lines and `#` comments are ignored."""
    if isinstance(path_or_lines, str):
        with open(path_or_lines, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    else:
        lines = list(path_or_lines)
    table: dict[str, int] = {}
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        try:
            label, ident = line.rstrip("\n").rsplit("\t", 1)
            table[label.strip()] = int(ident)
        except ValueError:
            raise ValueError(f"bad alphabet table line {lineno}: {line!r}") from None
    return table


def bpi2014_table() -> dict[str, int]:
    """The 39-activity index used for the BPI 2014 incident-activity log."""
    text = resources.files("traceknn.data").joinpath("bpi2014_alphabet.tsv").read_text("utf-8")
    return read_alphabet_table(text.splitlines())


def build_corpus(cases: Iterable[RawCase], table: Mapping[str, int] | None = None) -> SequenceCorpus:
    """Encode cases as symbol sequences.

    Without `table`, ids follow first appearance of each activity label.
    With `table`, ids come from it and any label missing from it is an error.
    """
    cases = list(cases)
    if not cases:
        raise ValueError("build_corpus needs at least one case")

    if table is None:
        seen: dict[str, int] = {}
        for c in cases:
            for e in c.events:
                seen.setdefault(e.activity.strip(), len(seen))
        alphabet = Alphabet(tuple(seen))
    else:
        alphabet = Alphabet.from_table(table)
        idx = alphabet.index
        unknown = sorted({e.activity.strip() for c in cases for e in c.events} - idx.keys())
        if unknown:
            raise UnknownLabelError(f"activity labels not in alphabet table: {unknown}")

    sequences = []
    excluded = 0
    for c in cases:
        symbols = alphabet.encode(e.activity for e in c.events)
        if not symbols:
            excluded += 1
            continue
        sequences.append(Sequence(c.case_id, symbols))
    return SequenceCorpus(alphabet, tuple(sequences), excluded)


def variant_histogram(corpus: SequenceCorpus) -> dict[tuple[int, ...], int]:
    """Occurrences of each distinct symbol sequence, most frequent first."""
    counts = Counter(s.symbols for s in corpus.sequences)
    return dict(counts.most_common())
