"""Shared data model: sentences, length histograms, run reports and line I/O."""

from __future__ import annotations

import hashlib
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Dict, Iterable, Iterator, List, Optional, Union

__all__ = [
    "Sentence",
    "LengthDistribution",
    "SelectionReport",
    "CorpusStats",
    "as_sentences",
    "sentence_length",
    "compute_length_distribution",
    "corpus_stats",
    "stats_from_distribution",
    "iter_byte_lines",
    "decode_lines",
    "read_sentences",
    "write_lines",
    "count_lines",
    "sha256_file",
    "derive_seed",
]


class Sentence:
    """One line of text with its whitespace token view.

    ``tokens`` uses ``str.split()`` so no token ever contains a whitespace
    character; ``length`` is the token count (0 only for blank lines).
    """

    __slots__ = ("text", "tokens")

    def __init__(self, text: str, tokens: Optional[List[str]] = None):
        self.text = text
        self.tokens = text.split() if tokens is None else tokens

    @property
    def length(self) -> int:
        return len(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __eq__(self, other):
        if isinstance(other, Sentence):
            return self.text == other.text
        return NotImplemented

    def __hash__(self):
        return hash(self.text)

    def __repr__(self):
        return f"Sentence({self.text!r})"


SentenceLike = Union[Sentence, str]


def as_sentences(corpus: Iterable[SentenceLike]) -> Iterator[Sentence]:
    for item in corpus:
        yield item if isinstance(item, Sentence) else Sentence(item)


def sentence_length(sentence: SentenceLike, unit: str = "token") -> int:
    """Length of a sentence in tokens (default) or in non-whitespace characters."""
    if unit == "token":
        if isinstance(sentence, Sentence):
            return sentence.length
        return len(sentence.split())
    if unit == "char":
        text = sentence.text if isinstance(sentence, Sentence) else sentence
        return sum(len(tok) for tok in text.split())
    raise ValueError(f"unknown length unit {unit!r}")


@dataclass
class LengthDistribution:
    """Histogram of sentence length -> number of lines."""

    counts: Dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, length: int) -> int:
        return self.counts.get(length, 0)

    def add(self, length: int, n: int = 1) -> None:
        self.counts[length] = self.counts.get(length, 0) + n

    def merge(self, other: "LengthDistribution") -> "LengthDistribution":
        merged = Counter(self.counts)
        merged.update(other.counts)
        return LengthDistribution(dict(merged))

    __add__ = merge

    def __eq__(self, other):
        if not isinstance(other, LengthDistribution):
            return NotImplemented
        return {k: v for k, v in self.counts.items() if v} == {
            k: v for k, v in other.counts.items() if v
        }

    def to_tsv(self) -> str:
        return "".join(f"{length}\t{n}\n" for length, n in sorted(self.counts.items()) if n)

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_tsv(), encoding="utf-8")

    @classmethod
    def from_tsv(cls, text: str) -> "LengthDistribution":
        dist = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            parts = line.split("\t")
            try:
                length, n = int(parts[0]), int(parts[1])
            except (IndexError, ValueError):
                raise ValueError(f"line {lineno}: expected 'length<TAB>count', got {line!r}") from None
            if len(parts) != 2 or length < 0 or n < 0:
                raise ValueError(f"line {lineno}: expected 'length<TAB>count', got {line!r}")
            dist.add(length, n)
        return dist

    @classmethod
    def load(cls, path: Union[str, Path]) -> "LengthDistribution":
        return cls.from_tsv(Path(path).read_text(encoding="utf-8"))


@dataclass
class SelectionReport:
    """Per-run accounting. Every line read is either selected or rejected with a reason."""

    lines_read: int = 0
    lines_selected: int = 0
    rejections: Counter = field(default_factory=Counter)
    seed: Optional[int] = None
    # stage-specific counters that are not part of conservation (e.g. oversampled lines)
    extras: Dict[str, int] = field(default_factory=dict)

    def select(self, n: int = 1) -> None:
        self.lines_read += n
        self.lines_selected += n

    def reject(self, reason: str, n: int = 1) -> None:
        self.lines_read += n
        self.rejections[reason] += n

    def bump(self, key: str, n: int = 1) -> None:
        self.extras[key] = self.extras.get(key, 0) + n

    @property
    def lines_rejected(self) -> int:
        return sum(self.rejections.values())

    def is_conserved(self) -> bool:
        return self.lines_read == self.lines_selected + self.lines_rejected

    def merge(self, other: "SelectionReport") -> "SelectionReport":
        extras = Counter(self.extras)
        extras.update(other.extras)
        return SelectionReport(
            lines_read=self.lines_read + other.lines_read,
            lines_selected=self.lines_selected + other.lines_selected,
            rejections=self.rejections + other.rejections,
            seed=self.seed,
            extras=dict(extras),
        )

    def to_dict(self) -> dict:
        return {
            "lines_read": self.lines_read,
            "lines_selected": self.lines_selected,
            "rejections": dict(sorted(self.rejections.items())),
            "seed": self.seed,
            "extras": dict(sorted(self.extras.items())),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionReport":
        return cls(
            lines_read=d["lines_read"],
            lines_selected=d["lines_selected"],
            rejections=Counter(d.get("rejections", {})),
            seed=d.get("seed"),
            extras=dict(d.get("extras", {})),
        )

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def compute_length_distribution(
    corpus: Iterable[SentenceLike], unit: str = "token"
) -> LengthDistribution:
    counts: Counter = Counter()
    for item in corpus:
        counts[sentence_length(item, unit)] += 1
    return LengthDistribution(dict(counts))


@dataclass
class CorpusStats:
    lines: int
    tokens: int
    min_length: Optional[int]
    median_length: Optional[float]
    max_length: Optional[int]
    distinct_lengths: int
    mean_length: Optional[float]
    stdev_length: Optional[float]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _histogram_quantile_rank(items, rank):
    # items: sorted (length, count); rank is 0-based
    seen = 0
    for length, n in items:
        seen += n
        if rank < seen:
            return length
    raise IndexError(rank)


def corpus_stats(corpus: Iterable[SentenceLike]) -> CorpusStats:
    """Single-pass summary statistics; memory grows with distinct lengths only."""
    return stats_from_distribution(compute_length_distribution(corpus))


def stats_from_distribution(dist: LengthDistribution) -> CorpusStats:
    n = dist.total
    if n == 0:
        return CorpusStats(0, 0, None, None, None, 0, None, None)
    items = sorted(dist.counts.items())
    tokens = sum(length * c for length, c in items)
    lo = _histogram_quantile_rank(items, (n - 1) // 2)
    hi = _histogram_quantile_rank(items, n // 2)
    median = lo if lo == hi else (lo + hi) / 2
    mean = tokens / n
    var = sum(c * (length - mean) ** 2 for length, c in items) / n
    return CorpusStats(
        lines=n,
        tokens=tokens,
        min_length=items[0][0],
        median_length=median,
        max_length=items[-1][0],
        distinct_lengths=len(items),
        mean_length=mean,
        stdev_length=var ** 0.5,
    )


# ---------------------------------------------------------------------------
# line I/O

def iter_byte_lines(fh: IO[bytes]) -> Iterator[bytes]:
    """Yield raw lines from a binary stream without the trailing LF."""
    for raw in fh:
        yield raw[:-1] if raw.endswith(b"\n") else raw


def decode_lines(
    lines: Iterable[Union[bytes, str]], report: Optional[SelectionReport] = None
) -> Iterator[str]:
    """Decode byte lines as UTF-8; undecodable lines are rejected as ``invalid_utf8``.

    ``str`` items pass through unchanged, so callers can feed either.
    """
    for raw in lines:
        if isinstance(raw, str):
            yield raw
            continue
        try:
            yield raw.decode("utf-8")
        except UnicodeDecodeError:
            if report is not None:
                report.reject("invalid_utf8")


def read_sentences(path: Union[str, Path], report: Optional[SelectionReport] = None) -> Iterator[Sentence]:
    with open(path, "rb") as fh:
        for text in decode_lines(iter_byte_lines(fh), report):
            yield Sentence(text)


def write_lines(lines: Iterable[str], out: Union[str, Path, IO[str]]) -> int:
    """Write one item per line (LF-terminated); returns the number written."""
    n = 0
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            return write_lines(lines, fh)
    for line in lines:
        out.write(line)
        out.write("\n")
        n += 1
    return n


def count_lines(path: Union[str, Path]) -> int:
    n = 0
    last = b"\n"
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            n += chunk.count(b"\n")
            last = chunk[-1:]
    return n + (last != b"\n")


def sha256_file(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def derive_seed(seed: int, *labels: object) -> int:
    """Stable 64-bit child seed from a parent seed and labels (platform independent)."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(seed)).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest(), "big")


def text_stream(fh: IO) -> IO[str]:
    """Wrap a binary stream as UTF-8 text with LF newlines."""
    return io.TextIOWrapper(fh, encoding="utf-8", newline="\n")
