"""Mix per-language corpora, oversampling every corpus up to the largest one."""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

from .core import SelectionReport, count_lines, derive_seed, read_sentences


class MixingError(ValueError):
    pass


@dataclass
class LanguageCorpus:
    language_tag: str
    path: Path
    line_count: int

    @classmethod
    def from_path(cls, tag: str, path: Union[str, Path]) -> "LanguageCorpus":
        path = Path(path)
        return cls(tag, path, count_lines(path))

    def read(self) -> List[str]:
        lines = [s.text for s in read_sentences(self.path)]
        if len(lines) != self.line_count:
            raise MixingError(
                f"{self.language_tag}: {self.path} has {len(lines)} readable lines, expected {self.line_count}"
            )
        return lines


def oversample(lines: Sequence[str], target: int, rng: random.Random) -> List[str]:
    """floor(target/len) full copies plus a uniform sample of the remainder (kept in file order)."""
    copies, rest = divmod(target, len(lines))
    out = list(lines) * copies
    if rest:
        out.extend(lines[i] for i in sorted(rng.sample(range(len(lines)), rest)))
    return out


def oversample_mix_lines(
    corpora: Sequence[Tuple[str, Sequence[str]]], seed: int
) -> Tuple[List[Tuple[str, str]], SelectionReport]:
    """Mix in-memory corpora; returns shuffled ``(tag, line)`` pairs and a report.

    Every corpus contributes exactly max(size) lines. In the report every input
    line counts as selected; the added copies are counted in ``extras['oversampled']``.
    """
    if not corpora:
        raise MixingError("need at least one corpus to mix")
    tags = [t for t, _ in corpora]
    if len(set(tags)) != len(tags):
        raise MixingError(f"duplicate language tags in {tags}")
    for tag, lines in corpora:
        if not lines:
            raise MixingError(f"corpus {tag!r} is empty")
    largest = max(len(lines) for _, lines in corpora)
    mixed: List[Tuple[str, str]] = []
    report = SelectionReport(seed=seed)
    for tag, lines in corpora:
        rng = random.Random(derive_seed(seed, "oversample", tag))
        mixed.extend((tag, line) for line in oversample(lines, largest, rng))
        report.select(len(lines))
        report.bump("oversampled", largest - len(lines))
        report.extras[f"lines_{tag}"] = largest
    random.Random(derive_seed(seed, "shuffle")).shuffle(mixed)
    return mixed, report


def oversample_mix(corpora: Sequence[LanguageCorpus], seed: int):
    pairs = []
    for c in corpora:
        if c.line_count == 0:
            raise MixingError(f"corpus {c.language_tag!r} is empty")
        pairs.append((c.language_tag, c.read()))
    return oversample_mix_lines(pairs, seed)


def write_mixed(mixed: Sequence[Tuple[str, str]], out_path: Union[str, Path], tags_path: Union[str, Path]) -> None:
    """Corpus text to ``out_path``; ``line_index<TAB>tag`` (0-based) to ``tags_path``."""
    with open(out_path, "w", encoding="utf-8", newline="\n") as out, \
            open(tags_path, "w", encoding="utf-8", newline="\n") as tags:
        for i, (tag, line) in enumerate(mixed):
            out.write(line + "\n")
            tags.write(f"{i}\t{tag}\n")


def read_tags(path: Union[str, Path]) -> List[str]:
    tags: List[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, row in enumerate(fh, 1):
            idx, sep, tag = row.rstrip("\n").partition("\t")
            if not sep or not idx.isdigit() or int(idx) != len(tags):
                raise MixingError(f"{path}:{lineno}: expected '{len(tags)}<TAB>tag'")
            tags.append(tag)
    return tags


def parse_corpus_arg(arg: str) -> Tuple[str, str]:
    tag, sep, path = arg.partition(":")
    if not sep or not tag or not path:
        raise MixingError(f"expected TAG:PATH, got {arg!r}")
    return tag, path


def mix_files(specs: Sequence[Tuple[str, Union[str, Path]]], seed: int) -> Tuple[List[Tuple[str, str]], SelectionReport]:
    return oversample_mix([LanguageCorpus.from_path(t, p) for t, p in specs], seed)


__all__ = [
    "LanguageCorpus", "MixingError", "oversample", "oversample_mix", "oversample_mix_lines",
    "write_mixed", "read_tags", "parse_corpus_arg", "mix_files",
]
