"""Character-level script conversion driven by a mapping table.

Two modes: one-to-one (first candidate per character) and lm-scored, where
every combination of candidates for a whitespace token is scored with a
target-language character LM and the best one wins.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Tuple, Union

from .core import SelectionReport, Sentence, SentenceLike
from .ngram import NGramModel

ONE_TO_ONE = "one-to-one"
LM_SCORED = "lm-scored"


class MappingTableError(ValueError):
    pass


@dataclass
class MappingTable:
    """source character -> candidate target characters, in priority order."""

    entries: Dict[str, List[str]] = field(default_factory=dict)

    def __post_init__(self):
        for src, cands in self.entries.items():
            if len(src) != 1:
                raise MappingTableError(f"key {src!r} is not a single character")
            if not cands or len(set(cands)) != len(cands):
                raise MappingTableError(f"candidates for {src!r} must be non-empty and distinct")
            if any(len(c) != 1 or c.isspace() for c in cands) or src.isspace():
                raise MappingTableError(f"{src!r} and its candidates must be single non-space characters")
        self._first = str.maketrans({src: cands[0] for src, cands in self.entries.items()})

    def candidates(self, ch: str) -> List[str]:
        return self.entries.get(ch) or [ch]

    def first_translation(self) -> dict:
        return self._first

    def __len__(self):
        return len(self.entries)


def parse_mapping_table(lines: Iterable[str]) -> MappingTable:
    entries: Dict[str, List[str]] = {}
    first_seen: Dict[str, int] = {}
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise MappingTableError(f"line {lineno}: expected 2 tab-separated columns, got {len(cols)}")
        src, rest = cols
        if len(src) != 1 or src.isspace():
            raise MappingTableError(f"line {lineno}: source {src!r} is not a single character")
        cands = rest.split()
        if not cands:
            raise MappingTableError(f"line {lineno}: no candidates for {src!r}")
        for c in cands:
            if len(c) != 1:
                raise MappingTableError(f"line {lineno}: candidate {c!r} is not a single character")
        if len(set(cands)) != len(cands):
            raise MappingTableError(f"line {lineno}: duplicate candidates for {src!r}")
        if src in entries:
            raise MappingTableError(
                f"line {lineno}: duplicate source character {src!r} (first defined on line {first_seen[src]})"
            )
        entries[src] = cands
        first_seen[src] = lineno
    return MappingTable(entries)


def load_mapping_table(path: Union[str, Path]) -> MappingTable:
    with open(path, encoding="utf-8") as fh:
        return parse_mapping_table(fh)


def map_one_to_one(sentence: SentenceLike, table: MappingTable) -> Sentence:
    text = sentence.text if isinstance(sentence, Sentence) else sentence
    return Sentence(text.translate(table.first_translation()))


@dataclass
class MappingConfig:
    mode: str = ONE_TO_ONE
    candidate_cap: int = 4096
    lm: Optional[NGramModel] = None

    def __post_init__(self):
        if self.mode not in (ONE_TO_ONE, LM_SCORED):
            raise ValueError(f"unknown mapping mode {self.mode!r}")
        if self.candidate_cap < 1:
            raise ValueError("candidate_cap must be positive")
        if self.mode == LM_SCORED and self.lm is None:
            raise ValueError("lm-scored mapping requires a character LM")
        if self.mode == ONE_TO_ONE and self.lm is not None:
            raise ValueError("one-to-one mapping takes no LM")


def token_candidates(token: str, table: MappingTable) -> List[List[str]]:
    return [table.candidates(ch) for ch in token]


def combination_count(token: str, table: MappingTable) -> int:
    return math.prod(len(c) for c in token_candidates(token, table))


def best_mapping(token: str, table: MappingTable, lm: NGramModel, cap: int) -> Optional[str]:
    """Highest-scoring candidate string for ``token``, or None when over the cap.

    Ties keep the earliest combination in enumeration order (leftmost
    character varies slowest, candidates in table order).
    """
    cands = token_candidates(token, table)
    if math.prod(len(c) for c in cands) > cap:
        return None
    best = None
    best_score = -math.inf
    for combo in itertools.product(*cands):
        score = lm.score_units(combo).total_log10
        if score > best_score:
            best, best_score = combo, score
    return "".join(best)


class LMScoredMapper:
    """Token-wise LM-scored mapper with a per-token cache (tokens repeat heavily)."""

    def __init__(self, table: MappingTable, config: MappingConfig, report: Optional[SelectionReport] = None):
        if config.mode != LM_SCORED or config.lm is None:
            raise ValueError("LMScoredMapper needs mode lm-scored and an LM")
        self.table = table
        self.config = config
        self.report = report
        self._cache: Dict[str, Tuple[str, bool]] = {}

    def map_token(self, token: str) -> str:
        hit = self._cache.get(token)
        if hit is None:
            best = best_mapping(token, self.table, self.config.lm, self.config.candidate_cap)
            if best is None:
                hit = (token.translate(self.table.first_translation()), True)
            else:
                hit = (best, False)
            self._cache[token] = hit
        if hit[1] and self.report is not None:
            self.report.bump("cap_fallback")
        return hit[0]

    def __call__(self, sentence: SentenceLike) -> Sentence:
        s = sentence if isinstance(sentence, Sentence) else Sentence(sentence)
        return _rebuild(s.text, [self.map_token(t) for t in s.tokens])


def _rebuild(text: str, mapped: List[str]) -> Sentence:
    # swap tokens in place so the original whitespace survives
    out = []
    pos = 0
    for tok in mapped:
        while text[pos].isspace():
            out.append(text[pos])
            pos += 1
        out.append(tok)
        pos += len(tok)
    out.append(text[pos:])
    return Sentence("".join(out), mapped)


def map_lm_scored(sentence: SentenceLike, table: MappingTable, config: MappingConfig,
                  report: Optional[SelectionReport] = None) -> Sentence:
    return LMScoredMapper(table, config, report)(sentence)


def map_stream(corpus: Iterable[SentenceLike], table: MappingTable, config: MappingConfig,
               report: Optional[SelectionReport] = None) -> Iterator[str]:
    report = report if report is not None else SelectionReport()
    if config.mode == LM_SCORED:
        mapper = LMScoredMapper(table, config, report)
    else:
        trans = table.first_translation()
        mapper = None
    for s in corpus:
        text = s.text if isinstance(s, Sentence) else s
        report.select()
        yield mapper(text).text if mapper else text.translate(trans)
