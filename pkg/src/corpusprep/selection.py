"""Data selection: random baseline, LM-score top-N, length-distribution matching
(single pass, exact integer arithmetic) and LM-sort followed by length matching.
"""

from __future__ import annotations

import heapq
import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .core import LengthDistribution, SelectionReport, Sentence, SentenceLike, sentence_length

log = logging.getLogger(__name__)

RANDOM = "random"
LM_TOP_N = "lm-top-n"
LENGTH_DIST = "length-distribution"
LM_THEN_LD = "lm-then-ld"
METHODS = (RANDOM, LM_TOP_N, LENGTH_DIST, LM_THEN_LD)
# short CLI aliases
METHOD_ALIASES = {"random": RANDOM, "lm": LM_TOP_N, "ld": LENGTH_DIST, "lm-ld": LM_THEN_LD}

NOT_SELECTED = "not_selected"
LENGTH_ABSENT = "length_not_in_target"
QUOTA_FULL = "length_quota_full"


class SelectionError(ValueError):
    pass


@dataclass
class SelectionSpec:
    method: str
    select_num: int
    seed: Optional[int] = None
    target_distribution: Optional[LengthDistribution] = None
    score_file: Optional[Union[str, Path]] = None

    def __post_init__(self):
        self.method = METHOD_ALIASES.get(self.method, self.method)
        if self.method not in METHODS:
            raise SelectionError(f"unknown selection method {self.method!r}")
        if self.select_num < 1:
            raise SelectionError(f"select_num must be >= 1, got {self.select_num}")
        needs_ld = self.method in (LENGTH_DIST, LM_THEN_LD)
        needs_lm = self.method in (LM_TOP_N, LM_THEN_LD)
        if needs_ld != (self.target_distribution is not None):
            raise SelectionError(f"{self.method}: target distribution {'required' if needs_ld else 'not allowed'}")
        if needs_lm != (self.score_file is not None):
            raise SelectionError(f"{self.method}: score file {'required' if needs_lm else 'not allowed'}")
        if (self.method == RANDOM) != (self.seed is not None):
            raise SelectionError(f"{self.method}: seed {'required' if self.method == RANDOM else 'not allowed'}")
        if needs_ld and self.target_distribution.total < 1:
            raise SelectionError("target distribution is empty")


def _text(s: SentenceLike) -> str:
    return s.text if isinstance(s, Sentence) else s


def select_random(corpus: Iterable[SentenceLike], n: int, seed: int) -> Tuple[List[str], SelectionReport]:
    """Uniform sample of min(n, |corpus|) lines without replacement, in corpus order.

    Single pass reservoir sampling; memory is O(n).
    """
    if n < 1:
        raise SelectionError(f"n must be >= 1, got {n}")
    rng = random.Random(seed)
    reservoir: List[Tuple[int, str]] = []
    seen = 0
    for i, s in enumerate(corpus):
        seen += 1
        if i < n:
            reservoir.append((i, _text(s)))
        else:
            j = rng.randrange(i + 1)
            if j < n:
                reservoir[j] = (i, _text(s))
    reservoir.sort()
    report = SelectionReport(seed=seed)
    report.select(len(reservoir))
    if seen > len(reservoir):
        report.reject(NOT_SELECTED, seen - len(reservoir))
    return [t for _, t in reservoir], report


def read_scores(path: Union[str, Path]) -> Iterator[Tuple[float, str]]:
    """Parse ``score<TAB>line`` rows."""
    with open(path, encoding="utf-8", newline="\n") as fh:
        for lineno, row in enumerate(fh, 1):
            row = row[:-1] if row.endswith("\n") else row
            score, sep, line = row.partition("\t")
            if not sep:
                raise SelectionError(f"{path}:{lineno}: expected 'score<TAB>line'")
            try:
                value = float(score)
            except ValueError:
                raise SelectionError(f"{path}:{lineno}: bad score {score!r}") from None
            yield value, line


def _check_scores(scores: Sequence[float], n_lines: int) -> None:
    if len(scores) != n_lines:
        raise SelectionError(f"score/corpus length mismatch: {len(scores)} scores for {n_lines} lines")
    for i, s in enumerate(scores):
        if math.isnan(s):
            raise SelectionError(f"score for line {i + 1} is NaN")


def rank_by_score(scores: Sequence[float]) -> List[int]:
    """Indices by descending score, earlier index first among ties."""
    return sorted(range(len(scores)), key=lambda i: (-scores[i], i))


def select_lm_top_n(
    corpus: Sequence[SentenceLike], scores: Sequence[float], n: int, keep_order: bool = False
) -> Tuple[List[str], SelectionReport]:
    """The ``n`` highest-scoring lines, best first (or in file order with ``keep_order``)."""
    if n < 1:
        raise SelectionError(f"n must be >= 1, got {n}")
    corpus = list(corpus)
    scores = list(scores)
    _check_scores(scores, len(corpus))
    top = heapq.nsmallest(n, range(len(scores)), key=lambda i: (-scores[i], i))
    if keep_order:
        top.sort()
    report = SelectionReport()
    report.select(len(top))
    if len(corpus) > len(top):
        report.reject(NOT_SELECTED, len(corpus) - len(top))
    return [_text(corpus[i]) for i in top], report


def iter_length_distribution(
    corpus: Iterable[SentenceLike],
    target: LengthDistribution,
    select_num: int,
    report: SelectionReport,
    unit: str = "token",
) -> Iterator[str]:
    """Stream form of length-distribution selection.

    A line of length L is admitted iff current[L] / select_num < target[L] / target.total,
    compared as current[L] * target.total < target[L] * select_num.
    """
    if select_num < 1:
        raise SelectionError(f"select_num must be >= 1, got {select_num}")
    target_total = target.total
    if target_total < 1:
        raise SelectionError("target distribution is empty")
    quota = {length: c * select_num for length, c in target.counts.items() if c > 0}
    current: dict = {}
    for s in corpus:
        length = sentence_length(s, unit)
        q = quota.get(length)
        if q is None:
            report.reject(LENGTH_ABSENT)
            continue
        c = current.get(length, 0)
        if c * target_total < q:
            current[length] = c + 1
            report.select()
            yield _text(s)
        else:
            report.reject(QUOTA_FULL)
    shortfall = select_num - report.lines_selected
    if shortfall > 0:
        report.extras["shortfall"] = shortfall
        log.warning("length-distribution selection under-filled: %d of %d lines (short by %d)",
                    report.lines_selected, select_num, shortfall)


def select_length_distribution(
    corpus: Iterable[SentenceLike], target: LengthDistribution, select_num: int, unit: str = "token"
) -> Tuple[List[str], SelectionReport]:
    report = SelectionReport()
    selected = list(iter_length_distribution(corpus, target, select_num, report, unit))
    return selected, report


def select_combined(
    corpus: Sequence[SentenceLike],
    scores: Sequence[float],
    target: LengthDistribution,
    select_num: int,
    unit: str = "token",
) -> Tuple[List[str], SelectionReport]:
    """Sort by descending LM score (stable on index), then run length-distribution selection."""
    corpus = list(corpus)
    scores = list(scores)
    _check_scores(scores, len(corpus))
    ordered = (corpus[i] for i in rank_by_score(scores))
    return select_length_distribution(ordered, target, select_num, unit)
