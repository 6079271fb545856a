"""NFKC normalization and sentence filters (token-count bounds, CJK/ASCII ratio)."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Tuple, Union

from .core import SelectionReport, Sentence, decode_lines

# reason tags
EMPTY = "empty"
TOO_SHORT = "too_short"
TOO_LONG = "too_long"
LOW_CJK = "low_cjk_ratio"
HIGH_ASCII = "high_ascii_ratio"


def _exact(x) -> Fraction:
    # Fraction(str(0.3)) == 3/10, so thresholds compare exactly as written.
    return x if isinstance(x, Fraction) else Fraction(str(x))


@dataclass(frozen=True)
class FilterRule:
    min_tokens: int = 3
    max_tokens: int = 80  # exclusive
    cjk_min_ratio: float = 0.30
    ascii_max_ratio: float = 0.30
    cjk_filter_enabled: bool = False

    def __post_init__(self):
        if not 0 < self.min_tokens < self.max_tokens:
            raise ValueError(
                f"need 0 < min_tokens < max_tokens, got {self.min_tokens}, {self.max_tokens}"
            )
        for name in ("cjk_min_ratio", "ascii_max_ratio"):
            if not 0 <= _exact(getattr(self, name)) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")


def nfkc_normalize(line: str) -> str:
    if line.isascii():
        return line
    return unicodedata.normalize("NFKC", line)


def is_chinese_token(token: str) -> bool:
    """True if the token contains a CJK Unified Ideograph (base block or Extension A)."""
    for ch in token:
        if "\u4e00" <= ch <= "\u9fff" or "\u3400" <= ch <= "\u4dbf":
            return True
    return False


def is_english_token(token: str) -> bool:
    return token.isascii() and token.isalpha()


def token_length_filter(sentence: Sentence, rule: FilterRule) -> Optional[str]:
    """Return a rejection reason, or None to keep. Keeps min_tokens <= length < max_tokens."""
    n = sentence.length
    if n < rule.min_tokens:
        return TOO_SHORT
    if n >= rule.max_tokens:
        return TOO_LONG
    return None


def cjk_ratio_filter(sentence: Sentence, rule: FilterRule) -> Optional[str]:
    """Reject when Chinese tokens are fewer than, or English tokens more than, the thresholds.

    Both comparisons are strict, so a ratio of exactly the threshold keeps the line.
    """
    n = sentence.length
    if n == 0:
        return EMPTY
    chinese = english = 0
    for tok in sentence.tokens:
        if is_chinese_token(tok):
            chinese += 1
        elif is_english_token(tok):
            english += 1
    cjk_min = _exact(rule.cjk_min_ratio)
    ascii_max = _exact(rule.ascii_max_ratio)
    if chinese * cjk_min.denominator < cjk_min.numerator * n:
        return LOW_CJK
    if english * ascii_max.denominator > ascii_max.numerator * n:
        return HIGH_ASCII
    return None


def check_sentence(sentence: Sentence, rule: FilterRule) -> Optional[str]:
    if sentence.length == 0:
        return EMPTY
    reason = token_length_filter(sentence, rule)
    if reason is None and rule.cjk_filter_enabled:
        reason = cjk_ratio_filter(sentence, rule)
    return reason


def normalize_stream(
    lines: Iterable[Union[str, bytes]], report: Optional[SelectionReport] = None
) -> Iterator[str]:
    """NFKC-normalize every decodable line; bad UTF-8 is rejected into ``report``."""
    report = report if report is not None else SelectionReport()
    for text in decode_lines(lines, report):
        report.select()
        yield nfkc_normalize(text)


def run_filter_pipeline(
    corpus: Iterable[Union[str, bytes, Sentence]],
    rule: FilterRule,
    report: Optional[SelectionReport] = None,
    normalize: bool = False,
) -> Tuple[Iterator[str], SelectionReport]:
    """Filter a line stream lazily.

    Returns the kept-line iterator and the report it fills in; the report is
    complete once the iterator is exhausted. Kept lines are emitted in input
    order and unmodified unless ``normalize`` is set.
    """
    report = report if report is not None else SelectionReport()

    def gen():
        for item in corpus:
            if isinstance(item, Sentence):
                text = item.text
            elif isinstance(item, bytes):
                try:
                    text = item.decode("utf-8")
                except UnicodeDecodeError:
                    report.reject("invalid_utf8")
                    continue
            else:
                text = item
            if normalize:
                text = nfkc_normalize(text)
            reason = check_sentence(Sentence(text), rule)
            if reason is None:
                report.select()
                yield text
            else:
                report.reject(reason)

    return gen(), report
