"""MASS-style masked sequence-to-sequence examples.

Each sentence gets one contiguous masked span; the encoder sees the sentence
with that span replaced by mask tokens and the decoder target is the span.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

from .core import SelectionReport, Sentence

MASK = "<mask>"


@dataclass(frozen=True)
class MaskConfig:
    mask_fraction: float = 0.5
    seed: int = 0
    mask_token: str = MASK

    def __post_init__(self):
        if not 0 < Fraction(str(self.mask_fraction)) <= 1:
            raise ValueError(f"mask_fraction must lie in (0, 1], got {self.mask_fraction}")
        if not self.mask_token or any(c.isspace() for c in self.mask_token):
            raise ValueError("mask_token must be a non-empty token without whitespace")


@dataclass
class MassExample:
    encoder_input: List[str]
    decoder_target: List[str]
    span_start: int
    span_len: int
    language_tag: str = ""

    def to_tsv(self) -> str:
        return "\t".join([
            self.language_tag, str(self.span_start), str(self.span_len),
            " ".join(self.encoder_input), " ".join(self.decoder_target),
        ])

    @classmethod
    def from_tsv(cls, row: str) -> "MassExample":
        tag, start, length, enc, dec = row.rstrip("\n").split("\t")
        return cls(enc.split(), dec.split(), int(start), int(length), tag)


def span_length(m: int, mask_fraction: float) -> int:
    """max(1, round(fraction * m)), halves rounded up, computed exactly."""
    x = Fraction(str(mask_fraction)) * m
    return max(1, int(x + Fraction(1, 2)))


def span_start_for(seed: int, index: int, choices: int) -> int:
    """Deterministic draw in [0, choices) from (seed, line index)."""
    digest = hashlib.blake2b(f"{seed}:{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") % choices


def make_example(tokens: Sequence[str], start: int, length: int, mask_token: str = MASK,
                 tag: str = "") -> MassExample:
    tokens = list(tokens)
    enc = tokens[:start] + [mask_token] * length + tokens[start + length:]
    return MassExample(enc, tokens[start:start + length], start, length, tag)


def generate_mass_examples(
    corpus: Iterable[Tuple[str, Sentence]],
    config: MaskConfig,
    report: Optional[SelectionReport] = None,
) -> Iterator[MassExample]:
    """One example per non-blank ``(tag, sentence)``; blank lines are rejected as ``empty``.

    The span start for line i depends only on (seed, i), so shards can be
    generated independently.
    """
    report = report if report is not None else SelectionReport(seed=config.seed)
    for i, (tag, s) in enumerate(corpus):
        tokens = s.tokens if isinstance(s, Sentence) else s.split()
        m = len(tokens)
        if m == 0:
            report.reject("empty")
            continue
        length = span_length(m, config.mask_fraction)
        start = span_start_for(config.seed, i, m - length + 1)
        report.select()
        yield make_example(tokens, start, length, config.mask_token, tag)


def verify_example(example: MassExample, original: Sentence, mask_token: str = MASK) -> bool:
    """True iff splicing the target back into the masked span reproduces ``original``."""
    tokens = original.tokens if isinstance(original, Sentence) else original.split()
    enc = example.encoder_input
    start, length = example.span_start, example.span_len
    if length != len(example.decoder_target) or len(enc) != len(tokens):
        return False
    if start < 0 or start + length > len(enc):
        return False
    if enc[start:start + length] != [mask_token] * length:
        return False
    rebuilt = enc[:start] + list(example.decoder_target) + enc[start + length:]
    return rebuilt == list(tokens)
