"""Backoff n-gram language models: interpolated Kneser-Ney training, scoring, ARPA I/O.

Training uses a single fixed discount (0.75) at every order. Lower orders are
estimated from continuation counts (number of distinct left contexts), except
for n-grams starting with ``<s>``, which have no left context and keep their
raw counts. The interpolated estimates are then stored in backoff form so an
ARPA export evaluates to exactly the same distribution.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .core import Sentence, SentenceLike

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
RESERVED = (BOS, EOS, UNK)

DISCOUNT = 0.75
# log10 "zero" probability used by ARPA writers for <s> (never predicted)
LOG_ZERO = -99.0

NGram = Tuple[str, ...]


class ArpaFormatError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass
class SentenceScore:
    total_log10: float
    tokens_scored: int

    @property
    def per_token_log10(self) -> float:
        return self.total_log10 / self.tokens_scored


def units_of(sentence: SentenceLike, granularity: str) -> List[str]:
    """Modelling units: whitespace tokens, or the non-whitespace characters."""
    text = sentence.text if isinstance(sentence, Sentence) else sentence
    if granularity == "token":
        return sentence.tokens if isinstance(sentence, Sentence) else text.split()
    if granularity == "char":
        return [ch for tok in text.split() for ch in tok]
    raise ValueError(f"unknown granularity {granularity!r}")


class NGramModel:
    """An immutable backoff n-gram model.

    ``logprob`` maps n-grams (tuples of length 1..order) to log10 probabilities;
    ``backoff`` maps context n-grams to log10 backoff weights (absent means 0).
    """

    def __init__(
        self,
        order: int,
        logprob: Dict[NGram, float],
        backoff: Dict[NGram, float],
        granularity: str = "token",
    ):
        if order < 1:
            raise ValueError("order must be >= 1")
        self.order = order
        self.logprob = logprob
        self.backoff = backoff
        self.granularity = granularity
        self.vocab = frozenset(g[0] for g in logprob if len(g) == 1)

    # -- evaluation ---------------------------------------------------------

    def _word(self, w: str) -> str:
        if w in self.vocab and w != BOS:
            return w
        return UNK

    def cond_log10(self, history: Sequence[str], word: str) -> float:
        """log10 P(word | history) under standard backoff evaluation.

        ``history`` must already be mapped to in-vocabulary units.
        """
        logprob = self.logprob
        backoff = self.backoff
        h = tuple(history[max(0, len(history) - self.order + 1):]) if self.order > 1 else ()
        acc = 0.0
        while True:
            lp = logprob.get(h + (word,))
            if lp is not None:
                return acc + lp
            if not h:
                # word absent even as a unigram (closed-vocab diagnostic model)
                return acc + LOG_ZERO
            acc += backoff.get(h, 0.0)
            h = h[1:]

    def score_units(self, units: Sequence[str]) -> SentenceScore:
        words = [self._word(u) for u in units]
        words.append(EOS)
        history: List[str] = [BOS]
        total = 0.0
        for w in words:
            total += self.cond_log10(history, w)
            history.append(w)
        return SentenceScore(total, len(words))

    def score_sentence(self, sentence: SentenceLike) -> SentenceScore:
        return self.score_units(units_of(sentence, self.granularity))

    def perplexity(self, corpus: Iterable[SentenceLike]) -> float:
        total = 0.0
        n = 0
        for s in corpus:
            sc = self.score_sentence(s)
            total += sc.total_log10
            n += sc.tokens_scored
        if n == 0:
            raise ValueError("perplexity of an empty corpus is undefined")
        return 10.0 ** (-total / n)

    def predictable_vocab(self) -> List[str]:
        """Every unit the model can predict: vocab minus <s>, plus <unk> and </s>."""
        return sorted((self.vocab - {BOS}) | {UNK, EOS})

    def histories(self) -> List[NGram]:
        """Histories that have at least one stored continuation (including the empty one)."""
        hs = {g[:-1] for g in self.logprob}
        return sorted(hs, key=lambda g: (len(g), g))

    # -- persistence ----------------------------------------------------------

    def counts_by_order(self) -> List[int]:
        counts = [0] * self.order
        for g in self.logprob:
            counts[len(g) - 1] += 1
        return counts

    def to_arpa(self) -> str:
        by_order: Dict[int, List[NGram]] = defaultdict(list)
        for g in self.logprob:
            by_order[len(g)].append(g)
        out = ["", "\\data\\"]
        for n in range(1, self.order + 1):
            out.append(f"ngram {n}={len(by_order[n])}")
        for n in range(1, self.order + 1):
            out.append("")
            out.append(f"\\{n}-grams:")
            for g in sorted(by_order[n]):
                line = f"{_fmt(self.logprob[g])}\t{' '.join(g)}"
                bo = self.backoff.get(g)
                if bo is not None and n < self.order:
                    line += f"\t{_fmt(bo)}"
                out.append(line)
        out.append("")
        out.append("\\end\\")
        return "\n".join(out) + "\n"

    def save_arpa(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_arpa(), encoding="utf-8", newline="\n")

    @classmethod
    def from_arpa(cls, text: str, granularity: str = "token") -> "NGramModel":
        return _parse_arpa(text.split("\n"), granularity)

    @classmethod
    def load_arpa(cls, path: Union[str, Path], granularity: str = "token") -> "NGramModel":
        return cls.from_arpa(Path(path).read_text(encoding="utf-8"), granularity)


export_arpa = NGramModel.save_arpa
import_arpa = NGramModel.load_arpa


def _fmt(x: float) -> str:
    s = f"{x:.7g}"
    return "0" if s == "-0" else s


def _parse_arpa(lines: List[str], granularity: str) -> NGramModel:
    i = 0
    n_lines = len(lines)
    while i < n_lines and lines[i].strip() != "\\data\\":
        i += 1
    if i == n_lines:
        raise ArpaFormatError(1, "missing \\data\\ header")
    i += 1
    declared: Dict[int, int] = {}
    while i < n_lines and lines[i].strip().startswith("ngram "):
        line = lines[i].strip()
        try:
            lhs, rhs = line[len("ngram "):].split("=")
            n, c = int(lhs), int(rhs)
        except ValueError:
            raise ArpaFormatError(i + 1, f"bad count line {line!r}") from None
        if n != len(declared) + 1 or c < 0:
            raise ArpaFormatError(i + 1, f"unexpected count line {line!r}")
        declared[n] = c
        i += 1
    if not declared:
        raise ArpaFormatError(i + 1, "no 'ngram N=count' lines after \\data\\")
    order = max(declared)

    logprob: Dict[NGram, float] = {}
    backoff: Dict[NGram, float] = {}
    current: Optional[int] = None
    seen = Counter()
    ended = False
    while i < n_lines:
        line = lines[i].strip()
        lineno = i + 1
        i += 1
        if not line:
            continue
        if line == "\\end\\":
            ended = True
            break
        if line.startswith("\\") and line.endswith("-grams:"):
            try:
                n = int(line[1:-len("-grams:")])
            except ValueError:
                raise ArpaFormatError(lineno, f"bad section header {line!r}") from None
            expected = 1 if current is None else current + 1
            if n != expected or n not in declared:
                raise ArpaFormatError(lineno, f"unexpected section header {line!r}")
            if current is not None and seen[current] != declared[current]:
                raise ArpaFormatError(
                    lineno,
                    f"{current}-gram count mismatch: declared {declared[current]}, found {seen[current]}",
                )
            current = n
            continue
        if current is None:
            raise ArpaFormatError(lineno, f"entry outside any n-gram section: {line!r}")
        parts = line.split("\t")
        if len(parts) == 1:
            parts = line.split()
            fields = [parts[0], " ".join(parts[1:1 + current])] + parts[1 + current:]
        else:
            fields = parts
        try:
            lp = float(fields[0])
            words = tuple(fields[1].split(" "))
            bo = float(fields[2]) if len(fields) > 2 else None
        except (IndexError, ValueError):
            raise ArpaFormatError(lineno, f"malformed entry {line!r}") from None
        if len(words) != current or len(fields) > 3 or (bo is not None and current == order):
            raise ArpaFormatError(lineno, f"malformed {current}-gram entry {line!r}")
        if words in logprob:
            raise ArpaFormatError(lineno, f"duplicate n-gram {' '.join(words)!r}")
        logprob[words] = lp
        if bo is not None:
            backoff[words] = bo
        seen[current] += 1
    if not ended:
        raise ArpaFormatError(n_lines, "missing \\end\\")
    if current != order:
        raise ArpaFormatError(i, f"expected {order} n-gram sections, found {current or 0}")
    if seen[current] != declared[current]:
        raise ArpaFormatError(
            i, f"{current}-gram count mismatch: declared {declared[current]}, found {seen[current]}"
        )
    return NGramModel(order, logprob, backoff, granularity)


# ---------------------------------------------------------------------------
# training

def _padded(units: Sequence[str]) -> List[str]:
    return [BOS] + [UNK if u in RESERVED else u for u in units] + [EOS]


def count_ngrams(corpus: Iterable[SentenceLike], order: int, granularity: str = "token") -> Counter:
    """Raw counts of every n-gram (n <= order) ending at a predicted position.

    Blank lines are skipped. The counter is mergeable by addition across shards.
    """
    counts: Counter = Counter()
    for s in corpus:
        units = units_of(s, granularity)
        if not units:
            continue
        seq = _padded(units)
        for end in range(1, len(seq)):
            for n in range(1, min(order, end + 1) + 1):
                counts[tuple(seq[end - n + 1:end + 1])] += 1
    return counts


def train(
    corpus: Iterable[SentenceLike],
    order: int = 5,
    granularity: str = "token",
    smoothing: str = "kn",
    discount: float = DISCOUNT,
) -> NGramModel:
    """Train an order-``order`` model.

    ``smoothing="mle"`` is an unsmoothed diagnostic mode: relative frequencies,
    no backoff weights, closed vocabulary.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    counts = count_ngrams(corpus, order, granularity)
    if not counts:
        raise ValueError("cannot train on an empty corpus")
    if smoothing == "kn":
        return _estimate_kn(counts, order, granularity, discount)
    if smoothing == "mle":
        return _estimate_mle(counts, order, granularity)
    raise ValueError(f"unknown smoothing {smoothing!r}")


def _group_by_history(adjusted: Dict[NGram, int]):
    groups: Dict[NGram, List[NGram]] = defaultdict(list)
    for g in adjusted:
        groups[g[:-1]].append(g)
    return groups


def _estimate_mle(counts: Counter, order: int, granularity: str) -> NGramModel:
    logprob: Dict[NGram, float] = {}
    for n in range(1, order + 1):
        layer = {g: c for g, c in counts.items() if len(g) == n}
        for h, grams in _group_by_history(layer).items():
            denom = sum(layer[g] for g in grams)
            for g in grams:
                logprob[g] = math.log10(layer[g] / denom)
    logprob[(BOS,)] = LOG_ZERO
    return NGramModel(order, logprob, {}, granularity)


def _adjusted_counts(counts: Counter, order: int) -> List[Dict[NGram, int]]:
    """Per-order KN counts: raw at the top order and for <s>-initial n-grams,
    continuation counts (distinct left extensions) elsewhere."""
    layers: List[Dict[NGram, int]] = [dict() for _ in range(order + 1)]
    for g, c in counts.items():
        n = len(g)
        if n == order or g[0] == BOS:
            layers[n][g] = c
    for g in counts:
        n = len(g)
        if n >= 2 and g[1] != BOS:
            suffix = g[1:]
            layers[n - 1][suffix] = layers[n - 1].get(suffix, 0) + 1
    return layers


def _estimate_kn(counts: Counter, order: int, granularity: str, discount: float) -> NGramModel:
    if not 0 < discount < 1:
        raise ValueError("discount must lie in (0, 1)")
    layers = _adjusted_counts(counts, order)
    prob: Dict[NGram, float] = {}
    gamma: Dict[NGram, float] = {}

    unigrams = layers[1]
    denom = sum(unigrams.values())
    vocab_size = len(unigrams) + (0 if (UNK,) in unigrams else 1)
    uniform = discount * len(unigrams) / denom / vocab_size
    for g, a in unigrams.items():
        prob[g] = (a - discount) / denom + uniform
    if (UNK,) not in unigrams:
        prob[(UNK,)] = uniform

    for n in range(2, order + 1):
        for h, grams in _group_by_history(layers[n]).items():
            denom = sum(layers[n][g] for g in grams)
            g_h = discount * len(grams) / denom
            gamma[h] = g_h
            for g in grams:
                prob[g] = (layers[n][g] - discount) / denom + g_h * prob[g[1:]]

    logprob = {g: math.log10(p) for g, p in prob.items()}
    logprob[(BOS,)] = LOG_ZERO
    backoff = {h: math.log10(v) for h, v in gamma.items()}
    return NGramModel(order, logprob, backoff, granularity)
