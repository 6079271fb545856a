"""Seeded synthetic multilingual corpora laid out as the bundled paper.recipe expects.

Not meant to look like real language; it only has to exercise every stage:
full-width characters for NFKC, too-short/too-long lines, noisy Chinese
lines with many ASCII tokens, blank lines and a few invalid UTF-8 lines.
"""

from __future__ import annotations

import itertools
import random
from pathlib import Path
from typing import Dict, List, Union

HIRAGANA = [chr(c) for c in range(0x3041, 0x3097)]
KANJI = [chr(c) for c in range(0x4E00, 0x4E00 + 400)]
HANZI = [chr(c) for c in range(0x4E00 + 200, 0x4E00 + 700)]
FULLWIDTH_DIGITS = [chr(c) for c in range(0xFF10, 0xFF1A)]
LATIN = "abcdefghijklmnopqrstuvwxyz"
FRENCH_EXTRA = "éèàçù"


def _vocab(rng: random.Random, alphabet, size: int, lo: int, hi: int) -> List[str]:
    words = set()
    while len(words) < size:
        words.add("".join(rng.choice(alphabet) for _ in range(rng.randint(lo, hi))))
    return sorted(words)


def _zipf_weights(n: int) -> List[float]:
    return [1.0 / (r + 1) for r in range(n)]


class _Language:
    def __init__(self, rng: random.Random, words: List[str]):
        self.rng = rng
        self.words = words
        self.cum_weights = list(itertools.accumulate(_zipf_weights(len(words))))

    def sentence(self, length: int) -> List[str]:
        return self.rng.choices(self.words, cum_weights=self.cum_weights, k=length)


def _length(rng: random.Random) -> int:
    # mostly 3..60 tokens with tails on both sides of the 3..79 filter window
    r = rng.random()
    if r < 0.05:
        return rng.randint(1, 2)
    if r < 0.08:
        return rng.randint(80, 110)
    return max(1, min(79, int(rng.gauss(22, 10))))


def generate(seed: int = 0, lines_per_language: int = 25000, dev_lines: int = 500,
             news_lines: int = 2000) -> Dict[str, List[bytes]]:
    """File name -> raw byte lines (without newlines)."""
    rng = random.Random(seed)
    langs = {
        "ja": _Language(rng, _vocab(rng, HIRAGANA + KANJI, 3000, 1, 4)),
        "en": _Language(rng, _vocab(rng, LATIN, 3000, 2, 9)),
        "fr": _Language(rng, _vocab(rng, LATIN + FRENCH_EXTRA, 3000, 2, 9)),
        "zh": _Language(rng, _vocab(rng, HANZI, 3000, 1, 3)),
    }
    english = langs["en"]

    def line(lang: str, length: int) -> str:
        toks = langs[lang].sentence(length)
        if lang == "zh" and rng.random() < 0.15:
            # noisy web text: replace a chunk with English tokens
            k = rng.randint(1, length)
            toks[:k] = english.sentence(k)
        if lang == "ja" and rng.random() < 0.1:
            toks[rng.randrange(length)] = "".join(rng.choices(FULLWIDTH_DIGITS, k=3))
        return " ".join(toks)

    files: Dict[str, List[bytes]] = {}
    for lang in ("ja", "en", "zh", "fr"):
        rows = []
        for _ in range(lines_per_language):
            r = rng.random()
            if r < 0.005:
                rows.append(b"")
            elif r < 0.007:
                rows.append(b"\xff\xfe broken \xc3")
            else:
                rows.append(line(lang, _length(rng)).encode("utf-8"))
        files[f"{lang}.txt"] = rows
    for lang in ("ja", "en"):
        files[f"{lang}.dev.txt"] = [line(lang, max(3, min(79, int(rng.gauss(24, 9))))).encode("utf-8")
                                    for _ in range(dev_lines)]
    for lang in ("zh", "fr"):
        files[f"{lang}.news.txt"] = [line(lang, max(3, min(79, int(rng.gauss(24, 9))))).encode("utf-8")
                                     for _ in range(news_lines)]

    table = ["# synthetic zh->ja character table"]
    keys = rng.sample(HANZI, 150)
    for k in keys:
        cands = rng.sample(KANJI, rng.randint(1, 3))
        table.append(f"{k}\t{' '.join(dict.fromkeys(cands))}")
    files["zh2ja.tsv"] = [t.encode("utf-8") for t in table]
    return files


def write_synthetic_corpus(out_dir: Union[str, Path], seed: int = 0, lines_per_language: int = 25000,
                           dev_lines: int = 500, news_lines: int = 2000) -> Dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for name, rows in generate(seed, lines_per_language, dev_lines, news_lines).items():
        path = out_dir / name
        path.write_bytes(b"".join(r + b"\n" for r in rows))
        paths[name] = path
    return paths
