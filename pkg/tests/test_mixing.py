import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from corpusprep.core import sha256_file
from corpusprep.mixing import (
    LanguageCorpus,
    MixingError,
    mix_files,
    oversample,
    oversample_mix_lines,
    parse_corpus_arg,
    read_tags,
    write_mixed,
)


def corpus(tag, n):
    return (tag, [f"{tag}-{i}" for i in range(n)])


def test_equal_sizes():
    mixed, report = oversample_mix_lines([corpus("ja", 5), corpus("zh", 5)], 1)
    assert Counter(t for t, _ in mixed) == {"ja": 5, "zh": 5}
    assert report.extras["oversampled"] == 0


def test_two_copies_plus_remainder():
    mixed, report = oversample_mix_lines([corpus("ja", 2), corpus("zh", 5)], 1)
    ja = Counter(x for t, x in mixed if t == "ja")
    assert sum(ja.values()) == 5 and len(mixed) == 10
    assert sorted(ja.values()) == [2, 3]
    assert report.lines_selected == 7 and report.extras["oversampled"] == 3


def test_single_corpus_is_a_shuffle():
    mixed, _ = oversample_mix_lines([corpus("fr", 7)], 3)
    assert sorted(x for _, x in mixed) == sorted(corpus("fr", 7)[1])


def test_errors():
    with pytest.raises(MixingError):
        oversample_mix_lines([], 0)
    with pytest.raises(MixingError, match="'zh'"):
        oversample_mix_lines([corpus("ja", 2), ("zh", [])], 0)
    with pytest.raises(MixingError, match="duplicate"):
        oversample_mix_lines([corpus("ja", 2), corpus("ja", 3)], 0)
    with pytest.raises(MixingError):
        parse_corpus_arg("nocolon")
    assert parse_corpus_arg("zh:a/b:c.txt") == ("zh", "a/b:c.txt")


@given(st.lists(st.integers(1, 40), min_size=1, max_size=5), st.integers(0, 2 ** 32))
def test_every_language_contributes_max(sizes, seed):
    corpora = [corpus(f"l{i}", n) for i, n in enumerate(sizes)]
    mixed, report = oversample_mix_lines(corpora, seed)
    M = max(sizes)
    counts = Counter(t for t, _ in mixed)
    assert all(counts[f"l{i}"] == M for i in range(len(sizes)))
    for tag, lines in corpora:
        per_line = Counter(x for t, x in mixed if t == tag)
        assert set(per_line) <= set(lines)
        q = M // len(lines)
        assert all(c in (q, q + 1) for c in per_line.values())
        assert all(per_line[x] >= q for x in lines)
    assert len(mixed) == report.lines_selected + report.extras["oversampled"]


def test_oversample_remainder_without_replacement():
    out = oversample(list("abcde"), 13, random.Random(0))
    c = Counter(out)
    assert len(out) == 13 and sorted(c.values()) == [2, 2, 3, 3, 3]


def test_files_roundtrip_and_determinism(tmp_path):
    for tag, n in (("ja", 3), ("zh", 8)):
        (tmp_path / f"{tag}.txt").write_text("".join(f"{tag} {i}\n" for i in range(n)), encoding="utf-8")
    specs = [("ja", tmp_path / "ja.txt"), ("zh", tmp_path / "zh.txt")]
    sums = []
    for run in range(2):
        mixed, _ = mix_files(specs, 11)
        out, tags = tmp_path / f"m{run}.txt", tmp_path / f"t{run}.tsv"
        write_mixed(mixed, out, tags)
        sums.append((sha256_file(out), sha256_file(tags)))
        assert read_tags(tags) == [t for t, _ in mixed]
    assert sums[0] == sums[1]
    assert (tmp_path / "t0.tsv").read_text().startswith("0\t")
    mixed2, _ = mix_files(specs, 12)
    assert mixed2 != mix_files(specs, 11)[0]


def test_line_count_checked(tmp_path):
    p = tmp_path / "x.txt"
    p.write_text("a\nb\n", encoding="utf-8")
    c = LanguageCorpus.from_path("x", p)
    assert c.line_count == 2
    c.line_count = 3
    with pytest.raises(MixingError):
        c.read()


def test_bad_tags_file(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("0\tja\n2\tzh\n", encoding="utf-8")
    with pytest.raises(MixingError, match=":2:"):
        read_tags(p)
