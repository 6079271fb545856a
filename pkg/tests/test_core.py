import random

import pytest
from hypothesis import given, strategies as st

from corpusprep.core import (
    LengthDistribution,
    SelectionReport,
    Sentence,
    compute_length_distribution,
    corpus_stats,
    count_lines,
    derive_seed,
    sentence_length,
)


def test_sentence_tokens_and_length():
    s = Sentence("a  b\tc ")
    assert s.tokens == ["a", "b", "c"]
    assert s.length == 3
    assert Sentence("   ").length == 0
    assert Sentence("").length == 0


def test_char_length_unit():
    assert sentence_length("ab c", "char") == 3
    with pytest.raises(ValueError):
        sentence_length("x", "bytes")


def test_length_distribution_empty():
    d = compute_length_distribution([])
    assert d.counts == {} and d.total == 0


def test_length_distribution_by_hand():
    d = compute_length_distribution(["a b", "a b", "a b c d"])
    assert d.counts == {2: 2, 4: 1}
    assert d.total == 3


def test_length_distribution_uniform():
    d = compute_length_distribution(["w " * 10] * 1872)
    assert d.counts == {10: 1872} and d.total == 1872


def test_blank_lines_counted_at_zero():
    assert compute_length_distribution(["", "a"]).counts == {0: 1, 1: 1}


lines = st.lists(st.lists(st.sampled_from(["a", "bb", "漢", "x"]), max_size=12).map(" ".join), max_size=60)


@given(lines, st.randoms())
def test_length_distribution_order_invariant(corpus, rnd):
    shuffled = corpus[:]
    rnd.shuffle(shuffled)
    assert compute_length_distribution(corpus) == compute_length_distribution(shuffled)
    assert compute_length_distribution(corpus).total == len(corpus)


@given(lines, st.integers(1, 5))
def test_sharded_histograms_merge_exactly(corpus, shards):
    parts = [compute_length_distribution(corpus[i::shards]) for i in range(shards)]
    merged = parts[0]
    for p in parts[1:]:
        merged = merged + p
    assert merged == compute_length_distribution(corpus)


def test_distribution_tsv_roundtrip(tmp_path):
    d = LengthDistribution({4: 1, 2: 2, 10: 7})
    assert d.to_tsv() == "2\t2\n4\t1\n10\t7\n"
    d.save(tmp_path / "d.tsv")
    assert LengthDistribution.load(tmp_path / "d.tsv") == d
    with pytest.raises(ValueError, match="line 1"):
        LengthDistribution.from_tsv("x\t1\n")


def test_corpus_stats_by_hand():
    s = corpus_stats(["a", "a b", "a b c"])
    assert (s.lines, s.tokens, s.median_length) == (3, 6, 2)
    assert (s.min_length, s.max_length, s.distinct_lengths) == (1, 3, 3)


def test_corpus_stats_empty():
    s = corpus_stats([])
    assert s.lines == 0 and s.median_length is None


def test_corpus_stats_single_line():
    s = corpus_stats(["x x x x"])
    assert s.min_length == s.median_length == s.max_length == 4


def test_corpus_stats_even_median_matches_statistics():
    import statistics
    rng = random.Random(3)
    corpus = [" ".join("t" * rng.randint(1, 3) for _ in range(rng.randint(0, 30))) for _ in range(200)]
    lengths = [len(x.split()) for x in corpus]
    s = corpus_stats(corpus)
    assert s.median_length == statistics.median(lengths)
    assert s.stdev_length == pytest.approx(statistics.pstdev(lengths))


def test_report_conservation_and_merge():
    r = SelectionReport()
    r.select(3)
    r.reject("too_short", 2)
    assert r.is_conserved() and r.lines_read == 5
    m = r.merge(r)
    assert m.lines_read == 10 and m.rejections["too_short"] == 4 and m.is_conserved()
    assert SelectionReport.from_dict(m.to_dict()).to_dict() == m.to_dict()


def test_count_lines(tmp_path):
    p = tmp_path / "f"
    p.write_bytes(b"a\nb\n")
    assert count_lines(p) == 2
    p.write_bytes(b"a\nb")
    assert count_lines(p) == 2
    p.write_bytes(b"")
    assert count_lines(p) == 0


def test_derive_seed_stable():
    assert derive_seed(1, "x") == derive_seed(1, "x")
    assert derive_seed(1, "x") != derive_seed(1, "y")
    assert derive_seed(1, "x") != derive_seed(2, "x")
