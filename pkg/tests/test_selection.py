import math
import random

import pytest
from hypothesis import given, strategies as st

from corpusprep.core import LengthDistribution, compute_length_distribution
from corpusprep.selection import (
    SelectionError,
    SelectionSpec,
    iter_length_distribution,
    read_scores,
    select_combined,
    select_length_distribution,
    select_lm_top_n,
    select_random,
)
from corpusprep.core import SelectionReport

from oracles import ld_resimulate, top_n_bruteforce


def line(n, tag="w"):
    return " ".join([tag] * n)


# ---- length distribution -----------------------------------------------------

def test_ld_hand_trace():
    target = compute_length_distribution([line(2), line(2), line(4)])
    inp = [line(2, "a"), line(4, "b"), line(4, "c"), line(2, "d"), line(2, "e")]
    out, report = select_length_distribution(inp, target, 3)
    assert out == [inp[0], inp[1], inp[3]]
    assert report.rejections["length_quota_full"] == 2 and report.is_conserved()


def test_ld_absent_lengths_select_nothing():
    target = compute_length_distribution([line(2)])
    out, report = select_length_distribution([line(3), line(5)], target, 10)
    assert out == [] and report.rejections["length_not_in_target"] == 2
    assert report.extras["shortfall"] == 10


def test_ld_input_equal_to_target_selects_everything():
    rng = random.Random(1)
    dev = [line(rng.randint(1, 9)) for _ in range(40)]
    out, _ = select_length_distribution(dev, compute_length_distribution(dev), len(dev))
    assert out == dev


def test_ld_shortfall_warns(caplog):
    target = LengthDistribution({3: 1})
    with caplog.at_level("WARNING"):
        select_length_distribution([line(3)], target, 5)
    assert "short by 4" in caplog.text


lengths = st.lists(st.integers(1, 8), min_size=1, max_size=30)


@given(lengths, st.lists(st.integers(1, 8), max_size=120), st.integers(1, 60))
def test_ld_matches_oracle_and_caps(target_lens, input_lens, n):
    target = LengthDistribution()
    for L in target_lens:
        target.add(L)
    inp = [line(L, str(i)) for i, L in enumerate(input_lens)]
    out, report = select_length_distribution(inp, target, n)
    picked = ld_resimulate(target_lens, input_lens, n)
    assert out == [inp[i] for i in picked]
    got = compute_length_distribution(out).counts
    for L, c in got.items():
        assert c <= math.ceil(n * target.counts[L] / target.total)
    assert len(out) <= n + len(target.counts)
    assert report.is_conserved()


@given(lengths, st.lists(st.integers(1, 8), max_size=80), st.integers(1, 40), st.data())
def test_ld_prefix_monotone(target_lens, input_lens, n, data):
    target = LengthDistribution()
    for L in target_lens:
        target.add(L)
    k = data.draw(st.integers(0, len(input_lens)))
    inp = [line(L, str(i)) for i, L in enumerate(input_lens)]
    full, _ = select_length_distribution(inp, target, n)
    prefix, _ = select_length_distribution(inp[:k], target, n)
    assert prefix == [x for x in full if x in set(inp[:k])]


def test_ld_is_lazy():
    target = LengthDistribution({1: 1})
    it = iter_length_distribution(iter(["a", "b"]), target, 1, SelectionReport())
    assert next(it) == "a"


# ---- LM top-N ----------------------------------------------------------------

def test_top_n_examples():
    corpus = ["l1", "l2", "l3"]
    assert select_lm_top_n(corpus, [-1.0, -5.0, -2.0], 2)[0] == ["l1", "l3"]
    assert select_lm_top_n(corpus, [-1.0, -5.0, -2.0], 9)[0] == ["l1", "l3", "l2"]
    assert select_lm_top_n(corpus, [-3.0, -3.0, -3.0], 2)[0] == ["l1", "l2"]
    assert select_lm_top_n(corpus, [-2.0, -5.0, -1.0], 2, keep_order=True)[0] == ["l1", "l3"]


def test_top_n_errors():
    with pytest.raises(SelectionError, match="2 scores for 3 lines"):
        select_lm_top_n(["a", "b", "c"], [1.0, 2.0], 1)
    with pytest.raises(SelectionError, match="NaN"):
        select_lm_top_n(["a"], [float("nan")], 1)


@given(st.lists(st.sampled_from([-3.0, -2.5, -1.0, 0.0, -7.25]), max_size=200), st.integers(1, 250))
def test_top_n_matches_bruteforce(scores, n):
    corpus = [f"s{i}" for i in range(len(scores))]
    out, report = select_lm_top_n(corpus, scores, n)
    assert out == [corpus[i] for i in top_n_bruteforce(scores, n)]
    assert report.is_conserved()


def test_read_scores(tmp_path):
    p = tmp_path / "s.tsv"
    p.write_text("-1.5\ta b\n-2\t\n", encoding="utf-8")
    assert list(read_scores(p)) == [(-1.5, "a b"), (-2.0, "")]
    p.write_text("oops\n", encoding="utf-8")
    with pytest.raises(SelectionError, match=":1:"):
        list(read_scores(p))


# ---- combined ----------------------------------------------------------------

def test_combined_equal_scores_is_plain_ld():
    rng = random.Random(4)
    corpus = [line(rng.randint(1, 5), str(i)) for i in range(50)]
    target = compute_length_distribution(corpus[:20])
    a, _ = select_combined(corpus, [0.0] * 50, target, 15)
    b, _ = select_length_distribution(corpus, target, 15)
    assert a == b


def test_combined_prefers_higher_score_of_same_length():
    corpus = ["low low", "high high", "x"]
    target = LengthDistribution({2: 1, 1: 1})
    out, _ = select_combined(corpus, [-9.0, -1.0, -5.0], target, 1)
    assert out == ["high high", "x"]


def test_combined_single_bucket():
    corpus = ["a a", "b b", "c", "d d", "e e"]
    scores = [-4.0, -1.0, 0.0, -2.0, -3.0]
    out, _ = select_combined(corpus, scores, LengthDistribution({2: 5}), 3)
    assert out == ["b b", "d d", "e e"]


# ---- random ------------------------------------------------------------------

def test_random_everything_in_order():
    corpus = [f"l{i}" for i in range(10)]
    assert select_random(corpus, 10, 1)[0] == corpus
    assert select_random(corpus, 99, 1)[0] == corpus


def test_random_deterministic_subsequence():
    corpus = [f"l{i}" for i in range(500)]
    a, ra = select_random(corpus, 37, 5)
    b, _ = select_random(corpus, 37, 5)
    assert a == b and len(a) == 37
    assert [int(x[1:]) for x in a] == sorted(int(x[1:]) for x in a)
    assert ra.rejections["not_selected"] == 463 and ra.is_conserved()
    assert select_random(corpus, 37, 6)[0] != a


def test_random_is_roughly_uniform():
    corpus = list(range(20))
    hits = [0] * 20
    for seed in range(2000):
        for x in select_random(corpus, 5, seed)[0]:
            hits[x] += 1
    assert min(hits) > 400 and max(hits) < 600


def test_method_field_invariants():
    t = LengthDistribution({3: 1})
    with pytest.raises(SelectionError):
        SelectionSpec("random", 0, seed=1)
    with pytest.raises(SelectionError):
        SelectionSpec("ld", 5)
    with pytest.raises(SelectionError):
        SelectionSpec("lm", 5, score_file="s.tsv", target_distribution=t)
    with pytest.raises(SelectionError):
        SelectionSpec("bogus", 5)
    assert SelectionSpec("lm-ld", 5, target_distribution=t, score_file="s").method == "lm-then-ld"
