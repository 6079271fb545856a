import unicodedata

import pytest
from hypothesis import given, strategies as st

from corpusprep.core import Sentence
from corpusprep.filtering import (
    FilterRule,
    cjk_ratio_filter,
    is_chinese_token,
    is_english_token,
    nfkc_normalize,
    normalize_stream,
    run_filter_pipeline,
    token_length_filter,
)

RULE = FilterRule()
CJK_RULE = FilterRule(cjk_filter_enabled=True)


def toks(n, word="w"):
    return Sentence(" ".join([word] * n))


def test_nfkc_examples():
    assert nfkc_normalize("Ａ１") == "A1"
    assert nfkc_normalize("abc def") == "abc def"
    assert nfkc_normalize("ｶﾞ") == "ガ"


@given(st.text())
def test_nfkc_idempotent_and_standard(s):
    once = nfkc_normalize(s)
    assert nfkc_normalize(once) == once
    assert once == unicodedata.normalize("NFKC", s)


@pytest.mark.parametrize("n,expected", [(2, "too_short"), (3, None), (79, None), (80, "too_long")])
def test_token_length_bounds(n, expected):
    assert token_length_filter(toks(n), RULE) == expected


def test_rule_invariants():
    with pytest.raises(ValueError):
        FilterRule(min_tokens=0)
    with pytest.raises(ValueError):
        FilterRule(min_tokens=5, max_tokens=5)
    with pytest.raises(ValueError):
        FilterRule(cjk_min_ratio=1.5)


def test_token_classes():
    assert is_chinese_token("中文") and is_chinese_token("x中") and is_chinese_token("㐀")
    assert not is_chinese_token("かな")
    assert is_english_token("Hello") and not is_english_token("héllo") and not is_english_token("a1")


def _mixed(chinese, english, other, n=10):
    words = ["中"] * chinese + ["abc"] * english + ["123"] * other
    assert len(words) == n
    return Sentence(" ".join(words))


def test_cjk_ratio_examples():
    assert cjk_ratio_filter(_mixed(2, 0, 8), CJK_RULE) == "low_cjk_ratio"
    assert cjk_ratio_filter(_mixed(3, 3, 4), CJK_RULE) is None
    assert cjk_ratio_filter(_mixed(10, 0, 0), CJK_RULE) is None
    assert cjk_ratio_filter(_mixed(6, 4, 0), CJK_RULE) == "high_ascii_ratio"
    assert cjk_ratio_filter(Sentence(""), CJK_RULE) == "empty"


def test_cjk_boundary_exact_with_other_denominators():
    # 6/20 == 0.3 exactly; floating point 6/20 vs 0.3 must not matter
    s = Sentence(" ".join(["中"] * 6 + ["abc"] * 6 + ["1"] * 8))
    assert cjk_ratio_filter(s, CJK_RULE) is None


def test_pipeline_by_hand():
    lines = ["a b c", "a", "a b c d", "x y", "p q r s t"]
    kept, report = run_filter_pipeline(lines, RULE)
    assert list(kept) == ["a b c", "a b c d", "p q r s t"]
    assert report.lines_read == 5 and report.lines_selected == 3
    assert dict(report.rejections) == {"too_short": 2}


def test_pipeline_all_valid_and_empty():
    kept, report = run_filter_pipeline(["a b c"] * 4, RULE)
    assert len(list(kept)) == 4 and report.lines_selected == report.lines_read == 4
    kept, report = run_filter_pipeline([], RULE)
    assert list(kept) == [] and report.lines_read == 0 and report.is_conserved()


def test_pipeline_invalid_utf8_is_counted_not_altered():
    kept, report = run_filter_pipeline([b"a b c", b"\xff\xfe x y z", "d e f".encode()], RULE)
    assert list(kept) == ["a b c", "d e f"]
    assert report.rejections["invalid_utf8"] == 1 and report.is_conserved()


def test_pipeline_cjk_mode():
    lines = ["中 文 字", "中 abc def", "中 1 2 3", ""]
    kept, report = run_filter_pipeline(lines, CJK_RULE)
    assert list(kept) == ["中 文 字"]
    assert dict(report.rejections) == {"high_ascii_ratio": 1, "low_cjk_ratio": 1, "empty": 1}


def test_normalize_stream_counts():
    from corpusprep.core import SelectionReport
    r = SelectionReport()
    out = list(normalize_stream([b"\xef\xbc\xa1", b"\xff", "b"], r))
    assert out == ["A", "b"] and r.rejections["invalid_utf8"] == 1 and r.is_conserved()


corpora = st.lists(st.lists(st.sampled_from(["中", "abc", "1", "ｘ", "漢字"]), max_size=90).map(" ".join),
                   max_size=40)


@given(corpora, st.booleans())
def test_pipeline_is_order_preserving_subsequence(corpus, cjk):
    rule = FilterRule(cjk_filter_enabled=cjk)
    kept, report = run_filter_pipeline(corpus, rule)
    kept = list(kept)
    it = iter(corpus)
    assert all(any(k == x for x in it) for k in kept)
    assert report.is_conserved() and report.lines_read == len(corpus)


@given(corpora, st.randoms())
def test_decisions_are_per_line(corpus, rnd):
    perm = list(range(len(corpus)))
    rnd.shuffle(perm)
    kept = set(run_filter_pipeline(corpus, CJK_RULE)[0])
    kept_perm = list(run_filter_pipeline([corpus[i] for i in perm], CJK_RULE)[0])
    assert kept_perm == [corpus[i] for i in perm if corpus[i] in kept]
