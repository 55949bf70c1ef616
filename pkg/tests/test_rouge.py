import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bruteforce
from statesum.rouge import (OverlapState, UndefinedCorrelationError, avg_r1r2, lcs_length,
                            normalize, pearson, rouge_l, rouge_n)

words = st.sampled_from(["the", "The", "cat", "sat", "on", "mat", "a", "dog", ",", "."])
seqs = st.lists(words, min_size=0, max_size=9)


def test_normalize():
    assert normalize(["The", "Cat"]) == ["the", "cat"]
    assert normalize([]) == []
    assert normalize(["AQAP's"]) == ["aqap's"]


def test_rouge_n_examples():
    assert rouge_n("the cat sat".split(), "the cat sat".split(), 1).f1 == 1.0
    s = rouge_n("the cat sat".split(), "the cat".split(), 1)
    assert s.precision == pytest.approx(2 / 3)
    assert s.recall == 1.0
    assert s.f1 == pytest.approx(0.8)
    assert rouge_n(["a", "b"], ["c", "d"], 2).f1 == 0.0


def test_rouge_n_empty_and_bad_n():
    assert rouge_n([], ["a"], 1) == (0.0, 0.0, 0.0)
    assert rouge_n(["a"], ["a"], 2) == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        rouge_n(["a"], ["a"], 3)


def test_bigrams_do_not_cross_sentences():
    assert rouge_n([["a"], ["b"]], [["a", "b"]], 2).f1 == 0.0
    assert rouge_n([["a", "b"]], [["a", "b"]], 2).f1 == 1.0


def test_rouge_l_examples():
    assert rouge_l("a b c".split(), "a b c".split()).f1 == 1.0
    s = rouge_l("a b c d".split(), "a c b d".split())
    assert lcs_length("a b c d".split(), "a c b d".split()) == 3
    assert (s.precision, s.recall, s.f1) == pytest.approx((0.75, 0.75, 0.75))
    assert rouge_l([], ["a"]).f1 == 0.0


@settings(max_examples=300)
@given(seqs, seqs)
def test_rouge_n_matches_enumeration(a, b):
    for n in (1, 2):
        got = rouge_n(a, b, n)
        want = bruteforce.rouge_n([a] if a else [], [b] if b else [], n)
        assert got == pytest.approx(want, abs=1e-15)


@settings(max_examples=300)
@given(seqs, seqs)
def test_lcs_matches_enumeration(a, b):
    la, lb = normalize(a), normalize(b)
    assert lcs_length(la, lb) == bruteforce.lcs_by_enumeration(la, lb)


@given(seqs, seqs)
def test_symmetry_bounds_and_lcs_below_r1(a, b):
    for n in (1, 2):
        ab, ba = rouge_n(a, b, n), rouge_n(b, a, n)
        assert ab.precision == ba.recall
        assert all(0.0 <= v <= 1.0 for v in ab)
    rl = rouge_l(a, b)
    assert all(0.0 <= v <= 1.0 for v in rl)
    assert rl.f1 <= rouge_n(a, b, 1).f1 + 1e-15
    if a:
        assert rouge_n(a, a, 1).f1 == 1.0


def test_overlap_add_reference_scores_one():
    ref = [["the", "cat", "sat"], ["on", "the", "mat"]]
    st_ = OverlapState(ref)
    st_.add(ref[0])
    assert st_.add(ref[1]) == 1.0


def test_overlap_add_remove_restores():
    st_ = OverlapState([["a", "b", "a"]])
    st_.add(["a", "c"])
    before = st_.snapshot()
    st_.add(["a", "b", "a", "a"])
    st_.remove(["a", "b", "a", "a"])
    assert st_.snapshot() == before


def test_overlap_remove_unknown_raises():
    st_ = OverlapState([["a"]])
    st_.add(["a", "b"])
    with pytest.raises(ValueError):
        st_.remove(["c"])
    with pytest.raises(ValueError):
        st_.remove(["b", "a"])  # bigram (b, a) never added
    assert st_.snapshot() == ({"a": 1, "b": 1}, {("a", "b"): 1}, 1, 0, 2, 1)


def test_overlap_random_sequences_match_scratch():
    rng = random.Random(5)
    vocab = list("abcdef")
    for _ in range(200):
        ref = [[rng.choice(vocab) for _ in range(rng.randint(1, 6))] for _ in range(2)]
        st_ = OverlapState(ref)
        live = []
        for _ in range(12):
            if live and rng.random() < 0.4:
                sent = live.pop(rng.randrange(len(live)))
                score = st_.remove(sent)
            else:
                sent = [rng.choice(vocab).upper() for _ in range(rng.randint(1, 5))]
                live.append(sent)
                score = st_.add(sent)
            assert abs(score - bruteforce.avg_r1r2(live, ref)) <= 1e-12
            assert score == avg_r1r2(live, ref)


def test_pearson_examples():
    xs = [1.0, 2.0, 3.0, 5.0]
    assert pearson(xs, xs) == pytest.approx(1.0, abs=1e-12)
    assert pearson(xs, [-x for x in xs]) == pytest.approx(-1.0, abs=1e-12)
    assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(bruteforce.pearson_closed_form(
        [1, 2, 3], [1, 2, 4]))
    assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(3 / math.sqrt(28 / 3))
    assert round(pearson([1, 2, 3], [1, 2, 4]), 3) == 0.982


@pytest.mark.parametrize("xs,ys", [([1.0], [2.0]), ([1, 1, 1], [1, 2, 3]), ([1, 2], [3, 3])])
def test_pearson_undefined(xs, ys):
    with pytest.raises(UndefinedCorrelationError):
        pearson(xs, ys)


@settings(max_examples=100)
@given(st.lists(st.integers(-50, 50), min_size=3, max_size=10),
       st.lists(st.integers(-50, 50), min_size=3, max_size=10),
       st.floats(0.1, 10), st.floats(-5, 5))
def test_pearson_affine_invariance(xs, ys, scale, shift):
    n = min(len(xs), len(ys))
    xs, ys = xs[:n], ys[:n]
    try:
        base = pearson(xs, ys)
    except UndefinedCorrelationError:
        return
    moved = pearson([scale * x + shift for x in xs], ys)
    assert moved == pytest.approx(base, abs=1e-9)
