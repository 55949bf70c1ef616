import random

import pytest

import bruteforce
from statesum.corpus import Document
from statesum.oracle import (OracleLabels, bow_oracle, compressive_oracle, extractive_oracle,
                             heuristic_spans, sentence_spans, sentence_variants)
from statesum.rouge import avg_r1r2


def test_extractive_picks_verbatim_sentence():
    ref = [["storm", "hits", "the", "coast"]]
    doc = Document("d", [["nothing", "here"], ["more", "filler", "text"],
                         ["storm", "hits", "the", "coast"], ["the", "end"]], ref)
    lab = extractive_oracle(doc, p=4, m=3)
    assert lab.z == (0, 0, 1, 0)
    assert lab.score == 1.0
    assert lab.y[2] == (1, 1, 1, 1) and lab.y[0] == (0, 0)
    lab.check(doc)


@pytest.mark.parametrize("objective,score_fn", [
    ("mean-r1r2rl", bruteforce.mean_r1r2rl), ("avg-r1r2", bruteforce.avg_r1r2)])
def test_extractive_full_pool_equals_exhaustive(objective, score_fn):
    rng = random.Random(3)
    for k in range(40):
        doc = bruteforce.random_document(rng, max_sents=6, doc_id=str(k))
        doc = Document(doc.id, list(doc.sentences) + [["w1", "w2"]] * (6 - len(doc)), doc.reference)
        lab = extractive_oracle(doc, p=6, m=2, objective=objective)
        score, subset = bruteforce.exhaustive_extractive(doc, 2, score_fn)
        assert abs(lab.score - score) <= 1e-12
        assert tuple(lab.selected) == subset


def test_extractive_pool_limits_candidates():
    ref = [["a", "b", "c"]]
    doc = Document("d", [["a", "b", "c"], ["a", "b"], ["x"], ["c"]], ref)
    lab = extractive_oracle(doc, p=1, m=3)
    assert lab.selected == [0]


def test_compressive_deletes_parenthetical():
    doc = Document("d", [["the", "cat", "(", "truly", ")", "sat"]], [["the", "cat", "sat"]])
    lab = compressive_oracle(doc, [[(2, 5)]], n=4)
    assert lab.z == (1,)
    assert lab.y == ((1, 1, 0, 0, 0, 1),)
    assert lab.score == 1.0
    lab.check(doc, [[(2, 5)]])


def test_compressive_without_spans_equals_extractive_avg():
    rng = random.Random(11)
    for k in range(40):
        doc = bruteforce.random_document(rng, max_sents=6, doc_id=str(k))
        empty = [[] for _ in doc.sentences]
        comp = compressive_oracle(doc, empty, n=None, max_sents=3)
        ext = extractive_oracle(doc, p=len(doc), m=3, objective="avg-r1r2")
        assert comp.score == ext.score
        assert comp.z == ext.z and comp.y == ext.y


def test_compressive_unbounded_equals_brute_force():
    rng = random.Random(21)
    for k in range(30):
        doc = bruteforce.random_document(rng, max_sents=6, doc_id=str(k))
        lab = compressive_oracle(doc, doc.spans, n=None, max_sents=4)
        score, z, y = bruteforce.exhaustive_compressive(doc, doc.spans, 4)
        assert abs(lab.score - score) <= 1e-12
        assert list(lab.z) == z and [list(r) for r in lab.y] == y
        lab.check(doc, doc.spans)


def test_compressive_never_below_its_seed():
    rng = random.Random(8)
    for k in range(40):
        doc = bruteforce.random_document(rng, doc_id=str(k))
        ext = extractive_oracle(doc, p=3, m=3)
        lab = compressive_oracle(doc, doc.spans, n=1, seed=ext.selected)
        assert lab.score >= avg_r1r2([doc.sentences[i] for i in ext.selected], doc.reference)


def test_compressive_beam_width_is_monotone_in_practice():
    rng = random.Random(2)
    for k in range(20):
        doc = bruteforce.random_document(rng, doc_id=str(k))
        full = compressive_oracle(doc, doc.spans, n=None)
        narrow = compressive_oracle(doc, doc.spans, n=2)
        assert narrow.score <= full.score


def test_compressive_respects_max_sents():
    doc = Document("d", [["a"], ["b"], ["c"]], [["a", "b", "c"]])
    lab = compressive_oracle(doc, [[], [], []], n=None, max_sents=2)
    assert sum(lab.z) == 2


def test_compressive_span_cap():
    doc = Document("d", [[str(k) for k in range(6)]], [["0"]])
    spans = [[(k, k + 1) for k in range(6)]]
    with pytest.raises(ValueError, match="cap"):
        compressive_oracle(doc, spans, span_cap=5)
    compressive_oracle(doc, spans, span_cap=6)


def test_compressive_is_deterministic():
    doc = bruteforce.random_document(random.Random(4), doc_id="x")
    assert compressive_oracle(doc, doc.spans) == compressive_oracle(doc, doc.spans)


def test_variant_that_deletes_everything_is_excluded():
    assert sentence_variants(["a", "b"], [(0, 2)]) == [(0, 1), None]


def test_bow_examples():
    doc = Document("d", [["a", "b"], ["b", "c"]], [["c", "b", "a", "b"]])
    lab = bow_oracle(doc)
    assert lab.z == (1, 1) and lab.y == ((1, 1), (1, 1))

    lab = bow_oracle(Document("d", [["a", "b"]], [["x", "y"]]))
    assert lab.z == (0,) and lab.y == ((0, 0),)

    lab = bow_oracle(Document("d", [["a", "a", "b"]], [["a", "b"]]))
    assert lab.y == ((1, 0, 1),)


def test_bow_consumes_across_sentences_and_case():
    lab = bow_oracle(Document("d", [["The"], ["the", "x"]], [["the"]]))
    assert lab.y == ((1,), (0, 0))
    assert lab.z == (1, 0)


@pytest.mark.parametrize("tokens,expected", [
    ("( CNN ) A top leader died", ((0, 3),)),
    ("nothing fires here", ()),
    ("the man , who was 91 , died", ((2, 7),)),
    ("LONDON , England ) -- rain", ((0, 4),)),
    ("he said ( not ( really ) ) yes", ((2, 8),)),
    ("x , according to them , and , which b", ((1, 6),)),
])
def test_sentence_spans(tokens, expected):
    assert sentence_spans(tokens.split()) == expected


def test_heuristic_spans_never_overlap():
    tokens = "( A , who ) , which x , y".split()
    spans = sentence_spans(tokens)
    flat = [j for a, b in spans for j in range(a, b)]
    assert len(flat) == len(set(flat))
    doc = Document("d", [tokens], [["a"]])
    assert heuristic_spans(doc) == (spans,)


def test_labels_check_catches_violations():
    doc = Document("d", [["a", "b"], ["c"]], [["a"]])
    with pytest.raises(ValueError):
        OracleLabels([0, 1], [[1, 0], [1]], 0.0, "avg-r1r2").check(doc)
    with pytest.raises(ValueError):
        OracleLabels([1, 0], [[1, 0], [0]], 0.0, "mean-r1r2rl").check(doc)
    with pytest.raises(ValueError, match="split"):
        OracleLabels([1, 0], [[1, 0], [0]], 0.0, "avg-r1r2").check(doc, [[(0, 2)], []])
    with pytest.raises(ValueError, match="outside"):
        OracleLabels([1, 0], [[0, 1], [0]], 0.0, "avg-r1r2").check(doc, [[], []])


def test_labels_record_round_trip():
    lab = OracleLabels([1, 0], [[1, 0], [0]], 0.25, "avg-r1r2")
    assert OracleLabels.from_record(lab.to_record("d")) == lab
