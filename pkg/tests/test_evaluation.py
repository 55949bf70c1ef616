import json

import pytest

from bruteforce import pearson_closed_form, rouge_n as bf_rouge_n
from statesum.corpus import Document, Summary, lead_baseline
from statesum.evaluation import EvalReport, compare, evaluate, length_histogram
from statesum.oracle import extractive_oracle
from statesum.rouge import avg_r1r2


def whole(doc, idx):
    return Summary([(i, range(len(doc.sentences[i]))) for i in idx])


def test_identical_summaries(fixture_docs):
    docs = [Document(d.id, d.reference, d.reference) for d in fixture_docs[:5]]
    rep = evaluate(docs, [whole(d, range(len(d.sentences))) for d in docs])
    assert rep.mean_r1 == rep.mean_r2 == rep.mean_rl == 1.0
    assert rep.pearson_length == pytest.approx(1.0)
    assert rep.pearson_note is None


def test_single_document_has_no_correlation(toy_doc):
    rep = evaluate([toy_doc], [whole(toy_doc, [0])])
    assert rep.pearson_length is None and "undefined" in rep.pearson_note


def test_three_document_means(fixture_docs):
    docs = list(fixture_docs[:3])
    sums = [whole(docs[0], [0]), whole(docs[1], [0, 1]), Summary([(1, [0, 2])])]
    rep = evaluate(docs, sums)
    r1 = [bf_rouge_n(s.tokens(doc), doc.reference, 1)[2] for doc, s in zip(docs, sums)]
    r2 = [bf_rouge_n(s.tokens(doc), doc.reference, 2)[2] for doc, s in zip(docs, sums)]
    assert rep.mean_r1 == pytest.approx(sum(r1) / 3, abs=1e-12)
    assert rep.mean_r2 == pytest.approx(sum(r2) / 3, abs=1e-12)
    assert rep.system_lengths == [len(docs[0].sentences[0]),
                                  len(docs[1].sentences[0]) + len(docs[1].sentences[1]), 2]
    assert rep.pearson_length == pytest.approx(
        pearson_closed_form(rep.system_lengths, rep.reference_lengths), abs=1e-12)


def test_workers_match_serial(fixture_docs):
    docs = list(fixture_docs)
    sums = [lead_baseline(d, 2) for d in docs]
    assert evaluate(docs, sums, workers=2) == evaluate(docs, sums)


def test_rejects_bad_inputs(toy_doc):
    with pytest.raises(ValueError):
        evaluate([toy_doc], [])
    with pytest.raises(ValueError):
        evaluate([toy_doc], [Summary([(5, [0])])])


def test_report_round_trip(tmp_path, fixture_docs):
    rep = evaluate(fixture_docs, [lead_baseline(d) for d in fixture_docs])
    rep.save(tmp_path / "r.json")
    assert EvalReport.load(tmp_path / "r.json") == rep
    assert json.loads(rep.to_json())["mean_r1"] == rep.mean_r1


def test_histogram_partitions_range():
    h = length_histogram([3, 17, 25], [9, 10, 40], bin_width=10)
    assert h["edges"] == [0, 10, 20, 30, 40, 50]
    assert h["system"] == [1, 1, 1, 0, 0]
    assert h["reference"] == [1, 1, 0, 0, 1]
    assert sum(h["system"]) == 3
    assert length_histogram([], [])["edges"] == []
    with pytest.raises(ValueError):
        length_histogram([1], [1], bin_width=0)


def test_oracle_dominates_lead(fixture_docs):
    # with p = M the oracle sees every subset LEAD can produce
    for doc in fixture_docs:
        m = 3
        ora = extractive_oracle(doc, len(doc.sentences), m, objective="avg-r1r2")
        lead = lead_baseline(doc, m)
        assert ora.score >= avg_r1r2(lead.tokens(doc), doc.reference) - 1e-12


def test_compare_table(fixture_docs):
    lead = evaluate(fixture_docs, [lead_baseline(d, 1) for d in fixture_docs])
    single = evaluate(fixture_docs[:1], [lead_baseline(fixture_docs[0], 1)])
    table = compare([("lead1", lead), ("one", single)])
    text = table.to_text().splitlines()
    assert text[0].split() == ["system", "R1", "R2", "RL", "length", "ref_length", "pearson"]
    assert text[1].startswith("lead1") and f"{lead.mean_r1:.4f}" in text[1]
    assert text[2].split()[-1] == "-"
    csv_lines = table.to_csv().splitlines()
    assert csv_lines[0] == "system,R1,R2,RL,length,ref_length,pearson"
    assert len(csv_lines) == 3
    with pytest.raises(ValueError, match="duplicate"):
        compare([("a", lead), ("a", single)])
    with pytest.raises(ValueError):
        compare([])
