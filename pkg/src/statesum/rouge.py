"""ROUGE-1/2/L, an incremental unigram/bigram overlap scorer, and Pearson r.

Texts are either a flat token list (one sentence) or a list of token lists
(several sentences). Bigrams never span a sentence boundary; ROUGE-L runs
over the flattened token sequence. Tokens are lowercased, not stemmed.
"""
from __future__ import annotations

import math
import statistics
from collections import Counter
from typing import NamedTuple, Sequence


class RougeScore(NamedTuple):
    precision: float
    recall: float
    f1: float


class UndefinedCorrelationError(ValueError):
    pass


def normalize(tokens):
    return [t.lower() for t in tokens]


def _sentences(text):
    """Coerce a flat token list or a list of sentences into normalized sentences."""
    if isinstance(text, str):
        raise TypeError("expected tokens, got a plain string")
    text = list(text)
    if not text:
        return []
    if isinstance(text[0], str):
        return [normalize(text)]
    return [normalize(s) for s in text]


def _ngrams(sentences, n):
    counts = Counter()
    for sent in sentences:
        for k in range(len(sent) - n + 1):
            counts[tuple(sent[k:k + n])] += 1
    return counts


def f1_from_counts(match, cand_total, ref_total):
    """Precision, recall and F1 from clipped match counts."""
    if cand_total == 0 or ref_total == 0:
        return RougeScore(0.0, 0.0, 0.0)
    p = match / cand_total
    r = match / ref_total
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return RougeScore(p, r, f)


def rouge_n(candidate, reference, n=1):
    if n not in (1, 2):
        raise ValueError("n must be 1 or 2")
    cand = _ngrams(_sentences(candidate), n)
    ref = _ngrams(_sentences(reference), n)
    match = sum(min(c, ref[g]) for g, c in cand.items())
    return f1_from_counts(match, sum(cand.values()), sum(ref.values()))


def lcs_length(a, b):
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate, reference):
    cand = [t for s in _sentences(candidate) for t in s]
    ref = [t for s in _sentences(reference) for t in s]
    return f1_from_counts(lcs_length(cand, ref), len(cand), len(ref))


def rouge_all(candidate, reference):
    """``(R1, R2, RL)`` scores of one candidate against one reference."""
    return (rouge_n(candidate, reference, 1), rouge_n(candidate, reference, 2),
            rouge_l(candidate, reference))


class OverlapState:
    """Clipped unigram/bigram overlap against a fixed reference, updated in place.

    ``add`` and ``remove`` take one sentence at a time and are exact inverses,
    so a search can extend a partial summary and backtrack without rescoring.
    """

    def __init__(self, reference):
        ref = _sentences(reference)
        self.ref1 = Counter(t for sent in ref for t in sent)
        self.ref2 = _ngrams(ref, 2)
        self.ref1_total = sum(self.ref1.values())
        self.ref2_total = sum(self.ref2.values())
        self.cand1 = Counter()
        self.cand2 = Counter()
        self.match1 = 0
        self.match2 = 0
        self.total1 = 0
        self.total2 = 0

    @staticmethod
    def _grams(tokens):
        toks = normalize(tokens)
        return toks, list(zip(toks, toks[1:]))

    def add(self, tokens):
        """Append one sentence; returns the new mean of ROUGE-1/2 F1."""
        unis, bis = self._grams(tokens)
        cand1, ref1 = self.cand1, self.ref1
        for g in unis:
            cand1[g] += 1
            if cand1[g] <= ref1.get(g, 0):
                self.match1 += 1
        cand2, ref2 = self.cand2, self.ref2
        for g in bis:
            cand2[g] += 1
            if cand2[g] <= ref2.get(g, 0):
                self.match2 += 1
        self.total1 += len(unis)
        self.total2 += len(bis)
        return self.score()

    def remove(self, tokens):
        unis, bis = self._grams(tokens)
        need1, need2 = Counter(unis), Counter(bis)
        if any(self.cand1[g] < c for g, c in need1.items()) or \
                any(self.cand2[g] < c for g, c in need2.items()):
            raise ValueError("removing tokens that were never added")
        cand1, ref1 = self.cand1, self.ref1
        for g in unis:
            if cand1[g] <= ref1.get(g, 0):
                self.match1 -= 1
            cand1[g] -= 1
            if not cand1[g]:
                del cand1[g]
        cand2, ref2 = self.cand2, self.ref2
        for g in bis:
            if cand2[g] <= ref2.get(g, 0):
                self.match2 -= 1
            cand2[g] -= 1
            if not cand2[g]:
                del cand2[g]
        self.total1 -= len(unis)
        self.total2 -= len(bis)
        return self.score()

    def rouge1(self):
        return f1_from_counts(self.match1, self.total1, self.ref1_total)

    def rouge2(self):
        return f1_from_counts(self.match2, self.total2, self.ref2_total)

    def score(self):
        return (self.rouge1().f1 + self.rouge2().f1) / 2

    def snapshot(self):
        """Comparable copy of the mutable part of the state."""
        return (dict(self.cand1), dict(self.cand2), self.match1, self.match2,
                self.total1, self.total2)


def avg_r1r2(candidate, reference):
    """Mean ROUGE-1/2 F1 computed from scratch (the incremental scorer's target)."""
    return (rouge_n(candidate, reference, 1).f1 + rouge_n(candidate, reference, 2).f1) / 2


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise ValueError("inputs differ in length")
    if len(xs) < 2:
        raise UndefinedCorrelationError("need at least two points")
    try:
        r = statistics.correlation([float(x) for x in xs], [float(y) for y in ys])
    except statistics.StatisticsError as exc:
        raise UndefinedCorrelationError(str(exc)) from None
    if math.isnan(r):
        raise UndefinedCorrelationError("correlation is undefined")
    return max(-1.0, min(1.0, r))
