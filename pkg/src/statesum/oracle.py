"""Oracle label construction.

Three oracles turn an abstractive reference into per-sentence (``z``) and
per-token (``y``) labels:

* :func:`extractive_oracle` scores every subset (up to ``m`` sentences) of a
  pool of individually strong sentences.
* :func:`compressive_oracle` runs a beam over the document in order; each
  hypothesis skips a sentence or adds one of its span-deletion variants,
  scored incrementally with :class:`~statesum.rouge.OverlapState`.
* :func:`bow_oracle` keeps a token iff the reference still has an unused
  copy of it.

Ties between equal scores are broken by fewer sentences, then the
lexicographically smallest sentence index tuple, then the smallest tuple of
deletion masks (mask 0 keeps the whole sentence).
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .corpus import CorpusError, check_spans
from .rouge import OverlapState, avg_r1r2, normalize, rouge_all

OBJECTIVES = ("mean-r1r2rl", "avg-r1r2", "bow")
CONNECTIVES = frozenset({"who", "which", "where", "when", "according"})
DEFAULT_POOL = 10
DEFAULT_EXTRACT_MAX = 3
DEFAULT_BEAM = 32
DEFAULT_MAX_SENTS = 7
DEFAULT_SPAN_CAP = 12


@dataclass(frozen=True)
class OracleLabels:
    z: tuple
    y: tuple
    score: float
    objective: str

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        object.__setattr__(self, "z", tuple(int(b) for b in self.z))
        object.__setattr__(self, "y", tuple(tuple(int(b) for b in row) for row in self.y))

    @property
    def selected(self):
        return [i for i, b in enumerate(self.z) if b]

    def check(self, doc, spans=None):
        """Assert shape and label invariants against ``doc``."""
        if len(self.z) != len(doc.sentences) or len(self.y) != len(doc.sentences):
            raise ValueError(f"labels do not match the shape of {doc.id!r}")
        for i, (zi, row, sent) in enumerate(zip(self.z, self.y, doc.sentences)):
            if len(row) != len(sent):
                raise ValueError(f"y[{i}] has {len(row)} bits for {len(sent)} tokens")
            if not zi and any(row):
                raise ValueError(f"y[{i}] must be all zero when z[{i}] = 0")
            if zi and self.objective == "mean-r1r2rl" and not all(row):
                raise ValueError(f"extractive y[{i}] must keep every token")
            if zi and self.objective == "avg-r1r2" and spans is not None:
                inside = set()
                for a, b in spans[i]:
                    if len(set(row[a:b])) > 1:
                        raise ValueError(f"span [{a}, {b}) of sentence {i} is split")
                    inside.update(range(a, b))
                if any(not row[j] for j in range(len(row)) if j not in inside):
                    raise ValueError(f"sentence {i} drops a token outside every span")
        return self

    def summary(self):
        from .corpus import Summary
        return Summary([(i, [j for j, b in enumerate(self.y[i]) if b]) for i in self.selected])

    def to_record(self, doc_id):
        return {"id": doc_id, "z": list(self.z), "y": [list(r) for r in self.y],
                "score": self.score, "objective": self.objective}

    @classmethod
    def from_record(cls, rec):
        return cls(rec["z"], rec["y"], float(rec["score"]), rec["objective"])


def _mean_r1r2rl(candidate, reference):
    return sum(s.f1 for s in rouge_all(candidate, reference)) / 3


def _objective_fn(objective):
    if objective == "mean-r1r2rl":
        return _mean_r1r2rl
    if objective == "avg-r1r2":
        return avg_r1r2
    raise ValueError(f"objective {objective!r} is not a subset objective")


def _labels_from_choice(doc, choice, score, objective, variants=None):
    z = [0] * len(doc.sentences)
    y = [[0] * len(s) for s in doc.sentences]
    for i, mask in choice:
        z[i] = 1
        kept = range(len(doc.sentences[i])) if variants is None else variants[i][mask]
        for j in kept:
            y[i][j] = 1
    return OracleLabels(z, y, score, objective)


def extractive_oracle(doc, p=DEFAULT_POOL, m=DEFAULT_EXTRACT_MAX, objective="mean-r1r2rl"):
    """Best subset of at most ``m`` sentences drawn from the top-``p`` pool."""
    if p < 1 or m < 1:
        raise ValueError("p and m must be >= 1")
    score_fn = _objective_fn(objective)
    ref = doc.reference
    solo = [_mean_r1r2rl(s, ref) for s in doc.sentences]
    pool = sorted(sorted(range(len(solo)), key=lambda i: (-solo[i], i))[:p])

    best_key, best = None, None
    for size in range(1, min(m, len(pool)) + 1):
        for subset in itertools.combinations(pool, size):
            score = score_fn([doc.sentences[i] for i in subset], ref)
            key = (-score, size, subset)
            if best_key is None or key < best_key:
                best_key, best = key, subset
    return _labels_from_choice(doc, [(i, 0) for i in best], -best_key[0], objective)


def sentence_variants(tokens, spans, span_cap=DEFAULT_SPAN_CAP):
    """Kept-token index tuples for every subset of deleted spans, by mask.

    Mask bit ``b`` deletes ``spans[b]``. Variants that delete every token are
    ``None``: a selected sentence must keep at least one word.
    """
    spans = sorted(spans)
    if len(spans) > span_cap:
        raise ValueError(f"{len(spans)} spans exceed the cap of {span_cap}")
    out = []
    for mask in range(1 << len(spans)):
        drop = set()
        for b, (start, end) in enumerate(spans):
            if mask >> b & 1:
                drop.update(range(start, end))
        kept = tuple(j for j in range(len(tokens)) if j not in drop)
        out.append(kept or None)
    return out


def _key(score, choice):
    return (-score, len(choice), tuple(i for i, _ in choice), tuple(m for _, m in choice))


def compressive_oracle(doc, spans=None, n: Optional[int] = DEFAULT_BEAM,
                       max_sents=DEFAULT_MAX_SENTS, span_cap=DEFAULT_SPAN_CAP,
                       seed: Optional[Sequence[int]] = None):
    """Beam search over sentence selections and span deletions.

    ``n=None`` disables pruning, which makes the search exhaustive. ``seed``
    is a sentence selection (usually the extractive oracle's) that is scored
    uncompressed and competes with the beam's best, so the result never
    scores below it.
    """
    if n is not None and n < 1:
        raise ValueError("beam width must be >= 1")
    if max_sents < 1:
        raise ValueError("max_sents must be >= 1")
    if spans is None:
        spans = doc.spans if doc.spans is not None else heuristic_spans(doc)
    try:
        check_spans(spans, doc.sentences)
    except CorpusError as exc:
        raise CorpusError(str(exc), doc_id=doc.id) from None
    variants = [sentence_variants(s, sp, span_cap) for s, sp in zip(doc.sentences, spans)]
    texts = [[[sent[j] for j in kept] if kept is not None else None for kept in vs]
             for sent, vs in zip(doc.sentences, variants)]

    state = OverlapState(doc.reference)
    beam = [(0.0, ())]
    for i in range(len(doc.sentences)):
        grown = []
        for score, choice in beam:
            grown.append((score, choice))
            if len(choice) >= max_sents:
                continue
            for k, mask in choice:
                state.add(texts[k][mask])
            for mask, toks in enumerate(texts[i]):
                if toks is None:
                    continue
                grown.append((state.add(toks), choice + ((i, mask),)))
                state.remove(toks)
            for k, mask in choice:
                state.remove(texts[k][mask])
        grown.sort(key=lambda h: _key(*h))
        beam = grown if n is None else grown[:n]

    finals = [h for h in beam if h[1]]
    if seed is not None:
        seed = tuple(sorted(seed))
        if seed and len(seed) <= max_sents:
            choice = tuple((i, 0) for i in seed)
            finals.append((avg_r1r2([texts[i][0] for i in seed], doc.reference), choice))
    if not finals:
        return _labels_from_choice(doc, (), 0.0, "avg-r1r2")
    score, choice = min(finals, key=lambda h: _key(*h))
    return _labels_from_choice(doc, choice, score, "avg-r1r2", variants)


def bow_oracle(doc):
    """Keep tokens that still have an unconsumed copy in the reference."""
    budget = Counter(t for s in doc.reference for t in normalize(s))
    z, y = [], []
    for sent in doc.sentences:
        row = []
        for tok in normalize(sent):
            if budget[tok] > 0:
                budget[tok] -= 1
                row.append(1)
            else:
                row.append(0)
        y.append(row)
        z.append(int(any(row)))
    kept = [[t for t, b in zip(s, row) if b] for s, row in zip(doc.sentences, y)]
    kept = [s for s in kept if s]
    return OracleLabels(z, y, avg_r1r2(kept, doc.reference), "bow")


def _add_span(accepted, start, end):
    if all(end <= a or start >= b for a, b in accepted):
        accepted.append((start, end))


def sentence_spans(tokens):
    """Rule-marked deletable spans of one sentence, earlier rules first."""
    accepted = []
    # parenthesized runs, parentheses included
    k = 0
    while k < len(tokens):
        if tokens[k] == "(":
            depth = 0
            for e in range(k, len(tokens)):
                depth += tokens[e] == "("
                depth -= tokens[e] == ")"
                if depth == 0:
                    _add_span(accepted, k, e + 1)
                    k = e
                    break
        k += 1
    # ", <connective> ... ," clauses
    for k in range(len(tokens) - 1):
        if tokens[k] == "," and tokens[k + 1].lower() in CONNECTIVES:
            close = next((e for e in range(k + 2, len(tokens)) if tokens[e] == ","), None)
            if close is not None:
                _add_span(accepted, k, close + 1)
    # leading dateline ending in ")"
    close = next((e for e in range(min(6, len(tokens))) if tokens[e] == ")"), None)
    if close is not None:
        _add_span(accepted, 0, close + 1)
    return tuple(sorted(accepted))


def heuristic_spans(doc):
    return tuple(sentence_spans(s) for s in doc.sentences)
