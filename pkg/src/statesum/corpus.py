"""Document model, corpus I/O and the LEAD baseline.

Corpora are newline-delimited JSON, one document per line::

    {"id": "doc-1",
     "sentences": [["The", "cat", "sat", "."], ...],
     "summary": [["A", "cat", "sat", "."]],
     "spans": [[[0, 1]], []]}          # optional, per sentence [start, end)

Tokens are stored exactly as given; case folding happens at scoring time.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

logger = logging.getLogger(__name__)

MAX_SENTENCES = 200
MAX_TOKENS = 200

Sentence = tuple  # tuple[str, ...]
Spans = tuple  # tuple[tuple[tuple[int, int], ...], ...]


class CorpusError(ValueError):
    """Raised for malformed corpus files or invalid documents."""

    def __init__(self, message, line=None, doc_id=None):
        self.line = line
        self.doc_id = doc_id
        where = []
        if line is not None:
            where.append(f"line {line}")
        if doc_id is not None:
            where.append(f"record {doc_id!r}")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


def _check_sentence(sent, what):
    if len(sent) == 0:
        raise CorpusError(f"empty sentence in {what}")
    for tok in sent:
        if not isinstance(tok, str) or not tok or any(c.isspace() for c in tok):
            raise CorpusError(f"invalid token {tok!r} in {what}")


def check_spans(spans, sentences):
    """Validate per-sentence deletable spans against sentence lengths."""
    if len(spans) != len(sentences):
        raise CorpusError(
            f"spans cover {len(spans)} sentences, document has {len(sentences)}")
    for i, (sent_spans, sent) in enumerate(zip(spans, sentences)):
        prev_end = 0
        for start, end in sorted(sent_spans):
            if not (0 <= start < end <= len(sent)):
                raise CorpusError(f"span [{start}, {end}) out of range in sentence {i}")
            if start < prev_end:
                raise CorpusError(f"overlapping spans in sentence {i}")
            prev_end = end


@dataclass(frozen=True)
class Document:
    id: str
    sentences: tuple
    reference: tuple
    spans: Optional[tuple] = None

    def __post_init__(self):
        sentences = tuple(tuple(s) for s in self.sentences)
        reference = tuple(tuple(s) for s in self.reference)
        object.__setattr__(self, "sentences", sentences)
        object.__setattr__(self, "reference", reference)
        if not sentences:
            raise CorpusError("document has no sentences", doc_id=self.id)
        if not reference:
            raise CorpusError("reference summary is empty", doc_id=self.id)
        try:
            for i, s in enumerate(sentences):
                _check_sentence(s, f"sentence {i}")
            for i, s in enumerate(reference):
                _check_sentence(s, f"summary sentence {i}")
            if self.spans is not None:
                spans = tuple(
                    tuple(sorted((int(a), int(b)) for a, b in sent)) for sent in self.spans)
                check_spans(spans, sentences)
                object.__setattr__(self, "spans", spans)
        except CorpusError as exc:
            raise CorpusError(str(exc), doc_id=self.id) from None

    def __len__(self):
        return len(self.sentences)

    def to_record(self):
        rec = {
            "id": self.id,
            "sentences": [list(s) for s in self.sentences],
            "summary": [list(s) for s in self.reference],
        }
        if self.spans is not None:
            rec["spans"] = [[list(sp) for sp in sent] for sent in self.spans]
        return rec

    @classmethod
    def from_record(cls, rec):
        if not isinstance(rec, dict):
            raise CorpusError("record is not an object")
        missing = {"id", "sentences", "summary"} - rec.keys()
        if missing:
            raise CorpusError(f"missing fields {sorted(missing)}", doc_id=rec.get("id"))
        if not isinstance(rec["id"], str):
            raise CorpusError("id must be a string")
        return cls(rec["id"], rec["sentences"], rec["summary"], rec.get("spans"))


@dataclass(frozen=True)
class Summary:
    """Selected sentences as ``(sentence index, kept token indices)`` pairs."""

    sentences: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(
            self, "sentences",
            tuple((int(i), tuple(int(j) for j in kept)) for i, kept in self.sentences))

    @property
    def indices(self):
        return [i for i, _ in self.sentences]

    def tokens(self, doc):
        """Realized summary text, one token list per selected sentence."""
        return [[doc.sentences[i][j] for j in kept] for i, kept in self.sentences]

    def n_words(self):
        return sum(len(kept) for _, kept in self.sentences)

    def to_record(self, doc_id=None):
        rec = {"sentences": [[i, list(kept)] for i, kept in self.sentences]}
        if doc_id is not None:
            rec = {"id": doc_id, **rec}
        return rec

    @classmethod
    def from_record(cls, rec):
        return cls([(i, kept) for i, kept in rec["sentences"]])


def validate_summary(summary, doc):
    """Raise ``ValueError`` unless ``summary`` indexes ``doc`` in ascending order."""
    prev = -1
    for i, kept in summary.sentences:
        if not 0 <= i < len(doc.sentences):
            raise ValueError(f"sentence index {i} out of range for {doc.id!r}")
        if i <= prev:
            raise ValueError(f"sentence indices not strictly ascending in {doc.id!r}")
        prev = i
        prev_j = -1
        for j in kept:
            if not 0 <= j < len(doc.sentences[i]):
                raise ValueError(f"token index {j} out of range in sentence {i} of {doc.id!r}")
            if j <= prev_j:
                raise ValueError(f"token indices not strictly ascending in sentence {i}")
            prev_j = j
    return summary


class Corpus(list):
    """A list of documents that remembers how many records were skipped."""

    def __init__(self, docs=(), skipped=0):
        super().__init__(docs)
        self.skipped = skipped


def truncate(doc, max_sentences=MAX_SENTENCES, max_tokens=MAX_TOKENS):
    """Clip over-long documents; spans are clipped or dropped with the tokens."""
    if len(doc.sentences) <= max_sentences and all(len(s) <= max_tokens for s in doc.sentences):
        return doc
    logger.warning("truncating document %r to %d sentences x %d tokens",
                   doc.id, max_sentences, max_tokens)
    sentences = [s[:max_tokens] for s in doc.sentences[:max_sentences]]
    spans = None
    if doc.spans is not None:
        spans = [[(a, min(b, max_tokens)) for a, b in sent if a < max_tokens]
                 for sent in doc.spans[:max_sentences]]
    return Document(doc.id, sentences, doc.reference, spans)


def load_corpus(path, strict=True, max_sentences=MAX_SENTENCES, max_tokens=MAX_TOKENS):
    """Read a JSONL corpus.

    In strict mode the first invalid record raises :class:`CorpusError` with
    its line number. Otherwise invalid records are skipped and counted in
    ``Corpus.skipped``.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read corpus {str(path)!r}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise CorpusError(f"corpus {str(path)!r} is not valid UTF-8") from exc

    docs = []
    seen = set()
    skipped = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"malformed JSON ({exc.msg})") from None
            doc = Document.from_record(rec)
            if doc.id in seen:
                raise CorpusError("duplicate id", doc_id=doc.id)
        except CorpusError as exc:
            if strict:
                raise CorpusError(str(exc), line=lineno) from None
            logger.warning("skipping line %d: %s", lineno, exc)
            skipped += 1
            continue
        seen.add(doc.id)
        docs.append(truncate(doc, max_sentences, max_tokens))
    return Corpus(docs, skipped)


def dump_corpus(docs, path):
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_record(), ensure_ascii=False) + "\n")


def lead_baseline(doc, m=3):
    """First ``min(m, M)`` sentences with every token kept."""
    if m < 1:
        raise ValueError("m must be >= 1")
    n = min(m, len(doc.sentences))
    return Summary([(i, range(len(doc.sentences[i]))) for i in range(n)])


def read_jsonl(path) -> list:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_jsonl(records: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def align_by_id(docs: Sequence[Document], records: Sequence[dict], what="records"):
    """Order ``records`` to match ``docs`` by their ``id`` field."""
    by_id = {}
    for rec in records:
        if rec.get("id") in by_id:
            raise CorpusError(f"duplicate id in {what}", doc_id=rec.get("id"))
        by_id[rec.get("id")] = rec
    missing = [d.id for d in docs if d.id not in by_id]
    if missing:
        raise CorpusError(f"{what} missing for {len(missing)} documents", doc_id=missing[0])
    return [by_id[d.id] for d in docs]
