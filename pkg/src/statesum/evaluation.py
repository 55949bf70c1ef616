"""Corpus-level ROUGE, summary length statistics and system comparison tables."""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from .corpus import validate_summary
from .rouge import UndefinedCorrelationError, pearson, rouge_all


@dataclass
class EvalReport:
    ids: list
    r1: list
    r2: list
    rl: list
    mean_r1: float
    mean_r2: float
    mean_rl: float
    system_lengths: list
    reference_lengths: list
    mean_system_length: float
    mean_reference_length: float
    pearson_length: float | None
    pearson_note: str | None
    histogram: dict

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json() + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _mean(xs):
    return sum(xs) / len(xs) if xs else 0.0


def length_histogram(system, reference, bin_width=10):
    """Counts of both length series over shared bins ``[lo + k*w, lo + (k+1)*w)``."""
    if bin_width < 1:
        raise ValueError("bin_width must be >= 1")
    values = list(system) + list(reference)
    if not values:
        return {"bin_width": bin_width, "edges": [], "system": [], "reference": []}
    lo = min(values) // bin_width * bin_width
    n_bins = (max(values) - lo) // bin_width + 1
    edges = [lo + k * bin_width for k in range(n_bins + 1)]

    def counts(xs):
        out = [0] * n_bins
        for x in xs:
            out[(x - lo) // bin_width] += 1
        return out

    return {"bin_width": bin_width, "edges": edges,
            "system": counts(system), "reference": counts(reference)}


def _score_one(args):
    doc, summary = args
    validate_summary(summary, doc)
    r1, r2, rl = rouge_all(summary.tokens(doc), doc.reference)
    return r1.f1, r2.f1, rl.f1, summary.n_words(), sum(len(s) for s in doc.reference)


def evaluate(corpus, summaries, bin_width=10, workers=1):
    """Score position-aligned summaries against each document's reference."""
    if len(corpus) != len(summaries):
        raise ValueError(f"{len(summaries)} summaries for {len(corpus)} documents")
    pairs = list(zip(corpus, summaries))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_score_one, pairs, chunksize=8))
    else:
        rows = [_score_one(p) for p in pairs]
    r1, r2, rl, sys_len, ref_len = (list(col) for col in zip(*rows)) if rows else ([],) * 5
    try:
        r, note = pearson(sys_len, ref_len), None
    except UndefinedCorrelationError as exc:
        r, note = None, f"undefined: {exc}"
    return EvalReport(
        ids=[d.id for d in corpus], r1=r1, r2=r2, rl=rl,
        mean_r1=_mean(r1), mean_r2=_mean(r2), mean_rl=_mean(rl),
        system_lengths=sys_len, reference_lengths=ref_len,
        mean_system_length=_mean(sys_len), mean_reference_length=_mean(ref_len),
        pearson_length=r, pearson_note=note,
        histogram=length_histogram(sys_len, ref_len, bin_width))


COLUMNS = ("system", "R1", "R2", "RL", "length", "ref_length", "pearson")


class Comparison:
    """Side-by-side corpus means, one row per named system."""

    def __init__(self, rows):
        self.rows = rows

    def to_text(self):
        cells = [list(COLUMNS)] + [[_fmt(row[c]) for c in COLUMNS] for row in self.rows]
        widths = [max(len(r[k]) for r in cells) for k in range(len(COLUMNS))]
        lines = ["  ".join(c.ljust(w) if k == 0 else c.rjust(w)
                           for k, (c, w) in enumerate(zip(r, widths))).rstrip()
                 for r in cells]
        return "\n".join(lines) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({c: _fmt(row[c]) for c in COLUMNS})
        return buf.getvalue()


def _fmt(value):
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def compare(reports):
    """Build a :class:`Comparison` from ``(name, EvalReport)`` pairs."""
    reports = list(reports)
    if not reports:
        raise ValueError("need at least one report")
    names = [name for name, _ in reports]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ValueError(f"duplicate system names: {dupes}")
    rows = [{"system": name, "R1": rep.mean_r1, "R2": rep.mean_r2, "RL": rep.mean_rl,
             "length": rep.mean_system_length, "ref_length": rep.mean_reference_length,
             "pearson": rep.pearson_length}
            for name, rep in reports]
    return Comparison(rows)
