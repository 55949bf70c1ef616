"""scikit-learn style wrapper around the summary-state labeler."""
from __future__ import annotations

import io
import json
import zipfile

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import Document
from .model import ModelConfig, check_params
from .oracle import (DEFAULT_BEAM, DEFAULT_EXTRACT_MAX, DEFAULT_MAX_SENTS, DEFAULT_POOL,
                     DEFAULT_SPAN_CAP, OracleLabels, bow_oracle, compressive_oracle,
                     extractive_oracle, heuristic_spans)
from .training import Vocabulary, summarize, teacher_forced_accuracy, train

CHECKPOINT_VERSION = 1


def check_documents(X):
    """Return ``X`` as a list of :class:`Document`, rejecting anything else."""
    if isinstance(X, Document):
        raise TypeError("expected a sequence of documents, got a single Document")
    docs = list(X)
    for k, doc in enumerate(docs):
        if not isinstance(doc, Document):
            raise TypeError(f"item {k} is {type(doc).__name__}, not Document")
    return docs


def check_labels(docs, y):
    labels = list(y)
    if len(labels) != len(docs):
        raise ValueError(f"{len(labels)} label sets for {len(docs)} documents")
    for doc, lab in zip(docs, labels):
        if not isinstance(lab, OracleLabels):
            raise TypeError("labels must be OracleLabels")
        lab.check(doc)
    return labels


class SummaryStateLabeler(BaseEstimator):
    """Sentence/word keep-or-drop labeler conditioned on a running summary state.

    ``fit`` takes documents and their oracle labels, ``predict`` returns one
    :class:`~statesum.corpus.Summary` per document whose length is decided by
    thresholding alone.
    """

    def __init__(self, embed_dim=32, hidden_dim=32, lambda_s0=2.0, lambda_s1=1.0,
                 lambda_w0=1.0, lambda_w1=0.5, learning_rate=0.001, batch_size=2,
                 epochs=5, mode="extractive", state_variant="lstm", seed=0):
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.lambda_s0 = lambda_s0
        self.lambda_s1 = lambda_s1
        self.lambda_w0 = lambda_w0
        self.lambda_w1 = lambda_w1
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.epochs = epochs
        self.mode = mode
        self.state_variant = state_variant
        self.seed = seed

    def _config(self):
        return ModelConfig(**self.get_params())

    def fit(self, X, y, callback=None):
        docs = check_documents(X)
        labels = check_labels(docs, y)
        self.config_ = self._config()
        self.params_, self.vocab_, self.loss_log_ = train(docs, labels, self.config_,
                                                          callback=callback)
        return self

    def predict(self, X):
        return [s for s, _ in self.predict_with_proba(X)]

    def predict_with_proba(self, X):
        check_is_fitted(self, "params_")
        return [summarize(doc, self.params_, self.vocab_, self.config_)
                for doc in check_documents(X)]

    def predict_proba(self, X):
        """Per document, the keep probability of every sentence."""
        return [np.asarray(p["sentence"]) for _, p in self.predict_with_proba(X)]

    def score(self, X, y):
        """Teacher-forced sentence-label accuracy."""
        check_is_fitted(self, "params_")
        docs = check_documents(X)
        return teacher_forced_accuracy(docs, check_labels(docs, y), self.params_,
                                       self.vocab_, self.config_)

    # -- persistence

    def save(self, path):
        check_is_fitted(self, "params_")
        save_checkpoint(path, self.config_, self.vocab_, self.params_)

    @classmethod
    def load(cls, path):
        config, vocab, params = load_checkpoint(path)
        est = cls(**config.to_dict())
        est.config_, est.vocab_, est.params_ = config, vocab, params
        return est


def _zip_entry(zf, name, data):
    info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
    info.compress_type = zipfile.ZIP_DEFLATED
    zf.writestr(info, data)


def save_checkpoint(path, config, vocab, params):
    """Write an ``.npz``-compatible archive with fixed timestamps (byte-reproducible)."""
    meta = {"format_version": CHECKPOINT_VERSION, "config": config.to_dict(),
            "vocab": vocab.itos, "tensors": {k: list(v.shape) for k, v in params.items()}}
    with zipfile.ZipFile(path, "w") as zf:
        _zip_entry(zf, "meta.npy", _npy(np.array(json.dumps(meta, sort_keys=True))))
        for name in sorted(params):
            _zip_entry(zf, f"{name}.npy", _npy(np.ascontiguousarray(params[name])))


def _npy(arr):
    buf = io.BytesIO()
    np.lib.format.write_array(buf, arr, allow_pickle=False)
    return buf.getvalue()


def load_checkpoint(path):
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format_version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('format_version')!r}")
        params = {name: data[name].copy() for name in meta["tensors"]}
    config = ModelConfig(**meta["config"])
    for name, shape in meta["tensors"].items():
        if list(params[name].shape) != shape:
            raise ValueError(f"tensor {name} has shape {params[name].shape}, expected {shape}")
    check_params(params, config)
    return config, Vocabulary.from_list(meta["vocab"]), params


class OracleLabeler(TransformerMixin, BaseEstimator):
    """Stateless transformer from documents to oracle labels.

    ``objective`` is ``"extractive"``, ``"compressive"`` or ``"bow"``. The
    compressive search is seeded with the extractive selection and uses the
    document's own spans when present, otherwise :func:`heuristic_spans`.
    """

    def __init__(self, objective="extractive", pool=DEFAULT_POOL, extract_max=DEFAULT_EXTRACT_MAX,
                 beam=DEFAULT_BEAM, max_sents=DEFAULT_MAX_SENTS, span_cap=DEFAULT_SPAN_CAP):
        self.objective = objective
        self.pool = pool
        self.extract_max = extract_max
        self.beam = beam
        self.max_sents = max_sents
        self.span_cap = span_cap

    def fit(self, X, y=None):
        if self.objective not in ("extractive", "compressive", "bow"):
            raise ValueError(f"unknown objective {self.objective!r}")
        return self

    def label(self, doc):
        if self.objective == "bow":
            return bow_oracle(doc)
        ext = extractive_oracle(doc, self.pool, self.extract_max)
        if self.objective == "extractive":
            return ext
        spans = doc.spans if doc.spans is not None else heuristic_spans(doc)
        return compressive_oracle(doc, spans, self.beam, self.max_sents, self.span_cap,
                                  seed=ext.selected)

    def transform(self, X):
        self.fit(X)
        return [self.label(doc) for doc in check_documents(X)]
