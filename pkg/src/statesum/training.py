"""Vocabulary, Adam, mini-batch training, gradient checking and inference."""
from __future__ import annotations

import logging

import numpy as np

from .corpus import Summary
from .model import (UNK, ModelConfig, check_params, decode, encode_ids, init_params,
                    loss_and_grads, loss_terms, zeros_like)

logger = logging.getLogger(__name__)


class Vocabulary:
    """Lowercased token -> id map; id 0 is reserved for unknown tokens."""

    def __init__(self, tokens=()):
        self.itos = [UNK] + sorted({t.lower() for t in tokens} - {UNK})
        self.stoi = {t: i for i, t in enumerate(self.itos)}

    @classmethod
    def from_documents(cls, docs):
        return cls(t for doc in docs for s in doc.sentences for t in s)

    @classmethod
    def from_list(cls, itos):
        vocab = cls()
        vocab.itos = list(itos)
        vocab.stoi = {t: i for i, t in enumerate(vocab.itos)}
        return vocab

    def __len__(self):
        return len(self.itos)

    def ids(self, doc):
        return [np.array([self.stoi.get(t.lower(), 0) for t in s], dtype=np.intp)
                for s in doc.sentences]


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = zeros_like(params)
        self.v = zeros_like(params)
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(docs, labels, config, vocab=None, params=None, callback=None):
    """Mini-batch Adam with teacher forcing.

    Returns ``(params, vocab, log)`` where ``log`` holds one record per batch.
    The shuffle order and initialization depend only on ``config.seed``.
    ``callback(epoch, params)`` runs after every epoch.
    """
    if len(docs) != len(labels):
        raise ValueError("labels are not aligned with documents")
    init_rng, shuffle_rng = (np.random.default_rng(s)
                             for s in np.random.SeedSequence(config.seed).spawn(2))
    vocab = Vocabulary.from_documents(docs) if vocab is None else vocab
    if params is None:
        params = init_params(config, len(vocab), init_rng)
    check_params(params, config)
    ids = [vocab.ids(doc) for doc in docs]
    for doc, lab in zip(docs, labels):
        if len(lab.z) != len(doc.sentences):
            raise ValueError(f"labels misaligned with document {doc.id!r}")
    opt = Adam(params, lr=config.learning_rate)

    log = []
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(len(docs))
        for b, start in enumerate(range(0, len(docs), config.batch_size)):
            batch = order[start:start + config.batch_size]
            total_grads = zeros_like(params)
            s_loss = w_loss = 0.0
            for k in batch:
                sl, wl, grads, _ = loss_and_grads(ids[k], labels[k], params, config, docs[k].id)
                s_loss += sl
                w_loss += wl
                for name, g in grads.items():
                    total_grads[name] += g
            for g in total_grads.values():
                g /= len(batch)
            opt.step(params, total_grads)
            s_loss /= len(batch)
            w_loss /= len(batch)
            log.append({"epoch": epoch, "batch": b, "sentence_loss": s_loss,
                        "word_loss": w_loss, "total": s_loss + w_loss})
        logger.info("epoch %d loss %.6f", epoch, epoch_losses(log)[-1])
        if callback is not None:
            callback(epoch, params)
    return params, vocab, log


def epoch_losses(log):
    """Mean batch total per epoch, in epoch order."""
    sums, counts = {}, {}
    for rec in log:
        sums[rec["epoch"]] = sums.get(rec["epoch"], 0.0) + rec["total"]
        counts[rec["epoch"]] = counts.get(rec["epoch"], 0) + 1
    return [sums[e] / counts[e] for e in sorted(sums)]


def teacher_forced_accuracy(docs, labels, params, vocab, config):
    """Fraction of sentences whose thresholded keep probability matches the gold bit."""
    hits = total = 0
    for doc, lab in zip(docs, labels):
        enc = encode_ids(vocab.ids(doc), params)
        trace = decode(enc, params, config, teacher=lab)
        pred = (trace.prob_z[:, 1] > 0.5).astype(int)
        hits += int((pred == np.asarray(lab.z)).sum())
        total += len(lab.z)
    return hits / total if total else 0.0


def summarize(doc, params, vocab, config):
    """Free-running decode into a :class:`Summary` plus keep probabilities.

    Selected sentences that keep no words are left out. When nothing is left
    (no sentence cleared 0.5, or every selected sentence lost all its words)
    the single most probable sentence is returned whole.
    """
    enc = encode_ids(vocab.ids(doc), params)
    trace = decode(enc, params, config)
    chosen = []
    for i in trace.selected:
        if config.mode == "compressive":
            kept = [j for j, b in enumerate(trace.y[i]) if b]
            if kept:
                chosen.append((i, kept))
        else:
            chosen.append((i, range(len(doc.sentences[i]))))
    if not chosen:
        i = int(np.argmax(trace.prob_z[:, 1]))
        chosen = [(i, range(len(doc.sentences[i])))]
    probs = {
        "sentence": trace.prob_z[:, 1].tolist(),
        "word": {int(i): py[:, 1].tolist() for i, py in trace.prob_y.items()},
    }
    return Summary(chosen), probs


def _loss_value(word_ids, gold, params, config):
    enc = encode_ids(word_ids, params)
    trace = decode(enc, params, config, teacher=gold)
    return sum(loss_terms(trace, gold, config))


def gradient_errors(doc, gold, config, epsilon=1e-5, n_coords=50, seed=0, params=None):
    """Per-tensor max relative error between analytic and central-difference gradients.

    Relative error is ``|a - n| / max(1, |a|, |n|)`` over up to ``n_coords``
    sampled coordinates per tensor.
    """
    rng = np.random.default_rng(seed)
    vocab = Vocabulary.from_documents([doc])
    if params is None:
        params = init_params(config, len(vocab), rng, scale=0.1, random_biases=True)
    ids = vocab.ids(doc)
    _, _, grads, _ = loss_and_grads(ids, gold, params, config, doc.id)
    errors = {}
    for name, value in params.items():
        flat = value.reshape(-1)
        coords = np.arange(flat.size)
        if flat.size > n_coords:
            coords = np.sort(rng.choice(flat.size, size=n_coords, replace=False))
        worst = 0.0
        for k in coords:
            old = flat[k]
            flat[k] = old + epsilon
            up = _loss_value(ids, gold, params, config)
            flat[k] = old - epsilon
            down = _loss_value(ids, gold, params, config)
            flat[k] = old
            numeric = (up - down) / (2 * epsilon)
            analytic = grads[name].reshape(-1)[k]
            err = abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))
            worst = max(worst, err)
        errors[name] = worst
    return errors, grads


def grad_check(doc, gold, config, epsilon=1e-5, n_coords=50, seed=0):
    """Max relative gradient error over every parameter tensor."""
    errors, _ = gradient_errors(doc, gold, config, epsilon, n_coords, seed)
    return max(errors.values())


__all__ = ["Adam", "ModelConfig", "Vocabulary", "epoch_losses", "grad_check",
           "gradient_errors", "summarize", "teacher_forced_accuracy", "train"]
