"""Hierarchical biLSTM encoder and summary-state decision decoders.

Everything runs on one document at a time in float64 numpy, with a
hand-written backward pass. Gate order inside every LSTM weight matrix is
input, forget, output, candidate; weights act on ``[x; h]``.

Shapes, with ``d = hidden_dim`` and ``E = embed_dim``::

    h^w_ij   2d     word states (word-level biLSTM)
    e(s_i)   2d     [last forward; first backward] word state
    h^s_i    2d     sentence states (sentence-level biLSTM)
    e(D)     2d     [last forward; first backward] sentence state
    d^s_i    6d     [e(D); e(s_i); h^s_i]
    d^w_ij   8d+E   [e(D); e(s_i); e(w_ij); h^s_i; h^w_ij]
    o^s_i    d      SentStates output (2d for the averaging variant)
    o^w_ij   d      WordStates output
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

MODES = ("extractive", "compressive")
STATE_VARIANTS = ("lstm", "averaging")
UNK = "<unk>"


class NonFiniteLossError(FloatingPointError):
    def __init__(self, doc_id, value):
        self.doc_id = doc_id
        super().__init__(f"non-finite loss {value!r} on document {doc_id!r}")


@dataclass
class ModelConfig:
    embed_dim: int = 32
    hidden_dim: int = 32
    lambda_s0: float = 2.0
    lambda_s1: float = 1.0
    lambda_w0: float = 1.0
    lambda_w1: float = 0.5
    learning_rate: float = 0.001
    batch_size: int = 2
    epochs: int = 5
    mode: str = "extractive"
    state_variant: str = "lstm"
    seed: int = 0

    def __post_init__(self):
        if self.embed_dim < 1 or self.hidden_dim < 1 or self.batch_size < 1:
            raise ValueError("dimensions and batch size must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if min(self.lambda_s0, self.lambda_s1, self.lambda_w0, self.lambda_w1) <= 0:
            raise ValueError("class weights must be > 0")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.state_variant not in STATE_VARIANTS:
            raise ValueError(f"state_variant must be one of {STATE_VARIANTS}")

    def to_dict(self):
        return asdict(self)

    @property
    def state_dim(self):
        return self.hidden_dim if self.state_variant == "lstm" else 2 * self.hidden_dim


def param_shapes(config, vocab_size):
    d, E = config.hidden_dim, config.embed_dim
    o = config.state_dim
    summary_in = 2 * d if config.mode == "extractive" else d
    return {
        "emb": (vocab_size, E),
        "enc_word_fw_W": (4 * d, E + d), "enc_word_fw_b": (4 * d,),
        "enc_word_bw_W": (4 * d, E + d), "enc_word_bw_b": (4 * d,),
        "enc_sent_fw_W": (4 * d, 3 * d), "enc_sent_fw_b": (4 * d,),
        "enc_sent_bw_W": (4 * d, 3 * d), "enc_sent_bw_b": (4 * d,),
        "sent_state_W": (4 * d, summary_in + d), "sent_state_b": (4 * d,),
        "word_state_W": (4 * d, E + d), "word_state_b": (4 * d,),
        "W_E": (d, 6 * d + o), "b_s": (d,),
        "W_z": (2, d), "x_z": (2,),
        "W_C": (d, 8 * d + E + o + d), "b_w": (d,),
        "W_y": (2, d), "x_y": (2,),
    }


LSTM_NAMES = ("enc_word_fw", "enc_word_bw", "enc_sent_fw", "enc_sent_bw",
              "sent_state", "word_state")


def init_params(config, vocab_size, rng=None, scale=0.1, random_biases=False):
    """Random parameters: uniform +-scale embeddings, N(0, scale) weights.

    LSTM forget-gate biases start at 1, other biases at 0, unless
    ``random_biases`` draws them like weights (used by gradient checks).
    """
    rng = np.random.default_rng(config.seed) if rng is None else rng
    d = config.hidden_dim
    params = {}
    for name, shape in param_shapes(config, vocab_size).items():
        if name == "emb":
            params[name] = rng.uniform(-scale, scale, size=shape)
        elif len(shape) == 2 or random_biases:
            params[name] = rng.normal(0.0, scale, size=shape)
        else:
            params[name] = np.zeros(shape)
    if not random_biases:
        for name in LSTM_NAMES:
            params[name + "_b"][d:2 * d] = 1.0
    return params


def check_params(params, config):
    shapes = param_shapes(config, params["emb"].shape[0])
    if set(shapes) != set(params):
        raise ValueError(f"parameter names differ: {sorted(set(shapes) ^ set(params))}")
    for name, shape in shapes.items():
        if params[name].shape != shape:
            raise ValueError(f"{name} has shape {params[name].shape}, expected {shape}")


def zeros_like(params):
    return {k: np.zeros_like(v) for k, v in params.items()}


# ---------------------------------------------------------------- LSTM cell

def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def lstm_step(W, b, x, h, c):
    d = h.shape[0]
    xh = np.concatenate([x, h])
    a = W @ xh + b
    i = _sigmoid(a[:d])
    f = _sigmoid(a[d:2 * d])
    o = _sigmoid(a[2 * d:3 * d])
    g = np.tanh(a[3 * d:])
    c_new = f * c + i * g
    tc = np.tanh(c_new)
    h_new = o * tc
    return h_new, c_new, (xh, c, i, f, o, g, tc)


def lstm_step_back(W, cache, dh, dc, dW, db):
    """Backprop one step; accumulates into ``dW``/``db``, returns (dx, dh_prev, dc_prev)."""
    xh, c, i, f, o, g, tc = cache
    d = c.shape[0]
    dc = dc + dh * o * (1.0 - tc * tc)
    da = np.concatenate([
        dc * g * i * (1.0 - i),
        dc * c * f * (1.0 - f),
        dh * tc * o * (1.0 - o),
        dc * i * (1.0 - g * g),
    ])
    dW += np.outer(da, xh)
    db += da
    dxh = W.T @ da
    nx = xh.shape[0] - d
    return dxh[:nx], dxh[nx:], dc * f


def lstm_run(W, b, X, reverse=False):
    """Run over the rows of ``X`` from zero state; outputs are in input order."""
    d = b.shape[0] // 4
    h, c = np.zeros(d), np.zeros(d)
    T = X.shape[0]
    H = np.empty((T, d))
    caches = [None] * T
    order = range(T - 1, -1, -1) if reverse else range(T)
    for t in order:
        h, c, caches[t] = lstm_step(W, b, X[t], h, c)
        H[t] = h
    return H, caches


def lstm_run_back(W, caches, dH, dW, db, reverse=False):
    T, d = dH.shape
    nx = W.shape[1] - d
    dX = np.empty((T, nx))
    dh, dc = np.zeros(d), np.zeros(d)
    order = range(T) if reverse else range(T - 1, -1, -1)
    for t in order:
        dX[t], dh, dc = lstm_step_back(W, caches[t], dH[t] + dh, dc, dW, db)
    return dX


def _softmax2(logits):
    m = logits.max()
    e = np.exp(logits - m)
    s = e.sum()
    return e / s, logits - m - np.log(s)


# ------------------------------------------------------------------ encoder

@dataclass
class EncoderOutput:
    word_ids: list
    emb: list           # per sentence (N_i, E)
    h_word: list        # per sentence (N_i, 2d)
    e_sent: np.ndarray  # (M, 2d)
    h_sent: np.ndarray  # (M, 2d)
    e_doc: np.ndarray   # (2d,)
    caches: dict = field(repr=False, default_factory=dict)

    def d_sent(self, i):
        return np.concatenate([self.e_doc, self.e_sent[i], self.h_sent[i]])

    def d_word(self, i, j):
        return np.concatenate([self.e_doc, self.e_sent[i], self.emb[i][j],
                               self.h_sent[i], self.h_word[i][j]])


def encode_ids(word_ids, params):
    """Two-level biLSTM over a document given as per-sentence id arrays."""
    d = params["enc_word_fw_b"].shape[0] // 4
    embs, h_word, word_caches = [], [], []
    e_sent = np.empty((len(word_ids), 2 * d))
    for i, ids in enumerate(word_ids):
        X = params["emb"][ids]
        Hf, cf = lstm_run(params["enc_word_fw_W"], params["enc_word_fw_b"], X)
        Hb, cb = lstm_run(params["enc_word_bw_W"], params["enc_word_bw_b"], X, reverse=True)
        embs.append(X)
        h_word.append(np.concatenate([Hf, Hb], axis=1))
        word_caches.append((cf, cb))
        e_sent[i, :d] = Hf[-1]
        e_sent[i, d:] = Hb[0]
    Sf, csf = lstm_run(params["enc_sent_fw_W"], params["enc_sent_fw_b"], e_sent)
    Sb, csb = lstm_run(params["enc_sent_bw_W"], params["enc_sent_bw_b"], e_sent, reverse=True)
    h_sent = np.concatenate([Sf, Sb], axis=1)
    e_doc = np.concatenate([Sf[-1], Sb[0]])
    return EncoderOutput([np.asarray(ids) for ids in word_ids], embs, h_word, e_sent,
                         h_sent, e_doc, {"word": word_caches, "sent": (csf, csb)})


def encode_ids_back(enc, params, grads, g_doc, g_es, g_hs, g_hw, g_emb):
    """Push encoder-output gradients into ``grads``."""
    d = params["enc_word_fw_b"].shape[0] // 4
    M = len(enc.word_ids)
    dSf = g_hs[:, :d].copy()
    dSb = g_hs[:, d:].copy()
    dSf[M - 1] += g_doc[:d]
    dSb[0] += g_doc[d:]
    csf, csb = enc.caches["sent"]
    g_es = g_es + lstm_run_back(params["enc_sent_fw_W"], csf, dSf,
                                grads["enc_sent_fw_W"], grads["enc_sent_fw_b"])
    g_es = g_es + lstm_run_back(params["enc_sent_bw_W"], csb, dSb,
                                grads["enc_sent_bw_W"], grads["enc_sent_bw_b"], reverse=True)
    for i, ids in enumerate(enc.word_ids):
        cf, cb = enc.caches["word"][i]
        dHf = g_hw[i][:, :d].copy()
        dHb = g_hw[i][:, d:].copy()
        dHf[-1] += g_es[i, :d]
        dHb[0] += g_es[i, d:]
        dX = g_emb[i]
        dX = dX + lstm_run_back(params["enc_word_fw_W"], cf, dHf,
                                grads["enc_word_fw_W"], grads["enc_word_fw_b"])
        dX = dX + lstm_run_back(params["enc_word_bw_W"], cb, dHb,
                                grads["enc_word_bw_W"], grads["enc_word_bw_b"], reverse=True)
        np.add.at(grads["emb"], ids, dX)


# ------------------------------------------------------------------ decoder

@dataclass
class DecodeTrace:
    """Everything the decoder computed, kept for the loss and its backward pass."""

    mode: str
    state_variant: str
    teacher_forced: bool
    prob_z: np.ndarray      # (M, 2)
    z: np.ndarray           # (M,) bits the decoder acted on
    o_sent: np.ndarray      # (M, state_dim)
    prob_y: dict            # i -> (N_i, 2) for word-decoded sentences
    y: dict                 # i -> (N_i,) bits
    o_word: dict            # i -> (N_i, d)
    e_comp: dict            # i -> (d,) final WordStates output
    caches: dict = field(repr=False, default_factory=dict)

    @property
    def selected(self):
        return [i for i, b in enumerate(self.z) if b]


def _teacher_bits(teacher, enc):
    if teacher is None:
        return None, None
    z = np.asarray(teacher.z, dtype=int)
    if len(z) != len(enc.word_ids) or len(teacher.y) != len(enc.word_ids) or any(
            len(row) != len(ids) for row, ids in zip(teacher.y, enc.word_ids)):
        raise ValueError("teacher labels do not match the document shape")
    return z, [np.asarray(row, dtype=int) for row in teacher.y]


def decode(enc, params, config, teacher=None):
    """Run the sentence decoder (and word decoder for selected sentences).

    With ``teacher`` the gold bits drive every state update; without it a
    unit is taken when its keep probability exceeds 0.5.
    """
    tz, ty = _teacher_bits(teacher, enc)
    M = len(enc.word_ids)
    d = config.hidden_dim
    compressive = config.mode == "compressive"
    averaging = config.state_variant == "averaging"

    prob_z = np.empty((M, 2))
    z = np.zeros(M, dtype=int)
    o_sent = np.empty((M, config.state_dim))
    prob_y, y, o_word, e_comp = {}, {}, {}, {}
    head_cache, ss_cache, word_cache = [None] * M, {}, {}

    h_s, c_s = np.zeros(d), np.zeros(d)
    running = np.zeros(2 * d)
    for i in range(M):
        o_s = running.copy() if averaging else h_s
        o_sent[i] = o_s
        u = np.concatenate([enc.d_sent(i), o_s])
        p = np.tanh(params["W_E"] @ u + params["b_s"])
        pz, log_pz = _softmax2(params["W_z"] @ p + params["x_z"])
        prob_z[i] = pz
        head_cache[i] = (u, p, log_pz)
        z[i] = tz[i] if tz is not None else int(pz[1] > 0.5)
        if averaging:
            running = running + pz[1] * enc.e_sent[i]
        if not z[i]:
            continue

        if compressive:
            N = len(enc.word_ids[i])
            py, ow, yi = np.empty((N, 2)), np.empty((N, d)), np.zeros(N, dtype=int)
            steps = [None] * N
            h_w, c_w = np.zeros(d), np.zeros(d)
            for j in range(N):
                ow[j] = h_w
                v = np.concatenate([enc.d_word(i, j), o_s, h_w])
                q = np.tanh(params["W_C"] @ v + params["b_w"])
                pyj, log_py = _softmax2(params["W_y"] @ q + params["x_y"])
                py[j] = pyj
                yi[j] = ty[i][j] if ty is not None else int(pyj[1] > 0.5)
                step = None
                if yi[j]:
                    h_w, c_w, step = lstm_step(params["word_state_W"], params["word_state_b"],
                                               enc.emb[i][j], h_w, c_w)
                steps[j] = (v, q, log_py, step)
            prob_y[i], y[i], o_word[i], e_comp[i] = py, yi, ow, h_w
            word_cache[i] = steps
            summary_in = h_w
        else:
            summary_in = enc.e_sent[i]
        if not averaging:
            h_s, c_s, ss_cache[i] = lstm_step(params["sent_state_W"], params["sent_state_b"],
                                              summary_in, h_s, c_s)

    return DecodeTrace(config.mode, config.state_variant, teacher is not None, prob_z, z,
                       o_sent, prob_y, y, o_word, e_comp,
                       {"head": head_cache, "sent_state": ss_cache, "word": word_cache})


# --------------------------------------------------------------------- loss

def _class_weights(bits, lam0, lam1):
    """Per-unit weight lambda_c / count_c; a class with no members contributes nothing."""
    bits = np.asarray(bits)
    n1 = int(bits.sum())
    n0 = len(bits) - n1
    return np.where(bits == 1, lam1 / max(n1, 1), lam0 / max(n0, 1))


def loss_terms(trace, gold, config):
    """Sentence and word losses of a teacher-forced trace, without gradients."""
    if not trace.teacher_forced:
        raise ValueError("the loss needs a trace decoded with teacher = gold")
    z = np.asarray(gold.z)
    w = _class_weights(z, config.lambda_s0, config.lambda_s1)
    log_pz = np.array([c[2][zi] for c, zi in zip(trace.caches["head"], z)])
    sent_loss = float(-(w * log_pz).sum())
    word_loss = 0.0
    if config.mode == "compressive":
        for i in trace.selected:
            yi = np.asarray(gold.y[i])
            wy = _class_weights(yi, config.lambda_w0, config.lambda_w1)
            log_py = np.array([s[2][b] for s, b in zip(trace.caches["word"][i], yi)])
            word_loss += float(-(wy * log_py).sum())
    return sent_loss, word_loss


def backward(enc, trace, gold, params, config):
    """Exact gradient of ``sum(loss_terms(...))`` with respect to every parameter."""
    d = config.hidden_dim
    E = config.embed_dim
    o_dim = config.state_dim
    averaging = config.state_variant == "averaging"
    compressive = config.mode == "compressive"
    M = len(enc.word_ids)
    grads = zeros_like(params)

    g_doc = np.zeros(2 * d)
    g_es = np.zeros((M, 2 * d))
    g_hs = np.zeros((M, 2 * d))
    g_hw = [np.zeros((len(ids), 2 * d)) for ids in enc.word_ids]
    g_emb = [np.zeros((len(ids), E)) for ids in enc.word_ids]

    z = np.asarray(gold.z)
    wz = _class_weights(z, config.lambda_s0, config.lambda_s1)
    onehot = np.eye(2)

    dh_s, dc_s = np.zeros(d), np.zeros(d)
    later = np.zeros(o_dim)  # averaging: sum of o^s gradients from later steps
    for i in range(M - 1, -1, -1):
        g_os = np.zeros(o_dim)
        g_comp = np.zeros(d)
        if z[i] and not averaging:
            dx, dh_s, dc_s = lstm_step_back(params["sent_state_W"], trace.caches["sent_state"][i],
                                            dh_s, dc_s, grads["sent_state_W"], grads["sent_state_b"])
            if compressive:
                g_comp = dx
            else:
                g_es[i] += dx

        if z[i] and compressive:
            yi = np.asarray(gold.y[i])
            wy = _class_weights(yi, config.lambda_w0, config.lambda_w1)
            py = trace.prob_y[i]
            dh_w, dc_w = g_comp, np.zeros(d)
            for j in range(len(yi) - 1, -1, -1):
                v, q, _, step = trace.caches["word"][i][j]
                if step is not None:
                    dx, dh_w, dc_w = lstm_step_back(params["word_state_W"], step, dh_w, dc_w,
                                                    grads["word_state_W"], grads["word_state_b"])
                    g_emb[i][j] += dx
                dl = wy[j] * (py[j] - onehot[yi[j]])
                grads["W_y"] += np.outer(dl, q)
                grads["x_y"] += dl
                da = (params["W_y"].T @ dl) * (1.0 - q * q)
                grads["W_C"] += np.outer(da, v)
                grads["b_w"] += da
                dv = params["W_C"].T @ da
                k = 0
                g_doc += dv[k:k + 2 * d]; k += 2 * d
                g_es[i] += dv[k:k + 2 * d]; k += 2 * d
                g_emb[i][j] += dv[k:k + E]; k += E
                g_hs[i] += dv[k:k + 2 * d]; k += 2 * d
                g_hw[i][j] += dv[k:k + 2 * d]; k += 2 * d
                g_os += dv[k:k + o_dim]; k += o_dim
                dh_w = dh_w + dv[k:k + d]

        u, p, _ = trace.caches["head"][i]
        pz = trace.prob_z[i]
        dl = wz[i] * (pz - onehot[z[i]])
        if averaging:
            d_pi1 = enc.e_sent[i] @ later
            g_es[i] += pz[1] * later
            dl = dl + d_pi1 * pz[1] * (onehot[1] - pz)
        grads["W_z"] += np.outer(dl, p)
        grads["x_z"] += dl
        da = (params["W_z"].T @ dl) * (1.0 - p * p)
        grads["W_E"] += np.outer(da, u)
        grads["b_s"] += da
        du = params["W_E"].T @ da
        g_doc += du[:2 * d]
        g_es[i] += du[2 * d:4 * d]
        g_hs[i] += du[4 * d:6 * d]
        g_os += du[6 * d:]
        if averaging:
            later += g_os
        else:
            dh_s = dh_s + g_os

    encode_ids_back(enc, params, grads, g_doc, g_es, g_hs, g_hw, g_emb)
    return grads


def loss_and_grads(word_ids, gold, params, config, doc_id=None):
    """Teacher-forced forward pass, loss split, and gradients for one document."""
    enc = encode_ids(word_ids, params)
    trace = decode(enc, params, config, teacher=gold)
    sent_loss, word_loss = loss_terms(trace, gold, config)
    total = sent_loss + word_loss
    if not np.isfinite(total):
        raise NonFiniteLossError(doc_id, total)
    return sent_loss, word_loss, backward(enc, trace, gold, params, config), trace
