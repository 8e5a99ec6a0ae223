"""Hierarchical encoder: words -> sentence vectors -> document vector -> document-set vector."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .numerics.linalg import sigmoid, softmax
from .numerics.ops import lookup
from .numerics.tape import Node, Parameter, record

DOCSET_MODES = ("learned", "uniform", "softmax")
# |sum of raw scores| below this falls back to uniform weights
DOCSET_EPS = 1e-8
INIT_SCALE = 0.08


class LSTMCell:
    """One LSTM layer. Gate rows of ``W`` are ordered input, forget, output, candidate."""

    def __init__(self, W: Parameter, b: Parameter):
        four_h, width = W.value.shape
        if four_h % 4 or b.value.shape != (four_h,):
            raise ContractError("inconsistent LSTM parameter shapes")
        self.W = W
        self.b = b
        self.hidden = four_h // 4
        self.input_dim = width - self.hidden
        if self.input_dim <= 0:
            raise ContractError("LSTM weight matrix too narrow for its hidden size")

    @classmethod
    def create(cls, name, input_dim, hidden, rng):
        W = rng.uniform(-INIT_SCALE, INIT_SCALE, size=(4 * hidden, input_dim + hidden))
        b = rng.uniform(-INIT_SCALE, INIT_SCALE, size=4 * hidden)
        return cls(Parameter(f"{name}.W", W), Parameter(f"{name}.b", b))

    def parameters(self):
        return [self.W, self.b]

    def zero_state(self):
        return Node(np.zeros(self.hidden)), Node(np.zeros(self.hidden))


def lstm_step(cell, x, h, c):
    """One recurrence step; returns the new (h, c) nodes."""
    H = cell.hidden
    xh = np.concatenate([x.value, h.value])
    z = cell.W.value @ xh + cell.b.value
    i = sigmoid(z[:H])
    f = sigmoid(z[H:2 * H])
    o = sigmoid(z[2 * H:3 * H])
    g = np.tanh(z[3 * H:])
    c_new = f * c.value + i * g
    tc = np.tanh(c_new)
    h_out = Node(o * tc)
    c_out = Node(c_new)

    def backward():
        gh = h_out.grad
        gc = c_out.grad
        if gh is None and gc is None:
            return
        gh = np.zeros(H) if gh is None else gh
        gc = np.zeros(H) if gc is None else gc
        gct = gc + gh * o * (1.0 - tc * tc)
        dz = np.concatenate([
            gct * g * i * (1.0 - i),
            gct * c.value * f * (1.0 - f),
            gh * tc * o * (1.0 - o),
            gct * i * (1.0 - g * g),
        ])
        cell.W.add_grad(np.outer(dz, xh))
        cell.b.add_grad(dz)
        gxh = cell.W.value.T @ dz
        x.add_grad(gxh[:cell.input_dim])
        h.add_grad(gxh[cell.input_dim:])
        c.add_grad(gct * f)

    record(backward)
    return h_out, c_out


def encode_sentence(token_ids, model):
    """Run the word encoder over ``token_ids + [<eos>]`` from a zero state.

    Returns (per-word hidden states, sentence vector), the latter being the
    state after ``<eos>``.
    """
    vocab_size = model.embedding.value.shape[0]
    ids = list(token_ids) + [model.vocab.eos]
    for t in ids:
        if not 0 <= t < vocab_size:
            raise ContractError(f"token id {t} outside vocabulary of size {vocab_size}")
    h, c = model.enc_word.zero_state()
    states = []
    for t in ids:
        h, c = lstm_step(model.enc_word, lookup(model.embedding, t), h, c)
        states.append(h)
    return states, h


@dataclass
class EncodedDocument:
    sentence_states: list
    doc_vector: Node


def eod_sentence_vector(model):
    """Encoding of the ``<eod>`` pseudo-sentence: the word encoder over [<eod>, <eos>]."""
    return encode_sentence([model.vocab.eod], model)[1]


def encode_document(sentences, model):
    """``sentences`` is a list of token-id lists."""
    if not sentences:
        raise ContractError("cannot encode an empty document")
    xs = [encode_sentence(ids, model)[1] for ids in sentences]
    xs.append(eod_sentence_vector(model))
    h, c = model.enc_sent.zero_state()
    states = []
    for x in xs:
        h, c = lstm_step(model.enc_sent, x, h, c)
        states.append(h)
    return EncodedDocument(states[:-1], states[-1])


@dataclass
class DocSetEncoding:
    weights: np.ndarray
    docset_vector: Node
    scores: np.ndarray
    doc_vectors: list


def _ordered_sum(a):
    return np.sort(a, axis=0).sum(axis=0)


def encode_docset(doc_vectors, q, mode="learned"):
    """Merge document vectors with weights w_m proportional to q . [d_m; d_sum].

    ``mode`` is ``learned`` (raw-score ratio, uniform fallback when the score
    sum is ~0), ``softmax`` (softmax over the raw scores) or ``uniform``
    (w_m = 1/M, q unused).
    """
    if mode not in DOCSET_MODES:
        raise ContractError(f"unknown docset mode {mode!r}")
    docs = [d if isinstance(d, Node) else Node(d) for d in doc_vectors]
    M = len(docs)
    if M == 0:
        raise ContractError("document set encoder needs at least one document")
    D = np.stack([d.value for d in docs])
    H = D.shape[1]
    if q.value.shape != (2 * H,):
        raise ContractError(f"q has shape {q.value.shape}, expected ({2 * H},)")
    q1, q2 = q.value[:H], q.value[H:]
    # sums over documents run in sorted order so document order cannot change a single bit
    d_sum = _ordered_sum(D)
    scores = D @ q1 + d_sum @ q2
    total = _ordered_sum(scores)
    if mode == "uniform":
        w, kind = np.full(M, 1.0 / M), None
    elif mode == "softmax":
        w, kind = softmax(scores), "softmax"
    elif abs(total) < DOCSET_EPS:
        w, kind = np.full(M, 1.0 / M), None
    else:
        w, kind = scores / total, "ratio"
    out = Node(_ordered_sum(w[:, None] * D))

    def backward():
        g = out.grad
        if g is None:
            return
        for m in range(M):
            docs[m].add_grad(w[m] * g)
        if kind is None:
            return
        gw = D @ g
        if kind == "ratio":
            gs = (gw - gw @ w) / total
        else:
            gs = w * (gw - gw @ w)
        gs_total = gs.sum()
        q.add_grad(np.concatenate([gs @ D, gs_total * d_sum]))
        for m in range(M):
            docs[m].add_grad(gs[m] * q1 + gs_total * q2)

    record(backward)
    return DocSetEncoding(w, out, scores, docs)
