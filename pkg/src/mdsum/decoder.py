"""Hierarchical decoding: sentence decoder, word decoder, projection, greedy and beam search."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attention import attend
from .corpus import Sentence, truncate_to_budget
from .encoder import encode_sentence, eod_sentence_vector, lstm_step
from .errors import ContractError
from .numerics.linalg import log_softmax, softmax
from .numerics.ops import lookup
from .numerics.tape import Node, record


@dataclass(frozen=True)
class GenerationConfig:
    max_sentences: int = 10
    max_words: int = 40
    budget: int = 100
    beam: int = 1

    def __post_init__(self):
        if min(self.max_sentences, self.max_words, self.budget, self.beam) < 1:
            raise ContractError("generation limits and beam width must be >= 1")


@dataclass
class DecoderStates:
    h: Node
    c: Node
    x_prev: Node
    prev_f: Node
    step: int = 0


def initial_states(model, source):
    H = model.config.hidden_dim
    return DecoderStates(
        h=source.docset.docset_vector,
        c=Node(np.zeros(H)),
        x_prev=eod_sentence_vector(model),
        prev_f=Node(np.zeros(source.n_sentences)),
    )


def sentence_step(model, source, states):
    """Advance the sentence decoder and attend. Returns (h, c, f, alpha, context)."""
    h, c = lstm_step(model.dec_sent, states.x_prev, states.h, states.c)
    f, alpha, ctx = attend(source.states, h, model.P, states.prev_f, model.config.attention)
    return h, c, f, alpha, ctx


def _check_projection(h, ctx, W, b):
    width = h.value.shape[0] + ctx.value.shape[0]
    if W.value.shape[1] != width or b.value.shape != (W.value.shape[0],):
        raise ContractError(f"projection expects input width {W.value.shape[1]}, got {width}")


def project_logits(h, ctx, W, b):
    _check_projection(h, ctx, W, b)
    z = np.concatenate([h.value, ctx.value])
    return W.value @ z + b.value


def project_word_distribution(h, ctx, W, b):
    """softmax(W [h; c] + b) over the vocabulary."""
    h = h if isinstance(h, Node) else Node(h)
    ctx = ctx if isinstance(ctx, Node) else Node(ctx)
    return softmax(project_logits(h, ctx, W, b))


def token_nll(h, ctx, W, b, target):
    """-log p(target) under the projected distribution, as a scalar node."""
    z = np.concatenate([h.value, ctx.value])
    logp = log_softmax(project_logits(h, ctx, W, b))
    out = Node(-logp[target])
    H = h.value.shape[0]

    def backward():
        if out.grad is None:
            return
        gz = np.exp(logp)
        gz[target] -= 1.0
        gz *= out.grad
        W.add_grad(np.outer(gz, z))
        b.add_grad(gz)
        gin = W.value.T @ gz
        h.add_grad(gin[:H])
        ctx.add_grad(gin[H:])

    record(backward)
    return out


@dataclass
class SentenceOutcome:
    ids: list
    logprob: float
    stop: int | None  # <eos>, <eod>, or None when the word limit cut it off
    alpha: np.ndarray


def _word_logprobs(model, hw, cw, inp, ctx):
    hw, cw = lstm_step(model.dec_word, lookup(model.embedding, inp), hw, cw)
    return hw, cw, log_softmax(project_logits(hw, ctx, model.proj_W, model.proj_b))


def _greedy_words(model, h_sent, ctx, max_words):
    vocab = model.vocab
    hw, cw = h_sent, Node(np.zeros_like(h_sent.value))
    inp, ids, lp = vocab.eos, [], 0.0
    for _ in range(max_words):
        hw, cw, logp = _word_logprobs(model, hw, cw, inp, ctx)
        tok = int(np.argmax(logp))
        lp += logp[tok]
        if tok in (vocab.eos, vocab.eod):
            return ids, lp, tok
        ids.append(tok)
        inp = tok
    return ids, lp, None


def _beam_words(model, h_sent, ctx, max_words, width):
    vocab = model.vocab
    stops = (vocab.eos, vocab.eod)
    alive = [(0.0, [], vocab.eos, h_sent, Node(np.zeros_like(h_sent.value)))]
    finished = []
    for _ in range(max_words):
        expanded = []
        for score, ids, inp, hw, cw in alive:
            hw2, cw2, logp = _word_logprobs(model, hw, cw, inp, ctx)
            expanded.append((score + logp, ids, hw2, cw2))
        flat = np.concatenate([e[0] for e in expanded])
        V = expanded[0][0].shape[0]
        order = np.argsort(-flat, kind="stable")[:width]
        alive = []
        for k in order:
            src, tok = divmod(int(k), V)
            _, ids, hw2, cw2 = expanded[src]
            if tok in stops:
                finished.append((float(flat[k]), ids, tok))
            else:
                alive.append((float(flat[k]), ids + [tok], tok, hw2, cw2))
        if not alive:
            break
        if finished and max(f[0] for f in finished) >= alive[0][0]:
            break
    else:
        finished.extend((score, ids, None) for score, ids, *_ in alive)
    best = max(range(len(finished)), key=lambda i: (finished[i][0], -i))
    score, ids, stop = finished[best]
    return ids, score, stop


def decode_next_sentence(model, source, states, config):
    """Generate one sentence; returns (outcome, updated states)."""
    h, c, f, alpha, ctx = sentence_step(model, source, states)
    if config.beam == 1:
        ids, lp, stop = _greedy_words(model, h, ctx, config.max_words)
    else:
        ids, lp, stop = _beam_words(model, h, ctx, config.max_words, config.beam)
    x_next = encode_sentence(ids, model)[1]
    return (SentenceOutcome(ids, float(lp), stop, alpha.value),
            DecoderStates(h, c, x_next, f, states.step + 1))


@dataclass
class SummaryResult:
    sentences: list
    ids: list
    attention: list = field(default_factory=list)
    logprob: float = 0.0

    @property
    def token_count(self):
        return sum(len(s) for s in self.sentences)


def generate_summary(model, source, config=None):
    config = config or GenerationConfig()
    vocab = model.vocab
    states = initial_states(model, source)
    out_ids, traces, total, logprob = [], [], 0, 0.0
    for _ in range(config.max_sentences):
        outcome, states = decode_next_sentence(model, source, states, config)
        logprob += outcome.logprob
        traces.append(outcome.alpha)
        if outcome.ids:
            out_ids.append(outcome.ids)
            total += len(outcome.ids)
        if outcome.stop == vocab.eod or total >= config.budget:
            break
    out_ids = truncate_to_budget(out_ids, config.budget)
    sentences = [Sentence.from_words(vocab.decode(ids)) for ids in out_ids]
    return SummaryResult(sentences, out_ids, traces, logprob)
