"""Graph-based sentence attention.

Source sentences plus the current sentence-decoder state form a graph whose
edge weights come from a learned bilinear form. Topic-sensitive PageRank,
solved in closed form with the teleport mass on the decoder-state node, ranks
the sentences; attention is the normalized positive increase in rank since the
previous decoding step, optionally restricted to the top-K ranked sentences.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError
from .numerics.linalg import LUFactorization
from .numerics.tape import Node, record

ATTENTION_MODES = ("raw", "concentrated")
AFFINITY_EPS = 1e-6


@dataclass(frozen=True)
class AttentionConfig:
    mode: str = "concentrated"
    K: int = 15
    lam: float = 0.9

    def __post_init__(self):
        if self.mode not in ATTENTION_MODES:
            raise ContractError(f"attention mode must be one of {ATTENTION_MODES}, got {self.mode!r}")
        if self.K < 1:
            raise ContractError("K must be >= 1")
        if not 0.0 <= self.lam < 1.0:
            raise ContractError("damping must lie in [0, 1)")


@dataclass
class GraphAttentionState:
    prev_scores: np.ndarray
    step: int = 0

    @classmethod
    def start(cls, n):
        return cls(np.zeros(n), 0)


def _nodes_matrix(states, query):
    X = np.vstack([np.asarray(states, dtype=np.float64), np.asarray(query, dtype=np.float64)[None, :]])
    return X


def build_affinity(sentence_states, query_state, P):
    """(n+1)x(n+1) edge weights max(h_i^T P h_j, 0) + eps; node n is the query."""
    states = np.atleast_2d(np.asarray(sentence_states, dtype=np.float64))
    P = np.asarray(P, dtype=np.float64)
    H = P.shape[0]
    if P.shape != (H, H) or states.shape[1] != H or np.shape(query_state) != (H,):
        raise ContractError("state and affinity dimensions disagree")
    X = _nodes_matrix(states, query_state)
    return np.maximum(X @ P @ X.T, 0.0) + AFFINITY_EPS


def _solve_rank(W, lam):
    n1 = W.shape[0]
    col = W.sum(axis=0)
    if np.any(col <= 0):
        raise ContractError("affinity matrix needs positive column sums")
    M = W / col
    lu = LUFactorization(np.eye(n1) - lam * M)
    y = np.zeros(n1)
    y[-1] = 1.0
    return lu.solve((1.0 - lam) * y), lu, col, M


def rank_scores_full(W, lam=0.9):
    """Closed-form topic-sensitive PageRank over all n+1 nodes, teleporting to the last."""
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ContractError("affinity matrix must be square")
    if not 0.0 <= lam < 1.0:
        raise ContractError("damping must lie in [0, 1)")
    return _solve_rank(W, lam)[0]


def rank_scores(W, lam=0.9):
    """Rank scores of the n sentence nodes (the query node's entry dropped)."""
    return rank_scores_full(W, lam)[:-1]


def graph_rank(states, query, P, lam=0.9):
    """Differentiable composition of :func:`build_affinity` and :func:`rank_scores`.

    ``states`` is an (n, H) node, ``query`` an (H,) node, ``P`` a parameter.
    Gradients pass through the linear solve via the transposed system.
    """
    X = _nodes_matrix(states.value, query.value)
    n = X.shape[0] - 1
    S = X @ P.value @ X.T
    W = np.maximum(S, 0.0) + AFFINITY_EPS
    f_full, lu, col, M = _solve_rank(W, lam)
    out = Node(f_full[:n])

    def backward():
        if out.grad is None:
            return
        g_full = np.append(out.grad, 0.0)
        u = lu.solve(g_full, trans=True)
        gM = lam * np.outer(u, f_full)
        gW = gM / col - (gM * M).sum(axis=0) / col
        gS = gW * (S > 0)
        P.add_grad(X.T @ gS @ X)
        gX = gS @ X @ P.value.T + gS.T @ X @ P.value
        states.add_grad(gX[:n])
        query.add_grad(gX[n])

    record(backward)
    return out


def distraction(f, prev):
    """alpha_i = max(f_i - prev_i, 0) / sum_l max(f_l - prev_l, 0); uniform if nothing increased."""
    if f.value.shape != prev.value.shape:
        raise ContractError(f"score lengths differ: {f.value.shape} vs {prev.value.shape}")
    d = f.value - prev.value
    pos = np.maximum(d, 0.0)
    s = pos.sum()
    n = d.shape[0]
    if s <= 0.0:
        return Node(np.full(n, 1.0 / n))
    alpha = pos / s
    out = Node(alpha)

    def backward():
        if out.grad is None:
            return
        g = (out.grad - out.grad @ alpha) / s * (d > 0)
        f.add_grad(g)
        prev.add_grad(-g)

    record(backward)
    return out


def top_k_indices(scores, K):
    """Indices of the K largest scores; ties go to the lower index."""
    order = np.lexsort((np.arange(len(scores)), -np.asarray(scores)))
    return np.sort(order[:K])


def concentrate(f_values, alpha, K):
    """Zero attention outside the top-K ranked sentences and renormalize."""
    n = alpha.value.shape[0]
    if K < 1:
        raise ContractError("K must be >= 1")
    if K >= n:
        return alpha
    mask = np.zeros(n)
    mask[top_k_indices(f_values, K)] = 1.0
    kept = alpha.value * mask
    s = kept.sum()
    if s <= 0.0:
        return Node(mask / mask.sum())
    out_v = kept / s
    out = Node(out_v)

    def backward():
        if out.grad is None:
            return
        alpha.add_grad(mask * (out.grad - out.grad @ out_v) / s)

    record(backward)
    return out


def context(alpha, states):
    """c = sum_i alpha_i h_i."""
    if alpha.value.shape[0] != states.value.shape[0]:
        raise ContractError("attention length differs from the number of sentence states")
    out = Node(alpha.value @ states.value)

    def backward():
        if out.grad is None:
            return
        alpha.add_grad(states.value @ out.grad)
        states.add_grad(np.outer(alpha.value, out.grad))

    record(backward)
    return out


def attend(states, query, P, prev_f, config):
    """One decoding step of graph attention. Returns (rank scores, alpha, context) nodes."""
    f = graph_rank(states, query, P, config.lam)
    alpha = distraction(f, prev_f)
    if config.mode == "concentrated":
        alpha = concentrate(f.value, alpha, config.K)
    return f, alpha, context(alpha, states)


# array-level versions of the steps above


def distraction_weights(f, state):
    f = np.asarray(f, dtype=np.float64)
    alpha = distraction(Node(f), Node(state.prev_scores)).value
    state.prev_scores = f.copy()
    state.step += 1
    return alpha


def concentrate_topk(f, alpha, K=15):
    return concentrate(np.asarray(f, dtype=np.float64), Node(alpha), K).value


def context_vector(alpha, sentence_states):
    return context(Node(alpha), Node(np.atleast_2d(sentence_states))).value
