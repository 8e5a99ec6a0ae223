"""Adam with bias correction over a collection of :class:`Parameter`."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(params, state):
    """Apply one Adam update to every trainable parameter, then zero all gradients."""
    params = list(params)
    for p in params:
        if p.grad.shape != p.value.shape:
            raise ContractError(f"gradient shape {p.grad.shape} != value shape {p.value.shape} for {p.name}")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p in params:
        if p.trainable:
            m = state.m.get(p.name)
            if m is None:
                m = state.m[p.name] = np.zeros_like(p.value)
                state.v[p.name] = np.zeros_like(p.value)
            v = state.v[p.name]
            m *= b1
            m += (1.0 - b1) * p.grad
            v *= b2
            v += (1.0 - b2) * p.grad * p.grad
            p.value -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
        p.zero_grad()
    return params, state
