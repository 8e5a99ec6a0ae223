"""Generic differentiable ops over :class:`~mdsum.numerics.tape.Node`."""
from __future__ import annotations

import numpy as np

from ..errors import ContractError
from .tape import Node, record


def lookup(table, index):
    """Row ``index`` of a 2-D parameter (an embedding lookup)."""
    if not 0 <= index < table.value.shape[0]:
        raise ContractError(f"row index {index} out of range for table with {table.value.shape[0]} rows")
    out = Node(table.value[index])

    def backward():
        if out.grad is not None:
            table.add_grad_at(index, out.grad)

    record(backward)
    return out


def stack(nodes):
    out = Node(np.stack([n.value for n in nodes]))

    def backward():
        if out.grad is not None:
            for i, n in enumerate(nodes):
                n.add_grad(out.grad[i])

    record(backward)
    return out


def concat(a, b):
    k = a.value.shape[0]
    out = Node(np.concatenate([a.value, b.value]))

    def backward():
        if out.grad is not None:
            a.add_grad(out.grad[:k])
            b.add_grad(out.grad[k:])

    record(backward)
    return out


def add(*nodes):
    out = Node(sum(n.value for n in nodes))

    def backward():
        if out.grad is not None:
            for n in nodes:
                n.add_grad(out.grad)

    record(backward)
    return out


def weighted_sum(weights, nodes):
    """sum_i weights[i] * nodes[i] for constant weights."""
    weights = np.asarray(weights, dtype=np.float64)
    out = Node(np.tensordot(weights, np.stack([n.value for n in nodes]), axes=1))

    def backward():
        if out.grad is not None:
            for w, n in zip(weights, nodes):
                n.add_grad(w * out.grad)

    record(backward)
    return out


def mean(nodes):
    if not nodes:
        raise ContractError("mean of an empty list")
    k = len(nodes)
    out = Node(sum(n.value for n in nodes) / k)

    def backward():
        if out.grad is not None:
            for n in nodes:
                n.add_grad(out.grad / k)

    record(backward)
    return out
