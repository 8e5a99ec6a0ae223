"""A minimal reverse-mode tape.

Values live in :class:`Node` objects. While a :class:`Tape` is active (``with
Tape() as tape:``) every differentiable op appends a closure that pushes the
gradient of its output back onto its inputs; ``tape.backward(loss)`` replays the
closures in reverse. With no active tape the ops just compute values, which is
how generation runs.
"""
from __future__ import annotations

import contextvars

import numpy as np

from ..errors import ContractError

_current = contextvars.ContextVar("mdsum_tape", default=None)


class Node:
    __slots__ = ("value", "grad")

    def __init__(self, value):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None

    @property
    def shape(self):
        return self.value.shape

    def add_grad(self, g):
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64, copy=True)
        else:
            self.grad += g

    def add_grad_at(self, index, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        self.grad[index] += g

    def __repr__(self):
        return f"Node(shape={self.value.shape})"


class Parameter(Node):
    """A named, persistent tensor with a gradient accumulator.

    Gradients are accumulated only while ``trainable`` is set, so frozen
    parameters never see an update.
    """

    __slots__ = ("name", "trainable")

    def __init__(self, name, value, trainable=True):
        super().__init__(np.array(value, dtype=np.float64, copy=True))
        self.name = name
        self.trainable = trainable
        self.grad = np.zeros_like(self.value)

    def add_grad(self, g):
        if self.trainable:
            self.grad += g

    def add_grad_at(self, index, g):
        if self.trainable:
            self.grad[index] += g

    def zero_grad(self):
        self.grad.fill(0.0)

    def __repr__(self):
        flag = "" if self.trainable else ", frozen"
        return f"Parameter({self.name!r}, shape={self.value.shape}{flag})"


def constant(value):
    return value if isinstance(value, Node) else Node(value)


class Tape:
    def __init__(self):
        self._ops = []
        self._token = None

    def __enter__(self):
        self._token = _current.set(self)
        return self

    def __exit__(self, *exc):
        _current.reset(self._token)
        self._token = None

    def record(self, backward_fn):
        self._ops.append(backward_fn)

    def __len__(self):
        return len(self._ops)

    def backward(self, loss):
        if loss.value.shape != ():
            raise ContractError("backward() needs a scalar loss node")
        loss.add_grad(np.ones(()))
        for fn in reversed(self._ops):
            fn()
        self._ops.clear()


def active_tape():
    return _current.get()


def record(backward_fn):
    tape = _current.get()
    if tape is not None:
        tape.record(backward_fn)
