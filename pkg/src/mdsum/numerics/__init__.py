from .gradcheck import GradcheckReport, finite_diff_gradcheck
from .linalg import (
    LUFactorization,
    column_normalize,
    log_softmax,
    pagerank_power_iteration,
    sigmoid,
    softmax,
    solve_linear_system,
)
from .optim import AdamState, adam_step
from .tape import Node, Parameter, Tape

__all__ = [
    "AdamState",
    "GradcheckReport",
    "LUFactorization",
    "Node",
    "Parameter",
    "Tape",
    "adam_step",
    "column_normalize",
    "finite_diff_gradcheck",
    "log_softmax",
    "pagerank_power_iteration",
    "sigmoid",
    "softmax",
    "solve_linear_system",
]
