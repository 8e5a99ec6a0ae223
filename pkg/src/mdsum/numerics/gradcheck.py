"""Central-difference gradient checking."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class GradcheckReport:
    max_rel_error: float
    per_param: dict = field(default_factory=dict)
    tol: float = 1e-4
    n_checked: int = 0

    @property
    def ok(self):
        return self.max_rel_error < self.tol


def relative_error(analytic, numeric, floor=1e-5):
    """|a - n| / max(|a|, |n|, floor), elementwise.

    The floor keeps coordinates whose true gradient is ~0 from reporting
    roundoff noise as a large relative error.
    """
    a = np.asarray(analytic)
    n = np.asarray(numeric)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)


def finite_diff_gradcheck(loss_fn, params, analytic=None, h=1e-5, tol=1e-4, floor=1e-5, max_coords=None, rng=None):
    """Compare analytic gradients with central differences of ``loss_fn()``.

    ``loss_fn`` takes no arguments and reads the current parameter values.
    ``analytic`` maps parameter name to gradient; it defaults to each
    parameter's ``grad``. ``max_coords`` caps the coordinates probed per
    parameter (a random subset drawn from ``rng``).
    """
    params = list(params)
    if analytic is None:
        analytic = {p.name: p.grad.copy() for p in params}
    report = GradcheckReport(max_rel_error=0.0, tol=tol)
    for p in params:
        flat = p.value.reshape(-1)
        coords = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            rng = rng if rng is not None else np.random.default_rng(0)
            coords = np.sort(rng.choice(flat.size, size=max_coords, replace=False))
        a_flat = np.asarray(analytic[p.name]).reshape(-1)
        numeric = np.empty(len(coords))
        for k, i in enumerate(coords):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn()
            flat[i] = orig - h
            down = loss_fn()
            flat[i] = orig
            numeric[k] = (up - down) / (2.0 * h)
        err = float(np.max(relative_error(a_flat[coords], numeric, floor))) if len(coords) else 0.0
        report.per_param[p.name] = err
        report.n_checked += len(coords)
        report.max_rel_error = max(report.max_rel_error, err)
    return report
