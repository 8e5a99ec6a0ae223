"""Backend selection for the hot loops.

The numba-compiled loop kernels are used by default. Setting the environment
variable ``MDSUM_DISABLE_NUMBA=1`` (or running without numba installed) selects
the pure-numpy implementations instead. Both sets stay importable so tests and
the benchmark can compare them directly.
"""
import os

from . import _numpy_kernels as numpy_backend

DISABLE_ENV = "MDSUM_DISABLE_NUMBA"

try:
    import numba  # noqa: F401

    from . import _numba_kernels as numba_backend
except ImportError:  # pragma: no cover
    numba_backend = None


def _numba_requested():
    return os.environ.get(DISABLE_ENV, "").strip().lower() not in ("1", "true", "yes", "on")


if numba_backend is not None and _numba_requested():
    active = numba_backend
    BACKEND = "numba"
else:
    active = numpy_backend
    BACKEND = "numpy"

lu_factor = active.lu_factor
lu_solve = active.lu_solve
levenshtein = active.levenshtein
levenshtein_many = active.levenshtein_many
power_iterate = active.power_iterate
