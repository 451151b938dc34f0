"""Kernel backend selection.

The hot loops (angle generation and Givens sweeps) exist twice: once as
numba ``@njit`` kernels and once as plain numpy code.  Both modules export
the same functions with the same signatures.  The backend is chosen once,
at import time, from the ``RPUP_BACKEND`` environment variable:

``RPUP_BACKEND=numba`` (default)
    use the compiled kernels; silently falls back to numpy when numba is
    not importable.
``RPUP_BACKEND=numpy``
    force the pure-numpy path.
"""

import importlib
import os

_REQUESTED = os.environ.get("RPUP_BACKEND", "numba").strip().lower()

if _REQUESTED not in ("numba", "numpy"):
    raise ImportError(
        f"RPUP_BACKEND must be 'numba' or 'numpy', got {_REQUESTED!r}"
    )


def _load():
    if _REQUESTED == "numba":
        try:
            return "numba", importlib.import_module("rpup._kernels_numba")
        except ImportError:
            pass
    return "numpy", importlib.import_module("rpup._kernels_numpy")


BACKEND, kernels = _load()
