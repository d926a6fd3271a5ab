"""Hot Monte Carlo kernels with two interchangeable backends.

The numba backend JIT-compiles per-replicate loops; the numpy backend runs
the same arithmetic as vectorised batch operations.  Selection happens at
import via the ``PARSERIES_BACKEND`` environment variable:

    auto   (default) numba when importable, else numpy
    numba  require the JIT backend, fail if numba is unavailable
    numpy  force the pure-numpy fallback

Both backends expose the same three entry points and agree to floating
point noise; ``benchmarks/bench_kernels.py`` times them side by side.
"""

import os

_choice = os.environ.get("PARSERIES_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ImportError(
        f"PARSERIES_BACKEND must be auto, numba or numpy, got {_choice!r}"
    )

if _choice == "numpy":
    from . import numpy_impl as _impl
else:
    try:
        from . import numba_impl as _impl
    except ImportError:
        if _choice == "numba":
            raise
        from . import numpy_impl as _impl

BACKEND = _impl.NAME
batch_scores = _impl.batch_scores
batch_ut_term_scores = _impl.batch_ut_term_scores
batch_fit_model_iii = _impl.batch_fit_model_iii

__all__ = [
    "BACKEND",
    "batch_scores",
    "batch_ut_term_scores",
    "batch_fit_model_iii",
]
