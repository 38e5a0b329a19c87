"""Hot numeric kernels with a compiled core and a pure-python fallback.

The Cython extension is preferred when it was built; otherwise the numpy
implementations in ``_fallback`` are used. ``BACKEND`` records which one won
so diagnostics and the benchmark can report it.
"""

try:
    from ._core import apply_threshold, axpy, checkloss_sum, propose_eval

    BACKEND = "compiled"
except ImportError:  # extension not built on this host
    from ._fallback import apply_threshold, axpy, checkloss_sum, propose_eval

    BACKEND = "python"

__all__ = ["checkloss_sum", "apply_threshold", "axpy", "propose_eval", "BACKEND"]
