"""Numba acceleration shim.

Hot kernels are compiled with ``numba.njit`` by default.  Setting the
environment variable ``SOFRSIM_PURE_NUMPY=1`` (or ``NUMBA_DISABLE_JIT``)
before import selects the pure-numpy fallback implementations instead.
Both paths are kept in sync by tests; ``benchmarks/bench_kernels.py``
compares their throughput.
"""

import os

_DISABLED = (
    os.environ.get("SOFRSIM_PURE_NUMPY", "0") == "1"
    or os.environ.get("NUMBA_DISABLE_JIT", "0") == "1"
)

NUMBA_ENABLED = False
if not _DISABLED:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False

if NUMBA_ENABLED:

    def njit(*args, **kwargs):
        return _njit(*args, **kwargs)

else:

    def njit(*args, **kwargs):
        # decorator that leaves the python function untouched
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap
