"""Backend selection for the polytope kernel.

The compiled ``_kernel_c`` extension is used when it imports; otherwise, or
when ``BLLAB_BACKEND=python`` is set, the pure-Python ``_kernel_py`` is used.
Calls that overflow int64 in the compiled kernel are transparently rerun on
the Python backend, so results never depend on which backend ran.
"""

import os

from . import _kernel_py

try:
    if os.environ.get("BLLAB_BACKEND", "").lower() == "python":
        raise ImportError("pure-Python backend requested")
    from . import _kernel_c
except ImportError:
    _kernel_c = None

BACKEND = "compiled" if _kernel_c is not None else "python"

stats = {"compiled": 0, "python": 0, "fallback": 0}


def _dispatch(name, rows, bases, lo, hi):
    if _kernel_c is not None:
        try:
            out = getattr(_kernel_c, name)(rows, bases, lo, hi)
            stats["compiled"] += 1
            return out
        except OverflowError:
            stats["fallback"] += 1
    stats["python"] += 1
    return getattr(_kernel_py, name)(rows, bases, lo, hi)


def vertices(rows, bases, lo, hi):
    # the backends enumerate bases in different orders; sort so callers see one order
    return sorted(_dispatch("vertices", rows, bases, lo, hi))


def volume(rows, bases, lo, hi):
    return _dispatch("volume", rows, bases, lo, hi)
