"""Kernel backend selection.

DAGMF_BACKEND=numpy forces the pure-numpy kernels; DAGMF_BACKEND=numba
forces the compiled ones (raising if numba is unavailable). By default the
numba kernels are used when they import cleanly.
"""

from __future__ import annotations

import os


def _load():
    choice = os.environ.get("DAGMF_BACKEND", "").strip().lower()
    if choice == "numpy":
        from dagmf import _kernels_numpy as mod
        return mod, "numpy"
    if choice == "numba":
        from dagmf import _kernels_numba as mod
        return mod, "numba"
    if choice:
        raise ValueError(f"unknown DAGMF_BACKEND {choice!r} (use 'numba' or 'numpy')")
    try:
        from dagmf import _kernels_numba as mod
        return mod, "numba"
    except ImportError:
        from dagmf import _kernels_numpy as mod
        return mod, "numpy"


K, BACKEND = _load()


def backend_name() -> str:
    return BACKEND


def set_workers(n: int) -> None:
    """Pin the kernel thread count (numba backend only; must not exceed
    the pool size numba was initialized with)."""
    if BACKEND == "numba":
        import numba
        numba.set_num_threads(n)


def max_workers() -> int:
    if BACKEND == "numba":
        import numba
        return numba.config.NUMBA_NUM_THREADS
    return 1
