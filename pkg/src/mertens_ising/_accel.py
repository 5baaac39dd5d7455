"""Backend selection for the hot kernels.

Every kernel in :mod:`mertens_ising.kernels` exists twice: a numba ``@njit``
loop and a vectorised numpy version. The numba path is used when numba
imports cleanly and ``MERTENS_ISING_DISABLE_NUMBA`` is unset (or ``0``).
"""
from __future__ import annotations

import os

DISABLE_ENV = "MERTENS_ISING_DISABLE_NUMBA"
THREADS_ENV = "MERTENS_THREADS"

try:
    import numba

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is too old for numba; kernels are only launched from one thread
        numba.config.THREADING_LAYER = "workqueue"
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _env_disabled() -> bool:
    return os.environ.get(DISABLE_ENV, "0").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and not _env_disabled()

# numba settings shared by all kernels
njit_opts = {"cache": True, "nogil": True, "fastmath": False, "error_model": "numpy"}
njit_parallel_opts = dict(njit_opts, parallel=True)


def use_numba() -> bool:
    return USE_NUMBA


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def max_threads() -> int:
    if HAVE_NUMBA:
        return int(numba.config.NUMBA_NUM_THREADS)
    return os.cpu_count() or 1


def resolve_threads(requested: int | None = None) -> int:
    """Pick a worker count: explicit request, then $MERTENS_THREADS, then all cores.

    The result is capped at the size of numba's thread pool.
    """
    if requested is None:
        env = os.environ.get(THREADS_ENV)
        requested = int(env) if env else max_threads()
    if requested < 1:
        raise ValueError(f"thread count must be >= 1, got {requested}")
    return min(requested, max_threads())


def set_threads(requested: int | None = None) -> int:
    n = resolve_threads(requested)
    if HAVE_NUMBA:
        numba.set_num_threads(n)
    return n
