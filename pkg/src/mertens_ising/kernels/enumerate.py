"""Exhaustive enumeration of cyclic three-state chains.

Instead of summing Boltzmann weights directly, the kernels count how many of
the 3**n configurations have each (bond sum, spin sum) pair. The counts are
exact integers, so both backends agree bit for bit; weights are applied
afterwards by the caller.
"""
from __future__ import annotations

import numpy as np

from .. import _accel

if _accel.HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover
    njit = None

_CHUNK = 1 << 20


def state_counts_numpy(n: int) -> np.ndarray:
    """counts[b + n, s + n] = #configs with cyclic bond sum b and spin sum s."""
    width = 2 * n + 1
    counts = np.zeros(width * width, dtype=np.int64)
    total = 3**n
    powers = 3 ** np.arange(n, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        digits = (idx[:, None] // powers[None, :]) % 3
        spins = np.where(digits == 2, -1, digits)  # digit order 0, +1, -1
        bond = (spins * np.roll(spins, -1, axis=1)).sum(axis=1)
        field = spins.sum(axis=1)
        counts += np.bincount((bond + n) * width + (field + n), minlength=width * width)
    return counts.reshape(width, width)


if njit is not None:

    @njit(**_accel.njit_opts)
    def _state_counts_numba(n):
        width = 2 * n + 1
        counts = np.zeros((width, width), dtype=np.int64)
        digits = np.zeros(n, dtype=np.int64)
        values = np.array([0, 1, -1], dtype=np.int64)
        total = 1
        for _ in range(n):
            total *= 3
        for _ in range(total):
            bond = 0
            field = 0
            for i in range(n):
                s = values[digits[i]]
                nxt = values[digits[(i + 1) % n]]
                bond += s * nxt
                field += s
            counts[bond + n, field + n] += 1
            # odometer increment
            i = 0
            while i < n:
                digits[i] += 1
                if digits[i] < 3:
                    break
                digits[i] = 0
                i += 1
        return counts


def state_counts(n: int) -> np.ndarray:
    if _accel.use_numba():
        return _state_counts_numba(n)
    return state_counts_numpy(n)
