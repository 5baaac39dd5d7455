"""I.i.d. three-state spin sampling on a counter-based splitmix64 stream.

Spin ``i`` of trial ``t`` is a pure function of ``(seed, t, i)``, so results do
not depend on how trials are split across threads, and the numba and numpy
backends produce bit-identical sums.
"""
from __future__ import annotations

import numpy as np

from .. import _accel

if _accel.HAVE_NUMBA:
    from numba import njit, prange
else:  # pragma: no cover
    njit = None

MASK64 = (1 << 64) - 1
GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S11 = np.uint64(11)
ONE = np.uint64(1)

# numpy chunk size (elements of the trials x sites block held at once)
_BLOCK = 1 << 18


def thresholds(p_plus: float, p_zero: float) -> tuple[int, int]:
    """Integer cut points on the 53-bit uniform for inversion sampling.

    A draw ``r`` maps to +1 if ``r < t1``, 0 if ``r < t2``, else -1.
    """
    scale = float(1 << 53)
    t1 = min(int(p_plus * scale), 1 << 53)
    t2 = min(int((p_plus + p_zero) * scale), 1 << 53)
    return t1, t2


def _as_u64(seed: int) -> np.uint64:
    return np.uint64(int(seed) & MASK64)


# ---------------------------------------------------------------- numpy path


def _mix_np(z: np.ndarray) -> np.ndarray:
    """splitmix64 finaliser, in place."""
    tmp = np.empty_like(z)
    for shift, mult in ((S30, MIX1), (S27, MIX2)):
        np.right_shift(z, shift, out=tmp)
        z ^= tmp
        z *= mult
    np.right_shift(z, S31, out=tmp)
    z ^= tmp
    return z


def _trial_keys_np(seed: np.uint64, first: int, count: int) -> np.ndarray:
    t = np.arange(first + 1, first + count + 1, dtype=np.uint64)
    return _mix_np(seed + t * GAMMA)


def _draws_np(keys: np.ndarray, start: int, stop: int) -> np.ndarray:
    """53-bit uniforms for sites start+1 .. stop of each trial key."""
    steps = np.arange(start + 1, stop + 1, dtype=np.uint64) * GAMMA
    z = _mix_np(keys[:, None] + steps[None, :])
    z >>= S11
    return z


def energies_numpy(seed: int, n: int, first: int, count: int, t1: int, t2: int) -> np.ndarray:
    out = np.zeros(count, dtype=np.int64)
    rows = max(1, _BLOCK // max(n, 1))
    seed = _as_u64(seed)
    u1, u2 = np.uint64(t1), np.uint64(t2)
    for a in range(0, count, rows):
        b = min(count, a + rows)
        keys = _trial_keys_np(seed, first + a, b - a)
        cols = max(1, _BLOCK // (b - a))
        for s in range(0, n, cols):
            r = _draws_np(keys, s, min(n, s + cols))
            out[a:b] += np.count_nonzero(r < u1, axis=1) - np.count_nonzero(r >= u2, axis=1)
    return out


def trajectories_numpy(
    seed: int, n: int, first: int, count: int, t1: int, t2: int, grid: np.ndarray
) -> np.ndarray:
    out = np.empty((count, grid.shape[0]), dtype=np.int64)
    seed = _as_u64(seed)
    u1, u2 = np.uint64(t1), np.uint64(t2)
    rows = max(1, _BLOCK // max(n, 1))
    for a in range(0, count, rows):
        b = min(count, a + rows)
        keys = _trial_keys_np(seed, first + a, b - a)
        acc = np.zeros(b - a, dtype=np.int64)
        cols = max(1, _BLOCK // (b - a))
        g0 = 0
        for s in range(0, n, cols):
            e = min(n, s + cols)
            r = _draws_np(keys, s, e)
            step = (r < u1).astype(np.int8) - (r >= u2).astype(np.int8)
            partial = np.cumsum(step, axis=1, dtype=np.int64)
            partial += acc[:, None]
            g1 = int(np.searchsorted(grid, e, side="right"))
            out[a:b, g0:g1] = partial[:, grid[g0:g1] - 1 - s]
            acc = partial[:, -1]
            g0 = g1
    return out


# ---------------------------------------------------------------- numba path

if njit is not None:

    @njit(**_accel.njit_opts)
    def _mix(z):
        z = (z ^ (z >> S30)) * MIX1
        z = (z ^ (z >> S27)) * MIX2
        return z ^ (z >> S31)

    @njit(**_accel.njit_parallel_opts)
    def _energies_numba(seed, n, first, count, t1, t2):
        out = np.empty(count, dtype=np.int64)
        u1 = np.uint64(t1)
        u2 = np.uint64(t2)
        for j in prange(count):
            key = _mix(seed + np.uint64(first + j + 1) * GAMMA)
            state = key
            acc = 0
            for _ in range(n):
                state += GAMMA
                r = _mix(state) >> S11
                if r < u1:
                    acc += 1
                elif r >= u2:
                    acc -= 1
            out[j] = acc
        return out

    @njit(**_accel.njit_parallel_opts)
    def _trajectories_numba(seed, n, first, count, t1, t2, grid):
        m = grid.shape[0]
        out = np.empty((count, m), dtype=np.int64)
        u1 = np.uint64(t1)
        u2 = np.uint64(t2)
        for j in prange(count):
            key = _mix(seed + np.uint64(first + j + 1) * GAMMA)
            state = key
            acc = 0
            g = 0
            for i in range(1, n + 1):
                state += GAMMA
                r = _mix(state) >> S11
                if r < u1:
                    acc += 1
                elif r >= u2:
                    acc -= 1
                while g < m and grid[g] == i:
                    out[j, g] = acc
                    g += 1
        return out


# ---------------------------------------------------------------- dispatch


def energies(seed: int, n: int, first: int, count: int, t1: int, t2: int) -> np.ndarray:
    """Sum of ``n`` spins for trials ``first .. first+count-1``."""
    if _accel.use_numba():
        return _energies_numba(_as_u64(seed), n, first, count, t1, t2)
    return energies_numpy(seed, n, first, count, t1, t2)


def trajectories(
    seed: int, n: int, first: int, count: int, t1: int, t2: int, grid: np.ndarray
) -> np.ndarray:
    """Partial sums at sorted 1-based positions ``grid`` (all <= n), one row per trial."""
    grid = np.ascontiguousarray(grid, dtype=np.int64)
    if _accel.use_numba():
        return _trajectories_numba(_as_u64(seed), n, first, count, t1, t2, grid)
    return trajectories_numpy(seed, n, first, count, t1, t2, grid)
