"""Möbius sieves and the floor-value Mertens recurrence.

Each public function dispatches to a numba loop or a numpy equivalent; both
return identical integer arrays.
"""
from __future__ import annotations

import math

import numpy as np

from .. import _accel

if _accel.HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover
    njit = None


def prime_capacity(limit: int) -> int:
    """Upper bound on pi(limit) (Rosser-Schoenfeld), used to size prime buffers."""
    if limit < 17:
        return 7
    return int(1.25506 * limit / math.log(limit)) + 1


def primes_up_to(limit: int) -> np.ndarray:
    """All primes <= limit via a numpy sieve of Eratosthenes."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


# ---------------------------------------------------------------- numpy path


def mobius_sieve_numpy(limit: int) -> np.ndarray:
    mu = np.ones(limit + 1, dtype=np.int8)
    mu[0] = 0
    for p in primes_up_to(limit):
        mu[p::p] *= -1
        sq = p * p
        if sq <= limit:
            mu[sq::sq] = 0
    return mu


def mobius_segment_numpy(lo: int, hi: int, primes: np.ndarray) -> np.ndarray:
    size = hi - lo + 1
    mu = np.ones(size, dtype=np.int8)
    rem = np.arange(lo, hi + 1, dtype=np.int64)
    for p in primes:
        p = int(p)
        if p * p > hi:
            break
        first = -(-lo // p) * p
        if first > hi:
            continue
        sl = slice(first - lo, None, p)
        mu[sl] *= -1
        rem[sl] //= p
        sq = p * p
        first_sq = -(-lo // sq) * sq
        if first_sq <= hi:
            mu[first_sq - lo :: sq] = 0
    # at most one prime factor above sqrt(hi) survives in rem
    big = (rem > 1) & (mu != 0)
    mu[big] *= -1
    return mu


def mertens_big_numpy(n: int, threshold: int, small: np.ndarray) -> int:
    imax = n // (threshold + 1)
    big = np.zeros(imax + 2, dtype=np.int64)
    for i in range(imax, 0, -1):
        v = n // i
        r = math.isqrt(v)
        ks = np.arange(2, r + 1, dtype=np.int64)
        qs = v // ks
        far = qs > threshold
        total = int(big[i * ks[far]].sum()) + int(small[qs[~far]].sum())
        qmax = v // (r + 1)
        if qmax >= 1:
            q = np.arange(1, qmax + 1, dtype=np.int64)
            counts = v // q - np.maximum(v // (q + 1), r)
            total += int((counts * small[q]).sum())
        big[i] = 1 - total
    return int(big[1])


# ---------------------------------------------------------------- numba path

if njit is not None:

    @njit(**_accel.njit_opts)
    def _mobius_sieve_numba(limit, capacity):
        mu = np.zeros(limit + 1, dtype=np.int8)
        if limit >= 1:
            mu[1] = 1
        composite = np.zeros(limit + 1, dtype=np.bool_)
        primes = np.empty(capacity, dtype=np.int64)
        count = 0
        for i in range(2, limit + 1):
            if not composite[i]:
                primes[count] = i
                count += 1
                mu[i] = -1
            for j in range(count):
                p = primes[j]
                ip = i * p
                if ip > limit:
                    break
                composite[ip] = True
                if i % p == 0:
                    # p is the smallest prime factor of i, so p^2 | ip
                    mu[ip] = 0
                    break
                mu[ip] = -mu[i]
        return mu

    @njit(**_accel.njit_opts)
    def _mobius_segment_numba(lo, hi, primes):
        size = hi - lo + 1
        mu = np.ones(size, dtype=np.int8)
        rem = np.empty(size, dtype=np.int64)
        for idx in range(size):
            rem[idx] = lo + idx
        for j in range(primes.shape[0]):
            p = primes[j]
            if p * p > hi:
                break
            first = ((lo + p - 1) // p) * p
            for k in range(first, hi + 1, p):
                idx = k - lo
                if (k // p) % p == 0:
                    mu[idx] = 0
                else:
                    mu[idx] = -mu[idx]
                    rem[idx] //= p
        for idx in range(size):
            if mu[idx] != 0 and rem[idx] > 1:
                mu[idx] = -mu[idx]
        return mu

    @njit(**_accel.njit_opts)
    def _isqrt(v):
        r = np.int64(math.sqrt(v))
        while r * r > v:
            r -= 1
        while (r + 1) * (r + 1) <= v:
            r += 1
        return r

    @njit(**_accel.njit_opts)
    def _mertens_big_numba(n, threshold, small):
        imax = n // (threshold + 1)
        big = np.zeros(imax + 2, dtype=np.int64)
        for i in range(imax, 0, -1):
            v = n // i
            r = _isqrt(v)
            total = 0
            for k in range(2, r + 1):
                q = v // k
                if q > threshold:
                    total += big[i * k]
                else:
                    total += small[q]
            qmax = v // (r + 1)
            for q in range(1, qmax + 1):
                lower = v // (q + 1)
                if lower < r:
                    lower = r
                total += (v // q - lower) * small[q]
            big[i] = 1 - total
        return big[1]


# ---------------------------------------------------------------- dispatch


def mobius_sieve(limit: int) -> np.ndarray:
    """mu(0..limit) as int8, with mu(0) = 0."""
    if _accel.use_numba():
        return _mobius_sieve_numba(limit, prime_capacity(limit))
    return mobius_sieve_numpy(limit)


def mobius_segment(lo: int, hi: int, primes: np.ndarray) -> np.ndarray:
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    if _accel.use_numba():
        return _mobius_segment_numba(lo, hi, primes)
    return mobius_segment_numpy(lo, hi, primes)


def mertens_big(n: int, threshold: int, small: np.ndarray) -> int:
    """M(n) from the table small[q] = M(q), q <= threshold; needs threshold >= isqrt(n)."""
    if _accel.use_numba():
        return int(_mertens_big_numba(n, threshold, small))
    return mertens_big_numpy(n, threshold, small)
