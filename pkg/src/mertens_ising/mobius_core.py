"""Exact Möbius and Mertens values.

Three independent routes are provided so that no single one is trusted alone:

* :func:`mobius_trial` -- trial division, the ground-truth oracle;
* :func:`mobius_sieve` / :func:`mobius_segment` -- linear and segmented sieves;
* :func:`mertens_recurrence` -- the floor-value identity
  ``sum_{k<=n} M(n // k) = 1``, memoised over distinct quotients.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _accel
from .kernels import sieve as _sieve

METHODS = ("trial", "linear-sieve", "segmented-sieve", "recurrence")
DEFAULT_SEGMENT = 1 << 22
WORD_MAX = (1 << 63) - 1


class ResourceError(MemoryError):
    """A table could not be allocated."""


class InsufficientPrimesError(ValueError):
    """The supplied prime table does not reach sqrt(hi)."""

    def __init__(self, required: int, have: int):
        self.required = required
        self.have = have
        super().__init__(
            f"prime table must contain every prime <= {required} (isqrt of hi); "
            f"it stops at {have}"
        )


def _check_positive(name: str, value: int) -> int:
    value = int(value)
    if value < 1:
        raise ValueError(f"{name} must be >= 1, got {value}")
    if value > WORD_MAX:
        raise OverflowError(f"{name}={value} does not fit a signed 64-bit word")
    return value


def mobius_trial(k: int) -> int:
    """mu(k) by trial division. Slow, but shares no code with the sieves."""
    k = int(k)
    if k == 0:
        raise ValueError("mu(0) is undefined; k must be >= 1")
    k = _check_positive("k", k)
    sign = 1
    p = 2
    while p * p <= k:
        if k % p == 0:
            k //= p
            if k % p == 0:
                return 0
            sign = -sign
        p += 1 if p == 2 else 2
    if k > 1:
        sign = -sign
    return sign


def _alloc_guard(fn, *args):
    try:
        return fn(*args)
    except MemoryError as exc:
        raise ResourceError(f"cannot allocate sieve tables for {args}: {exc}") from exc


def mobius_sieve(limit: int) -> np.ndarray:
    """mu(1), ..., mu(limit) as an int8 array (entry ``k - 1`` holds mu(k))."""
    limit = _check_positive("limit", limit)
    return _alloc_guard(_sieve.mobius_sieve, limit)[1:]


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


def _covering_bound(primes: np.ndarray) -> int:
    """Largest m such that ``primes`` holds every prime <= m (assuming it is a prefix)."""
    if primes.size == 0:
        return 1
    p = int(primes[-1]) + 1
    while not _is_prime(p):
        p += 1
    return p - 1


def mobius_segment(lo: int, hi: int, primes: np.ndarray | None = None) -> np.ndarray:
    """mu(lo), ..., mu(hi) without touching anything below ``lo``.

    ``primes`` must list every prime up to ``isqrt(hi)``; when omitted it is
    generated on the spot.
    """
    lo = _check_positive("lo", lo)
    hi = _check_positive("hi", hi)
    if lo > hi:
        raise ValueError(f"empty range: lo={lo} > hi={hi}")
    need = math.isqrt(hi)
    if primes is None:
        primes = _sieve.primes_up_to(need)
    else:
        primes = np.asarray(primes, dtype=np.int64)
        if need >= 2 and (primes.size == 0 or primes[-1] < need):
            have = _covering_bound(primes)
            if have < need:
                raise InsufficientPrimesError(need, have)
    return _alloc_guard(_sieve.mobius_segment, lo, hi, primes)


@dataclass(frozen=True)
class MertensTable:
    """M(start), M(start + 1), ... as an int64 array."""

    start: int
    values: np.ndarray
    generated_by: str

    def __post_init__(self):
        if self.generated_by not in METHODS:
            raise ValueError(f"unknown method tag {self.generated_by!r}")
        if self.values.ndim != 1 or self.values.size == 0:
            raise ValueError("MertensTable needs a nonempty 1-d array")
        self.values.setflags(write=False)

    @property
    def end(self) -> int:
        return self.start + self.values.size - 1

    @property
    def last(self) -> int:
        return int(self.values[-1])

    def at(self, n: int) -> int:
        if not self.start <= n <= self.end:
            raise IndexError(f"n={n} outside table range [{self.start}, {self.end}]")
        return int(self.values[n - self.start])

    def __len__(self) -> int:
        return self.values.size


def _segments(lo: int, hi: int, size: int) -> list[tuple[int, int]]:
    return [(a, min(hi, a + size - 1)) for a in range(lo, hi + 1, size)]


def mertens_segmented(
    lo: int,
    hi: int,
    m_before: int = 0,
    segment_size: int = DEFAULT_SEGMENT,
    threads: int | None = None,
) -> np.ndarray:
    """M(lo..hi) given ``m_before = M(lo - 1)``.

    Segments may be sieved concurrently; their partial sums are chained in
    ascending order, so the result does not depend on the worker count.
    """
    if segment_size < 1:
        raise ValueError("segment_size must be >= 1")
    primes = _sieve.primes_up_to(math.isqrt(hi))
    parts = _segments(lo, hi, segment_size)

    def work(seg):
        return np.cumsum(mobius_segment(seg[0], seg[1], primes), dtype=np.int64)

    workers = _accel.resolve_threads(threads)
    if workers > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(work, parts))
    else:
        sums = [work(seg) for seg in parts]

    out = np.empty(hi - lo + 1, dtype=np.int64)
    offset = int(m_before)
    pos = 0
    for chunk in sums:
        out[pos : pos + chunk.size] = chunk + offset
        offset += int(chunk[-1])
        pos += chunk.size
    return out


def mertens_prefix(
    limit: int,
    method: str = "linear-sieve",
    segment_size: int = DEFAULT_SEGMENT,
    threads: int | None = None,
) -> MertensTable:
    """M(1..limit) by one of the sieve methods (or trial division for small limits)."""
    limit = _check_positive("limit", limit)
    if method == "linear-sieve":
        mu = mobius_sieve(limit)
        values = np.cumsum(mu, dtype=np.int64)
    elif method == "segmented-sieve":
        values = _alloc_guard(mertens_segmented, 1, limit, 0, segment_size, threads)
    elif method == "trial":
        values = np.cumsum([mobius_trial(k) for k in range(1, limit + 1)], dtype=np.int64)
    else:
        raise ValueError(f"mertens_prefix supports trial, linear-sieve, segmented-sieve; got {method!r}")
    return MertensTable(1, values, method)


def recurrence_threshold(n: int) -> int:
    """Sieve cutoff: round(n^(2/3)), never below isqrt(n)."""
    return max(round(n ** (2.0 / 3.0)), math.isqrt(n), 1)


def mertens_recurrence(n: int) -> int:
    """M(n) via ``M(v) = 1 - sum_{k=2..v} M(v // k)`` over distinct quotients.

    Values up to ``n^(2/3)`` come from a sieve; larger quotients ``n // i`` are
    filled in increasing order, so each needs only already-known entries.
    Runs in O(n^(2/3)) time after the sieve.
    """
    n = _check_positive("n", n)
    threshold = min(n, recurrence_threshold(n))
    small = np.empty(threshold + 1, dtype=np.int64)
    small[0] = 0
    small[1:] = np.cumsum(mobius_sieve(threshold), dtype=np.int64)
    if n <= threshold:
        return int(small[n])
    return _sieve.mertens_big(n, threshold, small)


def mertens_extend(
    checkpoint,
    limit: int,
    segment_size: int = DEFAULT_SEGMENT,
    threads: int | None = None,
) -> MertensTable:
    """Continue from a :class:`~mertens_ising.checkpoint.MertensCheckpoint` up to ``limit``.

    Returns M(checkpoint.n + 1 .. limit).
    """
    limit = _check_positive("limit", limit)
    if limit <= checkpoint.n:
        raise ValueError(f"limit {limit} must exceed checkpoint n={checkpoint.n}")
    values = mertens_segmented(checkpoint.n + 1, limit, checkpoint.m, segment_size, threads)
    return MertensTable(checkpoint.n + 1, values, "segmented-sieve")
