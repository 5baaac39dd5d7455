"""Time every hot kernel under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

Each kernel is run once untimed so numba compilation (or cache loading) is
excluded, then the best of ``--repeat`` runs is reported.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from mertens_ising import _accel
from mertens_ising.kernels import enumerate as enum_k
from mertens_ising.kernels import sieve, spins


def best_of(fn, repeat: int) -> float:
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(scale: float):
    limit = int(10**7 * scale)
    lo = 10**12
    seg_hi = lo + int(10**6 * scale)
    seg_primes = sieve.primes_up_to(int(seg_hi**0.5) + 1)
    big_n = int(10**10 * scale)
    thr = max(int(round(big_n ** (2 / 3))), int(big_n**0.5) + 1)
    small = np.concatenate([[0], np.cumsum(sieve.mobius_sieve_numpy(thr)[1:], dtype=np.int64)])
    t1, t2 = spins.thresholds(1 / 3, 1 / 3)
    mc_trials = max(1, int(2000 * scale))
    grid = np.unique(np.geomspace(1, 10**4, 200).astype(np.int64))
    return [
        (f"mobius_sieve({limit:.0e})", lambda: sieve.mobius_sieve(limit)),
        (f"mobius_segment(1e12, +{seg_hi - lo:.0e})", lambda: sieve.mobius_segment(lo, seg_hi, seg_primes)),
        (f"mertens_big({big_n:.0e})", lambda: sieve.mertens_big(big_n, thr, small)),
        ("state_counts(12)", lambda: enum_k.state_counts(12)),
        (f"energies(n=1e4, trials={mc_trials})", lambda: spins.energies(7, 10**4, 0, mc_trials, t1, t2)),
        (f"trajectories(n=1e4, trials={mc_trials})",
         lambda: spins.trajectories(7, 10**4, 0, mc_trials, t1, t2, grid)),
    ]


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="shrink or grow problem sizes")
    args = ap.parse_args(argv)

    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    threads = _accel.set_threads(None)
    print(f"threads={threads}")
    print(f"{'kernel':42s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name, fn in cases(args.scale):
        timings = {}
        for backend in ("numba", "numpy"):
            _accel.USE_NUMBA = backend == "numba"
            timings[backend] = best_of(fn, args.repeat)
        _accel.USE_NUMBA = True
        ratio = timings["numpy"] / timings["numba"] if timings["numba"] > 0 else float("inf")
        print(f"{name:42s} {timings['numba']:10.4f} {timings['numpy']:10.4f} {ratio:7.1f}x")


if __name__ == "__main__":
    main()
