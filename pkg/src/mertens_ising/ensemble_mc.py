"""Monte Carlo checks of the canonical-ensemble and random-sequence claims.

With no coupling (x = 1) the Boltzmann weight factorises over sites, so the
ensemble is sampled exactly by drawing each spin independently with
``P(s) = e^(beta s) / (1 + e^beta + e^-beta)``. No Markov chain is involved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _accel
from .bounds import BoundDefinition, bound_value, normal_quantile
from .kernels import spins as _spins
from .mobius_core import mertens_prefix

MODEL_KINDS = ("canonical", "uniform3")
VIOLATION_COLUMNS = ("model", "n", "beta", "alpha", "bound", "trials", "rate", "ci")


@dataclass(frozen=True)
class RandomSequenceModel:
    """Length-``n`` i.i.d. spin sequence; ``beta`` is used only by the canonical kind."""

    kind: str
    n: int
    seed: int = 0
    beta: float = 0.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"model kind must be one of {MODEL_KINDS}, got {self.kind!r}")
        if self.n < 1:
            raise ValueError("sequence length n must be >= 1")
        if self.kind == "uniform3" and self.beta != 0.0:
            raise ValueError("uniform3 takes no beta")

    @classmethod
    def canonical(cls, beta: float, n: int, seed: int = 0) -> "RandomSequenceModel":
        return cls("canonical", n, seed, float(beta))

    @classmethod
    def uniform3(cls, n: int, seed: int = 0) -> "RandomSequenceModel":
        return cls("uniform3", n, seed)

    @property
    def label(self) -> str:
        if self.kind == "canonical":
            return f"canonical(beta={self.beta:.12g})"
        return "uniform3"

    def site_probabilities(self) -> tuple[float, float, float]:
        """(P(+1), P(0), P(-1))."""
        if self.kind == "uniform3":
            return 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0
        u = math.exp(-abs(self.beta))
        z = 1.0 + u + u * u
        hi, mid, lo = 1.0 / z, u / z, u * u / z
        return (hi, mid, lo) if self.beta >= 0 else (lo, mid, hi)

    def with_n(self, n: int) -> "RandomSequenceModel":
        return RandomSequenceModel(self.kind, n, self.seed, self.beta)


@dataclass(frozen=True)
class EnsembleStats:
    samples: int
    mean: float
    variance: float
    std_error_mean: float
    variance_std_error: float

    @classmethod
    def from_samples(cls, u: np.ndarray) -> "EnsembleStats":
        count = int(u.size)
        if count < 2:
            raise ValueError("need at least two samples")
        x = u.astype(np.float64)
        mean = float(x.mean())
        dev = x - mean
        m2 = float(np.dot(dev, dev)) / count
        var = m2 * count / (count - 1)
        m4 = float(np.mean(dev**4))
        # large-sample standard error of the unbiased variance
        var_se = math.sqrt(max(m4 - var * var * (count - 3) / (count - 1), 0.0) / count)
        return cls(count, mean, var, math.sqrt(var / count), var_se)


def sample_energies(
    model: RandomSequenceModel, trials: int, first: int = 0, threads: int | None = None
) -> np.ndarray:
    """U = sum of ``model.n`` spins for trials ``first .. first + trials - 1``.

    Trial ``t`` always yields the same U for a given seed, whatever the
    thread count or chunking.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p_plus, p_zero, _ = model.site_probabilities()
    t1, t2 = _spins.thresholds(p_plus, p_zero)
    _accel.set_threads(threads)
    return _spins.energies(model.seed, model.n, first, trials, t1, t2)


def sample_energy(model: RandomSequenceModel) -> int:
    """One draw of U (trial 0 of the model's stream)."""
    return int(sample_energies(model, 1)[0])


def ensemble_moments(
    model: RandomSequenceModel, samples: int, threads: int | None = None
) -> EnsembleStats:
    if samples < 2:
        raise ValueError("samples must be >= 2")
    return EnsembleStats.from_samples(sample_energies(model, samples, threads=threads))


def binomial_halfwidth(rate: float, trials: int, confidence: float = 0.95) -> float:
    """Normal-approximation half-width of a binomial proportion interval."""
    z = normal_quantile(1.0 - confidence)
    return z * math.sqrt(rate * (1.0 - rate) / trials)


class ViolationResult(NamedTuple):
    rate: float
    ci_halfwidth: float
    exceedances: int
    trials: int
    bound_value: float


def violation_rate(
    model: RandomSequenceModel,
    bound: BoundDefinition | float,
    trials: int,
    threads: int | None = None,
) -> ViolationResult:
    """Fraction of sampled sums U that exceed the bound at ``model.n`` (one-sided, U > value)."""
    if trials < 100:
        raise ValueError("violation_rate needs trials >= 100")
    value = bound if isinstance(bound, (int, float)) else bound_value(bound, model.n)
    u = sample_energies(model, trials, threads=threads)
    exceed = int(np.count_nonzero(u > value))
    rate = exceed / trials
    return ViolationResult(rate, binomial_halfwidth(rate, trials), exceed, trials, float(value))


def violation_row(model: RandomSequenceModel, bound: BoundDefinition, result: ViolationResult) -> dict:
    return {
        "model": model.kind,
        "n": model.n,
        "beta": model.beta,
        "alpha": bound.params.get("alpha", ""),
        "bound": bound.label,
        "trials": result.trials,
        "rate": result.rate,
        "ci": result.ci_halfwidth,
    }


@dataclass(frozen=True)
class TrajectoryReport:
    """Envelope of |sum s_i| over random trajectories against the actual |M(i)|.

    ``envelope`` is the (1 - alpha) quantile of |S_i| across trials; the
    ``*_scaled`` arrays are divided by sqrt(i).
    """

    grid: np.ndarray
    mertens: np.ndarray
    envelope: np.ndarray
    alpha: float
    trials: int
    model: str

    @property
    def actual_scaled(self) -> np.ndarray:
        return np.abs(self.mertens) / np.sqrt(self.grid)

    @property
    def envelope_scaled(self) -> np.ndarray:
        return self.envelope / np.sqrt(self.grid)

    @property
    def fraction_below(self) -> float:
        return float(np.mean(np.abs(self.mertens) <= self.envelope))

    def rows(self) -> list[dict]:
        return [
            {"i": int(i), "M": int(m), "actual_scaled": float(a), "envelope": float(e), "envelope_scaled": float(s)}
            for i, m, a, e, s in zip(self.grid, self.mertens, self.actual_scaled, self.envelope, self.envelope_scaled)
        ]


def trajectory_grid(limit: int, max_points: int = 2000) -> np.ndarray:
    if limit <= max_points:
        return np.arange(1, limit + 1, dtype=np.int64)
    pts = np.unique(np.round(np.geomspace(1, limit, max_points)).astype(np.int64))
    return np.union1d(pts, [limit])


def mertens_trajectory_compare(
    limit: int,
    model: RandomSequenceModel,
    trials: int,
    alpha: float = 0.05,
    grid: np.ndarray | None = None,
    threads: int | None = None,
) -> TrajectoryReport:
    """Overlay |M(i)| on the (1 - alpha) envelope of random-sequence partial sums.

    Descriptive only: the report says how often the actual trajectory sits
    inside the envelope, it does not pass or fail anything.
    """
    if trials < 1:
        raise ValueError("need at least one trajectory (trials >= 1)")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    grid = trajectory_grid(limit) if grid is None else np.asarray(grid, dtype=np.int64)
    if grid.size == 0 or grid[0] < 1 or grid[-1] > limit or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing within [1, limit]")
    table = mertens_prefix(limit)
    m = table.values[grid - 1]
    p_plus, p_zero, _ = model.site_probabilities()
    t1, t2 = _spins.thresholds(p_plus, p_zero)
    _accel.set_threads(threads)
    paths = _spins.trajectories(model.seed, limit, 0, trials, t1, t2, grid)
    envelope = np.quantile(np.abs(paths), 1.0 - alpha, axis=0)
    return TrajectoryReport(grid, np.asarray(m), envelope, alpha, trials, model.label)
