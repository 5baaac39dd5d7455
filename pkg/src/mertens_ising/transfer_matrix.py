"""The cyclic three-state Ising chain (spins +1, 0, -1).

Energies are measured in units of kT. With coupling weight ``x = exp(J/2kT)``
and field weight ``y = exp(xi h / kT)`` a configuration has Boltzmann weight

    exp(-H/kT) = x ** (sum_i s_i s_{i+1}) * y ** (sum_i s_i)

with the bond sum running cyclically (s_{n+1} = s_1). The transfer matrix uses
the state order (0, +1, -1) and entries ``P[s, s'] = x**(s*s') * y**s``, which
reproduces the rows (1, 1, 1), (y, xy, y/x), (1/y, 1/(xy), x/y).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .kernels import enumerate as _enum

STATE_ORDER = (0, 1, -1)
SPIN_VALUES = frozenset(STATE_ORDER)
MAX_BRUTEFORCE_N = 14
# exp() overflows float64 just above this
_LOG_FLOAT_MAX = 709.0
_LINEAR_N_MAX = 500


class ChainTooLongError(ValueError):
    pass


@dataclass(frozen=True)
class ModelParams:
    """Coupling weight ``x`` and field weight ``y``; ``beta = ln y``.

    ``x == 1`` is the uncoupled chain (J = 0).
    """

    x: float = 1.0
    y: float = 1.0

    def __post_init__(self):
        if not (self.x > 0 and self.y > 0) or not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"x and y must be positive and finite, got x={self.x}, y={self.y}")

    @classmethod
    def from_beta(cls, beta: float, x: float = 1.0) -> "ModelParams":
        return cls(x=x, y=math.exp(beta))

    @property
    def beta(self) -> float:
        return math.log(self.y)

    @property
    def log_x(self) -> float:
        return math.log(self.x)


def _as_spins(config: Sequence[int]) -> np.ndarray:
    spins = np.asarray(config, dtype=np.int64)
    if spins.ndim != 1 or spins.size < 1:
        raise ValueError("a spin configuration needs at least one spin")
    if not np.isin(spins, (-1, 0, 1)).all():
        raise ValueError(f"spins must be +1, 0 or -1, got {config!r}")
    return spins


def hamiltonian(config: Sequence[int], params: ModelParams) -> float:
    """H/kT for a cyclic configuration: ``-ln(x) * bonds - beta * sum(s)``."""
    spins = _as_spins(config)
    bonds = int((spins * np.roll(spins, -1)).sum())
    field = int(spins.sum())
    energy = 0.0
    if bonds:
        energy -= params.log_x * bonds
    if field:
        energy -= params.beta * field
    return energy


def state_counts(n: int) -> np.ndarray:
    """Number of configurations per (bond sum, spin sum), indexed ``[b + n, s + n]``."""
    if n < 1:
        raise ValueError("chain length must be >= 1")
    if n > MAX_BRUTEFORCE_N:
        raise ChainTooLongError(
            f"brute-force enumeration is limited to n <= {MAX_BRUTEFORCE_N} (3**n states); got n={n}"
        )
    return _enum.state_counts(n)


def partition_bruteforce(n: int, params: ModelParams) -> float:
    """Q_n as the sum of exp(-H/kT) over all 3**n cyclic configurations."""
    counts = state_counts(n)
    levels = np.arange(-n, n + 1, dtype=np.float64)
    weights = np.exp(params.log_x * levels[:, None] + params.beta * levels[None, :])
    return float((counts * weights).sum())


@dataclass(frozen=True)
class TransferMatrix:
    """3x3 transfer matrix over the state order (0, +1, -1)."""

    entries: np.ndarray
    params: ModelParams

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))

    @property
    def minor_sum(self) -> float:
        """Sum of the principal 2x2 minors (second characteristic coefficient)."""
        m = self.entries
        return float(
            (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
            + (m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0])
            + (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        )

    @property
    def det(self) -> float:
        m = self.entries
        return float(
            m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
        )


def build_matrix(params: ModelParams) -> TransferMatrix:
    s = np.array(STATE_ORDER, dtype=np.float64)
    entries = params.x ** np.outer(s, s) * (params.y ** s)[:, None]
    entries.setflags(write=False)
    return TransferMatrix(entries, params)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by decreasing modulus.

    ``values`` are floats unless a complex-conjugate pair occurred, in which
    case all three are complex and ``is_complex`` is set.
    """

    values: tuple
    is_complex: bool

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, i):
        return self.values[i]


def _cubic_real_root(a2: float, a1: float, a0: float) -> float:
    """One real root of t^3 + a2 t^2 + a1 t + a0 (the largest when all three are real)."""
    shift = a2 / 3.0
    p = a1 - a2 * shift
    q = 2.0 * shift**3 - shift * a1 + a0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc < 0.0:
        # three distinct real roots; p < 0 here
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * m)))
        t = m * math.cos(math.acos(arg) / 3.0)
    else:
        root = math.sqrt(disc)
        t = float(np.cbrt(-q / 2.0 + root) + np.cbrt(-q / 2.0 - root))
    lam = t - shift

    # Newton polish on the undepressed cubic; keep a step only if it helps
    def f(z):
        return ((z + a2) * z + a1) * z + a0

    for _ in range(3):
        deriv = (3.0 * lam + 2.0 * a2) * lam + a1
        if deriv == 0.0:
            break
        nxt = lam - f(lam) / deriv
        if abs(f(nxt)) >= abs(f(lam)):
            break
        lam = nxt
    return lam


def eigenvalues(m: TransferMatrix) -> Spectrum:
    """Roots of det(P - lambda I) = 0 from the closed-form cubic.

    The characteristic polynomial is ``l^3 - tr l^2 + c2 l - det``. One real
    root comes from the depressed cubic (trigonometric or Cardano branch); the
    other two from the quadratic left after deflating by it.
    """
    tr, c2, det = m.trace, m.minor_sum, m.det
    lam1 = _cubic_real_root(-tr, c2, -det)
    s = tr - lam1
    prod = det / lam1 if lam1 != 0.0 else c2 - lam1 * s
    disc = s * s - 4.0 * prod
    if disc >= 0.0:
        r = math.sqrt(disc)
        big = 0.5 * (s + math.copysign(r, s)) if s != 0.0 else 0.5 * r
        small = prod / big if big != 0.0 else 0.0
        vals = sorted((lam1, big, small), key=abs, reverse=True)
        return Spectrum(tuple(float(v) for v in vals), False)
    im = 0.5 * math.sqrt(-disc)
    vals = sorted((complex(lam1), complex(0.5 * s, im), complex(0.5 * s, -im)), key=abs, reverse=True)
    return Spectrum(tuple(vals), True)


class PartitionValue(NamedTuple):
    """Q_n and ln Q_n. ``value`` is None when Q_n overflows a double."""

    value: float | None
    log_value: float

    @property
    def log_domain(self) -> bool:
        return self.value is None


def _finish(direct, log_value: float, n: int) -> PartitionValue:
    if n <= _LINEAR_N_MAX and log_value < _LOG_FLOAT_MAX:
        return PartitionValue(float(direct()), log_value)
    if log_value < _LOG_FLOAT_MAX:
        return PartitionValue(math.exp(log_value), log_value)
    return PartitionValue(None, log_value)


def partition_transfer(n: int, params: ModelParams) -> PartitionValue:
    """Q_n = tr P^n = sum of eigenvalue powers, carried in log space."""
    if n < 1:
        raise ValueError("chain length must be >= 1")
    spec = eigenvalues(build_matrix(params))
    lead = spec[0]
    ratio_sum = sum((complex(v) / complex(lead)) ** n for v in spec).real
    log_value = n * math.log(abs(lead)) + math.log(ratio_sum)

    def direct():
        return sum(complex(v) ** n for v in spec).real

    return _finish(direct, log_value, n)


def log_site_sum(beta: float, include_zero: bool = True) -> float:
    """ln(1 + 2 cosh beta) or ln(2 cosh beta), stable for large |beta|."""
    b = abs(beta)
    e1 = math.exp(-b)
    if include_zero:
        return b + math.log1p(e1 + e1 * e1)
    return b + math.log1p(e1 * e1)


def partition_closed_form(n: int, beta: float, include_zero: bool = True) -> PartitionValue:
    """[1 + 2 cosh beta]^n (zero spins allowed) or [2 cosh beta]^n (spins +-1 only), at x = 1."""
    if n < 1:
        raise ValueError("chain length must be >= 1")
    log_value = n * log_site_sum(beta, include_zero)

    def direct():
        base = 2.0 * math.cosh(beta) + (1.0 if include_zero else 0.0)
        return base**n

    return _finish(direct, log_value, n)


def transfer_trace_power(n: int, params: ModelParams) -> float:
    """tr P^n by repeated matrix multiplication (independent of the eigen-solver)."""
    return float(np.trace(np.linalg.matrix_power(build_matrix(params).entries, n)))
