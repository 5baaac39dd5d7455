"""Upper bounds on |M(n)|.

Three groups live here:

* statistical-mechanics bounds ``M(n) <= (1/beta) ln(p Q_n)`` for the chain with
  and without zero spins (``statmech3``, ``statmech2`` and their ``_p`` forms);
* probabilistic bounds for a sum of i.i.d. spins with standard deviation
  ``sigma``: a normal-quantile form ``sigma K sqrt(n)`` and a Chebyshev form
  ``sigma sqrt(n / alpha)``, for ``sigma = sqrt(6/pi^2)`` (``wei_*``) and
  ``sigma = sqrt(2/3)`` (``rw_*``), plus the energy-fluctuation interval;
* published unconditional bounds (MacLeod, El Marraki, Ramaré), with natural
  logarithms.

Every bound is described by a :class:`BoundDefinition` and can be evaluated
pointwise (:func:`bound_value`) or over an array of ``n`` (:func:`bound_values`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np

from .transfer_matrix import log_site_sum

SIGMA_WEI = math.sqrt(6.0) / math.pi
SIGMA_RW = math.sqrt(2.0 / 3.0)

STATMECH = ("statmech3", "statmech2", "statmech3_p", "statmech2_p")
PROBABILISTIC = ("wei_clt", "wei_cheb", "rw_clt", "rw_cheb", "fluct_interval")
CLASSICAL = ("macleod", "elmarraki_sqrtlog", "elmarraki_log", "ramare")
BOUND_NAMES = STATMECH + PROBABILISTIC + CLASSICAL
# bounds that are proven for every n in their domain (statmech ones hold since coeff > 1)
THEOREM_BOUNDS = frozenset(CLASSICAL + ("statmech3", "statmech2"))

CLASSICAL_DOMAIN = {
    "macleod": 1,
    "elmarraki_sqrtlog": 142194,
    "elmarraki_log": 2,  # x > 1
    "ramare": 464402,
}

_PARAM_NAMES = {
    "statmech3": ("beta",),
    "statmech2": ("beta",),
    "statmech3_p": ("beta", "p"),
    "statmech2_p": ("beta", "p"),
    "wei_clt": ("alpha",),
    "wei_cheb": ("alpha",),
    "rw_clt": ("alpha",),
    "rw_cheb": ("alpha",),
    "fluct_interval": ("alpha", "beta"),
}
_DEFAULTS = {"beta": 1.0, "alpha": 0.05, "p": 1.0}


class BoundDomainError(ValueError):
    """A bound was evaluated outside the range of n where it is stated."""

    def __init__(self, name: str, n: int, valid_from: int):
        self.name, self.n, self.valid_from = name, n, valid_from
        super().__init__(f"{name} is only stated for n >= {valid_from}; got n={n}")


# ---------------------------------------------------------------- statmech


def coeff_statmech(beta: float, include_zero: bool = True) -> float:
    """Slope c(beta) in ``M(n) <= c(beta) n``: ``ln(1 + 2 cosh beta) / beta`` (or ``ln(2 cosh beta) / beta``)."""
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    return log_site_sum(beta, include_zero) / beta


def bound_statmech_with_p(beta: float, p: float, n: int, include_zero: bool = True) -> float:
    """``(ln p + n ln z(beta)) / beta`` for a known state probability ``p``."""
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if not 0 < p <= 1:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    return (math.log(p) + n * log_site_sum(beta, include_zero)) / beta


class MinimizeResult(NamedTuple):
    beta: float
    coeff: float
    at_boundary: bool


def minimize_coeff(include_zero: bool = True, beta_max: float = 50.0, tol: float = 1e-9) -> MinimizeResult:
    """Golden-section search for the smallest statmech slope on (1e-6, beta_max].

    The slope decreases monotonically towards 1 as beta grows, so the search
    always ends at ``beta_max``; ``at_boundary`` reports that the infimum is
    not attained inside the interval.
    """
    if not beta_max > 0:
        raise ValueError("beta_max must be > 0")
    beta_max = float(beta_max)
    lo = min(1e-6, beta_max)
    hi = beta_max
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0

    def f(b):
        return coeff_statmech(b, include_zero)

    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol * max(1.0, hi):
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = f(d)
    beta = 0.5 * (lo + hi)
    # compare with the closed endpoint
    if f(beta_max) <= f(beta):
        beta = beta_max
    at_boundary = beta_max - beta <= 10 * tol * max(1.0, beta_max)
    return MinimizeResult(beta, f(beta), at_boundary)


# ---------------------------------------------------------------- probabilistic

# Acklam's rational approximation to the standard normal quantile
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    if p <= 1.0 - _P_LOW:
        q = p - 0.5
        r = q * q
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        return num / den
    return -_acklam(1.0 - p)


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def normal_quantile(alpha: float) -> float:
    """K with central standard-normal mass 1 - alpha on [-K, K].

    Rational approximation for the lower alpha/2 quantile, then one Newton step
    on the exact CDF.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    p = alpha / 2.0
    z = _acklam(p)
    density = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    z -= (normal_cdf(z) - p) / density
    return -z


def _sigma(family: str) -> float:
    if family == "wei":
        return SIGMA_WEI
    if family == "rw":
        return SIGMA_RW
    raise ValueError(f"family must be 'wei' or 'rw', got {family!r}")


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def probabilistic_coeff(alpha: float, family: str, variant: str) -> float:
    """The constant c in ``M(n) <= c sqrt(n)``."""
    _check_alpha(alpha)
    sigma = _sigma(family)
    if variant == "clt":
        return sigma * normal_quantile(alpha)
    if variant == "cheb":
        return sigma / math.sqrt(alpha)
    raise ValueError(f"variant must be 'clt' or 'cheb', got {variant!r}")


def bound_probabilistic(n: int, alpha: float, family: str, variant: str) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    return probabilistic_coeff(alpha, family, variant) * math.sqrt(n)


def fluctuation_coefficients(beta: float) -> tuple[float, float]:
    """Per-spin mean A and variance B of U = sum s_i in the canonical ensemble.

    ``A = d ln z / d beta`` and ``B = d^2 ln z / d beta^2`` with
    ``z = 1 + e^beta + e^-beta``; evaluated through ``u = e^-|beta|`` so that
    large |beta| does not overflow.
    """
    u = math.exp(-abs(beta))
    den = 1.0 + u + u * u
    a = math.copysign((1.0 - u * u) / den, beta) if beta != 0 else 0.0
    b = (1.0 + 4.0 * u + u * u) * u / (den * den)
    return a, b


def bound_fluctuation_interval(n: int, alpha: float, beta: float = 0.0) -> tuple[float, float]:
    """``A n -+ sqrt(B n / alpha)``: U falls inside with probability > 1 - alpha."""
    _check_alpha(alpha)
    a, b = fluctuation_coefficients(beta)
    half = math.sqrt(b * n / alpha)
    return a * n - half, a * n + half


# ---------------------------------------------------------------- classical


def _classical_array(which: str, n: np.ndarray) -> np.ndarray:
    x = n.astype(np.float64)
    if which == "macleod":
        return (x + 1.0) / 80.0 + 5.5
    log_x = np.log(x)
    if which == "elmarraki_sqrtlog":
        return 0.002969 * x / np.sqrt(log_x)
    if which == "elmarraki_log":
        return 0.6437752 * x / log_x
    if which == "ramare":
        return (0.0146 * log_x - 0.1098) * x / (log_x * log_x)
    raise ValueError(f"unknown classical bound {which!r}")


def bound_classical(n: int, which: str) -> float:
    if which not in CLASSICAL_DOMAIN:
        raise ValueError(f"unknown classical bound {which!r}; choose from {CLASSICAL}")
    if n < CLASSICAL_DOMAIN[which]:
        raise BoundDomainError(which, n, CLASSICAL_DOMAIN[which])
    return float(_classical_array(which, np.array([n]))[0])


# ---------------------------------------------------------------- definitions


@dataclass(frozen=True)
class BoundDefinition:
    name: str
    params: Mapping[str, float] = field(default_factory=dict)
    valid_from: int = 1

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={_fmt_param(v)}" for k, v in sorted(self.params.items()))
        return f"{self.name}({inner})"

    @property
    def params_text(self) -> str:
        return ";".join(f"{k}={_fmt_param(v)}" for k, v in sorted(self.params.items()))

    @property
    def is_theorem(self) -> bool:
        return self.name in THEOREM_BOUNDS


def _fmt_param(v: float) -> str:
    return f"{float(v):.12g}"


def make_bound(name: str, **params: float) -> BoundDefinition:
    """Build and validate a bound; missing parameters get defaults (beta=1, alpha=0.05, p=1)."""
    if name not in BOUND_NAMES:
        raise ValueError(f"unknown bound {name!r}; choose from {', '.join(BOUND_NAMES)}")
    wanted = _PARAM_NAMES.get(name, ())
    extra = set(params) - set(wanted)
    if extra:
        raise ValueError(f"{name} takes no parameter(s) {sorted(extra)}; accepts {list(wanted)}")
    values = {k: float(params.get(k, 0.0 if (name == "fluct_interval" and k == "beta") else _DEFAULTS[k]))
              for k in wanted}
    if "alpha" in values:
        _check_alpha(values["alpha"])
    if "beta" in values and name != "fluct_interval" and not values["beta"] > 0:
        raise ValueError(f"{name}: beta must be > 0, got {values['beta']}")
    if "p" in values and not 0 < values["p"] <= 1:
        raise ValueError(f"{name}: p must lie in (0, 1], got {values['p']}")

    valid_from = CLASSICAL_DOMAIN.get(name, 1)
    if name in ("statmech3_p", "statmech2_p"):
        slope = log_site_sum(values["beta"], name == "statmech3_p")
        # smallest n with ln p + n ln z > 0
        valid_from = max(1, math.floor(-math.log(values["p"]) / slope) + 1)
    return BoundDefinition(name, values, valid_from)


def bound_values(defn: BoundDefinition, n: np.ndarray) -> np.ndarray:
    """Vectorised bound values; NaN where ``n`` is below the bound's domain."""
    n = np.asarray(n, dtype=np.int64)
    x = n.astype(np.float64)
    name, prm = defn.name, defn.params
    if name in ("statmech3", "statmech2"):
        out = coeff_statmech(prm["beta"], name == "statmech3") * x
    elif name in ("statmech3_p", "statmech2_p"):
        slope = log_site_sum(prm["beta"], name == "statmech3_p")
        out = (math.log(prm["p"]) + x * slope) / prm["beta"]
    elif name in ("wei_clt", "wei_cheb", "rw_clt", "rw_cheb"):
        family, variant = name.split("_")
        out = probabilistic_coeff(prm["alpha"], family, variant) * np.sqrt(x)
    elif name == "fluct_interval":
        a, b = fluctuation_coefficients(prm["beta"])
        out = abs(a) * x + np.sqrt(b * x / prm["alpha"])
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            out = _classical_array(name, n)
    return np.where(n >= defn.valid_from, out, np.nan)


def bound_value(defn: BoundDefinition, n: int) -> float:
    if n < defn.valid_from:
        raise BoundDomainError(defn.label, n, defn.valid_from)
    return float(bound_values(defn, np.array([n]))[0])


@dataclass(frozen=True)
class BoundEvaluation:
    n: int
    value: float
    satisfied: bool | None = None
    ratio: float | None = None


def evaluate_bound(defn: BoundDefinition, n: int, m: int | None = None) -> BoundEvaluation:
    """Bound value at ``n``; with ``m = M(n)`` also whether ``|m| <= value`` and ``|m| / value``."""
    value = bound_value(defn, n)
    if m is None:
        return BoundEvaluation(n, value)
    return BoundEvaluation(n, value, abs(m) <= value, abs(m) / value)
