import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mertens_ising.bounds import (
    BOUND_NAMES,
    BoundDomainError,
    bound_classical,
    bound_fluctuation_interval,
    bound_probabilistic,
    bound_statmech_with_p,
    bound_value,
    bound_values,
    coeff_statmech,
    evaluate_bound,
    fluctuation_coefficients,
    make_bound,
    minimize_coeff,
    normal_quantile,
)
from mertens_ising.transfer_matrix import partition_closed_form

# high-precision reference values computed with mpmath (50 digits)
COEFF_1_WITH_ZERO = 1.40760596444438030
COEFF_1_NO_ZERO = 1.12692801104297250
A_1 = 0.575210382604441432
B_1 = 0.424404544689254450
RW_CHEB_1E4 = 365.148371670110742
RAMARE_1E6 = 481.517563412490306


def gaussian_mass(k, h=1e-4):
    """Composite Simpson integral of the standard normal density over [-k, k]."""
    steps = max(2, 2 * math.ceil(k / h))
    x = np.linspace(-k, k, steps + 1)
    f = np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    w = np.ones(steps + 1)
    w[1:-1:2], w[2:-1:2] = 4, 2
    return float((x[1] - x[0]) / 3 * np.dot(w, f))


def quadrature_quantile(alpha):
    """Bisection on the Simpson mass; independent of the library's own quantile."""
    lo, hi = 0.0, 10.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if gaussian_mass(mid) < 1 - alpha:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_reference_values_recomputed():
    mpmath.mp.dps = 40
    e = mpmath.e
    assert float(mpmath.log(1 + 2 * mpmath.cosh(1))) == pytest.approx(COEFF_1_WITH_ZERO, rel=1e-15)
    assert float(mpmath.log(2 * mpmath.cosh(1))) == pytest.approx(COEFF_1_NO_ZERO, rel=1e-15)
    z = 1 + e + 1 / e
    assert float((e - 1 / e) / z) == pytest.approx(A_1, rel=1e-15)
    assert float((e + 1 / e) / z - ((e - 1 / e) / z) ** 2) == pytest.approx(B_1, rel=1e-15)
    ln = mpmath.log(10**6)
    assert float((mpmath.mpf("0.0146") * ln - mpmath.mpf("0.1098")) * 10**6 / ln**2) == pytest.approx(
        RAMARE_1E6, rel=1e-15
    )


def test_coeff_examples():
    assert coeff_statmech(1.0, True) == pytest.approx(COEFF_1_WITH_ZERO, rel=1e-14)
    assert coeff_statmech(1.0, False) == pytest.approx(COEFF_1_NO_ZERO, rel=1e-14)
    with pytest.raises(ValueError):
        coeff_statmech(0.0)


@settings(max_examples=300)
@given(st.floats(1e-4, 15.0))
def test_coeff_ordering_and_above_one(beta):
    lo, hi = coeff_statmech(beta, False), coeff_statmech(beta, True)
    assert 1 < lo < hi


@settings(max_examples=100)
@given(st.floats(15.0, 700.0))
def test_coeff_ordering_large_beta(beta):
    # the excess over 1 is ln(1 + e^-b + e^-2b)/b, below double resolution from b ~ 17 (no zero) or 33
    lo, hi = coeff_statmech(beta, False), coeff_statmech(beta, True)
    assert 1 <= lo <= hi
    u = math.exp(-beta)
    assert hi == pytest.approx(1 + math.log1p(u + u * u) / beta, rel=1e-15)
    assert lo == pytest.approx(1 + math.log1p(u * u) / beta, rel=1e-15)


def test_coeff_large_beta_finite():
    assert coeff_statmech(1000.0) == 1.0


def test_bound_with_p_examples():
    base = bound_statmech_with_p(1.0, 1.0, 10)
    assert base == pytest.approx(10 * COEFF_1_WITH_ZERO, rel=1e-14)
    assert bound_statmech_with_p(1.0, 0.5, 10) == pytest.approx(base + math.log(0.5), rel=1e-14)
    values = [bound_statmech_with_p(1.0, p, 10) for p in (1.0, 1e-3, 1e-30, 1e-300)]
    assert values == sorted(values, reverse=True)
    with pytest.raises(ValueError):
        bound_statmech_with_p(1.0, 0.0, 10)


def test_minimize_coeff_against_grid_scan():
    res = minimize_coeff(True, 50)
    grid = np.linspace(0.01, 50.0, 20_000)
    scan = min(coeff_statmech(float(b)) for b in grid)
    assert res.at_boundary
    assert res.beta == pytest.approx(50.0)
    assert abs(res.coeff - coeff_statmech(50.0)) < 1e-3
    assert res.coeff <= scan + 1e-12


def test_minimize_coeff_monotone_decrease():
    vals = [coeff_statmech(b) for b in np.geomspace(1e-3, 15, 200)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    tail = [coeff_statmech(b) for b in np.geomspace(15, 500, 100)]
    assert all(a >= b for a, b in zip(tail, tail[1:]))


@pytest.mark.parametrize("alpha", [0.01, 0.05, 0.1, 0.3173, 0.5])
def test_quantile_matches_quadrature(alpha):
    assert normal_quantile(alpha) == pytest.approx(quadrature_quantile(alpha), abs=1e-6)


def test_quantile_examples():
    assert abs(normal_quantile(0.05) - 1.959964) < 1e-6
    assert normal_quantile(0.3173) == pytest.approx(1.0, abs=1e-4)
    assert normal_quantile(1 - 1e-9) < 1e-8


@settings(max_examples=200)
@given(st.floats(1e-10, 1 - 1e-10))
def test_quantile_round_trip(alpha):
    k = normal_quantile(alpha)
    assert math.erf(k / math.sqrt(2)) == pytest.approx(1 - alpha, abs=1e-12)


def test_quantile_round_trip_by_integration():
    for alpha in (0.01, 0.05, 0.1, 0.5):
        assert abs(gaussian_mass(normal_quantile(alpha)) - (1 - alpha)) < 1e-6


def test_probabilistic_examples():
    assert bound_probabilistic(10**4, 0.05, "rw", "cheb") == pytest.approx(RW_CHEB_1E4, rel=1e-14)
    assert bound_probabilistic(10**4, 0.05, "rw", "clt") == pytest.approx(160.03, abs=0.005)
    assert bound_probabilistic(10**4, 0.05, "wei", "cheb") == pytest.approx(
        math.sqrt(6) / math.pi / math.sqrt(0.05) * 100, rel=1e-14
    )
    with pytest.raises(ValueError):
        bound_probabilistic(10, 0.05, "nope", "clt")


@pytest.mark.parametrize("alpha", np.linspace(0.001, 0.3, 40).tolist())
def test_chebyshev_dominates_clt(alpha):
    for family in ("rw", "wei"):
        assert bound_probabilistic(100, alpha, family, "cheb") >= bound_probabilistic(100, alpha, family, "clt")


def test_fluctuation_examples():
    a, b = fluctuation_coefficients(0.0)
    assert a == 0.0 and b == 2.0 / 3.0
    a, b = fluctuation_coefficients(1.0)
    assert a == pytest.approx(A_1, rel=1e-14)
    assert b == pytest.approx(B_1, rel=1e-14)


@pytest.mark.parametrize("beta", [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
def test_fluctuation_vs_finite_differences(beta):
    h = 1e-4

    def lnq(b):
        return partition_closed_form(1, b, True).log_value

    a_fd = (lnq(beta + h) - lnq(beta - h)) / (2 * h)
    b_fd = (lnq(beta + h) - 2 * lnq(beta) + lnq(beta - h)) / (h * h)
    a, b = fluctuation_coefficients(beta)
    assert a == pytest.approx(a_fd, rel=1e-6, abs=1e-12)
    assert b == pytest.approx(b_fd, rel=1e-6)


def test_fluctuation_extreme_beta():
    a, b = fluctuation_coefficients(800.0)
    assert a == 1.0 and 0 <= b < 1e-300
    a, _ = fluctuation_coefficients(-800.0)
    assert a == -1.0


def test_fluct_interval_matches_chebyshev():
    lo, hi = bound_fluctuation_interval(10**4, 0.05, 0.0)
    cheb = bound_probabilistic(10**4, 0.05, "rw", "cheb")
    assert hi == pytest.approx(cheb, rel=1e-12)
    assert lo == pytest.approx(-cheb, rel=1e-12)


def test_fluct_interval_collapse():
    a, _ = fluctuation_coefficients(0.7)
    widths = [np.subtract(*bound_fluctuation_interval(1000, al, 0.7)[::-1]) for al in (0.1, 0.5, 0.999999)]
    assert widths == sorted(widths, reverse=True)
    lo, hi = bound_fluctuation_interval(1000, 1 - 1e-12, 0.7)
    assert lo < a * 1000 < hi


def test_fluct_interval_width_scaling():
    for n in (10, 1000, 12345):
        w1 = np.subtract(*bound_fluctuation_interval(n, 0.05, 0.3)[::-1])
        w4 = np.subtract(*bound_fluctuation_interval(4 * n, 0.05, 0.3)[::-1])
        assert w4 == pytest.approx(2 * w1, rel=1e-12)


def test_classical_examples():
    assert bound_classical(79, "macleod") == pytest.approx(6.5, rel=1e-15)
    with pytest.raises(BoundDomainError, match="142194"):
        bound_classical(142193, "elmarraki_sqrtlog")
    assert bound_classical(10**6, "ramare") == pytest.approx(RAMARE_1E6, rel=1e-13)
    assert bound_classical(100, "elmarraki_log") == pytest.approx(0.6437752 * 100 / math.log(100), rel=1e-14)
    with pytest.raises(BoundDomainError):
        bound_classical(464401, "ramare")
    with pytest.raises(ValueError):
        bound_classical(10, "mystery")


def test_make_bound_defaults_and_labels():
    b = make_bound("rw_cheb", alpha=0.05)
    assert b.label == "rw_cheb(alpha=0.05)"
    assert b.params_text == "alpha=0.05"
    assert make_bound("fluct_interval").params == {"alpha": 0.05, "beta": 0.0}
    assert make_bound("statmech3").params == {"beta": 1.0}
    assert make_bound("macleod").label == "macleod"
    assert make_bound("statmech3").is_theorem and not make_bound("rw_clt").is_theorem
    with pytest.raises(ValueError):
        make_bound("macleod", beta=1.0)
    with pytest.raises(ValueError):
        make_bound("nope")
    with pytest.raises(ValueError):
        make_bound("statmech3", beta=-1.0)


def test_p_variant_domain():
    b = make_bound("statmech3_p", beta=1.0, p=1e-6)
    assert bound_value(b, b.valid_from) > 0
    assert b.valid_from == 1 or (math.log(1e-6) + (b.valid_from - 1) * COEFF_1_WITH_ZERO) <= 0


def test_vectorised_matches_scalar():
    n = np.array([1, 2, 10, 199, 10**5, 142194, 464402, 10**7])
    for name in BOUND_NAMES:
        defn = make_bound(name)
        vec = bound_values(defn, n)
        for k, v in zip(n, vec):
            if k < defn.valid_from:
                assert math.isnan(v)
                with pytest.raises(BoundDomainError):
                    bound_value(defn, int(k))
            else:
                assert v == pytest.approx(bound_value(defn, int(k)), rel=1e-15)


def test_evaluate_bound():
    ev = evaluate_bound(make_bound("macleod"), 199, m=-8)
    assert ev.value == 8.0 and ev.satisfied and ev.ratio == 1.0
    assert evaluate_bound(make_bound("macleod"), 10).satisfied is None
