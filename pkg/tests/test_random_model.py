import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pnerr import coeffs, random_model
from pnerr.errors import DomainError, OverflowGuardError
from pnerr.random_model import DistributionEstimate

# mpmath.besseli(0, t), 20 digits
I0_REFERENCE = {
    0.5: 1.0634833707413235193,
    1.0: 1.2660658777520083356,
    2.0: 2.2795853023360672674,
    5.0: 27.239871823604446895,
    10.0: 2815.7166284662544715,
    20.0: 43558282.559553533272,
    30.0: 781672297823.97748972,
}


def seq_of(moduli, phases=None):
    m = np.asarray(moduli, dtype=float)
    ph = np.zeros(len(m)) if phases is None else np.asarray(phases)
    lam = np.arange(1, len(m) + 1, dtype=float)
    return coeffs.CoefficientSequence("custom", lam, m * np.exp(1j * ph), complete_to=math.inf)


@pytest.fixture(scope="module")
def mertens(zeros2000):
    return coeffs.build_sequence("mertens", zeros2000)


@pytest.mark.parametrize("t", sorted(I0_REFERENCE))
def test_bessel_reference(t):
    assert random_model.bessel_i0(t) == pytest.approx(I0_REFERENCE[t], rel=1e-13)


def test_bessel_small_values():
    assert random_model.bessel_i0(0.0) == 1.0
    assert random_model.bessel_i0(1.0) == pytest.approx(1.2660658778, abs=1e-10)
    assert random_model.bessel_i0(5.0) == pytest.approx(random_model.bessel_i0_integral(5.0), abs=1e-9)


def test_bessel_guards():
    with pytest.raises(OverflowGuardError):
        random_model.bessel_i0(701.0)
    assert random_model.log_bessel_i0(1000.0) == pytest.approx(float(mpmath.log(mpmath.besseli(0, 1000))), rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(10.0, 20.0))
def test_bessel_representations_agree_on_overlap(t):
    series = random_model.bessel_i0(t)
    integral = random_model.bessel_i0_integral(t)
    asym = float(np.exp(random_model.log_bessel_i0(t)))
    ref = float(mpmath.besseli(0, t))
    for v in (series, integral, asym):
        assert abs(v - ref) <= 1e-9 * ref


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 60.0), st.floats(0.0, 60.0))
def test_bessel_even_monotone_at_least_one(a, b):
    lo, hi = sorted((a, b))
    assert random_model.bessel_i0(-a) == random_model.bessel_i0(a)
    assert 1.0 <= random_model.bessel_i0(lo) <= random_model.bessel_i0(hi)


def test_lower_bounds_examples():
    b = random_model.i0_lower_bounds(2.0, 0.5)
    assert b.eps_bound == pytest.approx(0.5 / (2 * math.pi) * math.exp(1.75), rel=1e-14)
    assert b.eps_bound == pytest.approx(0.4579, abs=1e-4)
    assert b.max_holds
    edge = random_model.i0_lower_bounds(0.0, 0.5)
    assert edge.max_bound == 1.0 == edge.i0 and edge.max_holds
    big = random_model.i0_lower_bounds(10.0, 0.5)
    assert big.exp_over_t_bound == pytest.approx(math.exp(10) / (100 * math.pi), rel=1e-14)
    assert big.exp_over_t_bound == pytest.approx(70.1, abs=0.05)
    assert big.i0 == pytest.approx(2815.7166, abs=1e-4) and big.exp_over_t_holds
    with pytest.raises(DomainError):
        random_model.i0_lower_bounds(1.0, 2.0)


def test_mgf_product_identities():
    s3 = seq_of([0.3, 0.2, 0.7])
    assert random_model.mgf_product(s3, 0.0, 10.0) == 1.0
    assert random_model.mgf_product(s3, 2.0, 1.0) == pytest.approx(random_model.bessel_i0(0.6), rel=1e-15)
    two = random_model.mgf_product(s3, 2.0, 2.0)
    assert two == pytest.approx(random_model.bessel_i0(0.6) * random_model.bessel_i0(0.4), rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(-20.0, 20.0))
def test_mgf_product_even(s):
    seq = seq_of(np.linspace(0.01, 0.5, 40))
    assert random_model.log_mgf_product(seq, s, 100.0) == random_model.log_mgf_product(seq, -s, 100.0)


def test_sampling_moments():
    n = 200_000
    x = random_model.draw_Xr(seq_of([1.0]), 1, n, seed=3)
    assert np.all(np.abs(x) <= 2.0)
    assert abs(x.mean()) < 3 / math.sqrt(n)
    mods = np.array([0.5, 0.3, 0.1])
    y = random_model.draw_Xr(seq_of(mods), 3, n, seed=4)
    assert abs(np.mean(y**2) - 2 * np.sum(mods**2)) < 5 / math.sqrt(n)


def test_sampling_is_deterministic():
    seq = seq_of([0.5, 0.25])
    a = random_model.sample_Xr(seq, 2, 100_000, seed=11)
    b = random_model.sample_Xr(seq, 2, 100_000, seed=11)
    assert a.support.tobytes() == b.support.tobytes() and a.cdf.tobytes() == b.cdf.tobytes()
    c = random_model.sample_Xr(seq, 2, 100_000, seed=12)
    assert random_model.compare_distributions(a, c) < 2 / math.sqrt(100_000)
    with pytest.raises(DomainError):
        random_model.sample_Xr(seq, 2, 0, seed=1)


def test_mgf_matches_monte_carlo():
    mods = np.array([0.4, 0.3, 0.2, 0.1])
    s, n = 1.5, 400_000
    x = random_model.draw_Xr(seq_of(mods), 4, n, seed=21)
    vals = np.exp(s * x / 2)
    se = vals.std() / math.sqrt(n)
    assert abs(vals.mean() - random_model.mgf_product(seq_of(mods), s, 10.0)) < 3 * se


def test_tail_extremes():
    mods = np.array([0.5, 0.25, 0.125])
    seq = seq_of(mods)
    top = 2 * mods.sum()
    assert random_model.tail_probability(seq, -top - 1, 3, 10_000, 0).p_hat == 1.0
    hi = random_model.tail_probability(seq, top + 1, 3, 10_000, 0)
    assert hi.p_hat == 0.0 and hi.upper_bound_only


def test_tail_reproducible_across_seeds(mertens):
    a = random_model.tail_probability(mertens, 1.0, 100, 200_000, seed=1)
    b = random_model.tail_probability(mertens, 1.0, 100, 200_000, seed=2)
    assert a.ci95[0] <= b.p_hat <= a.ci95[1]


def test_sandwich_as_printed():
    lo, hi = random_model.sandwich_bounds(4.0, 1.0, 2.0, 0.1)
    assert lo == pytest.approx(math.exp(-math.exp(1.1 * 2.0)), rel=1e-14)
    assert hi == pytest.approx(math.exp(-math.exp(0.9 * 2.0)), rel=1e-14)


def test_compare_distributions_cases():
    d = DistributionEstimate.from_samples(np.array([0.1, 0.4, 0.4, 0.9]), "monte_carlo")
    assert random_model.compare_distributions(d, d) == 0.0
    point = DistributionEstimate.from_samples(np.array([0.5]), "monte_carlo")
    uniform = DistributionEstimate.from_samples((np.arange(1000) + 0.5) / 1000, "time_average")
    assert random_model.compare_distributions(point, uniform) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200))
def test_empirical_cdf_valid(values):
    d = DistributionEstimate.from_samples(np.array(values), "monte_carlo")
    assert np.all(np.diff(d.cdf) >= 0)
    assert d.cdf[-1] == pytest.approx(1.0, abs=1e-12)
    assert d(min(values) - 1) == 0.0 and d(max(values)) == pytest.approx(1.0, abs=1e-12)


def test_wilson_interval_contains_estimate():
    lo, hi = random_model.wilson_interval(30, 1000)
    assert lo < 0.03 < hi
    assert random_model.wilson_interval(0, 100)[0] == 0.0
