import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pnerr import coeffs, mengcheck
from pnerr.errors import FitError, ResourceError


def custom(lams, rs):
    return coeffs.CoefficientSequence("custom", lams, rs, complete_to=math.inf)


def harmonic(n):
    lam = np.arange(1, n + 1, dtype=float)
    return custom(lam, 1 / lam)


def harmonic_double_sum(T, X):
    """Exact sum over T < n, m <= X of min(1, 1/|n-m|)/(n m) for integer frequencies, in O(X).

    Off the diagonal, sum_n 1/(n(n+d)) telescopes to (H(X-d) - H(T) - H(X) + H(T+d))/d.
    """
    lo, hi = int(math.floor(T)), int(math.floor(X))
    H = np.concatenate([[0.0], np.cumsum(1 / np.arange(1, hi + 1, dtype=float))])
    diag = math.fsum(1 / np.arange(lo + 1, hi + 1, dtype=float) ** 2)
    d = np.arange(1, hi - lo, dtype=np.int64)
    inner = (H[hi - d] - H[lo] - (H[hi] - H[lo + d])) / d
    return diag + 2 * math.fsum(inner / d)


def test_trivial_double_sums():
    assert mengcheck.double_sum(custom([5.0], [0.5]), 1.0, 10.0) == pytest.approx(0.25, abs=1e-16)
    assert mengcheck.double_sum(custom([1.0, 3.0], [1.0, 1.0]), 0.5, 10.0) == pytest.approx(3.0, abs=1e-15)
    assert mengcheck.double_sum(custom([1.0, 3.0], [1.0, 1.0]), 5.0, 10.0) == 0.0


def test_coincident_frequencies_weigh_one():
    assert mengcheck.double_sum(custom([2.0, 2.0], [1.0, 1.0]), 1.0, 3.0) == pytest.approx(4.0, abs=1e-15)


def test_double_sum_against_telescoped_oracle():
    seq = harmonic(3000)
    for T in (10.0, 100.0, 1000.0):
        assert mengcheck.double_sum(seq, T, 3000.0) == pytest.approx(harmonic_double_sum(T, 3000.0), rel=1e-12)


def test_pair_guard():
    with pytest.raises(ResourceError):
        mengcheck.double_sum(harmonic(2000), 0.5, 2000.0, guard=1000)


def test_window_integral_single_term():
    seq = custom([7.3], [np.exp(0.3j)])
    assert mengcheck.window_integral(seq, 1.0, 10.0, 4.2) == pytest.approx(1.0, abs=1e-15)


def test_window_integral_against_quadrature():
    rng = np.random.default_rng(5)
    lam = np.sort(rng.uniform(1, 60, 20))
    rs = rng.normal(size=20) + 1j * rng.normal(size=20)
    seq = custom(lam, rs)
    for V in (0.0, 3.7, 100.0):
        closed = mengcheck.window_integral(seq, 0.5, 61.0, V)
        quad = mengcheck.window_integral_quadrature(seq, 0.5, 61.0, V, n=10_001)
        assert closed == pytest.approx(quad, abs=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.floats(0.0, 50.0), st.integers(0, 2**32 - 1))
def test_window_integral_majorized(k, V, seed):
    rng = np.random.default_rng(seed)
    lam = np.sort(rng.uniform(1, 30, k))
    rs = rng.normal(size=k) + 1j * rng.normal(size=k)
    seq = custom(lam, rs)
    w = mengcheck.window_integral(seq, 0.5, 31.0, V)
    d = mengcheck.double_sum(seq, 0.5, 31.0)
    assert -1e-12 <= w <= d * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(1.0, 200.0), min_size=2, max_size=6, unique=True))
def test_sums_non_increasing_in_T(Ts):
    seq = harmonic(300)
    vals = [mengcheck.double_sum(seq, T, 300.0) for T in sorted(Ts)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_tail_sums():
    seq = harmonic(1_000_000)
    assert mengcheck.tail_sums(seq, 2e6, 2.0, 3.0).tail1 == 0.0
    ts = mengcheck.tail_sums(seq, 10.0, 2.0, 2.0)
    assert ts.tail1 == pytest.approx(0.0952, abs=5e-5)
    assert ts.tail2 == pytest.approx(math.fsum(1 / np.arange(11, 1_000_001, dtype=float) ** 2), rel=1e-12)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        flagged = mengcheck.tail_sums(seq, 10.0, 0.5, 0.5, theta=1.0)
    assert not flagged.admissible and caught


def test_decay_fit_on_harmonic_sequence():
    seq = harmonic(5000)
    Ts = [50.0, 100.0, 200.0, 400.0, 800.0]
    rep = mengcheck.double_sum_report(seq, Ts, 5000.0)
    fit = mengcheck.decay_fit(rep)
    oracle = [harmonic_double_sum(T, 5000.0) for T in Ts]
    oracle_slope = np.polyfit(np.log(Ts), np.log(oracle), 1)[0]
    assert fit.slope == pytest.approx(oracle_slope, abs=1e-9)
    assert fit.slope < -0.5 and not fit.flagged


def test_decay_fit_flags_constant():
    rep = mengcheck.DoubleSumReport((1.0, 2.0, 4.0, 8.0, 16.0), 100.0, 0.0, (1.0,) * 5, (0.5,) * 5, (1,) * 5, None)
    fit = mengcheck.decay_fit(rep)
    assert fit.slope == 0.0 and fit.flagged
    with pytest.raises(FitError):
        mengcheck.decay_fit(mengcheck.DoubleSumReport((1.0, 2.0), 10.0, 0.0, (1.0, 0.5), (0.1, 0.1), (1, 1), None))


def test_mertens_double_sum_report(zeros10k):
    seq = coeffs.build_sequence("mertens", zeros10k)
    rep = mengcheck.double_sum_report(seq, [50, 100, 200, 400], zeros10k.coverage, theta=1.0)
    assert all(v >= 0 for v in rep.double_sums + rep.window_integrals)
    assert rep.majorized
    assert rep.predicted_exponent == pytest.approx(-0.9)
    assert mengcheck.decay_fit(rep).slope < 0
