"""Acceptance criteria, one test each, at the stated tolerances and time budgets."""

import itertools
import math
import time

import mpmath
import numpy as np
import pytest

from pnerr import coeffs, constants, explicit, mengcheck, random_model, sieve, zeta
from pnerr._numeric import simpson_average


def trial_division(n):
    """(mu(n), Omega(n)) by trial division."""
    omega, squarefree, m, p = 0, True, n, 2
    while p * p <= m:
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        omega += e
        squarefree &= e <= 1
        p += 1
    if m > 1:
        omega += 1
    distinct = len({q for q in range(2, n + 1) if n % q == 0 and all(q % r for r in range(2, math.isqrt(q) + 1))})
    return (0 if not squarefree else (-1) ** distinct), omega


def bisect_first_zero():
    """Bisection on the sign change of Hardy's Z over [14, 15], Z taken from mpmath."""
    lo, hi = 14.0, 15.0
    flo = mpmath.siegelz(lo)
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        fm = mpmath.siegelz(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_criterion_01_sieve_oracle(acceptance):
    start = time.perf_counter()
    mu = sieve.sieve_mobius(10_000)
    lam = sieve.sieve_liouville(10_000)
    xs = np.arange(2, 10_001)
    psi = sieve.summatory("psi", 10_000, xs)
    special = sieve.summatory("mertens_M", 1000, [10, 1000])
    l10 = sieve.summatory("liouville_L", 10, [10])
    elapsed = time.perf_counter() - start

    brute = [trial_division(n) for n in range(1, 10_001)]
    mu_ok = mu.tolist() == [b[0] for b in brute]
    lam_ok = lam.tolist() == [(-1) ** b[1] for b in brute]
    # Lambda(n) = log p exactly when n is a prime power
    von_mangoldt = np.zeros(10_001)
    for p in range(2, 10_001):
        if all(p % r for r in range(2, math.isqrt(p) + 1)):
            q = p
            while q <= 10_000:
                von_mangoldt[q] = math.log(p)
                q *= p
    psi_brute = np.cumsum(von_mangoldt)[2:]
    psi_ok = np.max(np.abs(psi.raw - psi_brute)) < 1e-9
    values_ok = special.raw.tolist() == [-1, 2] and l10.raw[0] == 0
    ok = mu_ok and lam_ok and psi_ok and values_ok and elapsed < 5
    acceptance(1, ok, f"mu/lambda/psi match brute force to 1e4, M(10)={special.raw[0]}, "
                      f"L(10)={l10.raw[0]}, M(1000)={special.raw[1]}, {elapsed:.2f}s")
    assert ok


def test_criterion_02_zero_table(acceptance):
    start = time.perf_counter()
    table = zeta.compute_zeros(2000)
    elapsed = time.perf_counter() - start
    g = table.gammas
    Ts = np.concatenate([g, np.nextafter(g, 0), np.linspace(1.0, g[-1], 20_000)])
    N = np.searchsorted(g, Ts, side="right")
    main = Ts / (2 * math.pi) * np.log(Ts / (2 * math.pi * math.e)) + 7 / 8
    worst = float(np.max(np.abs(N - main)))
    oracle = bisect_first_zero()
    ok = worst < 2 and abs(g[0] - 14.134725142) < 1e-8 and abs(g[0] - oracle) < 1e-8 and elapsed < 60
    acceptance(2, ok, f"max |N(T) - main term| = {worst:.3f}, gamma_1 = {g[0]:.10f} "
                      f"(bisection {oracle:.10f}), {elapsed:.1f}s")
    assert ok


def test_criterion_03_mertens_residual(acceptance, zeros2000):
    start = time.perf_counter()
    xs = 2.05 + 0.1 * np.arange(480)
    table = sieve.summatory("mertens_M", 50, xs)
    worst = {}
    for count in (500, 2000):
        seq = coeffs.build_sequence("mertens", zeros2000.head(count))
        worst[count] = float(np.max(np.abs(explicit.residual(explicit.ExplicitSum(seq, seq.coverage), table))))
    elapsed = time.perf_counter() - start
    ok = worst[2000] < 1.0 and worst[500] > worst[2000] and elapsed < 120
    acceptance(3, ok, f"max residual {worst[2000]:.4f} (2000 zeros) vs {worst[500]:.4f} (500 zeros), "
                      f"{elapsed:.1f}s")
    assert ok


def test_criterion_04_psi_residual(acceptance, zeros2000):
    start = time.perf_counter()
    xs = [100.5, 500.5, 1000.5]
    table = sieve.summatory("psi", 1001, xs)
    seq = coeffs.build_sequence("psi", zeros2000)
    res = explicit.residual(explicit.ExplicitSum(seq, seq.coverage), table)
    elapsed = time.perf_counter() - start
    ok = bool(np.all(np.abs(res) < 0.15)) and elapsed < 60
    shown = ", ".join(f"{x}: {r:+.4f}" for x, r in zip(xs, res))
    acceptance(4, ok, f"residuals {shown} (bound 0.15), {elapsed:.1f}s")
    assert ok


def test_criterion_05_laplace_transform(acceptance, zeros10k):
    start = time.perf_counter()
    seq = coeffs.build_sequence("mertens", zeros10k).head(5)
    T = seq.coverage
    devs = {}
    for s in (1.0, 2.0):
        est = explicit.empirical_laplace(seq, s, T, 1e6)
        devs[s] = abs(est.value / random_model.mgf_product(seq, s, T) - 1)
    elapsed = time.perf_counter() - start
    ok = max(devs.values()) < 0.03 and elapsed < 300
    acceptance(5, ok, f"relative deviation s=1: {devs[1.0]:.2e}, s=2: {devs[2.0]:.2e}, {elapsed:.1f}s")
    assert ok


def test_criterion_06_cosine_moments(acceptance, zeros10k):
    start = time.perf_counter()
    seq = coeffs.build_sequence("mertens", zeros10k).head(5)
    worst, where = 0.0, ()
    for k in range(0, 5):
        for idx in itertools.combinations_with_replacement(range(5), k):
            m = explicit.cosine_moment(seq, idx, 1e6)
            dev = abs(m.numeric - m.random_expectation)
            if dev > worst:
                worst, where = dev, idx
    # quadrature spot checks of the exact expansion
    spot = max(
        abs(explicit.cosine_moment(seq, idx, 1e4).numeric - explicit.cosine_moment_simpson(seq, idx, 1e4))
        for idx in [(0, 0), (0, 1, 2), (0, 0, 1, 1), (3, 3, 3, 3)]
    )
    elapsed = time.perf_counter() - start
    ok = worst < 2e-3 and spot < 1e-8 and elapsed < 300
    acceptance(6, ok, f"worst |average - expectation| = {worst:.2e} at {where}, "
                      f"exact vs Simpson {spot:.1e}, {elapsed:.1f}s")
    assert ok


def test_criterion_07_bessel(acceptance):
    agree = max(
        abs(random_model.bessel_i0(t) - random_model.bessel_i0_integral(t)) / random_model.bessel_i0(t)
        for t in (0.5, 1.0, 2.0, 5.0, 10.0)
    )
    grid = np.linspace(0.3, 30.0, 100)
    failures = []
    for t in grid:
        for eps in (0.1, 0.5, 1.0, 1.5):
            b = random_model.i0_lower_bounds(float(t), eps)
            eps_form = b.i0 >= b.eps_bound
            if not (b.max_holds and eps_form and b.exp_over_t_holds and b.i0 >= 1.0):
                failures.append((float(t), eps))
    ok = agree < 1e-9 and not failures
    acceptance(7, ok, f"series vs integral {agree:.1e}; bound violations on grid: {len(failures)}")
    assert ok


def test_criterion_08_constants(acceptance):
    a1 = constants.constant_a(100_000)
    a2 = constants.constant_a(200_000)
    b1 = constants.constant_b(100_000, 500_000)
    b2 = constants.constant_b(200_000, 1_000_000)
    zs = np.linspace(0.5, 3.0, 20)
    recurrence = max(abs(constants.barnes_g(z + 1) / (math.gamma(z) * constants.barnes_g(z)) - 1) for z in zs)
    ok = (
        abs(a1.value - 0.16712) < 5e-5
        and abs(a2.value - a1.value) < 1e-6
        and abs(b2.value - b1.value) < 1e-6
        and recurrence < 1e-8
    )
    acceptance(8, ok, f"a = {a1.value:.8f} (doubling moves {abs(a2.value - a1.value):.1e}), "
                      f"b = {b1.value:.8f} (doubling moves {abs(b2.value - b1.value):.1e}), "
                      f"Barnes recurrence {recurrence:.1e}")
    assert ok


def test_criterion_09_fejer(acceptance):
    mass_dev = {}
    for T, Z in ((10.0, 100.0), (100.0, 100.0)):
        mass_dev[(T, Z)] = abs(explicit.kernel_mass(T, Z) - 1) / (2 / (Z * T))
    T, Z = 10.0, 1000.0
    worst = 0.0
    for lam, t, r in ((3.0, 0.7, 0.6 * np.exp(0.4j)), (7.5, -2.0, 1.0 + 0j), (0.5, 5.0, 0.2 - 0.1j)):
        seq = coeffs.CoefficientSequence("custom", [lam], [r], complete_to=math.inf)
        got = explicit.fejer_smooth(seq, t, T, Z, T).value
        exact = explicit.fejer_hat(lam / T) * abs(r) * math.cos(lam * t + np.angle(r))
        worst = max(worst, abs(got - exact))
    ok = all(v <= 1 for v in mass_dev.values()) and worst < 1e-6
    shown = ", ".join(f"(T={T:g}, Z={Z:g}): {v:.2f} of bound" for (T, Z), v in mass_dev.items())
    acceptance(9, ok, f"kernel mass {shown}; smoothing vs transform {worst:.1e}")
    assert ok


def test_criterion_10_double_sum_decay(acceptance, zeros10k):
    start = time.perf_counter()
    seq = coeffs.build_sequence("mertens", zeros10k)
    rep = mengcheck.double_sum_report(seq, [50, 100, 200, 400], zeros10k.coverage)
    fit = mengcheck.decay_fit(rep)
    ds = rep.double_sums
    decreasing = all(b < a for a, b in zip(ds, ds[1:]))
    elapsed = time.perf_counter() - start
    ok = decreasing and fit.slope < -0.5 and rep.majorized
    acceptance(10, ok, f"double sums {', '.join(f'{v:.5f}' for v in ds)}; slope {fit.slope:.3f}; "
                       f"window <= 4 x double sum: {rep.majorized}; {elapsed:.1f}s")
    assert ok


def test_criterion_11_distribution(acceptance, zeros10k):
    start = time.perf_counter()
    seq = coeffs.build_sequence("mertens", zeros10k).head(30)
    T = seq.coverage
    time_avg = explicit.time_average_distribution(seq, T, 1.0, 1e6, 2_000_001)
    model = random_model.sample_Xr(seq, 30, 1_000_000, seed=2024)
    ks = random_model.compare_distributions(time_avg, model)
    elapsed = time.perf_counter() - start
    ok = ks < 0.05
    acceptance(11, ok, f"KS distance {ks:.2e} (T = gamma_30, 1e6 samples), {elapsed:.1f}s")
    assert ok


def test_criterion_12_assumption_fits(acceptance, zeros10k):
    grid = np.geomspace(100, zeros10k.coverage, 16)
    reps = {k: coeffs.fit_assumptions(coeffs.build_sequence(k, zeros10k), grid) for k in ("mertens", "psi")}
    m, p = reps["mertens"], reps["psi"]
    ok = 1.0 <= m.A <= 1.5 and 1.8 <= p.A <= 2.2 and m.theta < 2 and p.theta < 2
    acceptance(12, ok, f"A mertens {m.A:.3f} (want [1.0, 1.5]), A psi {p.A:.3f} (want [1.8, 2.2]); "
                       f"theta mertens {m.theta:.3f}, psi {p.theta:.3f}; "
                       f"log(T/2pi) regressor gives A {m.A_shifted:.3f} / {p.A_shifted:.3f}")
    assert ok
