"""Arithmetic constants and discrete moments of zeta'(rho).

Barnes G comes from its Weierstrass product, the arithmetic factor a(z)
from a truncated Euler product with a second-order tail estimate, and
zeta'(-1) from the Glaisher-Kinkelin constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate, special

from ._numeric import fsum
from .errors import AccuracyError, CoverageError, DependencyError, DomainError, NumericalError
from .sieve import small_primes
from .zeta import ZeroTable, zeta_em

EULER_GAMMA = 0.5772156649015329
LOG_2PI = math.log(2 * math.pi)
A_TOLERANCE = 5e-5

_G_TERMS = 1000
_G_TAIL_ORDER = 30


def zeta_prime_2() -> float:
    return float(zeta_em(np.array([2.0 + 0j]), derivative=True)[0].real)


def log_glaisher() -> float:
    """log A = (gamma + log 2pi)/12 - zeta'(2)/(2 pi^2)."""
    return (EULER_GAMMA + LOG_2PI) / 12 - zeta_prime_2() / (2 * math.pi**2)


def zeta_prime_minus_one() -> float:
    """zeta'(-1) = 1/12 - log A."""
    return 1.0 / 12 - log_glaisher()


def log_barnes_g(z: float) -> float:
    if not 0 < z <= 10:
        raise DomainError(f"Barnes G evaluated only on (0, 10], got {z}")
    w = z - 1.0
    k = np.arange(1, _G_TERMS + 1, dtype=float)
    body = fsum(k * np.log1p(w / k) - w + w * w / (2 * k))
    # sum_{k > N} of the same terms, expanded in w/k
    tail = fsum(
        (-1) ** (j + 1) * w**j / j * special.zeta(j - 1, _G_TERMS + 1)
        for j in range(3, _G_TAIL_ORDER)
    )
    return 0.5 * w * LOG_2PI - 0.5 * (w + w * w * (1 + EULER_GAMMA)) + body + tail


def barnes_g(z: float) -> float:
    """Barnes G(z) for real 0 < z <= 10."""
    return math.exp(log_barnes_g(z))


def _local_log_factors(z: float, primes: np.ndarray) -> np.ndarray:
    """log[(1 - 1/p)^{z^2} sum_m c_m(z)^2 p^{-m}] with c_m = Gamma(m+z)/(m! Gamma(z))."""
    x = 1.0 / primes.astype(float)
    series = np.zeros_like(x)
    c = 1.0
    power = np.ones_like(x)
    for m in range(1, 400):
        c *= (z + m - 1) / m
        power = power * x
        term = c * c * power
        series += term
        if c == 0.0 or term[0] < 1e-18 * (1 + series[0]):
            break
    else:
        raise NumericalError(f"local factor series for z={z} did not converge")
    total = 1.0 + series
    if np.any(total <= 0):
        raise NumericalError(f"non-positive local factor for z={z}")
    return z * z * np.log1p(-x) + np.log1p(series)


def euler_tail_second_moment(P: float) -> float:
    """Estimate of sum_{p > P} p^{-2} as the integral of dt/(t^2 log t) = E1(log P)."""
    return float(special.exp1(math.log(P)))


@dataclass(frozen=True)
class EulerProduct:
    value: float  # tail-corrected
    truncated: float
    log_tail: float
    prime_limit: int


def a_of_z(z: float, prime_limit: int = 100_000) -> EulerProduct:
    """prod_p (1 - 1/p)^{z^2} sum_m (Gamma(m+z)/(m! Gamma(z)))^2 p^{-m}.

    log local factor = -z^2 (z-1)^2 / (4 p^2) + O(p^-3) fixes the tail estimate.
    """
    if prime_limit < 1000:
        raise DomainError("prime_limit must be at least 1000")
    primes = small_primes(int(prime_limit))
    log_body = fsum(_local_log_factors(z, primes))
    log_tail = -(z * z * (z - 1) ** 2 / 4.0) * euler_tail_second_moment(prime_limit)
    return EulerProduct(math.exp(log_body + log_tail), math.exp(log_body), log_tail, int(prime_limit))


@dataclass(frozen=True)
class ConstantEstimate:
    value: float
    tail_bound: float
    prime_limit: int
    details: dict


def constant_a(prime_limit: int = 100_000) -> ConstantEstimate:
    """(1/sqrt(pi)) exp(3 zeta'(-1) - (11/12) log 2) * a(-1/2)."""
    if prime_limit < 10_000:
        raise DomainError("prime_limit must be at least 1e4")
    ep = a_of_z(-0.5, prime_limit)
    zp = zeta_prime_minus_one()
    pref = math.exp(3 * zp - 11.0 / 12 * math.log(2)) / math.sqrt(math.pi)
    value = pref * ep.value
    tail = abs(pref * (ep.value - ep.truncated))
    if tail > A_TOLERANCE:
        raise AccuracyError(f"Euler tail {tail:.2e} exceeds {A_TOLERANCE}")
    return ConstantEstimate(value, tail, ep.prime_limit, {"zeta_prime_minus_one": zp, "euler_product": ep.value})


def constant_a_barnes(prime_limit: int = 100_000) -> float:
    """Same constant through G(3/2)^2 / G(2) * a(-1/2) / (2 pi)."""
    return barnes_g(1.5) ** 2 / barnes_g(2.0) * a_of_z(-0.5, prime_limit).value / (2 * math.pi)


def _prime_power_coefficients(k: float, amax: int) -> list[float]:
    """d_k(p^a) = binom(k + a - 1, a) for a = 0..amax, exact when k is rational."""
    kf = Fraction(k).limit_denominator(10**6)
    out, c = [1.0], Fraction(1)
    for a in range(1, amax + 1):
        c = c * (kf + a - 1) / a
        out.append(float(c))
    return out


def divisor_coefficients(k: float, limit: int) -> np.ndarray:
    """d_k(n) for 1 <= n <= limit (index 0 unused, set to 0)."""
    if limit < 1:
        raise DomainError("limit must be >= 1")
    d = np.ones(limit + 1)
    d[0] = 0.0
    amax = max(1, int(math.log2(limit)) + 1)
    g = np.array(_prime_power_coefficients(k, amax))
    primes = small_primes(limit)
    root = math.isqrt(limit)
    for p in primes:
        p = int(p)
        if p > root:
            d[p::p] *= g[1]
            continue
        val = np.zeros(limit // p, dtype=np.int64)  # v_p of p, 2p, 3p, ...
        pa = p
        while pa <= limit:
            val[pa // p - 1 :: pa // p] += 1
            pa *= p
        d[p::p] *= g[val]
    return d


def d_half(limit: int) -> np.ndarray:
    """d_{1/2}(n) for 1 <= n <= limit, as a length-limit array."""
    return divisor_coefficients(0.5, limit)[1:]


def dirichlet_tail_half(N: int) -> float:
    """sum_{n > N} d_{1/2}(n)/n^2 from the mean value x/sqrt(pi log x): erfc(sqrt(log N))."""
    return float(special.erfc(math.sqrt(math.log(N))))


@dataclass(frozen=True)
class DivisorSeries:
    partial: float
    tail: float

    @property
    def value(self) -> float:
        return self.partial + self.tail


def divisor_series(k: float, n_limit: int) -> DivisorSeries:
    """sum_n d_k(n)/n^2 truncated at n_limit; tail estimated only for k = 1/2."""
    d = divisor_coefficients(k, n_limit)[1:]
    n = np.arange(1, n_limit + 1, dtype=float)
    partial = fsum(d / (n * n))
    tail = dirichlet_tail_half(n_limit) if k == 0.5 else 0.0
    return DivisorSeries(partial, tail)


def constant_b(prime_limit: int = 100_000, n_limit: int = 1_000_000) -> ConstantEstimate:
    """a * sum_n d_{1/2}(n)/n^2."""
    if prime_limit < 1000 or n_limit < 1000:
        raise DomainError("limits must be at least 1e3")
    a = constant_a(max(prime_limit, 10_000))
    ds = divisor_series(0.5, n_limit)
    value = a.value * ds.value
    return ConstantEstimate(
        value,
        a.tail_bound * ds.value + a.value * ds.tail,
        a.prime_limit,
        {"a": a.value, "divisor_sum": ds.value, "divisor_partial": ds.partial, "divisor_tail": ds.tail},
    )


# --------------------------------------------------------------------------
# Discrete moments
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MomentSum:
    kind: str  # "J" or "K"
    parameter: float
    T_grid: np.ndarray
    values: np.ndarray
    predicted: np.ndarray
    # the a T (log T)^{1/4} form; only for J at k = -1/2
    predicted_alt: np.ndarray | None = None

    @property
    def ratio(self) -> np.ndarray:
        return self.values / self.predicted

    def log_exponent_fit(self, shifted: bool = True) -> float:
        """Slope of log(values / T) against log log(T/2pi), or log log T if not shifted."""
        T = self.T_grid / (2 * math.pi) if shifted else self.T_grid
        x = np.log(np.log(T))
        y = np.log(self.values / self.T_grid)
        return float(np.polyfit(x, y, 1)[0])


def _log_power_integral(T: float, p: float) -> float:
    """(1/2pi) int_{2pi}^{T} (log(t/2pi))^p dt = int_0^{log(T/2pi)} e^u u^p du."""
    L = math.log(T / (2 * math.pi))
    if L <= 0:
        return 0.0
    val, _ = integrate.quad(lambda u: math.exp(u) * u**p, 0.0, L, limit=200)
    return val


def derivative_moment_prediction(k: float, T, prime_limit: int = 100_000) -> np.ndarray:
    """G(2+k)^2 / G(3+2k) a(k) (T/2pi) (log(T/2pi))^{(k+1)^2}."""
    if k <= -1.5:
        raise DomainError("k must exceed -3/2")
    T = np.asarray(T, dtype=float)
    const = barnes_g(2 + k) ** 2 / barnes_g(3 + 2 * k) * a_of_z(k, prime_limit).value
    L = np.log(T / (2 * math.pi))
    return const * T / (2 * math.pi) * L ** ((k + 1) ** 2)


def ratio_moment_prediction(s: float, T, prime_limit: int = 100_000, n_limit: int = 200_000) -> np.ndarray:
    """G(2-s/2)^2 / G(3-s) a(-s/2) sum d_{s/2}(n)/n^2 (1/2pi) int (log(t/2pi))^{(s/2-1)^2} dt."""
    if not 0 <= s < 3:
        raise DomainError("s must lie in [0, 3)")
    const = (
        barnes_g(2 - s / 2) ** 2 / barnes_g(3 - s)
        * a_of_z(-s / 2, prime_limit).value
        * divisor_series(s / 2, n_limit).value
    )
    p = (s / 2 - 1) ** 2
    return np.array([const * _log_power_integral(t, p) for t in np.atleast_1d(T)])


def moment_sum(
    kind: str,
    zero_table: ZeroTable,
    T_grid: Sequence[float],
    parameter: float,
    prime_limit: int = 100_000,
) -> MomentSum:
    """J_k(T) = sum |zeta'(rho)|^{2k} (kind "J") or K_s(T) = sum |zeta(2rho)/zeta'(rho)|^s (kind "K")."""
    Ts = np.asarray(T_grid, dtype=float)
    if np.any(np.diff(Ts) <= 0):
        raise DomainError("T grid must be increasing")
    if len(Ts) and Ts[-1] > zero_table.coverage:
        raise CoverageError(f"T={Ts[-1]} beyond table coverage {zero_table.coverage}")
    if not zero_table.has_zeta_prime:
        raise DependencyError("moment sums need zeta'(rho) companion values")
    g = zero_table.gammas
    if kind == "J":
        w = np.abs(zero_table.zeta_prime) ** (2 * parameter)
        predicted = derivative_moment_prediction(parameter, Ts, prime_limit)
        alt = None
        if parameter == -0.5:
            alt = constant_a(max(prime_limit, 10_000)).value * Ts * np.log(Ts) ** 0.25
    elif kind == "K":
        if not zero_table.has_zeta_2rho:
            raise DependencyError("K_s needs zeta(2 rho) companion values")
        w = np.abs(zero_table.zeta_2rho / zero_table.zeta_prime) ** parameter
        predicted = ratio_moment_prediction(parameter, Ts, prime_limit)
        alt = None
    else:
        raise DomainError(f"unknown moment kind {kind!r}")
    counts = np.searchsorted(g, Ts, side="left")  # gamma < T
    values = np.array([fsum(w[:c]) for c in counts])
    return MomentSum(kind, float(parameter), Ts, values, predicted, alt)
