"""Random model for the cosine sums: Bessel I0, MGF products, Monte Carlo.

Random variates come from numpy's PCG64 generator. A run's seed feeds a
``SeedSequence`` whose spawned children drive fixed-size chunks, so the
stream for a given seed does not depend on the thread count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numeric import fsum, pmap
from .coeffs import CoefficientSequence
from .errors import DomainError, OverflowGuardError

SERIES_SWITCH = 30.0
OVERFLOW_T = 700.0
RNG_ALGORITHM = "numpy.PCG64/SeedSequence.spawn"
SAMPLE_CHUNK = 1 << 16


def _i0_series(t: np.ndarray) -> np.ndarray:
    q = (t * t) / 4.0
    term = np.ones_like(t)
    total = np.ones_like(t)
    k = 0
    while True:
        k += 1
        term = term * q / (k * k)
        total = total + term
        if np.all(term <= 1e-17 * total):
            return total


def _i0_asymptotic_factor(t: np.ndarray) -> np.ndarray:
    """sum_k ((2k-1)!!)^2 / (k! 8^k t^k), run to its smallest term."""
    term = np.ones_like(t)
    total = np.ones_like(t)
    for k in range(1, 200):
        nxt = term * (2 * k - 1) ** 2 / (8.0 * k * t)
        if np.all(np.abs(nxt) <= 1e-17 * total):
            break
        term = np.where(np.abs(nxt) < np.abs(term), nxt, 0.0)
        total = total + term
    return total


def log_bessel_i0(t):
    """log I0(t); finite for every real t."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    small = t <= SERIES_SWITCH
    out[small] = np.log(_i0_series(t[small]))
    big = ~small
    tb = t[big]
    out[big] = tb - 0.5 * np.log(2 * math.pi * tb) + np.log(_i0_asymptotic_factor(tb))
    return out if out.ndim else float(out)


def bessel_i0(t):
    """Modified Bessel function I0(t), relative error ~1e-15 up to t = 700."""
    t = np.abs(np.asarray(t, dtype=float))
    if np.any(t > OVERFLOW_T):
        raise OverflowGuardError(f"I0({float(t.max())}) overflows; use log_bessel_i0")
    out = np.empty_like(t)
    small = t <= SERIES_SWITCH
    out[small] = _i0_series(t[small])
    tb = t[~small]
    out[~small] = np.exp(tb) / np.sqrt(2 * math.pi * tb) * _i0_asymptotic_factor(tb)
    return out if out.ndim else float(out)


def bessel_i0_integral(t: float, n: int = 10_000) -> float:
    """(1/2pi) int_{-pi}^{pi} exp(t cos u) du by the periodic trapezoid rule."""
    u = -math.pi + 2 * math.pi * np.arange(n) / n
    return fsum(np.exp(t * np.cos(u))) / n


@dataclass(frozen=True)
class I0LowerBounds:
    t: float
    eps: float
    i0: float
    eps_bound: float  # eps-form alone
    max_bound: float  # max(1, eps-form)
    exp_over_t_bound: float
    max_holds: bool
    exp_over_t_holds: bool

    @property
    def holds(self) -> bool:
        return self.max_holds and self.exp_over_t_holds


def i0_lower_bounds(t: float, eps: float) -> I0LowerBounds:
    """Evaluate max(1, eps/(2 pi) e^{t(1-eps^2/2)}) and e^t/(10 pi t) against I0(t).

    Comparisons run in log space so large t is fine.
    """
    if not 0.0 < eps < math.pi / 2:
        raise DomainError("eps must lie in (0, pi/2)")
    if t < 0:
        raise DomainError("t must be non-negative")
    log_i0 = float(log_bessel_i0(t))
    log_eps_form = math.log(eps / (2 * math.pi)) + t * (1 - eps * eps / 2)
    log_max = max(0.0, log_eps_form)
    if t > 0:
        log_lam = t - math.log(10 * math.pi * t)
        lam_holds = log_i0 >= log_lam
        lam_bound = math.exp(log_lam) if log_lam < OVERFLOW_T else math.inf
    else:
        lam_holds, lam_bound = True, math.nan
    # ties within rounding count as holding (t = 0 is an equality case)
    slack = 4e-16 * max(1.0, abs(log_i0))
    return I0LowerBounds(
        t=t,
        eps=eps,
        i0=math.exp(log_i0) if log_i0 < OVERFLOW_T else math.inf,
        eps_bound=math.exp(log_eps_form) if log_eps_form < OVERFLOW_T else math.inf,
        max_bound=math.exp(log_max) if log_max < OVERFLOW_T else math.inf,
        exp_over_t_bound=lam_bound,
        max_holds=log_i0 + slack >= log_max,
        exp_over_t_holds=lam_holds,
    )


def log_mgf_product(seq: CoefficientSequence, s: float, T: float) -> float:
    """log prod_{lambda_n <= T} I0(s |r_n|)."""
    m = seq.upto(T).moduli
    if len(m) == 0:
        return 0.0
    return fsum(np.atleast_1d(log_bessel_i0(s * m)))


def mgf_product(seq: CoefficientSequence, s: float, T: float) -> float:
    lg = log_mgf_product(seq, s, T)
    if lg > OVERFLOW_T:
        raise OverflowGuardError(f"MGF product exp({lg:.1f}) overflows; use log_mgf_product")
    return math.exp(lg)


@dataclass(frozen=True, eq=False)
class DistributionEstimate:
    """Right-continuous step CDF on a sorted support."""

    samples: int
    support: np.ndarray
    cdf: np.ndarray
    source: str
    rng_seed: int | None = None

    def __post_init__(self):
        sup = np.asarray(self.support, dtype=float)
        cdf = np.asarray(self.cdf, dtype=float)
        if sup.shape != cdf.shape or sup.ndim != 1:
            raise DomainError("support and cdf must be equal-length 1-d arrays")
        if len(sup):
            if np.any(np.diff(sup) <= 0):
                raise DomainError("support must be strictly increasing")
            if np.any(np.diff(cdf) < 0) or cdf[0] < 0 or abs(cdf[-1] - 1.0) > 1e-12:
                raise DomainError("cdf must be non-decreasing and end at 1")
        for name, arr in (("support", sup), ("cdf", cdf)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_samples(cls, values: np.ndarray, source: str, rng_seed: int | None = None):
        values = np.asarray(values, dtype=float).ravel()
        if len(values) == 0:
            raise DomainError("no samples")
        sup, counts = np.unique(values, return_counts=True)
        return cls(len(values), sup, np.cumsum(counts) / len(values), source, rng_seed)

    def __call__(self, v) -> np.ndarray:
        idx = np.searchsorted(self.support, np.asarray(v, dtype=float), side="right")
        padded = np.concatenate([[0.0], self.cdf])
        return padded[idx]

    def quantiles(self, probs) -> np.ndarray:
        idx = np.searchsorted(self.cdf, np.asarray(probs, dtype=float), side="left")
        return self.support[np.minimum(idx, len(self.support) - 1)]


def _draw(moduli: np.ndarray, n: int, seed_seq: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    u = rng.random((n, len(moduli)))
    return 2.0 * (np.cos(2 * math.pi * u) @ moduli)


def draw_Xr(seq: CoefficientSequence, N_terms: int, n_samples: int, seed: int) -> np.ndarray:
    """Raw samples of 2 sum_{n <= N_terms} |r_n| cos(2 pi u_n)."""
    if n_samples <= 0:
        raise DomainError("n_samples must be positive")
    if not 0 <= N_terms <= len(seq):
        raise DomainError(f"N_terms={N_terms} outside [0, {len(seq)}]")
    m = seq.moduli[:N_terms]
    sizes = [SAMPLE_CHUNK] * (n_samples // SAMPLE_CHUNK)
    if n_samples % SAMPLE_CHUNK:
        sizes.append(n_samples % SAMPLE_CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    parts = pmap(lambda job: _draw(m, job[0], job[1]), list(zip(sizes, children)))
    return np.concatenate(parts)


def sample_Xr(seq: CoefficientSequence, N_terms: int, n_samples: int, seed: int) -> DistributionEstimate:
    return DistributionEstimate.from_samples(
        draw_Xr(seq, N_terms, n_samples, seed), "monte_carlo", seed
    )


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    # the end cases cancel exactly in theory, not in floating point
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class TailEstimate:
    V: float
    p_hat: float
    ci95: tuple[float, float]
    successes: int
    n_samples: int
    upper_bound_only: bool
    sandwich: tuple[float, float] | None
    sandwich_holds: bool | None


def sandwich_bounds(V: float, alpha: float, A: float, eps: float) -> tuple[float, float]:
    """exp(-exp((alpha^{1/A} +- eps) V^{1/A})), lower then upper."""
    if V <= 0:
        raise DomainError("the double-exponential bounds need V > 0")
    base = alpha ** (1.0 / A)
    vp = V ** (1.0 / A)
    return math.exp(-math.exp((base + eps) * vp)), math.exp(-math.exp((base - eps) * vp))


def tail_probability(
    seq: CoefficientSequence,
    V: float,
    N_terms: int,
    n_samples: int,
    seed: int,
    alpha: float | None = None,
    A: float | None = None,
    eps: float = 0.1,
) -> TailEstimate:
    """Monte Carlo P(X_r >= V) with a Wilson 95% interval."""
    x = draw_Xr(seq, N_terms, n_samples, seed)
    k = int(np.count_nonzero(x >= V))
    p_hat = k / n_samples
    ci = wilson_interval(k, n_samples)
    sandwich = holds = None
    if alpha is not None and A is not None and V > 0:
        sandwich = sandwich_bounds(V, alpha, A, eps)
        holds = sandwich[0] <= ci[1] and ci[0] <= sandwich[1]
    return TailEstimate(V, p_hat, ci, k, n_samples, k == 0, sandwich, holds)


def compare_distributions(first: DistributionEstimate, second: DistributionEstimate) -> float:
    """Kolmogorov-Smirnov distance sup |F1 - F2| over the merged support."""
    if len(first.support) == 0 or len(second.support) == 0:
        raise DomainError("empty distribution estimate")
    grid = np.union1d(first.support, second.support)
    return float(np.max(np.abs(first(grid) - second(grid))))
