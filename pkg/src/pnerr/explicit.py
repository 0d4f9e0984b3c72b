"""Truncated explicit-formula sums, Fejer smoothing and time averages.

Everything here evaluates F(t, T) = sum_{lambda_n <= T} |r_n| cos(lambda_n t + beta_n)
in blocks of nodes times frequencies, so memory stays bounded for long scans.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import sici

from ._numeric import KahanSum, fsum, simpson_average
from .coeffs import CoefficientSequence
from .errors import AccuracyError, CoverageError, DomainError, NumericalError, OverflowGuardError, ResourceError
from .random_model import DistributionEstimate
from .sieve import SummatoryTable

_BLOCK = 1 << 22  # nodes x frequencies per evaluation block
MAX_EXPONENT = 700.0
MAX_MOMENT_ORDER = 8

# which summatory kind each coefficient kind explains
_TABLE_KIND = {"psi": "psi", "mertens": "mertens_M", "liouville": "liouville_L"}


def cos_sum(lambdas: np.ndarray, moduli: np.ndarray, phases: np.ndarray, ts) -> np.ndarray:
    """sum_n moduli_n cos(lambdas_n t + phases_n) at every t."""
    ts = np.asarray(ts, dtype=float)
    flat = ts.ravel()
    out = np.zeros(flat.shape)
    if len(lambdas) == 0:
        return out.reshape(ts.shape)
    rows = max(1, _BLOCK // len(lambdas))
    for i in range(0, len(flat), rows):
        t = flat[i : i + rows]
        out[i : i + rows] = np.cos(np.outer(t, lambdas) + phases) @ moduli
    return out.reshape(ts.shape)


def _terms(seq: CoefficientSequence, T: float):
    sub = seq.upto(T)
    return sub.lambdas, sub.moduli, sub.phases


def F_value(seq: CoefficientSequence, t, T: float):
    """F(t, T) for scalar or array t."""
    if T > seq.coverage:
        raise CoverageError(f"T={T} beyond sequence coverage {seq.coverage}")
    v = cos_sum(*_terms(seq, T), t)
    return v if v.ndim else float(v)


@dataclass(frozen=True)
class ExplicitSum:
    seq: CoefficientSequence
    X: float
    c: float = 0.0

    def __post_init__(self):
        if self.X > self.seq.coverage and len(self.seq):
            raise CoverageError(f"truncation X={self.X} beyond coverage {self.seq.coverage}")


def phi_sum(es: ExplicitSum, x):
    """Re sum_{lambda_n <= X} r_n x^{i lambda_n}."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("x must be positive")
    v = cos_sum(*_terms(es.seq, es.X), np.log(x))
    return v if v.ndim else float(v)


def residual(es: ExplicitSum, table: SummatoryTable, x=None):
    """E(x) - c - 2 Phi(x) with the explicit formula's sign; all table points if x is None."""
    kind = es.seq.kind
    if kind != "custom" and _TABLE_KIND[kind] != table.kind:
        raise DomainError(f"sequence kind {kind} does not explain table kind {table.kind}")
    if table.normalized is None:
        raise DomainError("table has no normalized values")
    if x is None:
        xs, E = table.xs, table.normalized
    else:
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        idx = np.searchsorted(table.xs, xs)
        if np.any(idx >= len(table.xs)) or np.any(table.xs[np.minimum(idx, len(table.xs) - 1)] != xs):
            raise CoverageError("x not among the table's evaluation points")
        E = table.normalized[idx]
    r = E - es.c - 2.0 * es.seq.sign * np.atleast_1d(phi_sum(es, xs))
    return float(r[0]) if x is not None and np.ndim(x) == 0 else r


# --------------------------------------------------------------------------
# Fejer kernel
# --------------------------------------------------------------------------

def fejer_kernel(u):
    """(sin pi u / pi u)^2 with K(0) = 1."""
    v = np.sinc(np.asarray(u, dtype=float)) ** 2
    return v if v.ndim else float(v)


def fejer_hat(t):
    v = np.maximum(0.0, 1.0 - np.abs(np.asarray(t, dtype=float)))
    return v if v.ndim else float(v)


def kernel_mass(T: float, Z: float) -> float:
    """int_{-Z}^{Z} (T/2pi) K(T u/2pi) du, in closed form through Si."""
    if T <= 0 or Z <= 0:
        raise DomainError("T and Z must be positive")
    v = Z * T / (2 * math.pi)
    si, _ = sici(2 * math.pi * v)
    return float(2 * si / math.pi - 2 * math.sin(math.pi * v) ** 2 / (math.pi**2 * v))


@dataclass(frozen=True)
class SmoothedValue:
    value: float
    error: float
    nodes_per_panel: int


def _smooth_once(lam, mod, ph, t, T, Z, n):
    xg, wg = leggauss(n)
    width = 2 * math.pi / T
    n_full = int(Z // width)
    edges = np.arange(-n_full, n_full + 1) * width
    edges = np.concatenate([[-Z], edges, [Z]]) if Z > n_full * width else edges
    edges = np.unique(edges)
    a, b = edges[:-1, None], edges[1:, None]
    u = 0.5 * (b - a) * xg + 0.5 * (a + b)
    w = 0.5 * (b - a) * wg
    kern = (T / (2 * math.pi)) * np.sinc(T * u / (2 * math.pi)) ** 2
    f = cos_sum(lam, mod, ph, t + u)
    return fsum((w * kern * f).ravel())


def fejer_smooth(
    seq: CoefficientSequence,
    t: float,
    T: float,
    Z: float,
    Y: float,
    A: float | None = None,
    tol: float = 1e-10,
    max_refine: int = 4,
) -> SmoothedValue:
    """int_{-Z}^{Z} (T/2pi) K(Tu/2pi) F(t+u, Y) du by Gauss-Legendre on kernel-zero panels."""
    if not Y >= T >= 2:
        raise DomainError("need Y >= T >= 2")
    if Z <= 0:
        raise DomainError("Z must be positive")
    if A is not None and Z < math.log(Y) ** A:
        warnings.warn(f"Z={Z} below (log Y)^A={math.log(Y) ** A:.3g}", RuntimeWarning, stacklevel=2)
    if len(seq) and Y > seq.coverage:
        raise CoverageError(f"Y={Y} beyond coverage {seq.coverage}")
    lam, mod, ph = _terms(seq, Y)
    if len(lam) == 0:
        return SmoothedValue(0.0, 0.0, 0)
    # each panel holds at most lam_max/T periods of the fastest term
    n = 8 + 2 * int(math.ceil(lam.max() / T))
    prev = _smooth_once(lam, mod, ph, t, T, Z, n)
    scale = max(1.0, fsum(mod))
    for _ in range(max_refine):
        n *= 2
        cur = _smooth_once(lam, mod, ph, t, T, Z, n)
        err = abs(cur - prev)
        if err <= tol * scale:
            return SmoothedValue(cur, err, n)
        prev = cur
    raise AccuracyError(f"Fejer quadrature did not converge; last change {err:.3e}")


# --------------------------------------------------------------------------
# Scans and time averages
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ScanResult:
    t_min: float
    t_max: float
    step: float
    n_points: int
    max_value: float
    argmax: float
    min_value: float
    argmin: float
    resolution_warning: str | None
    sorted_values: np.ndarray = field(repr=False)

    def measure_above(self, threshold) -> np.ndarray | float:
        """Fraction of grid points with F > threshold."""
        th = np.asarray(threshold, dtype=float)
        above = len(self.sorted_values) - np.searchsorted(self.sorted_values, th, side="right")
        v = above / len(self.sorted_values)
        return v if v.ndim else float(v)

    def measure_below(self, threshold) -> np.ndarray | float:
        v = np.searchsorted(self.sorted_values, np.asarray(threshold, float), side="left") / len(self.sorted_values)
        return v if np.ndim(v) else float(v)


def _grid(t_min: float, t_max: float, step: float) -> tuple[int, float]:
    n = int(math.ceil((t_max - t_min) / step))
    return n + 1, (t_max - t_min) / n


def scan_extremes(
    seq: CoefficientSequence,
    T: float,
    t_range: tuple[float, float],
    step: float,
    chunk: int = 1 << 20,
) -> ScanResult:
    """Grid maximum, minimum and value distribution of F(., T) on t_range."""
    t_min, t_max = map(float, t_range)
    if t_max <= t_min or step <= 0:
        raise DomainError("need t_min < t_max and step > 0")
    if len(seq) and T > seq.coverage:
        raise CoverageError(f"T={T} beyond coverage {seq.coverage}")
    lam, mod, ph = _terms(seq, T)
    n, h = _grid(t_min, t_max, step)
    warn = None
    if len(lam) and h > math.pi / (10 * lam.max()):
        warn = f"step {h:.3g} coarser than pi/(10 lambda_max) = {math.pi / (10 * lam.max()):.3g}"
    vals = np.empty(n)
    for i in range(0, n, chunk):
        idx = np.arange(i, min(i + chunk, n))
        vals[idx] = cos_sum(lam, mod, ph, t_min + idx * h)
    imax, imin = int(np.argmax(vals)), int(np.argmin(vals))
    return ScanResult(
        t_min, t_max, h, n,
        float(vals[imax]), t_min + imax * h,
        float(vals[imin]), t_min + imin * h,
        warn, np.sort(vals),
    )


def default_step(lam_max: float) -> float:
    """min(pi/(10 lambda_max), 0.01): resolves the fastest oscillation."""
    return min(math.pi / (10 * lam_max), 0.01) if lam_max > 0 else 0.01


@dataclass(frozen=True)
class LaplaceEstimate:
    s: float
    T: float
    t_max: float
    value: float
    mean_F: float
    step: float


def empirical_laplace(
    seq: CoefficientSequence,
    s: float,
    T: float,
    t_max: float,
    t_min: float = 1.0,
    max_step: float | None = None,
) -> LaplaceEstimate:
    """(1/(t_max - t_min)) int exp(s F(t, T)) dt by composite Simpson."""
    lam, mod, ph = _terms(seq, T)
    if t_max <= t_min:
        raise DomainError("t_max must exceed t_min")
    if s == 0 or len(lam) == 0:
        return LaplaceEstimate(s, T, t_max, 1.0, 0.0, 0.0)
    step = max_step or default_step(float(lam.max()))

    def integrand(t):
        f = cos_sum(lam, mod, ph, t)
        ex = s * f
        if ex.max() > MAX_EXPONENT:
            raise OverflowGuardError(f"s*F reaches {ex.max():.1f} > {MAX_EXPONENT}")
        return np.column_stack([np.exp(ex), f])

    # one Simpson pass for both the exponential and F itself
    value, mean_f, h = _simpson_pair(integrand, t_min, t_max, step)
    jensen = math.exp(s * mean_f)
    if value < jensen * (1 - 1e-9):
        raise NumericalError(f"Jensen check failed: {value} < exp(s * mean F) = {jensen}")
    return LaplaceEstimate(s, T, t_max, value, mean_f, h)


def _simpson_pair(fn, a, b, max_step):
    """Composite Simpson means of the two columns returned by ``fn``."""
    acc = [KahanSum(), KahanSum()]
    n_int = int(math.ceil((b - a) / max_step))
    n_int += n_int % 2
    h = (b - a) / n_int
    n_nodes = n_int + 1
    chunk = 1 << 20
    for start in range(0, n_nodes, chunk):
        idx = np.arange(start, min(start + chunk, n_nodes))
        w = np.where(idx % 2 == 1, 4.0, 2.0)
        w[(idx == 0) | (idx == n_nodes - 1)] = 1.0
        v = fn(a + idx * h)
        for k in range(2):
            acc[k].add(float(np.dot(w, v[:, k])))
    scale = h / 3.0 / (b - a)
    return acc[0].value * scale, acc[1].value * scale, h


@dataclass(frozen=True)
class CosineMoment:
    indices: tuple[int, ...]
    numeric: float
    random_expectation: float


def cosine_expectation(indices: Sequence[int]) -> float:
    """E prod cos(theta_{n_j}) for independent uniform phases."""
    out = 1.0
    for m in Counter(indices).values():
        out *= math.comb(m, m // 2) / 2**m if m % 2 == 0 else 0.0
    return out


def _mean_cos(omega: float, phase: float, t_min: float, t_max: float) -> float:
    """(1/t_max) int_{t_min}^{t_max} cos(omega t + phase) dt."""
    if omega == 0.0:
        return math.cos(phase) * (t_max - t_min) / t_max
    mid = 0.5 * omega * (t_max + t_min) + phase
    half = 0.5 * omega * (t_max - t_min)
    return 2 * math.cos(mid) * math.sin(half) / (omega * t_max)


def cosine_moment(
    seq: CoefficientSequence,
    indices: Sequence[int],
    t_max: float,
    t_min: float = 1.0,
) -> CosineMoment:
    """(1/t_max) int_{t_min}^{t_max} prod_j cos(lambda_{n_j} t + beta_{n_j}) dt, evaluated exactly.

    The product is expanded into 2^(k-1) single cosines whose integrals are
    elementary. Indices are zero-based positions in ``seq``.
    """
    idx = tuple(int(i) for i in indices)
    k = len(idx)
    if k == 0:
        return CosineMoment(idx, (t_max - t_min) / t_max, 1.0)
    if k > MAX_MOMENT_ORDER:
        raise ResourceError(f"moment order {k} exceeds the cost guard {MAX_MOMENT_ORDER}")
    if min(idx) < 0 or max(idx) >= len(seq):
        raise DomainError("index outside the sequence")
    lam = seq.lambdas
    beta = seq.phases
    distinct = sorted(set(idx))
    total = KahanSum()
    for signs in itertools.product((1, -1), repeat=k - 1):
        coeff = Counter()
        coeff[idx[0]] += 1
        for s, i in zip(signs, idx[1:]):
            coeff[i] += s
        # integer coefficients decide resonance exactly
        if all(coeff[i] == 0 for i in distinct):
            omega = 0.0
        else:
            omega = math.fsum(coeff[i] * float(lam[i]) for i in distinct)
        phase = math.fsum(coeff[i] * float(beta[i]) for i in distinct)
        total.add(_mean_cos(omega, phase, t_min, t_max))
    return CosineMoment(idx, total.value / 2 ** (k - 1), cosine_expectation(idx))


def cosine_moment_simpson(
    seq: CoefficientSequence, indices: Sequence[int], t_max: float, t_min: float = 1.0
) -> float:
    """Same average by composite Simpson; an independent check of :func:`cosine_moment`."""
    lam = seq.lambdas[list(indices)]
    beta = seq.phases[list(indices)]
    step = default_step(float(lam.max()))

    def prod(t):
        return np.prod(np.cos(np.outer(t, lam) + beta), axis=1)

    return simpson_average(prod, t_min, t_max, step) * (t_max - t_min) / t_max


def time_average_distribution(
    seq: CoefficientSequence,
    T: float,
    t_min: float,
    t_max: float,
    n_points: int,
    scale: float = 2.0,
) -> DistributionEstimate:
    """Distribution of scale * F(t, T) over an equispaced grid of t.

    The default scale 2 matches the random model's 2 sum |r_n| cos(2 pi u_n).
    """
    if n_points < 2:
        raise DomainError("need at least two grid points")
    lam, mod, ph = _terms(seq, T)
    ts = np.linspace(t_min, t_max, n_points)
    vals = scale * cos_sum(lam, mod, ph, ts)
    return DistributionEstimate.from_samples(vals, "time_average")
