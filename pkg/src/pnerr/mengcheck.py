"""Direct checks of the min-kernel double sum and the unit-window mean square.

Both sums run over frequencies T < lambda <= X in row tiles, O(K^2) work.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._numeric import KahanSum, loglog_fit
from .coeffs import CoefficientSequence
from .errors import CoverageError, DomainError, FitError, ResourceError

PAIR_GUARD = 10**8
REPORT_EPS = 0.1
MIN_DECAY_POINTS = 4
_TILE = 512


def _window(seq: CoefficientSequence, T: float, X: float, guard: int):
    if T >= X:
        raise DomainError("need T < X")
    if len(seq) and X > seq.coverage:
        raise CoverageError(f"X={X} beyond coverage {seq.coverage}")
    lo = np.searchsorted(seq.lambdas, T, side="right")
    hi = np.searchsorted(seq.lambdas, X, side="right")
    k = int(hi - lo)
    if k * k > guard:
        raise ResourceError(f"{k * k} pairs exceed the guard {guard}")
    return seq.lambdas[lo:hi], seq.rs[lo:hi]


def double_sum(seq: CoefficientSequence, T: float, X: float, guard: int = PAIR_GUARD) -> float:
    """sum_{n,m} |r_n r_m| min(1, 1/|lambda_n - lambda_m|); coincident frequencies weigh 1."""
    lam, rs = _window(seq, T, X, guard)
    m = np.abs(rs)
    acc = KahanSum()
    for i in range(0, len(lam), _TILE):
        d = np.abs(lam[i : i + _TILE, None] - lam[None, :])
        with np.errstate(divide="ignore"):
            w = np.minimum(1.0, 1.0 / d)
        acc.add(float(m[i : i + _TILE] @ w @ m))
    return acc.value


def window_integral(seq: CoefficientSequence, T: float, X: float, V: float, guard: int = PAIR_GUARD) -> float:
    """int_V^{V+1} |sum r_n e^{i y lambda_n}|^2 dy, pair by pair in closed form.

    With a_n = r_n e^{i(V+1/2) lambda_n} each pair contributes
    a_n conj(a_m) * 2 sin(D/2)/D, D = lambda_n - lambda_m.
    """
    lam, rs = _window(seq, T, X, guard)
    a = rs * np.exp(1j * (V + 0.5) * lam)
    acc = KahanSum()
    for i in range(0, len(lam), _TILE):
        d = lam[i : i + _TILE, None] - lam[None, :]
        kern = np.sinc(d / (2 * math.pi))
        acc.add(float(np.real(a[i : i + _TILE] @ kern @ np.conj(a))))
    return acc.value


def window_integral_quadrature(seq: CoefficientSequence, T: float, X: float, V: float, n: int = 10_001) -> float:
    """Composite Simpson in y of the same mean square; a check on :func:`window_integral`."""
    lam, rs = _window(seq, T, X, PAIR_GUARD)
    y = np.linspace(V, V + 1.0, n)
    s = np.exp(1j * np.outer(y, lam)) @ rs
    w = np.ones(n)
    w[1:-1:2], w[2:-1:2] = 4.0, 2.0
    return float(np.dot(w, np.abs(s) ** 2) / (3.0 * (n - 1)))


@dataclass(frozen=True)
class TailSums:
    tail1: float
    tail2: float
    truncated_at: float
    admissible: bool


def tail_sums(seq: CoefficientSequence, T: float, a: float, b: float, theta: float | None = None) -> TailSums:
    """sum_{lambda > T} |r|/lambda^{a-1} and sum_{lambda > T} |r|^2/lambda^{b-2} over the data."""
    ok = True
    if theta is not None and not (a > (theta + 1) / 2 and b > theta):
        ok = False
        warnings.warn(f"a={a}, b={b} outside the convergent range for theta={theta}", RuntimeWarning, stacklevel=2)
    i = int(np.searchsorted(seq.lambdas, T, side="right"))
    lam = seq.lambdas[i:]
    m = seq.moduli[i:]
    t1, t2 = KahanSum(), KahanSum()
    t1.add(m / lam ** (a - 1))
    t2.add(m * m / lam ** (b - 2))
    return TailSums(t1.value, t2.value, seq.coverage, ok)


@dataclass(frozen=True)
class DoubleSumReport:
    T_grid: tuple[float, ...]
    X: float
    V: float
    double_sums: tuple[float, ...]
    window_integrals: tuple[float, ...]
    pair_counts: tuple[int, ...]
    theta_used: float | None
    eps: float = REPORT_EPS
    notes: tuple[str, ...] = field(default=())

    @property
    def predicted_exponent(self) -> float | None:
        if self.theta_used is None:
            return None
        return -(2 - self.theta_used - self.eps)

    @property
    def majorized(self) -> bool:
        """window <= 4 * double_sum at every grid point."""
        return all(w <= 4 * d for w, d in zip(self.window_integrals, self.double_sums))


def double_sum_report(
    seq: CoefficientSequence,
    T_grid: Sequence[float],
    X: float,
    V: float = 0.0,
    theta: float | None = None,
    guard: int = PAIR_GUARD,
) -> DoubleSumReport:
    Ts = [float(t) for t in T_grid]
    if any(b <= a for a, b in zip(Ts, Ts[1:])):
        raise DomainError("T grid must be increasing")
    ds, wi, pc = [], [], []
    for T in Ts:
        ds.append(double_sum(seq, T, X, guard))
        wi.append(window_integral(seq, T, X, V, guard))
        lam = seq.lambdas
        pc.append(int(np.searchsorted(lam, X, side="right") - np.searchsorted(lam, T, side="right")) ** 2)
    return DoubleSumReport(tuple(Ts), X, V, tuple(ds), tuple(wi), tuple(pc), theta)


@dataclass(frozen=True)
class DecayFit:
    slope: float
    rms: float
    predicted_exponent: float | None
    flagged: bool  # no decay seen


def decay_fit(report: DoubleSumReport) -> DecayFit:
    """Least-squares slope of log double_sum against log T."""
    if len(report.T_grid) < MIN_DECAY_POINTS:
        raise FitError(f"decay fit needs at least {MIN_DECAY_POINTS} grid points")
    vals = np.array(report.double_sums)
    if np.any(vals <= 0):
        raise FitError("double sum vanished on the grid")
    slope, _, rms = loglog_fit(np.array(report.T_grid), vals)
    if abs(slope) < 1e-12:
        slope = 0.0
    return DecayFit(slope, rms, report.predicted_exponent, slope >= 0)
