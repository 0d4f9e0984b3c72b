"""Coefficient sequences (lambda_n, r_n) and growth-assumption fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._numeric import fsum, loglog_fit
from .errors import CoverageError, DependencyError, DomainError, FitError
from .zeta import ZeroTable

SEQUENCE_KINDS = ("psi", "mertens", "liouville", "custom")

# Sign of the zero sum in each error term's explicit formula. The psi
# formula subtracts sum x^rho/rho while r_n = 1/rho_n is kept positive.
EXPLICIT_SIGN = {"psi": -1, "mertens": 1, "liouville": 1, "custom": 1}


@dataclass(frozen=True, eq=False)
class CoefficientSequence:
    kind: str
    lambdas: np.ndarray
    rs: np.ndarray
    sign: int = 1
    # height up to which every frequency is present; defaults to max lambda
    complete_to: float | None = None

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        rs = np.asarray(self.rs, dtype=complex)
        if lam.shape != rs.shape or lam.ndim != 1:
            raise DomainError("lambdas and rs must be 1-d arrays of equal length")
        if len(lam) and (lam[0] <= 0 or np.any(np.diff(lam) < 0)):
            raise DomainError("lambdas must be positive and non-decreasing")
        for name, arr in (("lambdas", lam), ("rs", rs)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.lambdas)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.rs)

    @property
    def phases(self) -> np.ndarray:
        """beta_n = arg r_n in (-pi, pi]."""
        return np.angle(self.rs)

    @property
    def coverage(self) -> float:
        if self.complete_to is not None:
            return float(self.complete_to)
        return float(self.lambdas[-1]) if len(self) else 0.0

    def head(self, count: int) -> "CoefficientSequence":
        # a strict prefix is only known to be complete up to its last frequency
        complete = self.complete_to if count >= len(self) else None
        return CoefficientSequence(self.kind, self.lambdas[:count], self.rs[:count], self.sign, complete)

    def upto(self, T: float) -> "CoefficientSequence":
        """Terms with lambda_n <= T."""
        return self.head(int(np.searchsorted(self.lambdas, T, side="right")))

    def negated(self) -> "CoefficientSequence":
        """Same moduli, every phase shifted by pi."""
        return CoefficientSequence(self.kind, self.lambdas, -self.rs, self.sign, self.complete_to)


def build_sequence(kind: str, zero_table: ZeroTable | None) -> CoefficientSequence:
    """Coefficients attached to the zeros of ``zero_table``.

    ``custom`` reads r_n from the table's derivative column, which is how
    external files carry arbitrary coefficient data.
    """
    if kind not in SEQUENCE_KINDS:
        raise DomainError(f"unknown sequence kind {kind!r}")
    if zero_table is None or len(zero_table) == 0:
        return CoefficientSequence(kind, np.zeros(0), np.zeros(0, complex), EXPLICIT_SIGN[kind])
    g = zero_table.gammas
    rho = 0.5 + 1j * g
    if kind == "psi":
        rs = 1.0 / rho
    elif kind == "custom":
        if not zero_table.has_zeta_prime:
            raise DependencyError("custom sequence needs an r_n column")
        rs = np.array(zero_table.zeta_prime)
    else:
        if not zero_table.has_zeta_prime:
            raise DependencyError(f"{kind} sequence needs zeta'(rho) companion values")
        rs = 1.0 / (rho * zero_table.zeta_prime)
        if kind == "liouville":
            if not zero_table.has_zeta_2rho:
                raise DependencyError("liouville sequence needs zeta(2 rho) companion values")
            rs = rs * zero_table.zeta_2rho
    return CoefficientSequence(kind, g, rs, EXPLICIT_SIGN[kind])


@dataclass(frozen=True)
class PartialSums:
    S0: float
    S1: float
    S2: float
    N: int


def partial_sums(seq: CoefficientSequence, T: float) -> PartialSums:
    """Sums of |r|, lambda|r| and lambda^2|r|^2 over lambda_n <= T."""
    if T > seq.coverage:
        raise CoverageError(f"T={T} beyond sequence coverage {seq.coverage}")
    n = int(np.searchsorted(seq.lambdas, T, side="right"))
    lam = seq.lambdas[:n]
    m = seq.moduli[:n]
    return PartialSums(fsum(m), fsum(lam * m), fsum((lam * m) ** 2), n)


@dataclass(frozen=True)
class AssumptionReport:
    kind: str
    T_grid: tuple[float, ...]
    alpha_minus: float
    alpha_plus: float
    alpha: float
    A: float
    a2_ratio: float
    a2_ratios: tuple[float, ...]
    a2_decreasing: bool
    theta: float
    theta_flagged: bool
    kappa_minus: float
    kappa_plus: float
    max_short_count_ratio: float
    fit_residuals: dict = field(default_factory=dict)
    # same regression against log log(T/2 pi); diagnostic only
    A_shifted: float = math.nan
    alpha_shifted: float = math.nan

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["T_grid"] = list(self.T_grid)
        d["a2_ratios"] = list(self.a2_ratios)
        return d


def fit_assumptions(seq: CoefficientSequence, T_grid: Sequence[float]) -> AssumptionReport:
    """Least-squares growth fits of the partial sums over ``T_grid``."""
    Ts = np.unique(np.asarray(T_grid, dtype=float))
    if len(Ts) < 8 or Ts[-1] < 10 * Ts[0] or Ts[0] <= math.e:
        raise FitError("T grid needs >= 8 distinct points above e spanning a decade")
    if Ts[-1] > seq.coverage:
        raise CoverageError(f"grid reaches {Ts[-1]} beyond coverage {seq.coverage}")
    sums = [partial_sums(seq, T) for T in Ts]
    S0 = np.array([s.S0 for s in sums])
    S1 = np.array([s.S1 for s in sums])
    S2 = np.array([s.S2 for s in sums])
    N = np.array([s.N for s in sums], dtype=float)
    if np.any(S0 <= 0) or np.any(S2 <= 0):
        raise FitError("grid starts below the first frequency; sums vanish")
    logT = np.log(Ts)

    A, log_alpha, rms0 = loglog_fit(logT, S0)
    ratios = S0 / logT**A
    if Ts[0] > 2 * math.pi * math.e:
        A_sh, log_alpha_sh, _ = loglog_fit(np.log(Ts / (2 * math.pi)), S0)
    else:
        A_sh, log_alpha_sh = math.nan, math.nan

    a2 = S1 / (Ts * logT**A)
    theta, _, rms2 = loglog_fit(Ts, S2)

    kappa = N / (Ts * logT)
    lam = seq.lambdas
    short = (np.searchsorted(lam, Ts + 1, side="right") - np.searchsorted(lam, Ts, side="right"))
    short_ratio = short / np.log(Ts + 2)

    return AssumptionReport(
        kind=seq.kind,
        T_grid=tuple(float(t) for t in Ts),
        alpha_minus=float(ratios.min()),
        alpha_plus=float(ratios.max()),
        alpha=math.exp(log_alpha),
        A=A,
        a2_ratio=float(a2.max()),
        a2_ratios=tuple(float(v) for v in a2),
        a2_decreasing=bool(np.all(np.diff(a2) <= 0)),
        theta=theta,
        theta_flagged=bool(theta >= 2.0),
        kappa_minus=float(kappa.min()),
        kappa_plus=float(kappa.max()),
        max_short_count_ratio=float(short_ratio.max()),
        fit_residuals={"magnitude_sum": rms0, "second_moment": rms2},
        A_shifted=A_sh,
        alpha_shifted=math.exp(log_alpha_sh) if not math.isnan(log_alpha_sh) else math.nan,
    )
