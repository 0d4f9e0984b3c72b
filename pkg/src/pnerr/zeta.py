"""Zeta zeros and companion values.

Ordinates come from sign changes of the Riemann-Siegel function Z(t),
isolated Gram block by Gram block and refined by vectorised bisection.
Z(t) uses the Riemann-Siegel expansion with the C0..C4 corrections above
``EM_CUTOFF`` and Euler-Maclaurin evaluation of zeta(1/2+it) below it.
zeta'(rho) and zeta(1+2i*gamma) are evaluated by Euler-Maclaurin.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import bernoulli, lambertw, loggamma

from .errors import CoverageError, DomainError, FormatError, PrecisionError

TWO_PI = 2.0 * math.pi

# Below this height the Riemann-Siegel remainder with C0..C4 exceeds ~1e-10.
EM_CUTOFF = 1000.0
SIMPLICITY_FLOOR = 1e-6
_EM_TERMS = 16


# --------------------------------------------------------------------------
# Euler-Maclaurin zeta and zeta'
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _em_coeffs() -> np.ndarray:
    b = bernoulli(2 * _EM_TERMS)
    return np.array([b[2 * k] / math.factorial(2 * k) for k in range(1, _EM_TERMS + 1)])


def _em_chunk(s: np.ndarray, derivative: bool) -> np.ndarray:
    N = int(0.4 * float(np.max(np.abs(s)))) + 20
    n = np.arange(1, N, dtype=float)
    logn = np.log(n)
    powers = np.exp(-np.outer(s, logn))
    if derivative:
        head = -(powers * logn).sum(axis=1)
    else:
        head = powers.sum(axis=1)

    logN = math.log(N)
    NmS = np.exp(-s * logN)  # N^{-s}
    sm1 = s - 1.0
    if derivative:
        tail = -logN * N * NmS / sm1 - N * NmS / sm1**2 - 0.5 * logN * NmS
    else:
        tail = N * NmS / sm1 + 0.5 * NmS

    # B_{2k}/(2k)! * (s)_{2k-1} * N^{-s-2k+1}
    P = s.copy()
    dP = np.ones_like(s)
    coeffs = _em_coeffs()
    for k in range(1, _EM_TERMS + 1):
        if k > 1:
            for j in (2 * k - 3, 2 * k - 2):
                dP = dP * (s + j) + P
                P = P * (s + j)
        term = coeffs[k - 1] * (NmS * float(N) ** (1 - 2 * k))
        if derivative:
            tail = tail + term * (dP - logN * P)
        else:
            tail = tail + term * P
    return head + tail


def zeta_em(s, derivative: bool = False, chunk: int = 128):
    """zeta(s) (or zeta'(s) with ``derivative``) by Euler-Maclaurin summation.

    Accepts scalars or arrays of complex s; s = 1 is a domain error.
    Absolute error is near 1e-13 for |Im s| <= 2e4 on Re s >= 0.
    """
    arr = np.atleast_1d(np.asarray(s, dtype=complex))
    if np.any(arr == 1.0):
        raise DomainError("zeta has a pole at s = 1")
    flat = arr.ravel()
    order = np.argsort(np.abs(flat))
    out = np.empty_like(flat)
    for i in range(0, len(flat), chunk):
        idx = order[i : i + chunk]
        out[idx] = _em_chunk(flat[idx], derivative)
    out = out.reshape(arr.shape)
    return out[0] if np.ndim(s) == 0 else out


# --------------------------------------------------------------------------
# Riemann-Siegel theta and Z
# --------------------------------------------------------------------------

def rs_theta(t):
    """Riemann-Siegel theta: exact log-gamma form below t=20, asymptotic above."""
    t = np.asarray(t, dtype=float)
    big = np.abs(t) >= 20.0
    out = np.empty_like(t)
    tb = t[big]
    out[big] = (
        tb / 2 * np.log(tb / TWO_PI) - tb / 2 - math.pi / 8
        + 1 / (48 * tb) + 7 / (5760 * tb**3) + 31 / (80640 * tb**5)
        + 127 / (430080 * tb**7)
    )
    ts = t[~big]
    out[~big] = np.imag(loggamma(0.25 + 0.5j * ts)) - ts / 2 * math.log(math.pi)
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def _rs_correction_polys() -> tuple[np.ndarray, ...]:
    """Polynomials in z = p - 1/2 for the Riemann-Siegel C0..C4 corrections.

    Psi(p) = cos(2pi(p^2-p-1/16))/cos(2pi p) = -cos(2pi z^2 - 5pi/8)/cos(2pi z)
    is expanded as a power series by exact-ish series division in mpmath.
    """
    import mpmath as mp

    deg = 80
    with mp.workdps(80):
        pi = mp.pi
        num = [mp.mpf(0)] * (deg + 1)
        c5, s5 = mp.cos(5 * pi / 8), mp.sin(5 * pi / 8)
        for k in range(deg // 2 + 1):
            a = (2 * pi) ** k / mp.factorial(k)
            if k % 2 == 0:
                num[2 * k] = c5 * a * (-1) ** (k // 2)
            else:
                num[2 * k] = s5 * a * (-1) ** ((k - 1) // 2)
        den = [mp.mpf(0)] * (deg + 1)
        for k in range(0, deg + 1, 2):
            den[k] = (-1) ** (k // 2) * (2 * pi) ** k / mp.factorial(k)
        q = [mp.mpf(0)] * (deg + 1)
        for n in range(deg + 1):
            q[n] = (num[n] - mp.fsum(q[j] * den[n - j] for j in range(n))) / den[0]
        psi = np.array([-float(x) for x in q])

    def d(c: np.ndarray, k: int) -> np.ndarray:
        i = np.arange(k, len(c))
        fac = np.ones(len(i))
        for j in range(k):
            fac *= i - j
        return c[k:] * fac

    def pad(*parts):
        m = max(len(p) for p in parts)
        return sum(np.pad(p, (0, m - len(p))) for p in parts)

    p2 = math.pi**2
    C0 = psi
    C1 = -d(psi, 3) / (96 * p2)
    C2 = pad(d(psi, 2) / (64 * p2), d(psi, 6) / (18432 * p2**2))
    C3 = pad(-d(psi, 1) / (64 * p2), -d(psi, 5) / (3840 * p2**2), -d(psi, 9) / (5308416 * p2**3))
    C4 = pad(
        psi / (128 * p2),
        19 * d(psi, 4) / (24576 * p2**2),
        11 * d(psi, 8) / (5898240 * p2**3),
        d(psi, 12) / (2038431744 * p2**4),
    )
    # highest degree first for np.polyval
    return tuple(c[::-1].copy() for c in (C0, C1, C2, C3, C4))


def z_riemann_siegel(t) -> np.ndarray:
    """Z(t) by the Riemann-Siegel formula with four correction terms (t >= 2pi)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < TWO_PI):
        raise DomainError("Riemann-Siegel formula needs t >= 2*pi")
    tau = np.sqrt(t / TWO_PI)
    N = np.floor(tau).astype(np.int64)
    z = tau - N - 0.5
    th = rs_theta(t)
    out = np.empty_like(t)
    # group by N to keep the main sum rectangular
    for Nv in np.unique(N):
        m = N == Nv
        n = np.arange(1, Nv + 1, dtype=float)
        ph = th[m][:, None] - np.outer(t[m], np.log(n))
        out[m] = 2.0 * (np.cos(ph) / np.sqrt(n)).sum(axis=1)
    polys = _rs_correction_polys()
    w = 1.0 / tau
    corr = np.zeros_like(t)
    wk = np.ones_like(t)
    for P in polys:
        corr += np.polyval(P, z) * wk
        wk = wk * w
    sign = np.where(N % 2 == 1, 1.0, -1.0)
    return out + sign * corr / np.sqrt(tau)


def z_euler_maclaurin(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    zeta = zeta_em(0.5 + 1j * t)
    return np.real(np.exp(1j * rs_theta(t)) * zeta)


def z_function(t, em_cutoff: float = EM_CUTOFF) -> np.ndarray:
    """Hardy's Z(t): Euler-Maclaurin below ``em_cutoff``, Riemann-Siegel above."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty_like(t)
    low = np.abs(t) < em_cutoff
    if np.any(low):
        out[low] = z_euler_maclaurin(t[low])
    if np.any(~low):
        out[~low] = z_riemann_siegel(t[~low])
    return out


# --------------------------------------------------------------------------
# Counting
# --------------------------------------------------------------------------

def riemann_von_mangoldt(T):
    """Smooth main term (T/2pi) log(T/2pi e) + 7/8 of N(T)."""
    T = np.asarray(T, dtype=float)
    return T / TWO_PI * np.log(T / (TWO_PI * math.e)) + 7.0 / 8.0


def gram_points(j_from: int, j_to: int) -> np.ndarray:
    """Gram points g_j (theta(g_j) = j*pi) for j_from <= j <= j_to; j_from >= -1."""
    j = np.arange(j_from, j_to + 1, dtype=float)
    x = (j + 0.125) / math.e
    g = TWO_PI * (j + 0.125) / np.real(lambertw(x))
    for _ in range(6):
        g = g - (rs_theta(g) - j * math.pi) / (0.5 * np.log(g / TWO_PI))
    return g


# --------------------------------------------------------------------------
# Tables
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroEntry:
    n: int
    gamma: float
    zeta_prime: complex | None
    zeta_at_2rho: complex | None
    source: str


@dataclass(frozen=True, eq=False)
class ZeroTable:
    """Sorted ordinates with optional companion values (NaN when absent)."""

    kind: str
    gammas: np.ndarray
    zeta_prime: np.ndarray
    zeta_2rho: np.ndarray
    precision: float
    source: str = "computed"
    flagged: tuple[int, ...] = ()
    notes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        g = np.asarray(self.gammas, dtype=float)
        zp = np.asarray(self.zeta_prime, dtype=complex)
        z2 = np.asarray(self.zeta_2rho, dtype=complex)
        if not (len(g) == len(zp) == len(z2)):
            raise ValueError("column length mismatch")
        if len(g) > 1 and np.any(np.diff(g) < 0):
            raise FormatError("ordinates must be non-decreasing")
        for name, arr in (("gammas", g), ("zeta_prime", zp), ("zeta_2rho", z2)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.gammas)

    @property
    def coverage(self) -> float:
        return float(self.gammas[-1]) if len(self.gammas) else 0.0

    @property
    def has_zeta_prime(self) -> bool:
        return bool(len(self)) and not np.any(np.isnan(self.zeta_prime))

    @property
    def has_zeta_2rho(self) -> bool:
        return bool(len(self)) and not np.any(np.isnan(self.zeta_2rho))

    @property
    def entries(self) -> list[ZeroEntry]:
        def opt(v):
            return None if np.isnan(v) else complex(v)

        return [
            ZeroEntry(i + 1, float(g), opt(zp), opt(z2), self.source)
            for i, (g, zp, z2) in enumerate(zip(self.gammas, self.zeta_prime, self.zeta_2rho))
        ]

    def head(self, count: int) -> "ZeroTable":
        return ZeroTable(
            self.kind, self.gammas[:count], self.zeta_prime[:count], self.zeta_2rho[:count],
            self.precision, self.source, tuple(i for i in self.flagged if i < count), self.notes,
        )

    def with_companions(self) -> "ZeroTable":
        """Fill missing companion values (zeta tables only)."""
        if self.kind != "zeta":
            raise DomainError("companion values are only computed for zeta tables")
        zp = np.array(self.zeta_prime)
        z2 = np.array(self.zeta_2rho)
        miss = np.isnan(zp)
        if np.any(miss):
            zp[miss] = compute_zeta_prime(self.gammas[miss])
        miss = np.isnan(z2)
        if np.any(miss):
            z2[miss] = compute_zeta_at_one_plus(self.gammas[miss])
        flagged = tuple(int(i) for i in np.nonzero(np.abs(zp) < SIMPLICITY_FLOOR)[0])
        return ZeroTable(self.kind, self.gammas, zp, z2, self.precision, self.source, flagged, self.notes)


def counting_function(table: ZeroTable, T: float) -> int:
    """N(T) = #{n : gamma_n <= T}."""
    if T < 0:
        raise DomainError("T must be non-negative")
    if T > table.coverage:
        raise CoverageError(f"T={T} beyond table coverage {table.coverage}")
    return int(np.searchsorted(table.gammas, T, side="right"))


def short_interval_count(table: ZeroTable, T: float) -> int:
    """#{n : T < gamma_n <= T+1}."""
    if T < 0:
        raise DomainError("T must be non-negative")
    if T + 1 > table.coverage:
        raise CoverageError(f"T+1={T + 1} beyond table coverage {table.coverage}")
    g = table.gammas
    return int(np.searchsorted(g, T + 1, side="right") - np.searchsorted(g, T, side="right"))


# --------------------------------------------------------------------------
# Companion values
# --------------------------------------------------------------------------

def compute_zeta_prime(gamma, floor: float = SIMPLICITY_FLOOR, strict: bool = False):
    """zeta'(1/2 + i*gamma) by Euler-Maclaurin.

    With ``strict`` a value below ``floor`` in modulus raises PrecisionError
    (suspected multiple zero); otherwise callers read ``ZeroTable.flagged``.
    """
    g = np.asarray(gamma, dtype=float)
    val = zeta_em(0.5 + 1j * g, derivative=True)
    if strict and np.any(np.abs(val) < floor):
        bad = np.atleast_1d(g)[np.abs(np.atleast_1d(val)) < floor]
        raise PrecisionError(f"|zeta'(rho)| below {floor} at gamma={bad.tolist()}")
    return val


def compute_zeta_at_one_plus(gamma):
    """zeta(1 + 2i*gamma) by Euler-Maclaurin."""
    g = np.asarray(gamma, dtype=float)
    return zeta_em(1.0 + 2j * g)


# --------------------------------------------------------------------------
# Zero isolation
# --------------------------------------------------------------------------

def _bisect(lo: np.ndarray, hi: np.ndarray, flo: np.ndarray, tol: float) -> np.ndarray:
    lo, hi, flo = lo.copy(), hi.copy(), flo.copy()
    width = float(np.max(hi - lo)) if len(lo) else 0.0
    iters = max(1, int(math.ceil(math.log2(max(width, tol) / tol))) + 1)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = z_function(mid)
        same = np.sign(fm) == np.sign(flo)
        lo = np.where(same, mid, lo)
        flo = np.where(same, fm, flo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


def _sign(v: np.ndarray) -> np.ndarray:
    return np.where(v >= 0, 1, -1)


def _block_brackets(a: float, b: float, expected: int, start_sub: int, max_sub: int):
    """Sign-change brackets in (a, b); refine until ``expected`` are found."""
    sub = start_sub
    while sub <= max_sub:
        u = np.linspace(a, b, expected * sub + 1)
        f = z_function(u)
        s = _sign(f)
        ch = np.nonzero(s[:-1] != s[1:])[0]
        if len(ch) == expected:
            return u[ch], u[ch + 1], f[ch]
        if len(ch) > expected:
            raise PrecisionError(
                f"found {len(ch)} sign changes but expected {expected} in [{a}, {b}]"
            )
        sub *= 4
    raise PrecisionError(
        f"could not separate {expected} zeros in [{a:.9f}, {b:.9f}] at working precision"
    )


def compute_zeros(count: int, tolerance: float = 1e-10, companions: bool = True) -> ZeroTable:
    """The first ``count`` ordinates of nontrivial zeta zeros.

    Zeros are isolated inside Gram blocks (Rosser's rule); every block must
    yield exactly as many sign changes as Gram intervals, so no zero is
    skipped. The result is also checked against the Riemann-von Mangoldt
    main term and the build fails if that check does not hold.
    """
    if count < 1:
        raise DomainError("count must be >= 1")
    if not (1e-12 <= tolerance <= 1e-2):
        raise DomainError("tolerance must lie in [1e-12, 1e-2]")

    # Gram points up to a little beyond the count-th zero; extend until good.
    j_hi = count + 10
    while True:
        g = gram_points(-1, j_hi)
        zg = z_function(g)
        parity = np.where((np.arange(-1, j_hi + 1) % 2) == 0, 1.0, -1.0)
        good = np.nonzero(parity * zg > 0)[0]
        if len(good) >= 2 and good[-1] - 1 >= count:
            break
        j_hi += 50
    if good[0] != 0:
        raise PrecisionError("g_{-1} is not a good Gram point")
    last = good[np.searchsorted(good, count + 1)] if np.any(good >= count + 1) else good[-1]
    good = good[good <= last]

    los, his, flos = [], [], []
    for a_idx, b_idx in zip(good[:-1], good[1:]):
        expected = int(b_idx - a_idx)
        lo, hi, flo = _block_brackets(g[a_idx], g[b_idx], expected, 4, 4**6)
        los.append(lo)
        his.append(hi)
        flos.append(flo)
    lo = np.concatenate(los)
    hi = np.concatenate(his)
    flo = np.concatenate(flos)
    # g index k corresponds to j = k-1 and N(g_j) = j + 1 = k at a good Gram point
    if len(lo) != last:
        raise PrecisionError(f"Gram accounting mismatch: {len(lo)} zeros vs {last} expected")
    gam = _bisect(lo, hi, flo, tolerance)[:count]

    _check_rvm(gam)
    nanc = np.full(count, np.nan + 0j)
    table = ZeroTable("zeta", gam, nanc, nanc.copy(), float(tolerance), "computed")
    return table.with_companions() if companions else table


def rvm_deviation(gammas: np.ndarray) -> np.ndarray:
    """max(|N(g-) - main(g)|, |N(g) - main(g)|) at each ordinate."""
    n = np.arange(1, len(gammas) + 1)
    main = riemann_von_mangoldt(gammas)
    return np.maximum(np.abs(n - main), np.abs(n - 1 - main))


def _check_rvm(gammas: np.ndarray) -> None:
    dev = rvm_deviation(gammas)
    bound = 1.0 + 0.14 * np.log(gammas)
    bad = np.nonzero(dev > bound)[0]
    if len(bad):
        i = int(bad[0])
        raise PrecisionError(
            f"Riemann-von Mangoldt check failed near gamma_{i + 1}={gammas[i]:.9f} "
            f"(deviation {dev[i]:.3f})"
        )


# --------------------------------------------------------------------------
# File format
# --------------------------------------------------------------------------

_COLUMNS = "n,gamma,re_zeta_prime,im_zeta_prime,re_zeta_2rho,im_zeta_2rho"


def _fmt(v: float) -> str:
    return "" if math.isnan(v) else repr(float(v))


def zeros_text(table: ZeroTable) -> str:
    """The export file format as a string."""
    lines = [f"# kind={table.kind}", f"# count={len(table)}", f"# precision={table.precision!r}", _COLUMNS]
    for i in range(len(table)):
        zp, z2 = table.zeta_prime[i], table.zeta_2rho[i]
        lines.append(
            ",".join(
                [str(i + 1), repr(float(table.gammas[i])), _fmt(zp.real), _fmt(zp.imag), _fmt(z2.real), _fmt(z2.imag)]
            )
        )
    return "\n".join(lines) + "\n"


def export_zeros(table: ZeroTable, path) -> None:
    Path(path).write_text(zeros_text(table), encoding="utf-8")


def _kind_family(kind: str) -> str:
    return kind.split(":", 1)[0]


def import_zeros(path, kind: str | None = None) -> ZeroTable:
    """Parse a zero-table file; ``kind`` (if given) must match the header."""
    header: dict[str, str] = {}
    ns: list[int] = []
    gs: list[float] = []
    zp: list[complex] = []
    z2: list[complex] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    raise FormatError(f"malformed header {line!r}", lineno)
                key, val = body.split("=", 1)
                header[key.strip()] = val.strip()
                continue
            if line.replace(" ", "") == _COLUMNS:
                continue
            parts = line.split(",")
            if len(parts) != 6:
                raise FormatError(f"expected 6 fields, got {len(parts)}", lineno)
            try:
                n = int(parts[0])
                gamma = float(parts[1])
                vals = [float(p) if p.strip() else math.nan for p in parts[2:]]
            except ValueError as exc:
                raise FormatError(str(exc), lineno) from None
            if gs and gamma < gs[-1]:
                raise FormatError("ordinates are not non-decreasing", lineno)
            if gamma <= 0:
                raise FormatError("ordinates must be positive", lineno)
            ns.append(n)
            gs.append(gamma)
            zp.append(complex(vals[0], vals[1]))
            z2.append(complex(vals[2], vals[3]))
    if "kind" not in header:
        raise FormatError("missing '# kind=' header", 1)
    file_kind = header["kind"]
    if _kind_family(file_kind) not in ("zeta", "dirichlet", "external"):
        raise FormatError(f"unknown kind {file_kind!r}", 1)
    if kind is not None and _kind_family(kind) != _kind_family(file_kind):
        raise FormatError(f"header kind {file_kind!r} does not match requested {kind!r}", 1)
    if "count" in header and int(header["count"]) != len(gs):
        raise FormatError(f"header count {header['count']} but {len(gs)} rows", 1)
    precision = float(header.get("precision", "nan"))
    table = ZeroTable(
        file_kind,
        np.array(gs, dtype=float),
        np.array(zp, dtype=complex),
        np.array(z2, dtype=complex),
        precision,
        "imported",
    )
    if table.has_zeta_prime:
        flagged = tuple(int(i) for i in np.nonzero(np.abs(table.zeta_prime) < SIMPLICITY_FLOOR)[0])
        object.__setattr__(table, "flagged", flagged)
    return table


def data_dir() -> Path:
    return Path(os.environ.get("PNERR_DATA_DIR", Path.home() / ".cache" / "pnerr"))


def cached_zeros(count: int, tolerance: float = 1e-10) -> ZeroTable:
    """Zeta zeros with companions, cached under ``$PNERR_DATA_DIR``.

    A cached file with at least ``count`` rows and precision at least as
    fine as ``tolerance`` is reused.
    """
    d = data_dir()
    for f in sorted(d.glob("zeta_zeros_*.csv")) if d.is_dir() else []:
        try:
            n = int(f.stem.rsplit("_", 1)[1])
        except ValueError:
            continue
        if n >= count:
            t = import_zeros(f, "zeta")
            if t.precision <= tolerance and t.has_zeta_prime and t.has_zeta_2rho:
                return t.head(count)
    table = compute_zeros(count, tolerance)
    d.mkdir(parents=True, exist_ok=True)
    export_zeros(table, d / f"zeta_zeros_{count}.csv")
    return table
