"""Segmented sieves and exact summatory tables.

The Mobius and Liouville functions come from one segmented pass that
divides out every prime up to sqrt(limit). Prime sums (theta, psi, pi,
sum of 1/p, primes in a residue class) use a segmented Eratosthenes
sieve with correctly rounded running sums.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._numeric import format_number, pmap
from .errors import DomainError, ResourceError

MEMORY_GUARD = 10**9
SEGMENT_SIZE = 1 << 20
# Meissel-Mertens constant, kept at the printed 14 decimals.
MEISSEL_MERTENS = 0.26149721284764

KINDS = ("psi", "theta", "mertens_M", "liouville_L", "prime_reciprocal", "pi_qa")


def _check_limit(limit: int) -> int:
    limit = int(limit)
    if limit < 1:
        raise DomainError("limit must be >= 1")
    if limit > MEMORY_GUARD:
        raise ResourceError(f"limit {limit} exceeds the memory guard {MEMORY_GUARD}")
    return limit


def small_primes(n: int) -> np.ndarray:
    """Primes <= n by a plain (unsegmented) sieve."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.nonzero(is_p)[0].astype(np.int64)


def _segments(lo: int, hi: int, size: int) -> list[tuple[int, int]]:
    return [(s, min(s + size, hi)) for s in range(lo, hi, size)]


def _mu_lambda_block(lo: int, hi: int, primes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """mu(n) and lambda(n) for lo <= n < hi (lo >= 1)."""
    n = np.arange(lo, hi, dtype=np.int64)
    rem = n.copy()
    mu = np.ones(hi - lo, dtype=np.int8)
    odd = np.zeros(hi - lo, dtype=np.int8)  # parity of Omega(n)
    for p in primes:
        p = int(p)
        if p * p >= hi:
            break
        first = (-lo) % p
        sl = slice(first, None, p)
        rem[sl] //= p
        mu[sl] = -mu[sl]
        odd[sl] ^= 1
        pk = p * p
        first = (-lo) % pk
        mu[first::pk] = 0
        while pk < hi:
            first = (-lo) % pk
            sl = slice(first, None, pk)
            rem[sl] //= p
            odd[sl] ^= 1
            pk *= p
    big = rem > 1
    mu[big] = -mu[big]
    odd[big] ^= 1
    lam = (1 - 2 * odd).astype(np.int8)
    return mu, lam


def _arith_table(limit: int, which: int, segment: int) -> np.ndarray:
    limit = _check_limit(limit)
    primes = small_primes(math.isqrt(limit) + 1)
    blocks = pmap(lambda seg: _mu_lambda_block(seg[0], seg[1], primes)[which],
                  _segments(1, limit + 1, segment))
    return np.concatenate(blocks)


def sieve_mobius(limit: int, segment: int = SEGMENT_SIZE) -> np.ndarray:
    """mu(1), ..., mu(limit) as an int8 array."""
    return _arith_table(limit, 0, segment)


def sieve_liouville(limit: int, segment: int = SEGMENT_SIZE) -> np.ndarray:
    """lambda(1), ..., lambda(limit) as an int8 array."""
    return _arith_table(limit, 1, segment)


def _prime_block(lo: int, hi: int, primes: np.ndarray) -> np.ndarray:
    """Primes in [lo, hi)."""
    flags = np.ones(hi - lo, dtype=bool)
    for p in primes:
        p = int(p)
        if p * p >= hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        flags[start - lo :: p] = False
    if lo <= 1:
        flags[: 2 - lo] = False
    return np.nonzero(flags)[0].astype(np.int64) + lo


def totient(q: int) -> int:
    result, m, p = q, q, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


@dataclass(frozen=True, eq=False)
class SummatoryTable:
    kind: str
    xs: np.ndarray
    raw: np.ndarray
    normalized: np.ndarray | None = None
    q: int | None = None
    a: int | None = None
    aux: np.ndarray | None = field(default=None, repr=False)  # pi(x) for pi_qa

    def __post_init__(self):
        for name in ("xs", "raw", "normalized", "aux"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v)
                v.setflags(write=False)
                object.__setattr__(self, name, v)
        if len(self.xs) > 1 and np.any(np.diff(self.xs) <= 0):
            raise DomainError("xs must be strictly increasing")

    def value_at(self, x: float) -> float:
        i = int(np.searchsorted(self.xs, x))
        if i == len(self.xs) or self.xs[i] != x:
            raise KeyError(x)
        return float(self.normalized[i])

    def to_csv(self, fh=None) -> str | None:
        out = fh or io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["x", "raw", "normalized"])
        norm = self.normalized if self.normalized is not None else [math.nan] * len(self.xs)
        for x, r, e in zip(self.xs, self.raw, norm):
            w.writerow([format_number(x), format_number(r), repr(float(e))])
        return out.getvalue() if fh is None else None


def geometric_grid(lo: float, hi: float, ratio: float = 1.01, extra: Sequence[float] = ()) -> np.ndarray:
    """Geometric grid lo, lo*ratio, ... <= hi merged with user points."""
    if ratio <= 1.0:
        raise DomainError("grid ratio must exceed 1")
    n = int(math.floor(math.log(hi / lo) / math.log(ratio))) + 1
    g = lo * ratio ** np.arange(n)
    return np.unique(np.concatenate([g, np.asarray(extra, dtype=float)]))


def _prime_sums_at(
    limit: int,
    ns: np.ndarray,
    weight: Callable[[np.ndarray], np.ndarray],
    integer: bool,
    segment: int,
) -> np.ndarray:
    """sum_{p <= n} weight(p) for every integer n in sorted ``ns``."""
    primes = small_primes(math.isqrt(limit) + 1)
    segs = _segments(0, limit + 1, segment)

    def work(seg):
        lo, hi = seg
        ps = _prime_block(lo, hi, primes)
        w = weight(ps)
        sel = ns[(ns >= lo) & (ns < hi)]
        pos = np.searchsorted(ps, sel, side="right")
        if integer:
            cs = np.concatenate([[0], np.cumsum(w, dtype=np.int64)])
            return [int(cs[k]) for k in pos], int(cs[-1])
        incs, prev = [], 0
        for k in pos:
            incs.append(math.fsum(w[prev:k].tolist()))
            prev = k
        incs.append(math.fsum(w[prev:].tolist()))
        return incs, None

    parts = pmap(work, segs)
    out: list = []
    if integer:
        carry = 0
        for vals, total in parts:
            out.extend(carry + v for v in vals)
            carry += total
        return np.array(out, dtype=np.int64)
    carry = 0.0
    for incs, _ in parts:
        for d in incs[:-1]:
            carry = math.fsum((carry, d))
            out.append(carry)
        carry = math.fsum((carry, incs[-1]))
    return np.array(out, dtype=float)


def _prime_power_extra(ns: np.ndarray) -> np.ndarray:
    """sum over p^k <= n with k >= 2 of log p, for each n."""
    ps = small_primes(math.isqrt(int(ns.max())) + 1) if len(ns) else np.zeros(0, np.int64)
    out = np.zeros(len(ns))
    for p in ps:
        p = int(p)
        lp = math.log(p)
        pk = p * p
        while pk <= ns[-1]:
            out[ns >= pk] += lp
            pk *= p
    return out


def summatory(
    kind: str,
    limit: int,
    xs: Sequence[float],
    q: int | None = None,
    a: int | None = None,
    segment: int = SEGMENT_SIZE,
) -> SummatoryTable:
    """Exact summatory values of ``kind`` at the points ``xs`` (normalized too).

    Values at a real x are taken at floor(x).
    """
    if kind not in KINDS:
        raise DomainError(f"unknown kind {kind!r}; expected one of {KINDS}")
    limit = _check_limit(limit)
    xs = np.asarray(xs, dtype=float)
    if len(xs) > 1 and np.any(np.diff(xs) <= 0):
        raise DomainError("xs must be strictly increasing")
    if len(xs) and (xs[0] < 1 or xs[-1] > limit):
        raise DomainError(f"evaluation points must lie in [1, {limit}]")
    ns = np.floor(xs).astype(np.int64)
    aux = None

    if kind in ("mertens_M", "liouville_L"):
        primes = small_primes(math.isqrt(limit) + 1)
        which = 0 if kind == "mertens_M" else 1
        top = int(ns[-1]) if len(ns) else 1

        def work(seg):
            vals = _mu_lambda_block(seg[0], seg[1], primes)[which]
            cs = np.concatenate([[0], np.cumsum(vals, dtype=np.int64)])
            sel = ns[(ns >= seg[0]) & (ns < seg[1])]
            return [int(cs[k - seg[0] + 1]) for k in sel], int(cs[-1])

        parts = pmap(work, _segments(1, top + 1, segment))
        out, carry = [], 0
        for vals, total in parts:
            out.extend(carry + v for v in vals)
            carry += total
        raw = np.array(out, dtype=np.int64)
    elif kind in ("psi", "theta"):
        raw = _prime_sums_at(limit, ns, lambda p: np.log(p.astype(float)), False, segment)
        if kind == "psi":
            raw = raw + _prime_power_extra(ns)
    elif kind == "prime_reciprocal":
        raw = _prime_sums_at(limit, ns, lambda p: 1.0 / p.astype(float), False, segment)
    else:
        if q is None or a is None:
            raise DomainError("pi_qa needs q and a")
        q, a = int(q), int(a)
        if q < 1 or math.gcd(a, q) != 1:
            raise DomainError(f"gcd(a={a}, q={q}) must be 1")
        raw = _prime_sums_at(limit, ns, lambda p: (p % q == a % q).astype(np.int64), True, segment)
        aux = _prime_sums_at(limit, ns, lambda p: np.ones(len(p), dtype=np.int64), True, segment)
    table = SummatoryTable(kind, xs, raw, None, q, a, aux)
    return normalize(table)


def normalize(table: SummatoryTable) -> SummatoryTable:
    """Attach the normalized error term E(x) for the table's kind."""
    x = table.xs.astype(float)
    raw = table.raw.astype(float)
    sq = np.sqrt(x)
    k = table.kind
    with np.errstate(divide="ignore", invalid="ignore"):
        if k in ("psi", "theta"):
            e = (raw - x) / sq
        elif k in ("mertens_M", "liouville_L"):
            e = raw / sq
        elif k == "prime_reciprocal":
            lx = np.log(x)
            e = sq * lx * (raw - np.log(lx) - MEISSEL_MERTENS)
        elif k == "pi_qa":
            if table.aux is None:
                raise DomainError("pi_qa table lacks pi(x) values")
            e = np.log(x) / sq * (raw - table.aux / totient(table.q))
        else:
            raise DomainError(f"unknown kind {k!r}")
    return SummatoryTable(k, table.xs, table.raw, e, table.q, table.a, table.aux)
