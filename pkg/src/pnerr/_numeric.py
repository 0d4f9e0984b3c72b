"""Small numerical helpers: compensated sums, Simpson rule, thread fan-out."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

_THREADS = max(1, int(os.environ.get("PNERR_THREADS", "1")))


def set_threads(n: int) -> None:
    """Cap the worker count used by :func:`pmap` (the CLI ``--threads`` flag)."""
    global _THREADS
    _THREADS = max(1, int(n))


def get_threads() -> int:
    return _THREADS


def pmap(fn: Callable[[T], R], items: Sequence[T]) -> list[R]:
    # results come back in input order, so reductions stay deterministic
    if _THREADS <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=_THREADS) as ex:
        return list(ex.map(fn, items))


def fsum(values: Iterable[float] | np.ndarray) -> float:
    if isinstance(values, np.ndarray):
        return math.fsum(values.ravel().tolist())
    return math.fsum(values)


def csum_complex(values: np.ndarray) -> complex:
    """Correctly rounded sum of a complex array (real and imaginary parts separately)."""
    v = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(v.real.tolist()), math.fsum(v.imag.tolist()))


class KahanSum:
    """Neumaier running sum; ``add`` accepts scalars or arrays."""

    __slots__ = ("total", "comp")

    def __init__(self, start: float = 0.0):
        self.total = float(start)
        self.comp = 0.0

    def add(self, x) -> None:
        if isinstance(x, np.ndarray):
            x = math.fsum(x.ravel().tolist())
        t = self.total + x
        if abs(self.total) >= abs(x):
            self.comp += (self.total - t) + x
        else:
            self.comp += (x - t) + self.total
        self.total = t

    @property
    def value(self) -> float:
        return self.total + self.comp


def simpson_weights(n_points: int) -> np.ndarray:
    """Composite Simpson weights (times h/3) for an odd number of equispaced nodes."""
    if n_points < 3 or n_points % 2 == 0:
        raise ValueError("Simpson needs an odd node count >= 3")
    w = np.ones(n_points)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w


def simpson_average(
    fn: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    max_step: float,
    chunk: int = 1 << 20,
) -> float:
    """Mean value (1/(b-a)) * int_a^b fn, composite Simpson, streamed in chunks.

    ``fn`` is evaluated on numpy arrays of nodes. The step is the largest
    h <= max_step that gives an even number of panels.
    """
    if b <= a:
        raise ValueError("empty interval")
    n_int = int(math.ceil((b - a) / max_step))
    n_int += n_int % 2
    h = (b - a) / n_int
    n_nodes = n_int + 1
    acc = KahanSum()
    start = 0
    while start < n_nodes:
        stop = min(start + chunk, n_nodes)
        idx = np.arange(start, stop)
        w = np.where(idx % 2 == 1, 4.0, 2.0)
        w[idx == 0] = 1.0
        w[idx == n_nodes - 1] = 1.0
        vals = fn(a + idx * h)
        acc.add(float(np.dot(w, vals)))
        start = stop
    return acc.value * h / 3.0 / (b - a)


def loglog_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """OLS of log y on log x; returns (slope, intercept, rms residual)."""
    lx = np.log(np.asarray(x, float))
    ly = np.log(np.asarray(y, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


def format_number(v) -> str:
    """Shortest text that parses back to the same value; integral floats drop '.0'."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if f.is_integer() and abs(f) < 2**53:
        return str(int(f))
    return repr(f)
