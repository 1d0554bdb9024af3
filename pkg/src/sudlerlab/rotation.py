"""Error-bounded orbit {n alpha} of the circle rotation, streaming and random access.

Orbit arithmetic is fixed point: adding alpha modulo 1 is exact on the
mantissa, so the only error is the initial rounding of alpha, which grows
linearly in n.  Bulk evaluation splits [1, M] into fixed-size chunks whose
starting points come from :func:`frac_at`; because that multiplication is
exact, chunked and sequential runs produce identical points.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import kernels
from .cf import alpha_value, as_source
from .errors import SingularitySuspect
from .fixedpoint import LIMB_BITS, FixedPointFraction

GUARD_FACTOR = 2.0**10
DEFAULT_CHUNK_SIZE = 1 << 20


def default_precision(M: int) -> int:
    """Working precision for horizon M, rounded up to whole 64-bit limbs."""
    bits = max(192, 2 * math.ceil(math.log2(max(M, 2))) + 96)
    return -(-bits // LIMB_BITS) * LIMB_BITS


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get("SUDLERLAB_WORKERS", "1")))
    except ValueError:
        return 1


def orbit_error(alpha: FixedPointFraction, n) -> float:
    """Absolute error bound on {n alpha}: n (err0 + 1) ulp."""
    return n * math.ldexp(float(alpha.err_ulp + 1), -alpha.bits)


def resolve_alpha(alpha, M: int = 1, bits: int | None = None) -> FixedPointFraction:
    """Accept a FixedPointFraction, a source, or a spec string."""
    if isinstance(alpha, FixedPointFraction):
        if bits is not None and bits != alpha.bits:
            return alpha.widen(bits)
        return alpha
    return alpha_value(as_source(alpha), bits or default_precision(M))


def frac_at(alpha: FixedPointFraction, n: int) -> FixedPointFraction:
    """{n alpha} by one multiplication modulo 1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    return alpha.times(n)


def dist_to_int(x: FixedPointFraction) -> tuple[float, float]:
    """(||x||, absolute error bound)."""
    return x.distance_to_int()


def guard(x: FixedPointFraction, guard_factor: float = GUARD_FACTOR, index: int = 0) -> float:
    """||x|| as a float, unless it is within ``guard_factor`` of its error bound."""
    d, err = x.distance_to_int()
    check_distance(d, err, guard_factor, index)
    return d


def check_distance(d: float, err: float, guard_factor: float = GUARD_FACTOR, index: int = 0):
    # d is correctly rounded, so one extra relative ulp covers the conversion
    if d == 0.0 or d <= guard_factor * (err + d * 2.0**-53):
        raise SingularitySuspect(index, d, err)


class OrbitCursor:
    """Single-owner streaming cursor over {n alpha}, n = 0, 1, 2, ..."""

    def __init__(self, alpha: FixedPointFraction, start: int = 0):
        self.alpha = alpha
        self.n = start
        self.x = frac_at(alpha, start)

    @property
    def err_ulp(self) -> int:
        return self.x.err_ulp

    def next(self) -> tuple[int, FixedPointFraction]:
        mod_mask = (1 << self.alpha.bits) - 1
        self.n += 1
        self.x = FixedPointFraction(
            (self.x.mantissa + self.alpha.mantissa) & mod_mask,
            self.alpha.bits,
            self.n * (self.alpha.err_ulp + 1),
        )
        return self.n, self.x

    __next__ = next

    def __iter__(self):
        return self


@dataclass(frozen=True)
class OrbitChunk:
    """Points n = start+1 .. start+len(frac) as correctly rounded doubles."""

    start: int
    frac: np.ndarray
    dist: np.ndarray

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start + 1, self.start + 1 + len(self.frac), dtype=np.float64)


def _fill_chunk(alpha: FixedPointFraction, start: int, count: int) -> OrbitChunk:
    x = frac_at(alpha, start).to_limbs().copy()
    frac = np.empty(count)
    dist = np.empty(count)
    kernels.fill_orbit(alpha.to_limbs(), x, count, frac, dist)
    return OrbitChunk(start, frac, dist)


def iter_orbit(alpha: FixedPointFraction, M: int, chunk_size: int = DEFAULT_CHUNK_SIZE,
               workers: int | None = None, first: int = 1) -> Iterator[OrbitChunk]:
    """Chunks covering n = first..M, yielded in index order.

    Chunk boundaries depend only on ``chunk_size``; the points themselves do
    not depend on it or on ``workers``.
    """
    if alpha.bits % LIMB_BITS:
        alpha = alpha.widen(-(-alpha.bits // LIMB_BITS) * LIMB_BITS)
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    starts = list(range(first - 1, M, chunk_size))
    tasks = [(s, min(chunk_size, M - s)) for s in starts]
    workers = workers or default_workers()
    if workers <= 1 or len(tasks) <= 1:
        for s, c in tasks:
            yield _fill_chunk(alpha, s, c)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # bounded look-ahead keeps memory at O(workers * chunk_size)
        pending = []
        it = iter(tasks)
        for s, c in it:
            pending.append(pool.submit(_fill_chunk, alpha, s, c))
            if len(pending) >= 2 * workers:
                break
        for s, c in it:
            yield pending.pop(0).result()
            pending.append(pool.submit(_fill_chunk, alpha, s, c))
        while pending:
            yield pending.pop(0).result()


def orbit_arrays(alpha, M: int, bits: int | None = None, chunk_size: int = DEFAULT_CHUNK_SIZE,
                 workers: int | None = None) -> tuple[np.ndarray, np.ndarray, FixedPointFraction]:
    """({n alpha}, ||n alpha||) for n = 1..M as two arrays, plus the alpha used."""
    a = resolve_alpha(alpha, M, bits)
    frac = np.empty(M)
    dist = np.empty(M)
    for ch in iter_orbit(a, M, chunk_size, workers):
        frac[ch.start:ch.start + len(ch.frac)] = ch.frac
        dist[ch.start:ch.start + len(ch.dist)] = ch.dist
    return frac, dist, a


def guard_array(dist: np.ndarray, n: np.ndarray, alpha: FixedPointFraction,
                guard_factor: float = GUARD_FACTOR):
    """Vectorized guard over a chunk; raises on the first offending index."""
    err = orbit_error(alpha, n)
    bad = (dist == 0.0) | (dist <= guard_factor * (err + dist * 2.0**-53))
    if bad.any():
        i = int(np.argmax(bad))
        raise SingularitySuspect(int(n[i]), dist[i], err[i])
    return err
