"""Prefix sums S_N = sum_{n<=N} f(n alpha) for the supported summands.

The Sudler product enters as ``log P_N = S_N`` with ``f(x) = log|2 sin(pi x)|``.
Two Fourier-side formulas for log P_N (pointwise through the Dirichlet
kernel, averaged through the Fejer kernel) serve as independent cross-checks
of the direct prefix sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cf import as_source
from .errors import InvalidInterval, SingularitySuspect
from .fixedpoint import FixedPointFraction
from .rotation import (
    DEFAULT_CHUNK_SIZE,
    GUARD_FACTOR,
    frac_at,
    guard_array,
    iter_orbit,
    orbit_arrays,
    orbit_error,
    resolve_alpha,
)

EPS = 2.0**-53
TWO_E = 2.0 * math.e

BINARY_RECORD = np.dtype([("N", "<i8"), ("value", "<f8")])


@dataclass(frozen=True)
class SummandKind:
    """One of the four summand families; ``a``, ``b`` only matter for indicators."""

    name: str
    a: float = 0.0
    b: float = 0.0

    NAMES = ("log_sudler", "log_diophantine", "sawtooth", "indicator")

    def __post_init__(self):
        if self.name not in self.NAMES:
            raise ValueError(f"unknown summand {self.name!r}")
        if self.name == "indicator":
            a, b = self.a, self.b
            if not (0.0 <= a < b <= 1.0 and 0.0 < b - a < 1.0):
                raise InvalidInterval(f"indicator needs 0 <= a < b <= 1 and 0 < b-a < 1, got [{a}, {b}]")

    @classmethod
    def log_sudler(cls):
        return cls("log_sudler")

    @classmethod
    def log_diophantine(cls):
        return cls("log_diophantine")

    @classmethod
    def sawtooth(cls):
        return cls("sawtooth")

    @classmethod
    def indicator(cls, a, b):
        return cls("indicator", float(a), float(b))

    @property
    def length(self) -> float:
        return self.b - self.a

    def __str__(self):
        if self.name == "indicator":
            return f"indicator[{self.a!r},{self.b!r}]"
        return self.name

    def pointwise(self, x: float) -> float:
        """Reference value f(x) in double precision (used by tests and docs)."""
        x = x % 1.0
        if self.name == "log_sudler":
            return math.log(abs(2.0 * math.sin(math.pi * x)))
        if self.name == "log_diophantine":
            return math.log(TWO_E * min(x, 1.0 - x))
        if self.name == "sawtooth":
            return x - 0.5
        return (1.0 if self.a <= x <= self.b else 0.0) - self.length


@dataclass
class BirkhoffSeries:
    """Prefix sums for N = 1..M with nondecreasing error bounds.

    ``values[N-1]`` is S_N and ``err[N-1]`` bounds ``|values[N-1] - S_N|``.
    """

    kind: SummandKind
    alpha_spec: str
    values: np.ndarray
    err: np.ndarray
    precision_bits: int

    def __len__(self):
        return len(self.values)

    @property
    def M(self) -> int:
        return len(self.values)

    def value(self, N: int) -> float:
        """S_N, with S_0 = 0 (the empty sum, i.e. P_0 = 1)."""
        return 0.0 if N == 0 else float(self.values[N - 1])

    def with_zero(self) -> np.ndarray:
        """Values for N = 0..M."""
        return np.concatenate(([0.0], self.values))

    def head(self, M: int) -> BirkhoffSeries:
        if M > len(self):
            raise ValueError("series too short")
        return BirkhoffSeries(self.kind, self.alpha_spec, self.values[:M], self.err[:M], self.precision_bits)

    def write_binary(self, path):
        """Little-endian (int64 N, float64 value) records."""
        rec = np.empty(len(self), dtype=BINARY_RECORD)
        rec["N"] = np.arange(1, len(self) + 1)
        rec["value"] = self.values
        rec.tofile(path)


def read_binary(path) -> np.ndarray:
    return np.fromfile(path, dtype=BINARY_RECORD)


def _chunk_terms(kind: SummandKind, code: int, ch, a: FixedPointFraction, guard_factor: float):
    """Term values and their per-term absolute error bounds for one orbit chunk."""
    n = ch.indices
    terms = np.empty(len(ch.frac))
    kernels.eval_terms(code, ch.frac, ch.dist, kind.a, kind.b, kind.length, TWO_E, terms)
    if kind.name in ("log_sudler", "log_diophantine"):
        e_n = guard_array(ch.dist, n, a, guard_factor)
        # input error through f' <= 1/||x||, plus libm and rounding ulps
        term_err = e_n / ch.dist + 4.0 * EPS + EPS * np.abs(terms)
    elif kind.name == "sawtooth":
        term_err = orbit_error(a, n) + EPS
    else:
        e_n = orbit_error(a, n)
        margin = e_n + 2.0 * EPS
        for endpoint in (kind.a, kind.b):
            gap = np.abs(ch.frac - endpoint)
            gap = np.minimum(gap, 1.0 - gap)
            bad = gap <= margin
            if bad.any():
                i = int(np.argmax(bad))
                raise SingularitySuspect(int(n[i]), gap[i], margin[i], what=f"distance of {{n alpha}} to {endpoint!r}")
        term_err = np.zeros(len(terms))
    return terms, term_err


def _carry_cumsum(x: np.ndarray, carry: float) -> np.ndarray:
    # prepending the carry keeps the summation order independent of chunking
    return np.cumsum(np.concatenate(([carry], x)))[1:]


def prefix_stream(kind: SummandKind, alpha, M: int, bits: int | None = None,
                  chunk_size: int = DEFAULT_CHUNK_SIZE, workers: int | None = None,
                  guard_factor: float = GUARD_FACTOR) -> BirkhoffSeries:
    """S_N for N = 1..M with compensated summation and a rigorous-style error bound.

    The output is bit-identical for every ``chunk_size`` and ``workers``.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    label = str(as_source(alpha)) if not isinstance(alpha, FixedPointFraction) else "fixed-point"
    a = resolve_alpha(alpha, M, bits)
    code = kernels.SUMMAND_CODES[kind.name]
    values = np.empty(M)
    err = np.empty(M)
    s = c = 0.0
    abs_carry = te_carry = run_max = 0.0
    for ch in iter_orbit(a, M, chunk_size, workers):
        terms, term_err = _chunk_terms(kind, code, ch, a, guard_factor)
        lo, hi = ch.start, ch.start + len(terms)
        out = values[lo:hi]
        s, c = kernels.compensated_prefix(terms, out, s, c)
        abs_cum = _carry_cumsum(np.abs(terms), abs_carry)
        te_cum = _carry_cumsum(term_err, te_carry)
        peak = np.maximum.accumulate(np.concatenate(([run_max], np.abs(out))))[1:]
        abs_carry, te_carry, run_max = abs_cum[-1], te_cum[-1], peak[-1]
        # Neumaier: |error| <= 2 eps |S| + O(N eps^2) sum |t|; inflated to stay monotone
        err[lo:hi] = 2.0 * EPS * peak + 4.0 * ch.indices * EPS * EPS * abs_cum + te_cum
    return BirkhoffSeries(kind, label, values, err, a.bits)


def _sin_pi(d: np.ndarray) -> np.ndarray:
    return np.sin(np.pi * d)


def fourier_log_sudler(alpha, N: int, K: int, bits: int | None = None,
                       guard_factor: float = GUARD_FACTOR) -> tuple[float, float]:
    """log P_N from the Dirichlet-kernel series truncated at K terms.

    Returns ``(value, tail_bound)``.  The tail of the cosine series past K is
    at most ``1/(2(K+1)||x||)`` by partial summation; the bound reported is the
    sum of ``1/(K ||n alpha||)`` over n <= N plus the accumulated rounding.
    """
    if N < 0 or K < 1:
        raise ValueError("need N >= 0 and K >= 1")
    if N == 0:
        return 0.0, 0.0
    a = resolve_alpha(alpha, max(K, N), bits)
    _, d, _ = orbit_arrays(a, K)
    m = np.arange(1, K + 1, dtype=np.float64)
    e_m = guard_array(d, m, a, guard_factor)
    odd = 2 * N + 1
    # D_N is 1-periodic and even, so evaluate it at ||m alpha|| in [0, 1/2]
    u = np.fmod(odd * d, 2.0)
    num = np.sin(np.pi * u)
    den = _sin_pi(d)
    kernel = num / den
    terms = (1.0 - kernel) / (2.0 * m)
    value = math.fsum(terms)
    num_err = np.pi * odd * (d * EPS + e_m) + 8.0 * EPS * (1.0 + odd * d)
    den_rel = e_m / d + 4.0 * EPS
    round_err = float(np.sum((num_err + np.abs(kernel) * den_rel * den) / (den * 2.0 * m)))
    round_err += 4.0 * EPS * float(np.sum(np.abs(terms)))
    _, dn, _ = orbit_arrays(a, N)
    guard_array(dn, np.arange(1, N + 1, dtype=np.float64), a, guard_factor)
    tail = math.fsum(1.0 / (K * dn))
    return value, tail + round_err


def fejer_average_log_sudler(alpha, M: int, K: int, bits: int | None = None,
                             guard_factor: float = GUARD_FACTOR) -> tuple[float, float]:
    """(1/M) sum_{N=0}^{M-1} log P_N from the Fejer-kernel series truncated at K.

    Returns ``(value, tail_bound)``; the bound averages the pointwise tail
    bounds over N = 0..M-1.
    """
    if M < 1 or K < 1:
        raise ValueError("need M >= 1 and K >= 1")
    if M == 1:
        return 0.0, 0.0
    a = resolve_alpha(alpha, max(K, M) * M, bits)
    _, d, _ = orbit_arrays(a, K)
    m = np.arange(1, K + 1, dtype=np.float64)
    e_m = guard_array(d, m, a, guard_factor)
    gamma = frac_at(a, M)
    _, dg, _ = orbit_arrays(gamma, K)  # ||m M alpha||, exact up to fixed-point error
    den = _sin_pi(d)
    fejer = _sin_pi(dg) ** 2 / (M * den * den)
    terms = (1.0 - fejer) / (2.0 * m)
    value = math.fsum(terms)
    eg = orbit_error(gamma, m)
    # relative errors of numerator and denominator, both through sin(pi t)/t <= pi
    rel = 2.0 * (eg / np.maximum(dg, EPS) + e_m / d) + 16.0 * EPS
    round_err = float(np.sum(fejer * rel / (2.0 * m))) + 4.0 * EPS * float(np.sum(np.abs(terms)))
    _, dn, _ = orbit_arrays(a, M - 1)
    n = np.arange(1, M, dtype=np.float64)
    guard_array(dn, n, a, guard_factor)
    tail = math.fsum((M - n) / (K * dn)) / M
    return value, tail + round_err
