"""Continued fractions: partial quotient sources, convergents, and alpha to working precision.

Every source describes an irrational ``alpha = [a0; a1, a2, ...]``.  Orbit
computations only ever use the fractional part, so ``a0`` is carried for
display and for convergents but never enters ``{n alpha}``.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, NamedTuple, Sequence

from .errors import NotQuadratic, PrecisionExhausted, SpecParseError
from .fixedpoint import MAX_BITS, FixedPointFraction

QUADRATIC = "quadratic"
E_FAMILY = "e"
EXPLICIT = "explicit"
GAUSS_RANDOM = "random"

DEFAULT_RANDOM_BITS = 4096

GRAMMAR = """\
alpha specification grammar:
  golden                          (1+sqrt 5)/2 = [1; 1, 1, ...]
  sqrt:<D>                        sqrt(D), D a square-free integer >= 2
  quadratic:<a0>;<pre>|<period>   eventually periodic, comma-separated lists
                                  (pre may be empty), e.g. quadratic:1;|1,2
  e                               Euler's number [2; 1, 2, 1, 1, 4, ...]
  list:<a1,a2,...>                finite explicit list of partial quotients
  random:<seed>[:<bits>]          uniform alpha from <bits> random bits"""


@dataclass(frozen=True)
class PartialQuotientSource:
    """Generative description of an irrational through its partial quotients.

    Build instances with the classmethods (:meth:`quadratic`, :meth:`e_family`,
    :meth:`explicit`, :meth:`gauss_random`) or :func:`parse_alpha`.
    """

    kind: str
    a0: int = 0
    preperiod: tuple = ()
    period: tuple = ()
    quotients: tuple = ()
    seed: int = 0
    precision_bits: int = 0
    degree: int | None = None  # declared polynomial growth a_k <= c k^d
    label: str = field(default="", compare=False)

    @classmethod
    def quadratic(cls, period: Sequence[int], preperiod: Sequence[int] = (), a0: int = 0, label=""):
        period, preperiod = tuple(int(a) for a in period), tuple(int(a) for a in preperiod)
        if not period:
            raise ValueError("quadratic period must be nonempty")
        _check_positive(period + preperiod)
        label = label or f"quadratic:{a0};{','.join(map(str, preperiod))}|{','.join(map(str, period))}"
        return cls(QUADRATIC, a0=int(a0), preperiod=preperiod, period=period, degree=0, label=label)

    @classmethod
    def e_family(cls, a0: int = 2, label=""):
        return cls(E_FAMILY, a0=int(a0), degree=1, label=label or "e")

    @classmethod
    def explicit(cls, quotients: Sequence[int], a0: int = 0, degree: int | None = None, label=""):
        quotients = tuple(int(a) for a in quotients)
        if not quotients:
            raise ValueError("explicit list must be nonempty")
        _check_positive(quotients)
        label = label or "list:" + ",".join(map(str, quotients))
        return cls(EXPLICIT, a0=int(a0), quotients=quotients, degree=degree, label=label)

    @classmethod
    def gauss_random(cls, seed: int, precision_bits: int = DEFAULT_RANDOM_BITS, label=""):
        if precision_bits < 1:
            raise ValueError("precision_bits must be positive")
        label = label or f"random:{seed}:{precision_bits}"
        return cls(GAUSS_RANDOM, seed=int(seed), precision_bits=int(precision_bits), label=label)

    def __str__(self):
        return self.label

    def iter_quotients(self) -> Iterator[int]:
        """Yield a_1, a_2, ...; raises PrecisionExhausted when a finite source runs dry."""
        if self.kind == QUADRATIC:
            yield from self.preperiod
            yield from itertools.cycle(self.period)
        elif self.kind == E_FAMILY:
            for j in itertools.count():
                yield 1
                yield 2 * (j + 1)
                yield 1
        elif self.kind == EXPLICIT:
            yield from self.quotients
            raise PrecisionExhausted(f"explicit list has only {len(self.quotients)} quotients")
        elif self.kind == GAUSS_RANDOM:
            exp = _gauss_expansion(self.seed, self.precision_bits)
            for n in itertools.count():
                if not exp.extend_to(n + 1):
                    raise PrecisionExhausted(
                        f"random:{self.seed} at {self.precision_bits} bits resolves only "
                        f"{len(exp.quotients)} partial quotients"
                    )
                yield exp.quotients[n]
        else:  # pragma: no cover
            raise ValueError(f"unknown source kind {self.kind!r}")


def _check_positive(values):
    if any(a < 1 for a in values):
        raise ValueError("partial quotients must be positive integers")


def _euclid_quotients(num: int, den: int) -> list[int]:
    out = []
    while num:
        a, r = divmod(den, num)
        out.append(a)
        den, num = num, r
    return out


class _GaussExpansion:
    """Quotients shared by every alpha in [r/2^bits, (r+1)/2^bits], computed on demand.

    Both endpoint expansions run in lockstep and stop at the first
    disagreement.  The last quotient of a rational expansion is ambiguous
    ([.., a] = [.., a-1, 1]), so a step that ends either expansion is dropped.
    """

    def __init__(self, seed: int, bits: int):
        r = random.Random(seed).getrandbits(bits)
        den = 1 << bits
        self.state = (r, den, r + 1, den)
        self.quotients: list[int] = []
        self.done = False

    def extend_to(self, n: int) -> bool:
        num_lo, den_lo, num_hi, den_hi = self.state
        while len(self.quotients) < n and not self.done:
            a, r_lo = divmod(den_lo, num_lo)
            b, r_hi = divmod(den_hi, num_hi)
            if a != b or r_lo == 0 or r_hi == 0:
                self.done = True
                break
            self.quotients.append(a)
            den_lo, num_lo, den_hi, num_hi = num_lo, r_lo, num_hi, r_hi
        self.state = (num_lo, den_lo, num_hi, den_hi)
        return len(self.quotients) >= n


@lru_cache(maxsize=64)
def _gauss_expansion(seed: int, bits: int) -> _GaussExpansion:
    return _GaussExpansion(seed, bits)


def _gauss_quotients(seed: int, bits: int) -> tuple:
    """All quotients resolved by ``bits`` random bits."""
    exp = _gauss_expansion(seed, bits)
    exp.extend_to(bits * 2)  # more than any expansion of a bits-bit fraction can have
    return tuple(exp.quotients)


def partial_quotients(src: PartialQuotientSource, k: int) -> list[int]:
    """The first ``k`` partial quotients a_1..a_k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return list(itertools.islice(src.iter_quotients(), k))


class Convergent(NamedTuple):
    k: int
    p: int
    q: int


def iter_convergents(src: PartialQuotientSource, with_a0: bool = True) -> Iterator[Convergent]:
    """Convergents p_k/q_k for k = 0, 1, ...  (``with_a0=False`` gives those of {alpha})."""
    a0 = src.a0 if with_a0 else 0
    p_prev, q_prev, p, q = 1, 0, a0, 1
    yield Convergent(0, p, q)
    for k, a in enumerate(src.iter_quotients(), start=1):
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        yield Convergent(k, p, q)


def convergents(src: PartialQuotientSource, k: int) -> list[Convergent]:
    """Convergents with indices 0..k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return list(itertools.islice(iter_convergents(src), k + 1))


def alpha_value(src: PartialQuotientSource, bits: int) -> FixedPointFraction:
    """``{alpha}`` to ``bits`` binary digits, error at most 2 ulp."""
    if bits < 64:
        raise ValueError("bits must be >= 64")
    if bits > MAX_BITS:
        raise ValueError(f"bits must be <= {MAX_BITS}")
    target = 1 << (bits + 2)
    prev = None
    for conv in iter_convergents(src, with_a0=False):
        if prev is not None and prev.q * conv.q > target:
            # |alpha - p/q| < 1/(q_k q_{k+1}) < 1/4 ulp; rounding adds 1/2 ulp
            return FixedPointFraction.from_fraction(prev.p, prev.q, bits, err_ulp=0)
        prev = conv
    raise AssertionError("unreachable")  # pragma: no cover


class IndexInfo(NamedTuple):
    k: int
    convergents: list


def index_of(src: PartialQuotientSource, M: int) -> IndexInfo:
    """The k with q_k <= M < q_{k+1}, plus convergents 0..k+1."""
    if M < 1:
        raise ValueError("M must be >= 1")
    convs = []
    for conv in iter_convergents(src):
        convs.append(conv)
        if conv.q > M:
            return IndexInfo(conv.k - 1, convs)
    raise AssertionError("unreachable")  # pragma: no cover


def E_alpha(src: PartialQuotientSource) -> float:
    """Beck's centering constant lim (1/(12 log q_k)) sum_{l<=k} (-1)^l a_l."""
    if src.kind != QUADRATIC:
        raise NotQuadratic(f"E(alpha) needs a quadratic source, got {src.kind}")
    period = src.period
    if len(period) % 2:
        # signs flip from one period to the next, so partial sums stay bounded
        return 0.0
    offset = len(src.preperiod) + 1
    alt = sum((-1) ** (offset + i) * a for i, a in enumerate(period))
    if alt == 0:
        return 0.0
    return alt / (12.0 * period_log_growth(period))


def period_log_growth(period: Sequence[int]) -> float:
    """log of the dominant eigenvalue of the period's transfer matrix.

    This is the exact per-period increment of log q_k in the limit.
    """
    m00, m01, m10, m11 = 1, 0, 0, 1
    for a in period:
        m00, m01, m10, m11 = a * m00 + m01, m00, a * m10 + m11, m10
    tr = m00 + m11
    det = (-1) ** len(period)
    # lambda = tr (1 + sqrt(1 - 4 det / tr^2)) / 2, written to survive huge traces
    ratio = 4 * det / (tr * tr) if tr < 10**150 else 0.0
    return math.log(tr) + math.log((1.0 + math.sqrt(1.0 - ratio)) / 2.0)


def sqrt_period(D: int) -> tuple[int, tuple]:
    """(a0, period) of sqrt(D) for non-square D."""
    a0 = math.isqrt(D)
    if a0 * a0 == D:
        raise SpecParseError(f"sqrt:{D} is rational")
    m, d, a = 0, 1, a0
    period = []
    while a != 2 * a0:
        m = d * a - m
        d = (D - m * m) // d
        a = (a0 + m) // d
        period.append(a)
    return a0, tuple(period)


def _is_square_free(n: int) -> bool:
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


def _int_list(text: str, what: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise SpecParseError(f"bad integer list for {what}: {text!r}\n{GRAMMAR}") from None


def parse_alpha(spec: str) -> PartialQuotientSource:
    """Parse the CLI alpha grammar (see ``GRAMMAR``)."""
    if isinstance(spec, PartialQuotientSource):
        return spec
    text = spec.strip()
    head, _, rest = text.partition(":")
    try:
        if text == "golden":
            return PartialQuotientSource.quadratic((1,), a0=1, label=text)
        if text == "e":
            return PartialQuotientSource.e_family(label=text)
        if head == "sqrt":
            D = int(rest)
            if D < 2 or not _is_square_free(D):
                raise SpecParseError(f"sqrt:<D> needs a square-free D >= 2, got {D}\n{GRAMMAR}")
            a0, period = sqrt_period(D)
            return PartialQuotientSource.quadratic(period, a0=a0, label=text)
        if head == "quadratic":
            a0_text, sep, lists = rest.partition(";")
            pre_text, sep2, per_text = lists.partition("|")
            if not sep or not sep2:
                raise SpecParseError(f"malformed quadratic spec {text!r}\n{GRAMMAR}")
            return PartialQuotientSource.quadratic(
                _int_list(per_text, "period"), _int_list(pre_text, "preperiod"), int(a0_text), label=text
            )
        if head == "list":
            return PartialQuotientSource.explicit(_int_list(rest, "list"), label=text)
        if head == "random":
            seed_text, _, bits_text = rest.partition(":")
            bits = int(bits_text) if bits_text else DEFAULT_RANDOM_BITS
            return PartialQuotientSource.gauss_random(int(seed_text), bits, label=text)
    except SpecParseError:
        raise
    except ValueError as exc:
        raise SpecParseError(f"cannot parse alpha spec {text!r}: {exc}\n{GRAMMAR}") from None
    raise SpecParseError(f"unknown alpha spec {text!r}\n{GRAMMAR}")


def as_source(alpha) -> PartialQuotientSource:
    return parse_alpha(alpha) if isinstance(alpha, str) else alpha
