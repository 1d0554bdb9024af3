"""Temporal statistics of Birkhoff sums and the predictions they are checked against.

"Temporal" means N is drawn uniformly from [1, M]: A_M and B_M^2 are the
mean and variance of S_N over that range.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special

from . import kernels
from .birkhoff import BirkhoffSeries, SummandKind, prefix_stream
from .cf import (
    E_alpha,
    GAUSS_RANDOM,
    PartialQuotientSource,
    as_source,
    index_of,
    iter_convergents,
    partial_quotients,
)
from .constants import V_CONSTANT
from .errors import HypothesisViolated, TruncationFlagged, Unsupported
from .rotation import DEFAULT_CHUNK_SIZE, guard_array, iter_orbit, resolve_alpha

PI2 = math.pi**2
KS_EXACT_LIMIT = 10**6
KS_SKETCH_SIZE = 10**5
LEVY_SCALE = 2.0 * math.log(2.0) ** 2 / math.pi


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


class _Report:
    def to_dict(self) -> dict:
        return _plain(asdict(self))


# ---------------------------------------------------------------- moments


@dataclass
class MomentReport(_Report):
    M: int
    mean: float
    variance: float
    min: float
    max: float
    argmin: int
    argmax: int
    predicted_mean: float | None = None
    predicted_variance_main: float | None = None
    residuals: dict = field(default_factory=dict)


def temporal_moments(series: BirkhoffSeries | np.ndarray, M: int | None = None,
                     predict: bool = True) -> MomentReport:
    """A_M, B_M^2 and extremes of S_N over N = 1..M (ties go to the smallest N)."""
    values = series.values if isinstance(series, BirkhoffSeries) else np.asarray(series, dtype=float)
    M = len(values) if M is None else M
    if M < 1 or M > len(values):
        raise ValueError("need 1 <= M <= series length")
    v = values[:M]
    mean = math.fsum(v) / M
    variance = math.fsum((v - mean) ** 2) / M
    report = MomentReport(
        M=M, mean=mean, variance=variance,
        min=float(v.min()), max=float(v.max()),
        argmin=int(np.argmin(v)) + 1, argmax=int(np.argmax(v)) + 1,
    )
    if predict and isinstance(series, BirkhoffSeries) and series.kind.name == "log_sudler":
        try:
            pred = predicted_mean_variance(series.alpha_spec, M)
        except (HypothesisViolated, ValueError):
            return report
        report.predicted_mean = pred.mean
        report.predicted_variance_main = pred.variance_main
        # the variance formula is centred at 1/2 log M, not at A_M
        centred = math.fsum((v - pred.mean) ** 2) / M
        report.residuals = {
            "mean": mean - pred.mean,
            "variance_about_half_log_M": centred - pred.variance_main,
            "mean_error_scale": pred.mean_error_scale,
            "variance_error_scale": pred.variance_error_scale,
        }
    return report


def variance_one_pass(values: np.ndarray, block: int = 1 << 16) -> tuple[float, float]:
    """(mean, variance) in a single streaming pass, merging per-block moments (Chan et al.)."""
    n = 0
    mean = 0.0
    m2 = 0.0
    for lo in range(0, len(values), block):
        b = values[lo:lo + block]
        nb = len(b)
        mb = float(np.mean(b))
        m2b = float(np.sum((b - mb) ** 2))
        delta = mb - mean
        tot = n + nb
        mean += delta * nb / tot
        m2 += m2b + delta * delta * n * nb / tot
        n = tot
    return mean, m2 / n


def grid_moments(values: np.ndarray, grid) -> list[tuple[int, float, float]]:
    """(M, A_M, B_M^2) for each M in the grid, each computed by two passes."""
    out = []
    for M in grid:
        v = values[:M]
        mean = math.fsum(v) / M
        out.append((int(M), mean, math.fsum((v - mean) ** 2) / M))
    return out


# ---------------------------------------------------------------- Diophantine sums


def diophantine_terms(alpha, M: int, bits: int | None = None, chunk_size: int = DEFAULT_CHUNK_SIZE,
                      workers: int | None = None) -> np.ndarray:
    """1/(8 pi^2 m^2 ||m alpha||^2) for m = 1..M, guard-checked."""
    a = resolve_alpha(alpha, M, bits)
    out = np.empty(M)
    for ch in iter_orbit(a, M, chunk_size, workers):
        m = ch.indices
        guard_array(ch.dist, m, a)
        out[ch.start:ch.start + len(m)] = 1.0 / (8.0 * PI2 * m * m * ch.dist * ch.dist)
    return out


def diophantine_prefix(alpha, M: int, **kw) -> np.ndarray:
    terms = diophantine_terms(alpha, M, **kw)
    out = np.empty(M)
    kernels.compensated_prefix(terms, out, 0.0, 0.0)
    return out


def diophantine_sum(alpha, M: int, **kw) -> float:
    """sum_{m<=M} 1/(8 pi^2 m^2 ||m alpha||^2)."""
    if M < 1:
        raise ValueError("M must be >= 1")
    return float(diophantine_prefix(alpha, M, **kw)[-1])


_CLOSED_FORMS = {
    "golden": lambda: PI2 / (60.0 * math.sqrt(5.0) * math.log((1.0 + math.sqrt(5.0)) / 2.0)),
    "sqrt3": lambda: PI2 / (24.0 * math.sqrt(3.0) * math.log(2.0 + math.sqrt(3.0))),
}
_ALIASES = {"golden": "golden", "sqrt3": "sqrt3", "sqrt:3": "sqrt3"}


def sigma2_closed_form(name: str) -> float:
    """sigma(alpha)^2 where a closed form is known (golden ratio, sqrt 3)."""
    key = _ALIASES.get(str(name))
    if key is None:
        raise Unsupported(f"no closed form for sigma^2 of {name!r}; use sigma2_estimate")
    return _CLOSED_FORMS[key]()


@dataclass
class Sigma2Estimate(_Report):
    slope: float
    intercept: float
    per_point: list  # (M, diophantine sum, sum / log M)


def fit_slope(x, y) -> tuple[float, float]:
    """Ordinary least squares y = slope x + intercept."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    slope = float(np.sum((x - xm) * (y - ym)) / np.sum((x - xm) ** 2))
    return slope, float(ym - slope * xm)


def sigma2_estimate(alpha, M_grid, **kw) -> Sigma2Estimate:
    """Least-squares slope of the Diophantine sum against log M over a grid."""
    grid = [int(M) for M in M_grid]
    if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 2:
        raise ValueError("M_grid must be strictly increasing, >= 2, with at least 3 points")
    prefix = diophantine_prefix(alpha, grid[-1], **kw)
    sums = [float(prefix[M - 1]) for M in grid]
    logs = [math.log(M) for M in grid]
    slope, intercept = fit_slope(logs, sums)
    return Sigma2Estimate(slope, intercept, [(M, s, s / lg) for M, s, lg in zip(grid, sums, logs)])


def declared_degree(src: PartialQuotientSource) -> int:
    if src.degree is None or src.kind == GAUSS_RANDOM:
        raise HypothesisViolated(f"{src} has no declared polynomial bound a_k <= c k^d")
    return src.degree


@dataclass
class Prediction(_Report):
    M: int
    mean: float
    variance_main: float
    k: int
    max_quotient_near_k: int
    log_log_M: float
    mean_error_scale: float
    variance_error_scale: float


def predicted_mean_variance(alpha, M: int, **kw) -> Prediction:
    """Main terms 1/2 log M and the Diophantine sum, with the error-term scales."""
    src = as_source(alpha)
    declared_degree(src)
    if M < 3:
        raise ValueError("M must be >= 3 for log log M")
    k = index_of(src, M).k
    width = max(1, math.ceil(math.log(max(k, 2))))
    window = partial_quotients(src, k + width + 1)[max(0, k - width - 1):]
    amax = max(window)
    llm = math.log(math.log(M))
    return Prediction(
        M=M, mean=0.5 * math.log(M), variance_main=diophantine_sum(src, M, **kw), k=k,
        max_quotient_near_k=amax, log_log_M=llm,
        mean_error_scale=amax * llm, variance_error_scale=amax**2 * llm**4,
    )


# ---------------------------------------------------------------- distributions


@dataclass
class DistributionReport(_Report):
    count: int
    quantiles: list  # (probability, value)
    ks_distance: float
    reference: str
    extra: dict = field(default_factory=dict)


def normal_cdf(x):
    return special.ndtr(x)


def levy_cdf(t):
    """CDF of the standard Levy law: erfc(1/sqrt(2t)) for t > 0, 0 otherwise."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(t > 0, special.erfc(1.0 / np.sqrt(2.0 * np.where(t > 0, t, 1.0))), 0.0)
    return float(out) if out.ndim == 0 else out


_REFERENCES = {"StandardNormal": normal_cdf, "Levy": levy_cdf}


def ks_distance(samples, cdf) -> float:
    """sup |F_n - F| evaluated at the sample points (both one-sided gaps)."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise ValueError("no samples")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def dkw_bound(n: int, confidence: float = 0.99) -> float:
    """Dvoretzky-Kiefer-Wolfowitz radius: P(D_n > eps) <= 2 exp(-2 n eps^2)."""
    return math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * n))


def distribution_report(samples, reference: str, n_quantiles: int = 101, extra=None) -> DistributionReport:
    samples = np.asarray(samples, dtype=float)
    cdf = _REFERENCES[reference]
    if len(samples) > KS_EXACT_LIMIT:
        probs = (np.arange(KS_SKETCH_SIZE) + 0.5) / KS_SKETCH_SIZE
        ks = ks_distance(np.quantile(samples, probs), cdf)
    else:
        ks = ks_distance(samples, cdf)
    probs = np.linspace(0.0, 1.0, n_quantiles)
    qs = np.quantile(samples, probs)
    return DistributionReport(len(samples), [(float(p), float(q)) for p, q in zip(probs, qs)], ks,
                              reference, extra or {})


def clt_samples(series: BirkhoffSeries, M: int, sigma2: float) -> np.ndarray:
    """(log P_N - 1/2 log N) / sqrt(sigma2 log N) for N = 2..M."""
    N = np.arange(2, M + 1, dtype=float)
    logN = np.log(N)
    return (series.values[1:M] - 0.5 * logN) / np.sqrt(sigma2 * logN)


def clt_report(series: BirkhoffSeries, M: int, sigma2: float) -> DistributionReport:
    """KS distance of the normalized log P_N, N in [2, M], to the standard normal."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    if M < 100 or M > len(series):
        raise ValueError("need 100 <= M <= series length")
    return distribution_report(clt_samples(series, M, sigma2), "StandardNormal",
                               extra={"M": M, "sigma2": sigma2})


# ---------------------------------------------------------------- identities over [0, q_k)


def _denominator(src, k: int) -> int:
    for conv in iter_convergents(src):
        if conv.k == k:
            return conv.q
    raise AssertionError("unreachable")  # pragma: no cover


def _log_p_upto(src, q: int, **kw) -> np.ndarray:
    """log P_N for N = 0..q-1."""
    if q <= 1:
        return np.zeros(1)
    return prefix_stream(SummandKind.log_sudler(), src, q - 1, **kw).with_zero()


@dataclass
class SymmetryReport(_Report):
    k: int
    q_k: int
    value: float
    argmax: int


def symmetry_check(alpha, k: int, **kw) -> SymmetryReport:
    """max over 0 <= N < q_k of |log P_N + log P_{q_k-N-1} - log q_k|."""
    src = as_source(alpha)
    q = _denominator(src, k)
    lp = _log_p_upto(src, q, **kw)
    dev = np.abs(lp + lp[::-1] - math.log(q))
    i = int(np.argmax(dev))
    return SymmetryReport(k, q, float(dev[i]), i)


@dataclass
class ExtremeReport(_Report):
    k: int
    q_k: int
    max: float
    argmax: int
    min: float
    argmin: int
    predicted: float
    ratio: float
    error_scale: float
    min_from_symmetry: float


def extreme_check(alpha, k: int, **kw) -> ExtremeReport:
    """Extremes of log P_N over [0, q_k) against V (a_1 + ... + a_k)."""
    src = as_source(alpha)
    q = _denominator(src, k)
    lp = _log_p_upto(src, q, **kw)
    quotients = partial_quotients(src, k)
    predicted = V_CONSTANT * sum(quotients)
    A = max(quotients)
    mx, mn = float(lp.max()), float(lp.min())
    return ExtremeReport(
        k=k, q_k=q, max=mx, argmax=int(np.argmax(lp)), min=mn, argmin=int(np.argmin(lp)),
        predicted=predicted, ratio=mx / predicted, error_scale=A + k * math.log(A),
        min_from_symmetry=-mx + math.log(q),
    )


@dataclass
class SquareSumReport(_Report):
    k: int
    q_k: int
    lhs: float
    rhs: float
    ratio: float
    error_scale: float


def pq_square_sum_check(alpha, k: int, **kw) -> SquareSumReport:
    """sqrt(Diophantine sum up to q_k - 1) against (pi/sqrt 720) sqrt(a_1^2 + ... + a_k^2)."""
    src = as_source(alpha)
    q = _denominator(src, k)
    if q < 2:
        raise ValueError("q_k must be >= 2")
    lhs = math.sqrt(diophantine_sum(src, q - 1, **kw))
    rhs = math.pi / math.sqrt(720.0) * math.sqrt(sum(a * a for a in partial_quotients(src, k)))
    return SquareSumReport(k, q, lhs, rhs, lhs / rhs, math.sqrt(k))


def largest_index_below(alpha, limit: int) -> int:
    """Largest k with q_k <= limit."""
    return index_of(as_source(alpha), limit).k


# ---------------------------------------------------------------- cross moment, Beck centering


@dataclass
class CrossMoment(_Report):
    M: int
    value: float
    scale_loglog4: float
    scale_product: float


def cross_moment(alpha, M: int, log_p: BirkhoffSeries | None = None,
                 saw: BirkhoffSeries | None = None, **kw) -> CrossMoment:
    """(1/M) sum (log P_N - 1/2 log M)(S_N - A_M(S)) with its reference scales."""
    src = as_source(alpha)
    log_p = log_p or prefix_stream(SummandKind.log_sudler(), src, M, **kw)
    saw = saw or prefix_stream(SummandKind.sawtooth(), src, M, **kw)
    lp, s = log_p.values[:M], saw.values[:M]
    s_mean = math.fsum(s) / M
    value = math.fsum((lp - 0.5 * math.log(M)) * (s - s_mean)) / M
    b_lp = math.sqrt(temporal_moments(lp, predict=False).variance)
    b_s = math.sqrt(temporal_moments(s, predict=False).variance)
    llm = math.log(math.log(M)) if M >= 3 else 0.0
    return CrossMoment(M, value, llm**4, b_lp * b_s)


@dataclass
class BeckCentering(_Report):
    E: float
    per_point: list  # (M, A_M, A_M - E log M)


def beck_centering(alpha, M_grid, saw: BirkhoffSeries | None = None, **kw) -> BeckCentering:
    """A_M of the sawtooth sum against E(alpha) log M over a grid."""
    src = as_source(alpha)
    E = E_alpha(src)
    saw = saw or prefix_stream(SummandKind.sawtooth(), src, max(M_grid), **kw)
    pts = [(M, A, A - E * math.log(M)) for M, A, _ in grid_moments(saw.values, M_grid)]
    return BeckCentering(E, pts)


# ---------------------------------------------------------------- Fourier predictions


@dataclass
class FourierModel:
    """Fourier coefficients f^(m), m = 1..cutoff, of a real 1-periodic f (f^(-m) is the conjugate)."""

    coefficients: np.ndarray
    total_variation: float
    name: str = "custom"

    @property
    def cutoff(self) -> int:
        return len(self.coefficients)

    def coefficient(self, m: int) -> complex:
        if m == 0:
            return 0j
        c = complex(self.coefficients[abs(m) - 1])
        return c if m > 0 else c.conjugate()

    @classmethod
    def zero(cls, cutoff: int):
        return cls(np.zeros(cutoff, dtype=complex), 0.0, "zero")

    @classmethod
    def sawtooth(cls, cutoff: int):
        m = np.arange(1, cutoff + 1)
        return cls(1j / (2.0 * np.pi * m), 2.0, "sawtooth")

    @classmethod
    def indicator(cls, a: float, b: float, cutoff: int):
        SummandKind.indicator(a, b)  # validates
        m = np.arange(1, cutoff + 1)
        c = (np.exp(-2j * np.pi * m * a) - np.exp(-2j * np.pi * m * b)) / (2j * np.pi * m)
        return cls(c, 2.0, f"indicator[{a},{b}]")

    @classmethod
    def log_sudler(cls, cutoff: int):
        m = np.arange(1, cutoff + 1)
        return cls((-0.5 / m).astype(complex), math.inf, "log_sudler")


@dataclass
class BirkhoffPrediction(_Report):
    M: int
    H: int
    mean_main: float
    variance_main: float
    truncated: bool


def fejer_cutoff(M: int, degree: int) -> int:
    return int(math.floor(M * math.log(M) ** (2 * degree + 1))) if M > 1 else 1


def predicted_birkhoff_moments(model: FourierModel, alpha, M: int, degree: int | None = None,
                               allow_truncated: bool = False, chunk_size: int = DEFAULT_CHUNK_SIZE,
                               workers: int | None = None) -> BirkhoffPrediction:
    """Fejer-weighted main term of A_M and the diagonal main term of B_M^2."""
    src = as_source(alpha)
    d = declared_degree(src) if degree is None else degree
    H = fejer_cutoff(M, d)
    truncated = model.cutoff < H - 1
    if truncated and not allow_truncated:
        raise TruncationFlagged(f"model cutoff {model.cutoff} < H - 1 = {H - 1}; pass allow_truncated")
    top = min(H - 1, model.cutoff)
    a = resolve_alpha(src, max(top, M))
    coeffs = model.coefficients
    mean_parts = []
    var_parts = []
    for ch in iter_orbit(a, max(top, M), chunk_size, workers):
        m = ch.indices
        guard_array(ch.dist, m, a)
        idx = m.astype(np.int64) - 1
        if ch.start < top:
            sel = m <= top
            c = coeffs[idx[sel]]
            # e(x)/(1 - e(x)) = -1/2 + (i/2) cot(pi x); m and -m combine to 2 Re
            sign = np.where(ch.frac[sel] < 0.5, 1.0, -1.0)
            cot = sign / np.tan(np.pi * ch.dist[sel])
            g = -0.5 + 0.5j * cot
            w = 1.0 - m[sel] / H
            mean_parts.append(2.0 * w * (c * g).real)
        if ch.start < M:
            sel = m <= min(M, model.cutoff)
            c = coeffs[idx[sel]]
            var_parts.append(np.abs(c) ** 2 / (2.0 * PI2 * ch.dist[sel] ** 2))
    # correctly rounded totals do not depend on how the range was chunked
    mean_main = math.fsum(np.concatenate(mean_parts)) if mean_parts else 0.0
    var_main = math.fsum(np.concatenate(var_parts)) if var_parts else 0.0
    return BirkhoffPrediction(M, H, mean_main, var_main, truncated)


# ---------------------------------------------------------------- interval indicators


@dataclass
class BUPoint(_Report):
    M: int
    mean: float
    variance: float
    ratio: float
    predicted_variance: float
    predicted_ratio: float


def bu_variance_check(alpha, length: float, M_grid, a: float = 0.0, **kw) -> list[BUPoint]:
    """B_M^2 / log M of the indicator sum for [a, a + length] over a grid, with the main-term prediction."""
    src = as_source(alpha)
    grid = [int(M) for M in M_grid]
    kind = SummandKind.indicator(a, a + length)
    series = prefix_stream(kind, src, grid[-1], **kw)
    terms = diophantine_terms(src, grid[-1], **kw)
    m = np.arange(1, grid[-1] + 1, dtype=float)
    # |f^(m)|^2 / (2 pi^2 ||m alpha||^2) = sin^2(pi m L) / (2 pi^4 m^2 ||m alpha||^2)
    pred_terms = terms * 4.0 * np.sin(np.pi * m * length) ** 2 / PI2
    pred_prefix = np.cumsum(pred_terms)
    out = []
    for M, mean, var in grid_moments(series.values, grid):
        pv = float(pred_prefix[M - 1])
        out.append(BUPoint(M, mean, var, var / math.log(M), pv, pv / math.log(M)))
    return out


# ---------------------------------------------------------------- random alpha, Levy limit


def _ae_one(args):
    seed, k, bits = args
    src = PartialQuotientSource.gauss_random(seed, bits)
    qs = partial_quotients(src, k)
    stat = LEVY_SCALE * math.fsum(float(a) * a for a in qs) / (k * k)
    r = 1.0
    logq = 0.0
    for a in qs:  # q_l / q_{l-1} = a_l + q_{l-2}/q_{l-1}
        r = a + 1.0 / r if logq else float(a)
        logq += math.log(r)
    return stat, logq


def ae_bits(k: int) -> int:
    """Random bits that comfortably resolve k quotients (log q_k ~ 1.19 k)."""
    return 4 * k + 1024


def ae_experiment(seeds, k: int, bits: int | None = None, workers: int | None = None) -> DistributionReport:
    """(2 log^2 2 / pi) (a_1^2 + ... + a_k^2) / k^2 over random alpha, against the Levy law.

    Also reports the spread of (log q_k - pi^2 k / (12 log 2)) / sqrt(k).
    """
    seeds = list(seeds)
    if k < 1 or not seeds:
        raise ValueError("need k >= 1 and at least one seed")
    bits = bits or ae_bits(k)
    tasks = [(int(s), k, bits) for s in seeds]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_ae_one, tasks))
    else:
        results = [_ae_one(t) for t in tasks]
    stats = np.array([r[0] for r in results])
    centred = np.array([(r[1] - PI2 * k / (12.0 * math.log(2.0))) / math.sqrt(k) for r in results])
    return distribution_report(stats, "Levy", extra={
        "k": k, "seeds": len(seeds), "bits": bits,
        "logq_centred_mean": float(centred.mean()),
        "logq_centred_std": float(centred.std(ddof=1)) if len(centred) > 1 else 0.0,
    })


# ---------------------------------------------------------------- Euler's number


@dataclass
class EulerDiagnostics(_Report):
    M: int
    mean: float
    second_moment: float
    second_moment_main: float
    max: float
    min: float
    extreme_main: float


def euler_diagnostics(series: BirkhoffSeries, M: int | None = None) -> EulerDiagnostics:
    """Moments and extremes of log P_N(e) against their leading terms (ratios only)."""
    M = M or len(series)
    v = series.values[:M]
    x = math.log(M) / math.log(math.log(M))
    return EulerDiagnostics(
        M=M, mean=math.fsum(v) / M, second_moment=math.fsum(v * v) / M,
        second_moment_main=PI2 / 540.0 * x**3, max=float(v.max()), min=float(v.min()),
        extreme_main=V_CONSTANT * x**2,
    )
