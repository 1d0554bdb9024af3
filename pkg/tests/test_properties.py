"""Property-based checks on random sources and inputs."""

from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from sudlerlab import stats
from sudlerlab.birkhoff import SummandKind, prefix_stream
from sudlerlab.cf import PartialQuotientSource, alpha_value, convergents, partial_quotients
from sudlerlab.fixedpoint import FixedPointFraction
from sudlerlab.rotation import orbit_arrays, orbit_error

periods = st.lists(st.integers(1, 9), min_size=1, max_size=4)


@settings(max_examples=40, deadline=None)
@given(periods, st.lists(st.integers(1, 9), max_size=3))
def test_convergent_determinant(period, pre):
    src = PartialQuotientSource.quadratic(period, pre)
    convs = convergents(src, 12)
    for prev, cur in zip(convs, convs[1:]):
        assert cur.p * prev.q - prev.p * cur.q == (-1) ** (cur.k + 1)


@settings(max_examples=40, deadline=None)
@given(periods)
def test_alpha_value_within_bound(period):
    src = PartialQuotientSource.quadratic(period)
    x = alpha_value(src, 128)
    c = convergents(src, 200)[-1]  # q_200 > 2^130, far past 128 bits
    exact = Fraction(c.p, c.q)
    assert abs(Fraction(x.mantissa, 1 << 128) - exact) <= Fraction(x.err_ulp, 1 << 128)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3000))
def test_orbit_matches_exact_multiplication(seed, n):
    src = PartialQuotientSource.gauss_random(seed, 512)
    a = alpha_value(src, 192)
    frac, _, _ = orbit_arrays(a, n)
    exact = Fraction(a.mantissa * n % (1 << 192), 1 << 192)
    assert frac[-1] == float(exact)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_random_quotients_positive(seed):
    qs = partial_quotients(PartialQuotientSource.gauss_random(seed, 1024), 100)
    assert all(a >= 1 for a in qs)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 1000), st.floats(0.0, 0.9), st.floats(0.05, 0.5))
def test_indicator_sum_counts(seed, a, length):
    src = PartialQuotientSource.gauss_random(seed, 512)
    kind = SummandKind.indicator(a, min(a + length, 1.0) if a + length < 1.0 else 0.999)
    try:
        s = prefix_stream(kind, src, 500)
    except Exception as exc:  # grazing is legitimate, anything else is not
        assert type(exc).__name__ == "SingularitySuspect"
        return
    frac, _, _ = orbit_arrays(src, 500)
    inside = (frac >= kind.a) & (frac <= kind.b)
    assert abs(s.value(500) - (inside.sum() - 500 * kind.length)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=300))
def test_moment_invariants(values):
    v = np.array(values)
    r = stats.temporal_moments(v)
    assert r.variance >= 0
    assert r.min - 1e-9 <= r.mean <= r.max + 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 10**9))
def test_orbit_error_linear(n):
    a = FixedPointFraction(12345, 64, 1)
    assert orbit_error(a, n) == n * 2 * 2.0**-64


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=200))
def test_ks_in_unit_interval(samples):
    d = stats.ks_distance(samples, stats.normal_cdf)
    assert 0.0 <= d <= 1.0
