import math

import pytest

from sudlerlab.cf import (
    E_alpha,
    PartialQuotientSource,
    alpha_value,
    convergents,
    index_of,
    parse_alpha,
    partial_quotients,
    period_log_growth,
    sqrt_period,
)
from sudlerlab.errors import NotQuadratic, PrecisionExhausted, SpecParseError

from oracles import cf_quotients

E_DENOMINATORS = [1, 1, 3, 4, 7, 32, 39, 71, 465, 536, 1001, 8544, 9545, 18089, 190435, 208524, 398959, 4996032]


def test_golden_convergents_are_fibonacci():
    convs = convergents(parse_alpha("golden"), 5)
    assert [c.q for c in convs] == [1, 1, 2, 3, 5, 8]
    assert [c.p for c in convs] == [1, 2, 3, 5, 8, 13]


@pytest.mark.parametrize("spec", ["golden", "sqrt:2", "sqrt:3", "e"])
def test_quotients_match_euclid_oracle(spec):
    src = parse_alpha(spec)
    ref = cf_quotients(spec, 25)
    assert src.a0 == ref[0]
    assert partial_quotients(src, 24) == ref[1:]


def test_e_denominators_frozen():
    assert [c.q for c in convergents(parse_alpha("e"), 17)] == E_DENOMINATORS


def test_index_of_e_at_one_million():
    info = index_of(parse_alpha("e"), 10**6)
    assert info.k == 16 and info.convergents[16].q == 398959


def test_index_of_brackets_M():
    src = parse_alpha("sqrt:7")
    for M in (1, 2, 10, 999, 12345):
        info = index_of(src, M)
        assert info.convergents[info.k].q <= M < info.convergents[info.k + 1].q


def test_sqrt_periods():
    assert sqrt_period(2) == (1, (2,))
    assert sqrt_period(3) == (1, (1, 2))
    assert sqrt_period(7) == (2, (1, 1, 1, 4))


@pytest.mark.parametrize("bad", ["", "phi", "sqrt:4", "sqrt:1", "sqrt:x", "quadratic:1;1", "list:", "list:1,0",
                                 "random:", "quadratic:0;|"])
def test_parse_rejects(bad):
    with pytest.raises(SpecParseError) as exc:
        parse_alpha(bad)
    assert "grammar" in str(exc.value)


def test_parse_quadratic_with_preperiod():
    src = parse_alpha("quadratic:0;3|1,2")
    assert partial_quotients(src, 7) == [3, 1, 2, 1, 2, 1, 2]


def test_explicit_runs_dry():
    src = parse_alpha("list:1,2,3")
    assert partial_quotients(src, 3) == [1, 2, 3]
    with pytest.raises(PrecisionExhausted):
        partial_quotients(src, 4)


def test_random_source_is_deterministic_and_finite():
    a = partial_quotients(parse_alpha("random:7"), 50)
    b = partial_quotients(PartialQuotientSource.gauss_random(7), 50)
    assert a == b
    with pytest.raises(PrecisionExhausted):
        partial_quotients(PartialQuotientSource.gauss_random(7, 64), 200)


def test_random_quotients_hold_for_whole_interval():
    import random
    from fractions import Fraction

    bits = 256
    src = PartialQuotientSource.gauss_random(3, bits)
    r = random.Random(3).getrandbits(bits)
    qs = partial_quotients(src, 20)
    for num in (r, r + 1):
        x = Fraction(num, 1 << bits)
        for a in qs:
            x = 1 / x
            assert int(x) == a
            x -= int(x)


def test_alpha_value_matches_float():
    phi = (math.sqrt(5) - 1) / 2
    x = alpha_value(parse_alpha("golden"), 192)
    assert abs(float(x) - phi) < 1e-16
    assert x.err_ulp <= 2


def test_alpha_value_bounds():
    with pytest.raises(ValueError):
        alpha_value(parse_alpha("golden"), 32)
    with pytest.raises(ValueError):
        alpha_value(parse_alpha("golden"), 2048)


def test_E_alpha_sqrt3_closed_form():
    assert E_alpha(parse_alpha("sqrt:3")) == pytest.approx(0.06327714312501724, rel=1e-14)


def test_E_alpha_odd_period_is_zero():
    assert E_alpha(parse_alpha("golden")) == 0.0
    assert E_alpha(parse_alpha("sqrt:2")) == 0.0


def test_E_alpha_needs_quadratic():
    with pytest.raises(NotQuadratic):
        E_alpha(parse_alpha("e"))


def test_period_log_growth_golden():
    assert period_log_growth((1,)) == pytest.approx(math.log((1 + math.sqrt(5)) / 2), rel=1e-15)
    assert period_log_growth((1, 2)) == pytest.approx(math.log(2 + math.sqrt(3)), rel=1e-15)
