import time

import mpmath as mp
import pytest

from sudlerlab.constants import V_CONSTANT, _near_zero, full_period_integral, v_constant

V_ORACLE = 0.16153297360972525704681825536  # Cl_2(pi/3) / (2 pi), mpmath


def test_v_matches_clausen_oracle():
    assert abs(v_constant(1e-12) - V_ORACLE) < 1e-12
    assert V_CONSTANT == pytest.approx(V_ORACLE, abs=1e-15)


@pytest.mark.parametrize("tol", [1e-4, 1e-8, 1e-12])
def test_v_within_requested_tolerance(tol):
    assert abs(v_constant(tol) - V_ORACLE) <= tol


def test_full_period_is_zero():
    assert abs(full_period_integral(1e-10)) <= 1e-10


def test_near_zero_piece_matches_quadrature():
    with mp.workdps(30):
        ref = mp.quad(lambda x: mp.log(2 * mp.sin(mp.pi * x)), [0, mp.mpf("1e-4")])
    assert _near_zero(1e-4) == pytest.approx(float(ref), rel=1e-13)


def test_tolerance_range_enforced():
    for bad in (1e-13, 1e-3):
        with pytest.raises(ValueError):
            v_constant(bad)


def test_fast():
    t = time.perf_counter()
    v_constant(1e-12)
    assert time.perf_counter() - t < 1.0
