import math

import numpy as np
import pytest
from scipy import stats as sps

from sudlerlab import stats
from sudlerlab.birkhoff import SummandKind, prefix_stream
from sudlerlab.cf import PartialQuotientSource, parse_alpha
from sudlerlab.errors import HypothesisViolated, TruncationFlagged, Unsupported

SIGMA2_GOLDEN = 0.15287173757719829  # mpmath, closed form
SIGMA2_SQRT3 = 0.18028350194634708
LEVY_AT_1 = 0.31731050786291410  # mpmath quadrature of the density


def test_temporal_moments_trivial():
    r = stats.temporal_moments(np.full(7, 2.5))
    assert r.mean == 2.5 and r.variance == 0.0
    r = stats.temporal_moments(np.array([0.0, 1.0]))
    assert (r.mean, r.variance) == (0.5, 0.25)


def test_argmax_ties_smallest_N():
    r = stats.temporal_moments(np.array([1.0, 3.0, 3.0, -1.0, -1.0]))
    assert r.argmax == 2 and r.argmin == 4
    assert r.min <= r.mean <= r.max


def test_moment_prediction_golden():
    s = prefix_stream(SummandKind.log_sudler(), "golden", 10**4)
    r = stats.temporal_moments(s)
    assert r.predicted_mean == pytest.approx(0.5 * math.log(1e4))
    assert abs(r.mean - r.predicted_mean) < math.log(math.log(1e4))
    assert r.residuals["mean_error_scale"] == pytest.approx(math.log(math.log(1e4)))


def test_one_pass_variance_agrees(golden_log_p):
    v = golden_log_p.values
    two = stats.temporal_moments(v, predict=False).variance
    mean, one = stats.variance_one_pass(v)
    assert one >= 0 and abs(one - two) <= 1e-8 * two


def test_dioph_first_term():
    assert stats.diophantine_sum("golden", 1) == pytest.approx(0.08680821550321159, rel=1e-14)


def test_dioph_prefix_monotone_and_log_bounded():
    p = stats.diophantine_prefix("golden", 10**6)
    assert np.all(np.diff(p) >= 0)
    ratios = [p[M - 1] / math.log(M) for M in (10**3, 10**4, 10**5, 10**6)]
    assert 0.12 < min(ratios) and max(ratios) < 0.19


def test_closed_forms():
    assert stats.sigma2_closed_form("golden") == pytest.approx(SIGMA2_GOLDEN, rel=1e-15)
    assert stats.sigma2_closed_form("sqrt3") == pytest.approx(SIGMA2_SQRT3, rel=1e-15)
    with pytest.raises(Unsupported):
        stats.sigma2_closed_form("e")


def test_fit_slope_identity():
    x = np.log([2.0**j for j in range(10, 15)])
    slope, intercept = stats.fit_slope(x, 0.3 * x + 1.5)
    assert slope == pytest.approx(0.3) and intercept == pytest.approx(1.5)


def test_sigma2_grid_validation():
    with pytest.raises(ValueError):
        stats.sigma2_estimate("golden", [1024, 2048])
    with pytest.raises(ValueError):
        stats.sigma2_estimate("golden", [4096, 2048, 8192])


def test_predicted_mean_variance_golden():
    p = stats.predicted_mean_variance("golden", 10**6)
    assert p.mean == pytest.approx(6.907755278982137)
    assert p.variance_main == stats.diophantine_sum("golden", 10**6)
    assert p.max_quotient_near_k == 1


def test_hypothesis_required():
    with pytest.raises(HypothesisViolated):
        stats.predicted_mean_variance("random:1", 1000)
    with pytest.raises(HypothesisViolated):
        stats.predicted_mean_variance("list:1,2,3", 1000)
    src = PartialQuotientSource.explicit([1] * 300, degree=0)
    assert stats.predicted_mean_variance(src, 1000).k == 15


def test_ks_matches_scipy():
    x = np.random.default_rng(1).normal(size=5000)
    assert stats.ks_distance(x, stats.normal_cdf) == pytest.approx(sps.kstest(x, "norm").statistic, abs=1e-14)


def test_ks_synthetic_normal_below_dkw():
    x = np.random.default_rng(2).normal(size=10**5)
    ks = stats.distribution_report(x, "StandardNormal").ks_distance
    assert ks < 0.01 and ks < stats.dkw_bound(10**5, 0.99)


def test_ks_sketch_for_large_samples():
    x = np.random.default_rng(3).normal(size=2 * 10**6)
    r = stats.distribution_report(x, "StandardNormal")
    assert r.count == 2 * 10**6 and r.ks_distance < 0.005


def test_clt_report_preconditions(golden_log_p):
    with pytest.raises(ValueError):
        stats.clt_report(golden_log_p, 10**4, 0.0)
    with pytest.raises(ValueError):
        stats.clt_report(golden_log_p, 50, SIGMA2_GOLDEN)


def test_levy_cdf():
    assert stats.levy_cdf(0.0) == 0.0
    assert stats.levy_cdf(-1.0) == 0.0
    assert stats.levy_cdf(1e12) == pytest.approx(1.0, abs=1e-5)
    assert stats.levy_cdf(1.0) == pytest.approx(LEVY_AT_1, abs=1e-15)


def test_symmetry_boundary_indexing():
    # N = q_k - 1 pairs with P_0 = 1
    r = stats.symmetry_check("golden", 10)
    s = prefix_stream(SummandKind.log_sudler(), "golden", r.q_k - 1)
    assert abs(s.value(r.q_k - 1) - math.log(r.q_k)) <= r.value


def test_symmetry_sqrt3_bounded():
    vals = [stats.symmetry_check("sqrt:3", k).value for k in (12, 16, 20)]
    assert max(vals) < 1.0


def test_extremes_report():
    r = stats.extreme_check("e", 15)
    assert r.q_k == 208524
    assert r.predicted == pytest.approx(stats.V_CONSTANT * sum([1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8, 1, 1, 10, 1]))
    assert abs(r.min - r.min_from_symmetry) < 0.5
    g = stats.extreme_check("golden", 20)
    assert g.predicted == pytest.approx(stats.V_CONSTANT * 20)


def test_pq_square_sum_random_seed():
    r = stats.pq_square_sum_check("random:11", 12)
    assert r.lhs > 0 and r.rhs > 0


def test_cross_moment_single_sample():
    assert stats.cross_moment("golden", 1).value == 0.0


def test_cross_moment_orthogonal():
    for spec in ("golden", "sqrt:3"):
        r = stats.cross_moment(spec, 10**6)
        assert abs(r.value) < 0.2 * r.scale_product


def test_fourier_models():
    saw = stats.FourierModel.sawtooth(50)
    assert abs(saw.coefficient(3)) == pytest.approx(1 / (6 * math.pi))
    assert saw.coefficient(-3) == saw.coefficient(3).conjugate()
    ind = stats.FourierModel.indicator(0.1, 0.6, 100)
    m = np.arange(1, 101)
    assert np.all(np.abs(ind.coefficients) <= ind.total_variation / m + 1e-15)
    assert np.allclose(np.abs(ind.coefficients) ** 2, np.sin(np.pi * m * 0.5) ** 2 / (np.pi * m) ** 2)


def test_predict_zero_model():
    p = stats.predicted_birkhoff_moments(stats.FourierModel.zero(10**5), "golden", 1000)
    assert (p.mean_main, p.variance_main) == (0.0, 0.0)


def test_predict_sawtooth_matches_dioph_sum():
    M = 10**4
    model = stats.FourierModel.sawtooth(stats.fejer_cutoff(M, 0))
    p = stats.predicted_birkhoff_moments(model, "golden", M)
    assert p.variance_main == pytest.approx(stats.diophantine_sum("golden", M) / math.pi**2, rel=1e-10)


def test_predict_sawtooth_mean_tracks_empirical():
    M = 10**4
    model = stats.FourierModel.sawtooth(stats.fejer_cutoff(M, 0))
    p = stats.predicted_birkhoff_moments(model, "sqrt:3", M)
    saw = prefix_stream(SummandKind.sawtooth(), "sqrt:3", M)
    # error term is O(V(f) (log log M)^2), about 5 here; the observed gap is 0.14
    assert abs(p.mean_main - saw.values.mean()) < 0.25


def test_predict_truncation_flag():
    with pytest.raises(TruncationFlagged):
        stats.predicted_birkhoff_moments(stats.FourierModel.sawtooth(100), "golden", 1000)
    p = stats.predicted_birkhoff_moments(stats.FourierModel.sawtooth(100), "golden", 1000, allow_truncated=True)
    assert p.truncated


def test_bu_prediction_agrees():
    pts = stats.bu_variance_check("golden", 0.5, [2**12, 2**16])
    for p in pts:
        assert abs(p.variance - p.predicted_variance) < math.sqrt(p.predicted_variance) * math.log(p.M)


def test_ae_experiment_small():
    r = stats.ae_experiment(range(20), 100)
    assert r.count == 20 and r.reference == "Levy" and 0 <= r.ks_distance <= 1
    again = stats.ae_experiment(range(20), 100)
    assert again.to_dict() == r.to_dict()


def test_ae_statistic_definition():
    src = PartialQuotientSource.gauss_random(5, stats.ae_bits(100))
    from sudlerlab.cf import partial_quotients

    qs = partial_quotients(src, 100)
    r = stats.ae_experiment([5], 100)
    expected = 2 * math.log(2) ** 2 / math.pi * sum(a * a for a in qs) / 100**2
    assert r.quantiles[0][1] == pytest.approx(expected, rel=1e-15)


def test_euler_diagnostics_runs():
    s = prefix_stream(SummandKind.log_sudler(), parse_alpha("e"), 10**4)
    d = stats.euler_diagnostics(s)
    assert d.max >= d.mean >= d.min and d.second_moment_main > 0
