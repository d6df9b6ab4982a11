import math

import numpy as np
import pytest

from ggsum import montecarlo
from ggsum.distributions import GGParams, make_stream
from ggsum.error_manager import CurveRangeError, ValidationError
from ggsum.montecarlo import MCSpec
from ggsum.reporting import MetricCurve
from ggsum.sum_approx import IIDSumSpec, INIDSumSpec
from ggsum.systems_ow import OWConfig
from ggsum.systems_rf import Metric, Modulation, MRCConfig


def curve(abscissa, values):
    return MetricCurve('snr_db', 'ber', list(abscissa), list(values))


def test_mc_spec_validation_and_chunks():
    mc = MCSpec(master_seed=5, n_samples=10, chunk_size=4)
    assert mc.chunks() == [(0, 4), (1, 4), (2, 2)]
    for bad in ({'n_samples': 0}, {'chunk_size': 1.5}, {'workers': 0}, {'master_seed': -1},
                {'master_seed': 2 ** 64}):
        with pytest.raises(ValidationError):
            MCSpec(**bad)


def test_estimates_do_not_depend_on_worker_count():
    cfg = MRCConfig.iid(2, 2.0, 5.0, 3.0)
    metric = Metric.ber(Modulation.BPSK)
    serial = montecarlo.mc_rf_metric(cfg, metric, MCSpec(master_seed=9, n_samples=50000, chunk_size=4096))
    threaded = montecarlo.mc_rf_metric(cfg, metric, MCSpec(master_seed=9, n_samples=50000, chunk_size=4096,
                                                           workers=4))
    assert serial == threaded


def test_reruns_are_bit_identical_and_seeds_matter():
    spec = INIDSumSpec(2.0, ((1, 1.0), (2, 0.5)))
    mc = MCSpec(master_seed=3, n_samples=20000, chunk_size=1000)
    first = montecarlo.mc_sum_samples(spec, mc)
    assert np.array_equal(first, montecarlo.mc_sum_samples(spec, mc))
    assert not np.array_equal(first, montecarlo.mc_sum_samples(spec, MCSpec(master_seed=4, n_samples=20000,
                                                                            chunk_size=1000)))
    assert first.shape == (20000,)


def test_sum_draws_follow_the_stream_order():
    # Chunk 0 draws every first factor before every second factor
    laws = [GGParams(2.0, 5.0, 1.0), GGParams(3.0, 1.0, 2.0)]
    rng = make_stream(12, 0)
    x = rng.gamma(np.array([2.0, 3.0]), 1.0 / np.array([2.0, 3.0]), (5, 2))
    y = rng.gamma(np.array([5.0, 1.0]), np.array([1.0, 2.0]) / np.array([5.0, 1.0]), (5, 2))
    expected = np.sum(x * y, axis=1)
    assert np.array_equal(montecarlo.sample_gg_sums(laws, make_stream(12, 0), 5), expected)


def test_sum_mean_matches():
    spec = IIDSumSpec(3, GGParams(2.0, 5.0, 1.5))
    samples = montecarlo.mc_sum_samples(spec, MCSpec(master_seed=1, n_samples=200000))
    se = np.std(samples) / math.sqrt(samples.size)
    assert abs(np.mean(samples) - 4.5) < 4 * se


def test_empirical_cdf():
    spec = IIDSumSpec(2, GGParams(2.0, 5.0, 1.0))
    ecdf = montecarlo.mc_sum_cdf(spec, [0.0, 1.0, 2.0, 1e6], MCSpec(n_samples=10000))
    assert ecdf.values[0] == 0.0
    assert ecdf.values[-1] == 1.0
    assert np.all(np.diff(ecdf.values) >= 0)
    assert np.all(np.diff(ecdf.samples) >= 0)
    with pytest.raises(ValidationError):
        montecarlo.mc_sum_cdf(spec, [2.0, 1.0], MCSpec(n_samples=100))


def test_probability_standard_error_is_binomial():
    cfg = MRCConfig.iid(1, 2.0, 5.0, 1.0)
    estimate = montecarlo.mc_rf_metric(cfg, Metric.outage(), MCSpec(n_samples=40000), gamma_th=1.0)
    p = estimate.value
    assert estimate.std_error == pytest.approx(math.sqrt(p * (1 - p) / 40000), rel=1e-12)
    assert estimate.n_samples == 40000
    with pytest.raises(ValidationError):
        montecarlo.mc_rf_metric(cfg, Metric.outage(), MCSpec(n_samples=100))


def test_standard_error_shrinks_with_samples():
    cfg = MRCConfig.iid(2, 2.0, 5.0, 2.0)
    metric = Metric.ber(Modulation.DBPSK)
    small = montecarlo.mc_rf_metric(cfg, metric, MCSpec(master_seed=2, n_samples=50000))
    large = montecarlo.mc_rf_metric(cfg, metric, MCSpec(master_seed=2, n_samples=200000))
    assert large.std_error == pytest.approx(small.std_error / 2, rel=0.2)


def test_semi_analytic_estimator_beats_bit_simulation():
    cfg = MRCConfig.iid(1, 2.0, 5.0, 10 ** 0.5)
    n = 100000
    semi = montecarlo.mc_rf_metric(cfg, Metric.ber(Modulation.BPSK), MCSpec(master_seed=8, n_samples=n))
    # Bit-level simulation of the same average: one Bernoulli decision per channel draw
    rng = make_stream(8, 0)
    snr = montecarlo.sample_gg_sums(cfg.branch_laws(), rng, n)
    errors = rng.random(n) < Modulation.BPSK.kernel(snr)
    p = errors.mean()
    bit_se = math.sqrt(p * (1 - p) / n)
    assert semi.std_error < bit_se
    assert abs(semi.value - p) < 4 * bit_se


def test_ow_estimators():
    cfg = OWConfig.iid(2, 1, 4.0, 1.0).with_mu(100.0)
    ber = montecarlo.mc_ow_metric(cfg, Metric.ber(), MCSpec(n_samples=20000))
    assert 0 < ber.value < 0.5
    outage = montecarlo.mc_ow_metric(cfg, Metric.outage(), MCSpec(n_samples=20000), h_th=10.0)
    assert 0 <= outage.value <= 1
    assert cfg.irradiance_threshold(100.0) == pytest.approx(2.0)


def test_ks_distance():
    rng = np.random.default_rng(0)
    samples = rng.uniform(size=100000)

    def uniform_cdf(xs):
        return np.clip(xs, 0.0, 1.0)

    def shifted_cdf(xs):
        return np.clip(xs - 0.1, 0.0, 1.0)

    assert montecarlo.ks_distance(samples, uniform_cdf) < 0.01
    assert montecarlo.ks_distance(samples, shifted_cdf) == pytest.approx(0.1, abs=0.01)
    with pytest.raises(ValidationError):
        montecarlo.ks_distance([], uniform_cdf)


def test_gap_of_identical_and_shifted_curves():
    x = np.arange(0.0, 21.0)
    values = 0.5 * 10 ** (-x / 4)
    assert montecarlo.gap_in_db(curve(x, values), curve(x, values), 1e-3) == 0.0
    assert montecarlo.gap_in_db(curve(x, values), curve(x + 1.0, values), 1e-3) == pytest.approx(1.0, abs=1e-9)


def test_crossing_skips_empty_monte_carlo_points():
    x = [0.0, 5.0, 10.0, 15.0]
    assert montecarlo.crossing_abscissa(x, [1e-1, 1e-3, 0.0, 0.0], 1e-2) == pytest.approx(2.5)
    assert montecarlo.crossing_abscissa(x, [1e-1, 1e-2, 1e-3, 1e-4], 1e-2) == pytest.approx(5.0)


def test_gap_outside_the_curve_range():
    x = np.arange(0.0, 5.0)
    values = 0.5 * 10 ** (-x / 10)
    with pytest.raises(CurveRangeError):
        montecarlo.gap_in_db(curve(x, values), curve(x, values), 1e-6)
    with pytest.raises(CurveRangeError):
        montecarlo.crossing_abscissa(x, np.zeros(5), 1e-3)
    with pytest.raises(ValidationError):
        montecarlo.gap_in_db(curve(x, values), curve(x, values), 1.5)
