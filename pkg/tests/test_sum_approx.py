import logging
import math

import numpy as np
import pytest

from ggsum import distributions, montecarlo, sum_approx
from ggsum.distributions import GGParams
from ggsum.error_manager import IllConditionedError, ParameterRangeError, ValidationError
from ggsum.montecarlo import MCSpec
from ggsum.sum_approx import IIDSumSpec, INIDSumSpec


def random_inid_specs(count, seed=2024):
    """Valid specs with L <= 4, m_l <= 4 and Gamma scales at least a factor 1.8 apart."""
    rng = np.random.default_rng(seed)
    specs = []
    for _ in range(count):
        L = int(rng.integers(1, 5))
        thetas = rng.permutation([0.5, 1.0, 2.0, 4.0])[:L] * rng.uniform(0.95, 1.05, L)
        ms = rng.integers(1, 5, L)
        k = float(rng.choice([0.5, 1.0, 2.0, 5.0]))
        specs.append(INIDSumSpec(k, tuple((int(m), float(m * t)) for m, t in zip(ms, thetas))))
    return specs


# ---------------------------------------------------------------------------
# closed-form adjustment

def test_adjustment_regression_values():
    assert sum_approx.adjustment_regression(1, 5.0, 2.0) == 0.0
    assert sum_approx.adjustment_regression(2, 5.0, 2.0) == pytest.approx(-1.64811, abs=1e-5)
    assert sum_approx.adjustment_regression(4, 4.0, 1.0) == pytest.approx(-5.94389, abs=1e-5)
    with pytest.raises(ValidationError):
        sum_approx.adjustment_regression(2, 2.0, 5.0)


def test_approx_sum_iid_moves_the_larger_shape():
    law = sum_approx.approx_sum_iid(IIDSumSpec(2, GGParams(2.0, 5.0, 1.0)))
    assert law.k == pytest.approx(4.0)
    assert law.m == pytest.approx(8.35189, abs=1e-5)
    assert law.omega == pytest.approx(2.0)

    law = sum_approx.approx_sum_iid(IIDSumSpec(4, GGParams(1.0, 4.0, 1.0)))
    assert law.k == pytest.approx(4.0)
    assert law.m == pytest.approx(10.05611, abs=1e-5)
    assert law.omega == pytest.approx(4.0)


def test_approx_sum_iid_single_variate_is_unchanged():
    base = GGParams(2.0, 5.0, 1.5)
    assert sum_approx.approx_sum_iid(IIDSumSpec(1, base)) == base
    assert sum_approx.approx_sum_iid(IIDSumSpec(1, base), "moment_matching") == base


@pytest.mark.parametrize("L, k, m, omega", [(2, 2.0, 5.0, 1.0), (3, 0.7, 3.0, 2.5), (6, 10.0, 1.5, 0.3)])
def test_approx_sum_iid_preserves_the_mean(L, k, m, omega):
    law = sum_approx.approx_sum_iid(IIDSumSpec(L, GGParams(k, m, omega)))
    assert law.omega == pytest.approx(L * omega, rel=1e-14)
    assert sorted([law.k, law.m])[0] > 0


def test_approx_sum_iid_rejects_nonpositive_shape():
    with pytest.raises(ParameterRangeError):
        sum_approx.approx_sum_iid(IIDSumSpec(20, GGParams(1.0, 0.01, 1.0)))


def test_approx_sum_iid_unknown_method():
    with pytest.raises(ValidationError):
        sum_approx.approx_sum_iid(IIDSumSpec(2, GGParams(2.0, 5.0, 1.0)), "bogus")


def test_sum_spec_validation():
    with pytest.raises(ValidationError):
        IIDSumSpec(0, GGParams(1.0, 1.0, 1.0))
    with pytest.raises(ValidationError):
        INIDSumSpec(2.0, ((1.5, 1.0), (2, 1.0)))
    with pytest.raises(ValidationError):
        INIDSumSpec(2.0, ((1, 1.0), (2, -1.0)))
    with pytest.raises(ValidationError):
        INIDSumSpec(0.0, ((1, 1.0),))
    assert INIDSumSpec(2.0, ((1.0, 1.0), (3, 2.0))).per_variate == ((1, 1.0), (3, 2.0))


# ---------------------------------------------------------------------------
# moments and moment matching

def test_exact_sum_moments():
    spec = IIDSumSpec(2, GGParams(2.0, 5.0, 1.0))
    moments = sum_approx.sum_moments_exact(spec, 2)
    assert moments[0] == pytest.approx(2.0, rel=1e-14)
    # 2·E[γ²] + 2·E[γ]² with E[γ²] = (1 + 1/2)(1 + 1/5) = 1.8
    assert moments[1] == pytest.approx(5.6, rel=1e-12)

    base = GGParams(2.0, 5.0, 3.0)
    single = sum_approx.sum_moments_exact(IIDSumSpec(1, base), 4)
    assert single == pytest.approx([distributions.gg_moment(base, n) for n in range(1, 5)], rel=1e-14)


def test_convolution_matches_multinomial_enumeration():
    spec = INIDSumSpec(1.5, ((1, 1.0), (2, 0.6), (3, 0.4)))
    exact = sum_approx.sum_moments_exact(spec, 6)
    enumerated = sum_approx.sum_moments_multinomial(spec, 6)
    assert exact == pytest.approx(enumerated, rel=1e-12)


def test_moment_order_is_bounded():
    spec = IIDSumSpec(2, GGParams(2.0, 5.0, 1.0))
    for bad in (0, 9, 2.5):
        with pytest.raises(ValidationError):
            sum_approx.sum_moments_exact(spec, bad)


def test_solve_adjustment_near_regression_value():
    spec = IIDSumSpec(2, GGParams(2.0, 5.0, 1.0))
    eps = sum_approx.solve_adjustment(spec)
    regression = sum_approx.adjustment_regression(2, 5.0, 2.0)
    assert eps == pytest.approx(regression, abs=0.5)
    best = sum_approx.adjustment_objective_value(spec, eps)
    assert best <= sum_approx.adjustment_objective_value(spec, 0.0)
    assert best <= sum_approx.adjustment_objective_value(spec, regression)


def test_solve_adjustment_absolute_mode_and_single_variate():
    spec = IIDSumSpec(3, GGParams(1.0, 4.0, 2.0))
    eps = sum_approx.solve_adjustment(spec, mode="absolute")
    assert sum_approx.adjustment_objective_value(spec, eps, "absolute") <= \
        sum_approx.adjustment_objective_value(spec, 0.0, "absolute")
    assert sum_approx.solve_adjustment(IIDSumSpec(1, GGParams(1.0, 4.0, 2.0))) == 0.0
    with pytest.raises(ValidationError):
        sum_approx.solve_adjustment(spec, mode="squared")


def test_moment_matching_method():
    spec = IIDSumSpec(2, GGParams(2.0, 5.0, 1.0))
    law = sum_approx.approx_sum_iid(spec, "moment_matching")
    assert law.k == 4.0
    assert law.omega == 2.0
    assert law.m == pytest.approx(10.0 + sum_approx.solve_adjustment(spec))


# ---------------------------------------------------------------------------
# approximation error statistics

def test_error_moments_closed_form():
    assert sum_approx.error_moments(IIDSumSpec(2, GGParams(2.0, 5.0, 1.0))).variance == pytest.approx(0.1)
    assert sum_approx.error_moments(IIDSumSpec(5, GGParams(2.0, 5.0, 3.0))).variance == pytest.approx(3.6)
    moments = sum_approx.error_moments(IIDSumSpec(1, GGParams(2.0, 5.0, 3.0)))
    assert moments.mean == 0.0 and moments.variance == 0.0


def test_error_variance_decreases_with_shapes():
    variances = [sum_approx.error_moments(IIDSumSpec(3, GGParams(k, m, 1.0))).variance
                 for k, m in ((1.0, 1.0), (2.0, 1.0), (2.0, 3.0), (5.0, 3.0))]
    assert all(b < a for a, b in zip(variances[:-1], variances[1:]))


def test_mc_error_moments_single_variate_is_exact():
    estimate = sum_approx.mc_error_moments(IIDSumSpec(1, GGParams(2.0, 5.0, 1.0)), 10 ** 4, seed=3)
    assert estimate.mean == 0.0
    assert estimate.variance == 0.0


def test_mc_error_moments_is_deterministic_and_validated():
    spec = IIDSumSpec(2, GGParams(2.0, 5.0, 1.0))
    first = sum_approx.mc_error_moments(spec, 20000, seed=11, chunk_size=4096)
    second = sum_approx.mc_error_moments(spec, 20000, seed=11, chunk_size=4096)
    assert first == second
    with pytest.raises(ValidationError):
        sum_approx.mc_error_moments(spec, 5000, seed=11)


@pytest.mark.parametrize("L, variance", [(2, 0.1), (4, 0.3)])
def test_mc_error_moments_match_closed_form(L, variance):
    estimate = sum_approx.mc_error_moments(IIDSumSpec(L, GGParams(2.0, 5.0, 1.0)), 10 ** 6, seed=1)
    assert abs(estimate.mean) <= 3 * estimate.mean_se
    assert abs(estimate.variance - variance) <= 3 * estimate.variance_se
    assert estimate.n_samples == 10 ** 6


def test_fit_recovers_coefficients_from_noise_free_optima(monkeypatch):
    def regression_optimum(spec, mode="relative"):
        hi, lo = max(spec.base.k, spec.base.m), min(spec.base.k, spec.base.m)
        return sum_approx.adjustment_regression(spec.L, hi, lo)

    monkeypatch.setattr(sum_approx, "solve_adjustment", regression_optimum)
    grid = [(L, k, m) for L in (2, 3) for k in (1.0, 2.0, 4.0, 6.0) for m in (0.5, 1.0, 2.0)]
    fit = sum_approx.fit_adjustment_regression(grid)
    assert fit.coefficients == pytest.approx(sum_approx.REGRESSION_COEFFICIENTS, abs=1e-6)
    assert fit.rms_residual < 1e-8
    assert fit.n_points == len(grid)
    assert fit.evaluate(2, 5.0, 2.0) == pytest.approx(-1.64811, abs=1e-4)


def test_fit_on_moment_matching_optima():
    grid = [(L, k, m) for L in (2, 3) for k in (1.0, 3.0) for m in (1.0, 2.0, 5.0)]
    fit = sum_approx.fit_adjustment_regression(grid)
    assert len(fit.coefficients) == 5
    assert math.isfinite(fit.rms_residual)
    with pytest.raises(ValidationError):
        sum_approx.fit_adjustment_regression([(1, 2.0, 5.0)] * 5)
    with pytest.raises(ValidationError):
        sum_approx.fit_adjustment_regression(grid[:3])


# ---------------------------------------------------------------------------
# signed mixtures

def test_weights_single_variate():
    assert sum_approx.gamma_sum_weights(INIDSumSpec(2.0, ((3, 1.5),))) == [(1, 1, 0.0), (1, 2, 0.0), (1, 3, 1.0)]


def test_weights_two_exponentials():
    weights = sum_approx.gamma_sum_weights(INIDSumSpec(1.0, ((1, 1.0), (1, 2.0))))
    assert [(i, j) for i, j, _ in weights] == [(1, 1), (2, 1)]
    assert weights[0][2] == pytest.approx(-1.0, abs=1e-12)
    assert weights[1][2] == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("spec", random_inid_specs(50))
def test_weights_sum_to_one_and_mixture_keeps_the_mean(spec):
    weights = sum_approx.gamma_sum_weights(spec)
    assert math.fsum(w for _, _, w in weights) == pytest.approx(1.0, abs=1e-9)
    mix = sum_approx.approx_sum_inid(spec)
    total_mean = math.fsum(omega for _, omega in spec.per_variate)
    assert mix.mean == pytest.approx(total_mean, abs=1e-9 * max(1.0, total_mean))
    assert sum_approx.mixture_moment(mix, 1) == pytest.approx(total_mean, abs=1e-9 * max(1.0, total_mean))


@pytest.mark.parametrize("spec", random_inid_specs(8, seed=7))
def test_mixture_pdf_is_nonnegative(spec):
    mix = sum_approx.approx_sum_inid(spec)
    total_mean = sum(omega for _, omega in spec.per_variate)
    xs = total_mean * np.arange(1, 501) / 100.0
    assert np.min(sum_approx.mixture_pdf(mix, xs)) >= -1e-9


def test_equal_scales_are_merged():
    # θ = (1, 1, 3): Gamma(3, 1) + Gamma(1, 3)
    spec = INIDSumSpec(2.0, ((1, 1.0), (2, 2.0), (1, 3.0)))
    mix = sum_approx.approx_sum_inid(spec)
    assert mix.groups == ((1, 2), (3,))
    assert [(c.i, c.j) for c in mix.components] == [(1, 1), (1, 2), (1, 3), (3, 1)]
    assert mix.total_weight == pytest.approx(1.0, abs=1e-12)
    assert mix.mean == pytest.approx(6.0, rel=1e-12)


def test_identical_scales_are_rejected():
    with pytest.raises(IllConditionedError):
        sum_approx.approx_sum_inid(INIDSumSpec(2.0, ((1, 1.0), (2, 2.0))))


def test_clustered_scales(caplog):
    with caplog.at_level(logging.WARNING, logger="ggsum.sum_approx"):
        mix = sum_approx.approx_sum_inid(INIDSumSpec(1.0, ((1, 1.0), (1, 1.00005))))
    assert len(mix.warnings) == 1
    assert "clustered" in caplog.text
    assert mix.total_weight == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(IllConditionedError):
        sum_approx.approx_sum_inid(INIDSumSpec(1.0, ((1, 1.0), (1, 1.0 + 1e-12))))


def test_mixture_components_and_roles():
    spec = INIDSumSpec(1.0, ((1, 1.0), (1, 2.0)))
    mix = sum_approx.approx_sum_inid(spec)
    assert [c.params for c in mix.components] == [GGParams(2.0, 1, 1.0), GGParams(2.0, 1, 2.0)]
    assert mix.mean == pytest.approx(3.0)

    swapped = sum_approx.approx_sum_inid(INIDSumSpec(1.0, ((1, 1.0), (1, 2.0)), swap_roles=True))
    assert [c.params for c in swapped.components] == [GGParams(1, 2.0, 1.0), GGParams(1, 2.0, 2.0)]


def test_mixture_cdf_limits_and_grid():
    mix = sum_approx.approx_sum_inid(INIDSumSpec(2.0, ((1, 1.0), (2, 0.6), (3, 0.4))))
    assert sum_approx.mixture_cdf(mix, 0.0) == 0.0
    assert sum_approx.mixture_cdf(mix, math.inf) == pytest.approx(1.0, abs=1e-12)
    xs = np.linspace(0.0, 6.0, 13)
    grid = sum_approx.mixture_cdf_grid(mix, xs)
    assert np.all(np.diff(grid) >= 0)
    for x, value in zip(xs, grid):
        assert value == pytest.approx(sum_approx.mixture_cdf(mix, x), abs=1e-8)


def test_mixture_expectation_of_identity_is_the_mean():
    mix = sum_approx.approx_sum_inid(INIDSumSpec(2.0, ((1, 1.0), (2, 0.6))))
    assert sum_approx.mixture_expect(lambda x: x, mix) == pytest.approx(1.6, rel=1e-8)


# ---------------------------------------------------------------------------
# distribution fidelity against Monte Carlo

@pytest.mark.slow
@pytest.mark.parametrize("L", [2, 3, 4])
def test_iid_approximation_ks_distance(L):
    spec = IIDSumSpec(L, GGParams(2.0, 5.0, 1.0))
    law = sum_approx.approx_sum_iid(spec)
    samples = montecarlo.mc_sum_samples(spec, MCSpec(master_seed=2024, n_samples=10 ** 6))
    assert montecarlo.ks_distance(samples, lambda xs: distributions.gg_cdf_grid(law, xs)) <= 0.02


@pytest.mark.slow
def test_inid_mixture_ks_distance():
    spec = INIDSumSpec(2.0, ((1, 1.0), (2, math.exp(-0.5)), (3, math.exp(-1.0))))
    mix = sum_approx.approx_sum_inid(spec)
    samples = montecarlo.mc_sum_samples(spec, MCSpec(master_seed=2024, n_samples=2 * 10 ** 5))
    # The mixture replaces independent shadowing by a common one; a loose sanity bound
    assert montecarlo.ks_distance(samples, lambda xs: sum_approx.mixture_cdf_grid(mix, xs), n_points=200) <= 0.1


@pytest.mark.slow
def test_two_exponential_mixture_ks_distance():
    # k = 1 is the heaviest shadowing; the common-shadowing error is about 0.03 here
    spec = INIDSumSpec(1.0, ((1, 1.0), (1, 2.0)))
    mix = sum_approx.approx_sum_inid(spec)
    samples = montecarlo.mc_sum_samples(spec, MCSpec(master_seed=2024, n_samples=10 ** 6))
    assert montecarlo.ks_distance(samples, lambda xs: sum_approx.mixture_cdf_grid(mix, xs)) <= 0.05
