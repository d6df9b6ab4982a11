"""
Seeded Monte Carlo oracle.

Sample n belongs to chunk n // chunk_size, and chunk c draws from the stream
make_stream(master_seed, c). Chunks may run on a thread pool; their partial
statistics are always combined in chunk order, so an estimate depends only on
(inputs, master_seed, n_samples, chunk_size) and never on the worker count.

BER estimators are semi-analytic: the conditional error probability is
averaged over sampled channel states instead of simulating bit decisions.
"""

import concurrent.futures
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import distributions, specfun
from .sum_approx import IIDSumSpec, INIDSumSpec
from .error_manager import CurveRangeError, ValidationError

# Setup logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MCSpec:
    """
    Monte Carlo run parameters.

    Attributes:
        master_seed (int): 64-bit nonnegative seed
        n_samples (int): Number of channel draws
        chunk_size (int): Draws per random stream
        workers (int): Threads used to evaluate chunks
    """

    master_seed: int = 1
    n_samples: int = 10 ** 6
    chunk_size: int = 2 ** 16
    workers: int = 1

    def __post_init__(self):
        for name in ('n_samples', 'chunk_size', 'workers'):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValidationError(f"MCSpec.{name} must be a positive integer, got {value}")
            object.__setattr__(self, name, int(value))
        if int(self.master_seed) != self.master_seed or not 0 <= self.master_seed < 2 ** 64:
            raise ValidationError(f"MCSpec.master_seed must be a 64-bit nonnegative integer, got {self.master_seed}")
        object.__setattr__(self, 'master_seed', int(self.master_seed))

    def chunks(self):
        """(chunk index, size) for every chunk, in order."""
        return [(c, min(self.chunk_size, self.n_samples - start))
                for c, start in enumerate(range(0, self.n_samples, self.chunk_size))]


@dataclass(frozen=True)
class MCEstimate:
    value: float
    std_error: float
    n_samples: int
    master_seed: int


@dataclass(frozen=True)
class EmpiricalCdf:
    """Empirical CDF at the requested points, with the sorted samples kept for KS checks."""

    points: np.ndarray
    values: np.ndarray
    samples: np.ndarray


def _map_chunks(mc, task):
    """
    Evaluate task(rng, size) for every chunk.

    Returns:
        list: Results ordered by chunk index
    """
    chunks = mc.chunks()
    if mc.workers == 1 or len(chunks) == 1:
        return [task(distributions.make_stream(mc.master_seed, c), size) for c, size in chunks]

    results = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=mc.workers) as executor:
        futures = {
            executor.submit(task, distributions.make_stream(mc.master_seed, c), size): c
            for c, size in chunks
        }
        for future in concurrent.futures.as_completed(futures):
            results[futures[future]] = future.result()
    return [results[c] for c, _ in chunks]


def _combine(stats):
    """Merge per-chunk (count, mean, M2) triples in order (pairwise update)."""
    count, mean, m2 = 0, 0.0, 0.0
    for n_b, mean_b, m2_b in stats:
        if n_b == 0:
            continue
        total = count + n_b
        delta = mean_b - mean
        mean += delta * n_b / total
        m2 += m2_b + delta * delta * count * n_b / total
        count = total
    return count, mean, m2


def _estimate(mc, sampler, probability):
    """
    Average sampler(rng, size) over all chunks.

    Args:
        mc (MCSpec): Run parameters
        sampler (callable): Returns one value per draw
        probability (bool): Values are indicators; use the binomial standard error
    """
    def task(rng, size):
        values = np.asarray(sampler(rng, size), dtype=float)
        mean = float(np.mean(values))
        return size, mean, float(np.sum((values - mean) ** 2))

    count, mean, m2 = _combine(_map_chunks(mc, task))
    if probability:
        std_error = math.sqrt(max(mean * (1.0 - mean), 0.0) / count)
    else:
        std_error = math.sqrt(m2 / (count - 1) / count) if count > 1 else math.nan
    return MCEstimate(value=mean, std_error=std_error, n_samples=count, master_seed=mc.master_seed)


def sample_gg_sums(laws, rng, size):
    """
    Draw ``size`` sums of independent GG variates.

    Every variate is Gamma(k, 1/k)·Gamma(m, Ω/m); all first factors are drawn
    before all second factors.
    """
    ks = np.array([p.k for p in laws])
    ms = np.array([p.m for p in laws])
    omegas = np.array([p.omega for p in laws])
    shape = (size, len(laws))
    x = rng.gamma(ks, 1.0 / ks, shape)
    y = rng.gamma(ms, omegas / ms, shape)
    return np.sum(x * y, axis=1)


def _sum_laws(spec):
    if isinstance(spec, IIDSumSpec):
        return [spec.base] * spec.L
    if isinstance(spec, INIDSumSpec):
        return [spec.variate(i) for i in range(spec.L)]
    raise ValidationError(f"Unsupported sum type: {type(spec).__name__}")


def mc_sum_samples(spec, mc):
    """
    All sampled sums, concatenated in chunk order.

    Args:
        spec (IIDSumSpec or INIDSumSpec): The sum
        mc (MCSpec): Run parameters

    Returns:
        ndarray: n_samples draws of the exact sum
    """
    laws = _sum_laws(spec)
    return np.concatenate(_map_chunks(mc, lambda rng, size: sample_gg_sums(laws, rng, size)))


def mc_sum_cdf(spec, eval_points, mc):
    """
    Empirical CDF of the exact sum at sorted points.

    Returns:
        EmpiricalCdf: Fractions of draws <= each point, plus the sorted draws
    """
    points = np.asarray(eval_points, dtype=float)
    if points.ndim != 1 or np.any(np.diff(points) < 0):
        raise ValidationError("mc_sum_cdf requires sorted evaluation points")
    samples = np.sort(mc_sum_samples(spec, mc))
    values = np.searchsorted(samples, points, side='right') / samples.size
    return EmpiricalCdf(points=points, values=values, samples=samples)


def ks_distance(samples, model_cdf_grid, n_points=1000):
    """
    Kolmogorov-Smirnov distance between draws and a model CDF.

    The model is evaluated at about ``n_points`` sample quantiles and compared
    with both one-sided limits of the empirical CDF there, so the result is
    within 1/n_points of the full supremum.

    Args:
        samples (array_like): Draws
        model_cdf_grid (callable): Maps a sorted array of points to model CDF values
        n_points (int): Number of quantile points

    Returns:
        float: Supremum distance
    """
    ordered = np.sort(np.asarray(samples, dtype=float))
    if ordered.size == 0:
        raise ValidationError("ks_distance needs at least one sample")
    index = np.unique(np.linspace(0, ordered.size - 1, min(n_points, ordered.size)).astype(int))
    points = np.unique(ordered[index])
    model = np.asarray(model_cdf_grid(points), dtype=float)
    right = np.searchsorted(ordered, points, side='right') / ordered.size
    left = np.searchsorted(ordered, points, side='left') / ordered.size
    return float(max(np.max(np.abs(model - right)), np.max(np.abs(model - left))))


def mc_rf_metric(cfg, metric, mc, gamma_th=None):
    """
    Monte Carlo BER or outage of an MRC receiver.

    Args:
        cfg (MRCConfig): Receiver configuration
        metric (Metric): BER (with modulation) or outage
        mc (MCSpec): Run parameters
        gamma_th (float): Outage threshold on the combined SNR (linear)

    Returns:
        MCEstimate: Estimate with standard error
    """
    laws = cfg.branch_laws()
    if metric.kind == 'ber':
        kernel = metric.modulation.kernel
        return _estimate(mc, lambda rng, size: kernel(sample_gg_sums(laws, rng, size)), probability=False)
    if gamma_th is None or not gamma_th > 0:
        raise ValidationError(f"outage needs a positive threshold, got {gamma_th}")
    return _estimate(mc, lambda rng, size: sample_gg_sums(laws, rng, size) <= gamma_th, probability=True)


def mc_ow_metric(cfg, metric, mc, h_th=None):
    """
    Monte Carlo OOK BER or outage of a MIMO optical receiver.

    The BER kernel is ½·erfc(η·I_T / (2MN·√N_o)) on the summed irradiance I_T;
    outage is P(I_T <= I_th) with I_th = (MN/η)·√(h_th·N_o).

    Args:
        cfg (OWConfig): Link configuration
        metric (Metric): BER or outage
        mc (MCSpec): Run parameters
        h_th (float): Electrical SNR threshold (linear)

    Returns:
        MCEstimate: Estimate with standard error
    """
    laws = cfg.link_laws()
    if metric.kind == 'ber':
        gain = cfg.erfc_gain
        return _estimate(mc, lambda rng, size: 0.5 * specfun.erfc(gain * sample_gg_sums(laws, rng, size)),
                         probability=False)
    if h_th is None or not h_th > 0:
        raise ValidationError(f"outage needs a positive threshold, got {h_th}")
    threshold = cfg.irradiance_threshold(h_th)
    return _estimate(mc, lambda rng, size: sample_gg_sums(laws, rng, size) <= threshold, probability=True)


def crossing_abscissa(abscissa, values, level):
    """
    Abscissa where a curve crosses ``level``, interpolating log10(value) linearly.

    Nonpositive values are skipped (an MC column with no hits).

    Raises:
        CurveRangeError: The curve never reaches the level
    """
    x = np.asarray(abscissa, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = v > 0
    x, v = x[keep], v[keep]
    if x.size == 0:
        raise CurveRangeError("curve has no positive values")
    target = math.log10(level)
    logs = np.log10(v) - target
    exact = np.nonzero(logs == 0)[0]
    if exact.size:
        return float(x[exact[0]])
    for i in range(x.size - 1):
        if logs[i] * logs[i + 1] < 0:
            return float(x[i] + (x[i + 1] - x[i]) * logs[i] / (logs[i] - logs[i + 1]))
    raise CurveRangeError(
        f"level {level:g} lies outside the curve range [{v.min():.3g}, {v.max():.3g}]")


def gap_in_db(analytic, mc, target_level):
    """
    Horizontal gap between two metric curves at a target level.

    Args:
        analytic (MetricCurve): Analytic curve
        mc (MetricCurve): Monte Carlo curve
        target_level (float): BER or outage level, in (0, 1)

    Returns:
        float: |x_analytic(target) - x_mc(target)| in dB
    """
    if not 0 < target_level < 1:
        raise ValidationError(f"target level must lie in (0, 1), got {target_level}")
    x_a = crossing_abscissa(analytic.abscissa, analytic.values, target_level)
    x_m = crossing_abscissa(mc.abscissa, mc.values, target_level)
    return abs(x_a - x_m)
