"""
MRC diversity receiver over composite Gamma-Gamma (generalized-K) fading.

The combiner output SNR is the sum of the branch SNRs. Its law comes from
sum_approx: one GG law for identical branches, a signed GG mixture when the
branches share k but differ in (m_l, γ̄_l). Average BER and outage are the
defining integrals of that law, evaluated by adaptive quadrature.
"""

import concurrent.futures
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import distributions, montecarlo, specfun, sum_approx
from .config import db_to_linear
from .distributions import DEFAULT_QUAD, GGParams
from .error_manager import IllConditionedError, ValidationError
from .reporting import MetricCurve

# Setup logging
logger = logging.getLogger(__name__)

# Tolerated excursion of a signed-mixture probability outside its range
MIXTURE_SLACK = 1e-9


class Modulation(enum.Enum):
    """Binary modulations and their conditional BER P_e(γ)."""

    BPSK = 'bpsk'
    DBPSK = 'dbpsk'

    def kernel(self, snr):
        """Conditional BER at SNR γ (scalar or array): ½·erfc(√γ) for BPSK, ½·e^(-γ) for DBPSK."""
        if self is Modulation.BPSK:
            return 0.5 * specfun.erfc(np.sqrt(snr))
        if np.ndim(snr) == 0:
            return 0.5 * math.exp(-snr)
        return 0.5 * np.exp(-np.asarray(snr, dtype=float))

    @classmethod
    def parse(cls, name):
        try:
            return cls(str(name).lower())
        except ValueError as e:
            raise ValidationError(f"Unknown modulation: {name}") from e


@dataclass(frozen=True)
class Metric:
    """What a curve or MC run measures: 'ber' (with a modulation) or 'outage'."""

    kind: str
    modulation: Modulation = Modulation.BPSK

    def __post_init__(self):
        if self.kind not in ('ber', 'outage'):
            raise ValidationError(f"Unknown metric: {self.kind}")

    @classmethod
    def ber(cls, modulation=Modulation.BPSK):
        return cls('ber', modulation)

    @classmethod
    def outage(cls):
        return cls('outage')


@dataclass(frozen=True)
class ProbabilityResult:
    """A probability with the value computed before clamping to its range."""

    value: float
    unclamped: float

    @property
    def clamped(self):
        return self.value != self.unclamped


def clamp_probability(raw, upper, what):
    """
    Clamp a computed probability to [0, upper].

    Raises:
        IllConditionedError: raw lies outside [-1e-9, upper + 1e-9]
    """
    if not -MIXTURE_SLACK <= raw <= upper + MIXTURE_SLACK:
        raise IllConditionedError(f"{what} = {raw:.12g} lies outside [0, {upper:g}]; the mixture is non-physical here")
    value = min(max(raw, 0.0), upper)
    if value != raw:
        logger.warning(f"{what} clamped from {raw:.17g} to {value:.17g}")
    return ProbabilityResult(value=value, unclamped=raw)


@dataclass(frozen=True)
class MRCConfig:
    """
    Diversity receiver configuration.

    Attributes:
        k_common (float): Shadowing shape shared by all branches
        branches (tuple): (m_l, γ̄_l) per branch, γ̄_l linear
        identical (bool): All branches equal; selects the single-GG path
    """

    k_common: float
    branches: tuple
    identical: bool = False

    def __post_init__(self):
        if not self.k_common > 0:
            raise ValidationError(f"k must be positive, got {self.k_common}")
        if len(self.branches) < 1:
            raise ValidationError("MRC receiver needs at least one branch")
        cleaned = []
        for index, (m, gbar) in enumerate(self.branches, start=1):
            if not (m > 0 and gbar > 0):
                raise ValidationError(f"branch {index}: m and average SNR must be positive, got ({m}, {gbar})")
            if not self.identical and (isinstance(m, bool) or not float(m).is_integer()):
                raise ValidationError(f"branch {index}: m must be an integer on the non-identical path, got {m}")
            cleaned.append((float(m) if self.identical else int(m), float(gbar)))
        object.__setattr__(self, 'branches', tuple(cleaned))

    @classmethod
    def iid(cls, L, k, m, gamma_bar):
        """L identical branches GG(k, m, γ̄)."""
        if isinstance(L, bool) or int(L) != L or L < 1:
            raise ValidationError(f"L must be a positive integer, got {L}")
        return cls(k, tuple((m, gamma_bar) for _ in range(int(L))), identical=True)

    @classmethod
    def inid(cls, k, branches):
        """Branches with common k and integer m_l."""
        return cls(k, tuple(branches), identical=False)

    @classmethod
    def exponential_profile(cls, k, m_list, gamma_bar_1, delta):
        """Non-identical branches with γ̄_l = γ̄_1·e^(-δ(l-1))."""
        if not delta >= 0:
            raise ValidationError(f"delta must be >= 0, got {delta}")
        return cls.inid(k, [(m, gamma_bar_1 * math.exp(-delta * i)) for i, m in enumerate(m_list)])

    @property
    def L(self):
        return len(self.branches)

    @property
    def gamma_bar_1(self):
        return self.branches[0][1]

    def branch_laws(self):
        return [GGParams(self.k_common, m, gbar) for m, gbar in self.branches]

    def rescaled(self, gamma_bar_1):
        """Same profile with the first branch average SNR moved to ``gamma_bar_1``."""
        factor = gamma_bar_1 / self.gamma_bar_1
        return MRCConfig(self.k_common, tuple((m, g * factor) for m, g in self.branches), self.identical)


def mrc_output_law(cfg, method="regression"):
    """
    Law of the combined SNR.

    Args:
        cfg (MRCConfig): Receiver configuration
        method (str): Adjustment method of the identical-branch path

    Returns:
        GGParams or GGMixture: Single GG law (identical branches) or signed mixture
    """
    if cfg.identical:
        m, gbar = cfg.branches[0]
        return sum_approx.approx_sum_iid(sum_approx.IIDSumSpec(cfg.L, GGParams(cfg.k_common, m, gbar)), method)
    return sum_approx.approx_sum_inid(sum_approx.INIDSumSpec(cfg.k_common, cfg.branches))


def rf_ber_result(cfg, mod, q=DEFAULT_QUAD, method="regression"):
    """
    Average BER with its unclamped value.

    Returns:
        ProbabilityResult: BER in [0, ½]
    """
    law = mrc_output_law(cfg, method)
    kernel = mod.kernel
    if isinstance(law, GGParams):
        raw = distributions.expect_under_gg(kernel, law, q, scale_hints=(1.0,))
    else:
        raw = sum_approx.mixture_expect(kernel, law, q, scale_hints=(1.0,))
    return clamp_probability(raw, 0.5, f"{mod.name} BER")


def rf_ber(cfg, mod, q=DEFAULT_QUAD, method="regression"):
    """
    Average BER of the MRC receiver.

    Args:
        cfg (MRCConfig): Receiver configuration
        mod (Modulation): BPSK or DBPSK
        q (QuadSpec): Quadrature tolerances

    Returns:
        float: BER in (0, ½]

    Raises:
        AccuracyError: Quadrature did not converge
        IllConditionedError: Mixture BER outside [0, ½] beyond 1e-9
    """
    return rf_ber_result(cfg, mod, q, method).value


def rf_outage(cfg, gamma_th, q=DEFAULT_QUAD, method="regression"):
    """
    Probability that the combined SNR falls below ``gamma_th`` (linear).

    Args:
        cfg (MRCConfig): Receiver configuration
        gamma_th (float): Threshold, > 0
        q (QuadSpec): Quadrature tolerances

    Returns:
        float: Outage probability in [0, 1]
    """
    if not gamma_th > 0:
        raise ValidationError(f"outage threshold must be positive, got {gamma_th}")
    law = mrc_output_law(cfg, method)
    if isinstance(law, GGParams):
        return distributions.gg_cdf(law, gamma_th, q)
    return clamp_probability(sum_approx.mixture_cdf(law, gamma_th, q), 1.0, "outage").value


def evaluate_sweep(points, evaluate, workers=1):
    """
    Evaluate ``evaluate(x)`` for every sweep point, optionally on a thread pool.

    Returns:
        list: Results in sweep order
    """
    points = list(points)
    if workers <= 1 or len(points) == 1:
        return [evaluate(x) for x in points]
    results = {}
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = {executor.submit(evaluate, x): i for i, x in enumerate(points)}
        for future in concurrent.futures.as_completed(futures):
            results[futures[future]] = future.result()
    return [results[i] for i in range(len(points))]


def check_sweep(sweep):
    values = [float(x) for x in sweep]
    if not values:
        raise ValidationError("sweep must not be empty")
    if any(b <= a for a, b in zip(values[:-1], values[1:])):
        raise ValidationError("sweep must be strictly increasing")
    return values


def rf_curve(cfg, sweep_db, metric, q=DEFAULT_QUAD, mc=None, workers=1, method="regression"):
    """
    BER or outage curve of the MRC receiver.

    BER is swept over the first branch average SNR γ̄_1 (dB), keeping the
    branch profile. Outage is swept over the normalised threshold γ_th/γ̄_1 (dB)
    at the configured γ̄_1.

    Args:
        cfg (MRCConfig): Receiver template
        sweep_db (list): Strictly increasing abscissae in dB
        metric (Metric): BER or outage
        q (QuadSpec): Quadrature tolerances
        mc (MCSpec, optional): Adds MC overlay columns
        workers (int): Threads for the sweep

    Returns:
        MetricCurve: One row per abscissa
    """
    sweep = check_sweep(sweep_db)

    if metric.kind == 'ber':
        def point(x_db):
            local = cfg.rescaled(db_to_linear(x_db))
            value = rf_ber(local, metric.modulation, q, method)
            estimate = montecarlo.mc_rf_metric(local, metric, mc) if mc is not None else None
            return value, estimate
        abscissa_name, metric_name = 'snr_db', 'ber'
    else:
        def point(x_db):
            gamma_th = db_to_linear(x_db) * cfg.gamma_bar_1
            value = rf_outage(cfg, gamma_th, q, method)
            estimate = montecarlo.mc_rf_metric(cfg, metric, mc, gamma_th) if mc is not None else None
            return value, estimate
        abscissa_name, metric_name = 'threshold_db', 'outage'

    rows = evaluate_sweep(sweep, point, workers)
    curve = MetricCurve(abscissa_name, metric_name, sweep, [value for value, _ in rows])
    if mc is not None:
        curve.mc_values = [estimate.value for _, estimate in rows]
        curve.mc_stderr = [estimate.std_error for _, estimate in rows]
    logger.info(f"rf_curve: {metric.kind} over {len(sweep)} points, L={cfg.L}")
    return curve
