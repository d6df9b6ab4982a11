"""
MIMO optical-wireless receiver with equal gain combining over strong turbulence.

Each of the M·N links has irradiance I_pq ~ GG(1, a_pq, Ω_pq). The receiver
sums the irradiances, so the aggregate law is a sum of GG variates with the
common shape 1. Metrics are evaluated in dimensionless form: irradiance is
measured in units of the reference link mean I_ref and the OOK kernel becomes
½·erfc(√μ·Ĩ/(2MN)) with μ = η²·I_ref²/N_o.
"""

import logging
import math
from dataclasses import dataclass

from . import distributions, montecarlo, specfun, sum_approx
from .config import db_to_linear
from .distributions import DEFAULT_QUAD, GGParams
from .error_manager import ValidationError
from .reporting import MetricCurve
from .systems_rf import check_sweep, clamp_probability, evaluate_sweep

# Setup logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OWConfig:
    """
    MIMO optical link configuration.

    Attributes:
        M (int): Transmit apertures
        N (int): Receive apertures
        links (tuple): (a_pq, Ω_pq) per link, M·N entries; link 0 is the reference
        identical (bool): All links equal; selects the single-GG path
        eta (float): Optical-to-electrical conversion coefficient
        N_o (float): Noise spectral density
    """

    M: int
    N: int
    links: tuple
    identical: bool = False
    eta: float = 1.0
    N_o: float = 1.0

    def __post_init__(self):
        for name in ('M', 'N'):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValidationError(f"{name} must be a positive integer, got {value}")
        if not (self.eta > 0 and self.N_o > 0):
            raise ValidationError(f"eta and N_o must be positive, got eta={self.eta}, N_o={self.N_o}")
        if len(self.links) != self.M * self.N:
            raise ValidationError(f"expected {self.M * self.N} links for M={self.M}, N={self.N}, got {len(self.links)}")
        cleaned = []
        for index, (a, omega) in enumerate(self.links, start=1):
            if not (a > 0 and omega > 0):
                raise ValidationError(f"link {index}: a and mean irradiance must be positive, got ({a}, {omega})")
            if not self.identical and (isinstance(a, bool) or not float(a).is_integer()):
                raise ValidationError(f"link {index}: a must be an integer on the non-identical path, got {a}")
            cleaned.append((float(a) if self.identical else int(a), float(omega)))
        object.__setattr__(self, 'links', tuple(cleaned))

    @classmethod
    def iid(cls, M, N, a, I_o, eta=1.0, N_o=1.0):
        return cls(M, N, tuple((a, I_o) for _ in range(M * N)), identical=True, eta=eta, N_o=N_o)

    @classmethod
    def inid(cls, M, N, links, eta=1.0, N_o=1.0):
        return cls(M, N, tuple(links), identical=False, eta=eta, N_o=N_o)

    @classmethod
    def geometric_profile(cls, M, N, a_list, I_1, ratio, eta=1.0, N_o=1.0):
        """Non-identical links with Ω_l = I_1·ratio^(l-1)."""
        if not ratio > 0:
            raise ValidationError(f"ratio must be positive, got {ratio}")
        return cls.inid(M, N, [(a, I_1 * ratio ** i) for i, a in enumerate(a_list)], eta, N_o)

    @property
    def L(self):
        return self.M * self.N

    @property
    def reference_irradiance(self):
        return self.links[0][1]

    @property
    def mu(self):
        """Reference electrical SNR η²·I_ref²/N_o."""
        return self.eta ** 2 * self.reference_irradiance ** 2 / self.N_o

    @property
    def erfc_gain(self):
        """Factor c of the OOK kernel ½·erfc(c·I_T): η/(2MN·√N_o)."""
        return self.eta / (2.0 * self.M * self.N * math.sqrt(self.N_o))

    def link_laws(self):
        return [GGParams(1.0, a, omega) for a, omega in self.links]

    def irradiance_threshold(self, h_th):
        """I_th = (MN/η)·√(h_th·N_o)."""
        return self.M * self.N / self.eta * math.sqrt(h_th * self.N_o)

    def with_mu(self, mu):
        """Equivalent configuration with η = 1, I_ref = 1 and N_o = 1/μ; the link profile is kept."""
        if not mu > 0:
            raise ValidationError(f"mu must be positive, got {mu}")
        ref = self.reference_irradiance
        links = tuple((a, omega / ref) for a, omega in self.links)
        return OWConfig(self.M, self.N, links, self.identical, eta=1.0, N_o=1.0 / mu)


def ow_aggregate_law(cfg, method="regression"):
    """
    Law of the summed irradiance Σ I_pq.

    Identical links GG(1, a, I_o) are approximated by GG(MNa + ε, MN, MN·I_o),
    the adjustment taken for (MN, a, 1). Non-identical links give the signed
    mixture with common shape 1.

    Returns:
        GGParams or GGMixture: Aggregate law in physical irradiance units
    """
    if cfg.identical:
        a, I_o = cfg.links[0]
        # GG(1, a) and GG(a, 1) are the same law; this order puts a first
        return sum_approx.approx_sum_iid(sum_approx.IIDSumSpec(cfg.L, GGParams(a, 1.0, I_o)), method)
    return sum_approx.approx_sum_inid(sum_approx.INIDSumSpec(1.0, cfg.links))


def _normalised_law(cfg, method):
    """Aggregate law with irradiance in units of I_ref."""
    law = ow_aggregate_law(cfg, method)
    factor = 1.0 / cfg.reference_irradiance
    if isinstance(law, GGParams):
        return law.scaled(factor)
    components = tuple(
        sum_approx.MixtureComponent(c.weight, c.params.scaled(factor), c.i, c.j) for c in law.components)
    return sum_approx.GGMixture(components=components, groups=law.groups, warnings=law.warnings)


def ow_ber_result(cfg, q=DEFAULT_QUAD, method="regression"):
    """OOK BER with its unclamped value."""
    gain = math.sqrt(cfg.mu) / (2.0 * cfg.M * cfg.N)
    law = _normalised_law(cfg, method)

    def kernel(irradiance):
        return 0.5 * specfun.erfc(gain * irradiance)

    hints = (1.0 / gain,)
    if isinstance(law, GGParams):
        raw = distributions.expect_under_gg(kernel, law, q, scale_hints=hints)
    else:
        raw = sum_approx.mixture_expect(kernel, law, q, scale_hints=hints)
    return clamp_probability(raw, 0.5, "OOK BER")


def ow_ber(cfg, q=DEFAULT_QUAD, method="regression"):
    """
    Average OOK BER of the EGC receiver.

    Args:
        cfg (OWConfig): Link configuration
        q (QuadSpec): Quadrature tolerances

    Returns:
        float: BER in (0, ½]
    """
    return ow_ber_result(cfg, q, method).value


def ow_outage(cfg, h_th, q=DEFAULT_QUAD, method="regression"):
    """
    Probability that the electrical SNR falls below ``h_th`` (linear).

    Evaluates the aggregate CDF at Ĩ_th = I_th/I_ref = MN·√(h_th/μ).

    Returns:
        float: Outage probability in [0, 1]
    """
    if not h_th > 0:
        raise ValidationError(f"outage threshold must be positive, got {h_th}")
    threshold = cfg.M * cfg.N * math.sqrt(h_th / cfg.mu)
    law = _normalised_law(cfg, method)
    if isinstance(law, GGParams):
        return distributions.gg_cdf(law, threshold, q)
    return clamp_probability(sum_approx.mixture_cdf(law, threshold, q), 1.0, "outage").value


def ow_curve(cfg, sweep_db, metric, q=DEFAULT_QUAD, mc=None, workers=1, method="regression"):
    """
    BER or outage curve of the optical receiver.

    BER is swept over μ (dB), realised with η = 1, I_ref = 1 and N_o = 1/μ.
    Outage is swept over the normalised threshold h_th/μ (dB) at the
    configured μ.

    Args:
        cfg (OWConfig): Link template
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
            local = cfg.with_mu(db_to_linear(x_db))
            value = ow_ber(local, q, method)
            estimate = montecarlo.mc_ow_metric(local, metric, mc) if mc is not None else None
            return value, estimate
        abscissa_name, metric_name = 'mu_db', 'ber'
    else:
        def point(x_db):
            h_th = db_to_linear(x_db) * cfg.mu
            value = ow_outage(cfg, h_th, q, method)
            estimate = montecarlo.mc_ow_metric(cfg, metric, mc, h_th) if mc is not None else None
            return value, estimate
        abscissa_name, metric_name = 'threshold_db', 'outage'

    rows = evaluate_sweep(sweep, point, workers)
    curve = MetricCurve(abscissa_name, metric_name, sweep, [value for value, _ in rows])
    if mc is not None:
        curve.mc_values = [estimate.value for _, estimate in rows]
        curve.mc_stderr = [estimate.std_error for _, estimate in rows]
    logger.info(f"ow_curve: {metric.kind} over {len(sweep)} points, M={cfg.M}, N={cfg.N}")
    return curve
