"""
Curve pipeline shared by the command line and the figure reproductions.

Turns a RunConfig into receiver configurations, runs analytic and Monte Carlo
sweeps and packages the result as a CsvReport.
"""

import logging
import math

import pandas as pd

from . import __version__
from .config import config_echo, db_to_linear, linear_to_db
from .distributions import RNG_ALGORITHM
from .error_manager import ConfigError, CurveRangeError
from .montecarlo import MCSpec, gap_in_db, mc_ow_metric, mc_rf_metric
from .reporting import CsvReport
from .systems_ow import OWConfig, ow_curve
from .systems_rf import Metric, Modulation, MRCConfig, check_sweep, evaluate_sweep, rf_curve

# Setup logging
logger = logging.getLogger(__name__)

DEFAULT_TARGET = 1e-4

# action -> (system, metric kind)
CURVE_ACTIONS = {
    'rf-ber': ('rf', 'ber'),
    'rf-outage': ('rf', 'outage'),
    'ow-ber': ('ow', 'ber'),
    'ow-outage': ('ow', 'outage'),
}


def build_mrc_config(rc):
    """
    MRC receiver from a RunConfig.

    With ``m_list`` the branches are non-identical: per-branch SNRs come from
    ``gbar_list_db`` or from ``gbar1_db`` with decay ``delta``; ``L`` truncates
    the list. Otherwise ``L``, ``k``, ``m`` and ``gbar_db`` describe identical branches.
    """
    rc.require('k')
    if rc.m_list is not None:
        L = rc.get('L', len(rc.m_list))
        if L > len(rc.m_list):
            raise ConfigError(f"L={L} exceeds the {len(rc.m_list)} entries of m_list")
        m_list = rc.m_list[:L]
        if rc.gbar_list_db is not None:
            if len(rc.gbar_list_db) < L:
                raise ConfigError("gbar_list_db must have one entry per branch")
            return MRCConfig.inid(rc.k, list(zip(m_list, (db_to_linear(g) for g in rc.gbar_list_db[:L]))))
        return MRCConfig.exponential_profile(rc.k, m_list, db_to_linear(rc.get('gbar1_db', 0.0)), rc.get('delta', 0.0))
    rc.require('L', 'm')
    return MRCConfig.iid(rc.L, rc.k, rc.m, db_to_linear(rc.get('gbar_db', rc.get('gbar1_db', 0.0))))


def build_ow_config(rc):
    """
    Optical link configuration from a RunConfig.

    With ``a_list`` the links are non-identical: means come from ``io_list`` or
    from ``io`` with geometric ``ratio``. ``mu_db`` rescales to η = 1, I_ref = 1, N_o = 1/μ.
    """
    M, N = rc.get('M', 1), rc.get('N', 1)
    eta, n0 = rc.get('eta', 1.0), rc.get('n0', 1.0)
    if rc.a_list is not None:
        if len(rc.a_list) < M * N:
            raise ConfigError(f"a_list needs {M * N} entries for M={M}, N={N}")
        a_list = rc.a_list[:M * N]
        if rc.io_list is not None:
            if len(rc.io_list) < M * N:
                raise ConfigError(f"io_list needs {M * N} entries for M={M}, N={N}")
            cfg = OWConfig.inid(M, N, list(zip(a_list, rc.io_list[:M * N])), eta, n0)
        else:
            cfg = OWConfig.geometric_profile(M, N, a_list, rc.get('io', 1.0), rc.get('ratio', 1.0), eta, n0)
    else:
        rc.require('a')
        cfg = OWConfig.iid(M, N, rc.a, rc.get('io', 1.0), eta, n0)
    if rc.mu_db is not None:
        cfg = cfg.with_mu(db_to_linear(rc.mu_db))
    return cfg


def build_mc_spec(rc):
    return MCSpec(
        master_seed=rc.get('seed', 1),
        n_samples=rc.get('samples', 10 ** 6),
        chunk_size=rc.get('chunk_size', 2 ** 16),
        workers=rc.get('workers', 1),
    )


def build_metric(rc, kind):
    if kind == 'ber':
        return Metric.ber(Modulation.parse(rc.get('mod', 'bpsk')))
    return Metric.outage()


def _default_sweep(rc, system, kind, cfg):
    if kind == 'outage':
        return [rc.get('threshold_db', 0.0)]
    if system == 'rf':
        return [linear_to_db(cfg.gamma_bar_1)]
    return [linear_to_db(cfg.mu)]


def analytic_curve(rc, action, mc=None):
    """
    Run the analytic sweep of ``action`` (rf-ber, rf-outage, ow-ber, ow-outage).

    Returns:
        MetricCurve: With MC overlay columns when ``mc`` is given
    """
    if action not in CURVE_ACTIONS:
        raise ConfigError(f"unknown curve action: {action}")
    system, kind = CURVE_ACTIONS[action]
    metric = build_metric(rc, kind)
    cfg = build_mrc_config(rc) if system == 'rf' else build_ow_config(rc)
    sweep = rc.sweep_values() or _default_sweep(rc, system, kind, cfg)
    q = rc.quad_spec()
    workers = rc.get('workers', 1)
    method = rc.get('method', 'regression')
    if system == 'rf':
        return rf_curve(cfg, sweep, metric, q, mc=mc, workers=workers, method=method)
    return ow_curve(cfg, sweep, metric, q, mc=mc, workers=workers, method=method)


def mc_frame(rc, action):
    """
    Monte Carlo-only sweep.

    Returns:
        pandas.DataFrame: Abscissa, <metric>_mc and mc_stderr columns
    """
    if action not in CURVE_ACTIONS:
        raise ConfigError(f"unknown curve action: {action}")
    system, kind = CURVE_ACTIONS[action]
    metric = build_metric(rc, kind)
    mc = build_mc_spec(rc)
    if system == 'rf':
        cfg = build_mrc_config(rc)
        sweep = check_sweep(rc.sweep_values() or _default_sweep(rc, system, kind, cfg))
        if kind == 'ber':
            estimates = [mc_rf_metric(cfg.rescaled(db_to_linear(x)), metric, mc) for x in sweep]
        else:
            estimates = [mc_rf_metric(cfg, metric, mc, db_to_linear(x) * cfg.gamma_bar_1) for x in sweep]
        abscissa_name = 'snr_db' if kind == 'ber' else 'threshold_db'
    else:
        cfg = build_ow_config(rc)
        sweep = check_sweep(rc.sweep_values() or _default_sweep(rc, system, kind, cfg))
        if kind == 'ber':
            estimates = [mc_ow_metric(cfg.with_mu(db_to_linear(x)), metric, mc) for x in sweep]
        else:
            estimates = [mc_ow_metric(cfg, metric, mc, db_to_linear(x) * cfg.mu) for x in sweep]
        abscissa_name = 'mu_db' if kind == 'ber' else 'threshold_db'
    return pd.DataFrame({
        abscissa_name: sweep,
        f"{kind}_mc": [e.value for e in estimates],
        'mc_stderr': [e.std_error for e in estimates],
    })


def level_label(level):
    """Compact label of a probability level: 1e-4 for 0.0001."""
    mantissa, exponent = f"{level:.12e}".split('e')
    mantissa = mantissa.rstrip('0').rstrip('.')
    return f"{mantissa}e{int(exponent)}"


def curve_gap(curve, target):
    """gap_in_db between the analytic and MC columns; NaN when the target is not crossed by both."""
    try:
        return gap_in_db(curve, curve.mc_curve(), target)
    except CurveRangeError as e:
        logger.warning(f"gap at {target:g} unavailable: {e}")
        return math.nan


def metadata(rc, with_seed):
    entries = [('tool', f"ggsum {__version__}"), ('rng', RNG_ALGORITHM)]
    if with_seed:
        entries.append(('seed', rc.get('seed', 1)))
    return entries


def compare_report(rc, action):
    """
    Analytic curve with MC overlay and the horizontal gap at the target level.

    Returns:
        CsvReport: Data rows plus a trailing gap_db@<target> line
    """
    target = rc.get('target', DEFAULT_TARGET)
    curve = analytic_curve(rc, action, mc=build_mc_spec(rc))
    return CsvReport(
        frame=curve.to_frame(),
        metadata=metadata(rc, with_seed=True),
        config_lines=config_echo(rc),
        trailer=[(f"gap_db@{level_label(target)}", curve_gap(curve, target))],
    )


def run_variants(variants, workers=1):
    """
    Run compare for each (label, RunConfig, action) and stack the frames.

    Returns:
        tuple: (frame with a leading 'variant' column, [(label, gap)] list)
    """
    def one(entry):
        label, rc, action = entry
        curve = analytic_curve(rc, action, mc=build_mc_spec(rc))
        return label, curve, curve_gap(curve, rc.get('target', DEFAULT_TARGET))

    frames, gaps = [], []
    for label, curve, gap in evaluate_sweep(variants, one, workers):
        frame = curve.to_frame()
        frame.insert(0, 'variant', label)
        frames.append(frame)
        gaps.append((label, gap))
    return pd.concat(frames, ignore_index=True), gaps


def curve_report(rc, curve, with_seed=False):
    return CsvReport(frame=curve.to_frame(), metadata=metadata(rc, with_seed), config_lines=config_echo(rc))

