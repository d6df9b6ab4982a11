"""
Canned configurations for the analytic-vs-Monte-Carlo comparison figures.

Each figure is a list of variants (label, RunConfig, curve action) run through
the compare pipeline. Per-branch m_l and per-link a_pq profiles are fixed to
representative values here.
"""

import logging

from .config import RunConfig
from .error_manager import ConfigError

# Setup logging
logger = logging.getLogger(__name__)

# Fewer draws than the CLI default; every figure has many variants
REPRO_SAMPLES = 2 * 10 ** 5

# Non-identical MRC branches: m_l, truncated to L
MRC_M_LIST = (1, 2, 3)
# Non-identical optical links: a_pq from {2, 3, 4}, means 1, 0.7, 0.49, ...
OW_A_LIST = (2, 3, 4, 3)
OW_RATIO = 0.7


def _rc(**values):
    return RunConfig.from_mapping(values)


def _fig1():
    return [(f"L={L},{mod}", _rc(L=L, k=2.0, m=5.0, mod=mod, sweep='0:20:1'), 'rf-ber')
            for L in (1, 2, 3, 4) for mod in ('bpsk', 'dbpsk')]


def _fig2():
    return [(f"L={L}", _rc(L=L, k=2.0, m=5.0, gbar_db=0.0, sweep='-20:5:1'), 'rf-outage') for L in (1, 2, 3, 4)]


def _mrc_inid_ber(delta):
    return [(f"L={L},{mod}", _rc(L=L, k=2.0, m_list=MRC_M_LIST, delta=delta, mod=mod, sweep='0:25:1'), 'rf-ber')
            for L in (2, 3) for mod in ('bpsk', 'dbpsk')]


def _mrc_inid_outage(delta):
    return [(f"L={L}", _rc(L=L, k=2.0, m_list=MRC_M_LIST, delta=delta, gbar1_db=0.0, sweep='-25:5:1'), 'rf-outage')
            for L in (2, 3)]


def _fig7():
    return [(f"a={a},M={M},N={N}", _rc(M=M, N=N, a=a, io=1.0, sweep='0:40:2'), 'ow-ber')
            for a in (4.0, 10.0) for M, N in ((1, 1), (2, 1), (2, 2))]


def _fig8():
    return [(f"a={a},M={M},N={N}", _rc(M=M, N=N, a=a, io=1.0, mu_db=20.0, sweep='-30:5:1'), 'ow-outage')
            for a in (4.0, 10.0) for M, N in ((1, 1), (2, 1), (2, 2))]


def _fig9():
    return [(f"M={M},N={N}", _rc(M=M, N=N, a_list=OW_A_LIST, io=1.0, ratio=OW_RATIO, sweep='0:40:2'), 'ow-ber')
            for M, N in ((2, 1), (3, 1), (2, 2))]


def _fig10():
    return [(f"M={M},N={N}", _rc(M=M, N=N, a_list=OW_A_LIST, io=1.0, ratio=OW_RATIO, mu_db=20.0, sweep='-30:5:1'),
             'ow-outage')
            for M, N in ((2, 1), (3, 1), (2, 2))]


FIGURES = {
    'fig1': ("MRC BER, identical branches, k=2, m=5", _fig1),
    'fig2': ("MRC outage, identical branches, k=2, m=5", _fig2),
    'fig3': ("MRC BER, non-identical branches, delta=0.5", lambda: _mrc_inid_ber(0.5)),
    'fig4': ("MRC BER, non-identical branches, delta=1", lambda: _mrc_inid_ber(1.0)),
    'fig5': ("MRC outage, non-identical branches, delta=0.5", lambda: _mrc_inid_outage(0.5)),
    'fig6': ("MRC outage, non-identical branches, delta=1", lambda: _mrc_inid_outage(1.0)),
    'fig7': ("MIMO optical BER, identical links, a in {4, 10}", _fig7),
    'fig8': ("MIMO optical outage, identical links, a in {4, 10}", _fig8),
    'fig9': ("MIMO optical BER, non-identical links", _fig9),
    'fig10': ("MIMO optical outage, non-identical links", _fig10),
}


def figure_variants(name, overrides=None):
    """
    Variants of a canned figure.

    Args:
        name (str): fig1 .. fig10
        overrides (RunConfig, optional): Keys applied on top of every variant
            (sample count, seed, quadrature tolerances, ...)

    Returns:
        list: (label, RunConfig, curve action) triples
    """
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r}; choose one of {', '.join(FIGURES)}")
    description, build = FIGURES[name]
    logger.info(f"repro {name}: {description}")
    variants = []
    for label, rc, action in build():
        rc = rc.merged(RunConfig(samples=REPRO_SAMPLES))
        if overrides is not None:
            rc = rc.merged(overrides)
        variants.append((label, rc, action))
    return variants
