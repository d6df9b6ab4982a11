"""
GGSUM command line.

Usage examples:
    python main.py sum approx-iid --L 2 --k 2 --m 5 --omega 1
    python main.py dist moment --k 2 --m 5 --omega 3 --n 2
    python main.py compare rf-ber --mod bpsk --L 3 --k 2 --m-list 1,2,3 --gbar1-db 20 --delta 0.5 \\
        --sweep 0:25:1 --samples 1e7 --seed 7
"""

import argparse
import logging
import sys

import colorama
import pandas as pd
from colorama import Fore, Style

from ggsum import __version__, distributions, pipeline, repro, sum_approx
from ggsum.config import RunConfig, config_echo, load_config_file
from ggsum.distributions import GGParams
from ggsum.error_manager import EXIT_OK, EXIT_VALIDATION, describe_error, exit_code_for, log_error, setup_logging
from ggsum.reporting import CsvReport

# Initialize colorama for cross-platform colored terminal output
colorama.init(autoreset=True)

# Setup logging
logger = logging.getLogger('ggsum.cli')

# Version information
VERSION = __version__
BUILD_DATE = "2026-10-18"

ACTIONS = {
    'dist': ('pdf', 'cdf', 'moment'),
    'sum': ('approx-iid', 'approx-inid', 'moments', 'error-stats', 'fit-regression'),
    'rf': ('ber', 'outage'),
    'ow': ('ber', 'outage'),
    'mc': tuple(pipeline.CURVE_ACTIONS),
    'compare': tuple(pipeline.CURVE_ACTIONS),
    'repro': tuple(repro.FIGURES),
}

# flag -> RunConfig key
PARAMETER_FLAGS = {
    '--k': 'k', '--m': 'm', '--omega': 'omega', '--n': 'n', '--x': 'x', '--L': 'L',
    '--m-list': 'm_list', '--omega-list': 'omega_list',
    '--method': 'method', '--objective': 'objective', '--mod': 'mod',
    '--gbar-db': 'gbar_db', '--gbar1-db': 'gbar1_db', '--gbar-list-db': 'gbar_list_db',
    '--delta': 'delta', '--threshold-db': 'threshold_db',
    '--M': 'M', '--N': 'N', '--a': 'a', '--a-list': 'a_list', '--io': 'io', '--io-list': 'io_list',
    '--ratio': 'ratio', '--eta': 'eta', '--n0': 'n0', '--mu-db': 'mu_db',
    '--sweep': 'sweep', '--target': 'target',
    '--quad-rel-tol': 'quad_rel_tol', '--quad-abs-tol': 'quad_abs_tol',
    '--quad-max-refinements': 'quad_max_refinements', '--quad-tail-mass-tol': 'quad_tail_mass_tol',
    '--samples': 'samples', '--seed': 'seed', '--chunk-size': 'chunk_size', '--workers': 'workers',
    '--output': 'output',
}

# Grid for `sum fit-regression`
FIT_GRID = [(L, k, m) for L in (2, 3, 4, 6) for k in (1.0, 2.0, 4.0) for m in (1.0, 2.0, 5.0)]


def _add_parameter_flags(parser):
    for flag, key in PARAMETER_FLAGS.items():
        parser.add_argument(flag, dest=key, default=None, metavar=key.upper())
    parser.add_argument("--swap", dest='swap', action='store_const', const='true', default=None,
                        help="Swap the roles of the common and per-variate shapes")
    parser.add_argument("--config", dest='config_file', default=None, help="key = value configuration file")


# Parse command line arguments
def parse_arguments(argv=None):
    parser = argparse.ArgumentParser(prog="ggsum", description="GGSUM - sums of Gamma-Gamma variates")
    parser.add_argument("--debug", action="store_true", help="Enable debug mode with verbose logging")
    parser.add_argument("--version", action="store_true", help="Show version information")
    parser.add_argument("--log-dir", default="logs", help="Directory for ggsum_error.log")
    groups = parser.add_subparsers(dest='group')
    for group, actions in ACTIONS.items():
        sub = groups.add_parser(group)
        sub.add_argument('action', choices=actions)
        _add_parameter_flags(sub)
    return parser.parse_args(argv)


def build_run_config(args):
    """Merge the configuration file (if any) with the command line flags; flags win."""
    flags = {key: getattr(args, key) for key in list(PARAMETER_FLAGS.values()) + ['swap']}
    flags['command'] = f"{args.group} {args.action}"
    from_flags = RunConfig.from_mapping(flags)
    if args.config_file:
        return load_config_file(args.config_file).merged(from_flags)
    return from_flags


def _print_values(pairs):
    for key, value in pairs:
        text = f"{value:.12g}" if isinstance(value, float) else str(value)
        print(f"{key} = {text}")


def _emit(report, rc):
    report.write(path=rc.output, stream=sys.stdout)
    if rc.output:
        print(f"{Fore.GREEN}Wrote {rc.output}{Style.RESET_ALL}", file=sys.stderr)


def _gg(rc):
    rc.require('k', 'm', 'omega')
    return GGParams(rc.k, rc.m, rc.omega)


def _sum_spec(rc):
    if rc.m_list is not None:
        rc.require('k', 'omega_list')
        if len(rc.omega_list) != len(rc.m_list):
            raise ValueError("m_list and omega_list must have the same length")
        return sum_approx.INIDSumSpec(rc.k, tuple(zip(rc.m_list, rc.omega_list)), swap_roles=rc.get('swap', False))
    rc.require('L')
    return sum_approx.IIDSumSpec(rc.L, _gg(rc))


def handle_dist(action, rc):
    p = _gg(rc)
    if action == 'moment':
        rc.require('n')
        _print_values([('moment', distributions.gg_moment(p, rc.n))])
        return EXIT_OK
    rc.require('x')
    q = rc.quad_spec()
    if action == 'pdf':
        values = [distributions.gg_pdf(p, x) for x in rc.x]
    else:
        values = [distributions.gg_cdf(p, x, q) for x in rc.x]
    frame = pd.DataFrame({'x': list(rc.x), action: values})
    _emit(CsvReport(frame, pipeline.metadata(rc, False), config_echo(rc)), rc)
    return EXIT_OK


def handle_sum(action, rc):
    if action == 'approx-iid':
        spec = sum_approx.IIDSumSpec(rc.get('L', 1), _gg(rc))
        law = sum_approx.approx_sum_iid(spec, rc.get('method', 'regression'))
        # Only the larger shape moves, so the other difference is zero
        eps = (law.k - spec.L * spec.base.k) + (law.m - spec.L * spec.base.m)
        _print_values([('k_T', law.k), ('m_T', law.m), ('omega_T', law.omega), ('eps', eps)])
        return EXIT_OK

    if action == 'approx-inid':
        mix = sum_approx.approx_sum_inid(_sum_spec(rc))
        frame = pd.DataFrame({
            'i': [c.i for c in mix.components],
            'j': [c.j for c in mix.components],
            'weight': [c.weight for c in mix.components],
            'k': [c.params.k for c in mix.components],
            'm': [c.params.m for c in mix.components],
            'omega': [c.params.omega for c in mix.components],
        })
        trailer = [('weight_sum', mix.total_weight), ('mixture_mean', mix.mean)]
        trailer += [('warning', w) for w in mix.warnings]
        _emit(CsvReport(frame, pipeline.metadata(rc, False), config_echo(rc), trailer), rc)
        return EXIT_OK

    if action == 'moments':
        spec = _sum_spec(rc)
        nu_max = int(rc.get('n', 4))
        exact = sum_approx.sum_moments_exact(spec, nu_max)
        if isinstance(spec, sum_approx.IIDSumSpec):
            law = sum_approx.approx_sum_iid(spec, rc.get('method', 'regression'))
            approx = [distributions.gg_moment(law, nu) for nu in range(1, nu_max + 1)]
        else:
            mix = sum_approx.approx_sum_inid(spec)
            approx = [sum_approx.mixture_moment(mix, nu) for nu in range(1, nu_max + 1)]
        frame = pd.DataFrame({'nu': list(range(1, nu_max + 1)), 'moment_exact': exact, 'moment_approx': approx})
        _emit(CsvReport(frame, pipeline.metadata(rc, False), config_echo(rc)), rc)
        return EXIT_OK

    if action == 'error-stats':
        spec = sum_approx.IIDSumSpec(rc.get('L', 1), _gg(rc))
        analytic = sum_approx.error_moments(spec)
        estimate = sum_approx.mc_error_moments(spec, rc.get('samples', 10 ** 6), rc.get('seed', 1),
                                               rc.get('chunk_size', 2 ** 16))
        _print_values([
            ('variance_analytic', analytic.variance),
            ('mean_mc', estimate.mean), ('mean_se', estimate.mean_se),
            ('variance_mc', estimate.variance), ('variance_se', estimate.variance_se),
            ('excess_kurtosis', estimate.excess_kurtosis), ('samples', estimate.n_samples),
        ])
        return EXIT_OK

    fit = sum_approx.fit_adjustment_regression(FIT_GRID, rc.get('objective', 'relative'))
    _print_values([(f"c{i}", c) for i, c in enumerate(fit.coefficients)]
                  + [('rms_residual', fit.rms_residual), ('points', fit.n_points)])
    return EXIT_OK


def handle_curve(group, action, rc):
    curve = pipeline.analytic_curve(rc, f"{group}-{action}")
    _emit(pipeline.curve_report(rc, curve), rc)
    return EXIT_OK


def handle_mc(action, rc):
    frame = pipeline.mc_frame(rc, action)
    _emit(CsvReport(frame, pipeline.metadata(rc, True), config_echo(rc)), rc)
    return EXIT_OK


def handle_compare(action, rc):
    report = pipeline.compare_report(rc, action)
    _emit(report, rc)
    for key, value in report.trailer:
        print(f"{Fore.CYAN}{key}: {value:.3f} dB{Style.RESET_ALL}", file=sys.stderr)
    return EXIT_OK


def handle_repro(action, rc):
    overrides = RunConfig.from_mapping({k: v for k, v in rc.as_dict().items() if k not in ('command', 'output')})
    variants = repro.figure_variants(action, overrides)
    frame, gaps = pipeline.run_variants(variants, rc.get('workers', 1))
    target = rc.get('target', pipeline.DEFAULT_TARGET)
    trailer = [(f"gap_db@{pipeline.level_label(target)}[{label}]", gap) for label, gap in gaps]
    _emit(CsvReport(frame, pipeline.metadata(rc, True), config_echo(rc), trailer), rc)
    return EXIT_OK


def dispatch(group, action, rc):
    if group == 'dist':
        return handle_dist(action, rc)
    if group == 'sum':
        return handle_sum(action, rc)
    if group in ('rf', 'ow'):
        return handle_curve(group, action, rc)
    if group == 'mc':
        return handle_mc(action, rc)
    if group == 'compare':
        return handle_compare(action, rc)
    return handle_repro(action, rc)


def run(argv=None):
    """
    Run one CLI command.

    Args:
        argv (list, optional): Arguments without the program name

    Returns:
        int: 0 on success, 2 for configuration errors, 3 for numerical errors,
            1 for an internal error
    """
    try:
        args = parse_arguments(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_VALIDATION

    if args.version:
        print(f"GGSUM v{VERSION}")
        print(f"Build date: {BUILD_DATE}")
        return EXIT_OK
    if args.group is None:
        print(f"{Fore.RED}ggsum: configuration error: no command given (try --help){Style.RESET_ALL}", file=sys.stderr)
        return EXIT_VALIDATION

    setup_logging(args.debug, args.log_dir)
    try:
        rc = build_run_config(args)
        logger.info(f"Running {rc.command}")
        return dispatch(args.group, args.action, rc)
    except KeyboardInterrupt:
        print(f"\n{Fore.YELLOW}Interrupted.{Style.RESET_ALL}", file=sys.stderr)
        return 130
    except Exception as e:
        print(f"{Fore.RED}{describe_error(e)}{Style.RESET_ALL}", file=sys.stderr)
        if args.debug:
            log_error(e, context="debug traceback")
        return exit_code_for(e)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
