"""
GGSUM Package

This package approximates the law of sums of independent Gamma-Gamma variates
and evaluates BER and outage of MRC radio receivers and MIMO optical receivers
built on those approximations, with a seeded Monte Carlo oracle.

Modules:
- error_manager.py: Error hierarchy, error logging and CLI exit codes
- specfun.py: Special functions (Gamma, Bessel K, incomplete gamma, erfc)
- distributions.py: Gamma and Gamma-Gamma laws, quadrature engine, seeded sampling
- sum_approx.py: Single-GG and GG-mixture approximations of sums
- systems_rf.py: MRC receiver BER and outage
- systems_ow.py: MIMO optical receiver OOK BER and outage
- montecarlo.py: Monte Carlo estimators, KS distance and dB gaps
- config.py: Run configuration parsing and echo
- reporting.py: Metric curves and CSV reports
- pipeline.py: Curve and compare pipeline shared by the CLI
- repro.py: Canned figure configurations
"""

__version__ = "1.0.0"
