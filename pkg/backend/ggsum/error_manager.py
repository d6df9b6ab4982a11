"""
GGSUM Error Manager Module
This module defines the error hierarchy of GGSUM and handles error logging.
"""

import logging
import os
import sys
import traceback
import datetime

logger = logging.getLogger('ggsum_error_manager')

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# CLI exit codes
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
# Anything that is neither bad input nor a numerical failure is a bug
EXIT_INTERNAL = 1


class GGSumError(Exception):
    """Root of every error raised by GGSUM."""


class ValidationError(GGSumError, ValueError):
    """Invalid parameters or configuration; nothing was computed."""


class DomainError(ValidationError):
    """An argument lies outside the domain of a function."""


class ConfigError(ValidationError):
    """A run configuration could not be parsed."""


class NumericalError(GGSumError, ArithmeticError):
    """A computation was attempted but could not deliver the requested accuracy."""


class AccuracyError(NumericalError):
    """
    Quadrature or special-function evaluation did not converge.

    Attributes:
        achieved_error (float): Error estimate reached before giving up
    """

    def __init__(self, message, achieved_error=float('nan')):
        super().__init__(message)
        self.achieved_error = achieved_error


class IllConditionedError(NumericalError):
    """The problem is numerically ill-posed (clustered poles, non-physical mixture result)."""


class ParameterRangeError(NumericalError):
    """A fitted formula was extrapolated outside its usable range."""


class OptimizationError(NumericalError):
    """A one-dimensional search found no usable bracket."""


class CurveRangeError(NumericalError):
    """A target level lies outside the range spanned by a metric curve."""


def setup_logging(debug=False, log_dir='logs'):
    """
    Configure the root logger for command-line runs

    Args:
        debug (bool): Log at DEBUG instead of INFO
        log_dir (str): Directory that receives ggsum_error.log

    Returns:
        logging.Logger: The configured root logger
    """
    os.makedirs(log_dir, exist_ok=True)

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)

    file_handler = logging.FileHandler(os.path.join(log_dir, 'ggsum_error.log'))
    stream_handler = logging.StreamHandler(sys.stderr)
    # Console only shows problems; the file keeps the full trace
    stream_handler.setLevel(logging.DEBUG if debug else logging.WARNING)

    for handler in (file_handler, stream_handler):
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)

    root.setLevel(logging.DEBUG if debug else logging.INFO)
    return root


def log_error(error, context=None):
    """
    Log an error to the error log

    Args:
        error (Exception): The error to log
        context (str, optional): Additional context for the error

    Returns:
        str: The logged message
    """
    timestamp = datetime.datetime.now().strftime("%Y-%m-%d %H:%M:%S")
    error_message = f"ERROR at {timestamp}: {type(error).__name__}: {error}"

    if context:
        error_message += f" | Context: {context}"

    logger.error(error_message)
    if error.__traceback__ is not None:
        logger.debug(''.join(traceback.format_exception(type(error), error, error.__traceback__)))

    return error_message


def exit_code_for(error):
    """
    Map an exception to the CLI exit code

    Args:
        error (Exception): The error that ended the run

    Returns:
        int: 2 for validation/configuration errors, 3 for numerical errors,
        1 for anything unexpected
    """
    # ValidationError is a ValueError; plain ValueErrors are bad input as well
    if isinstance(error, ValueError):
        return EXIT_VALIDATION
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL
    return EXIT_INTERNAL


def describe_error(error):
    """
    Build the one-line diagnostic shown on the error stream

    Args:
        error (Exception): The error to describe

    Returns:
        str: A single-line message
    """
    code = exit_code_for(error)
    if code == EXIT_INTERNAL:
        log_error(error, context="internal error")
        logger.error(''.join(traceback.format_exception(type(error), error, error.__traceback__)))
    else:
        log_error(error)

    kind = {EXIT_VALIDATION: "configuration error", EXIT_NUMERICAL: "numerical error"}.get(code, "internal error")
    text = " ".join(str(error).split()) or type(error).__name__
    message = f"ggsum: {kind}: {text}"

    achieved = getattr(error, 'achieved_error', None)
    if achieved is not None and achieved == achieved:
        message += f" (achieved error {achieved:.3g})"
    return message
