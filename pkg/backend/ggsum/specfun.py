"""
Special functions used throughout GGSUM.

Thin, domain-checked wrappers around scipy.special: log-gamma, gamma, the
modified Bessel function of the second kind (plain, exponentially scaled and
log forms), the regularized incomplete gamma functions and erfc.

Every function accepts a scalar or an array. Scalars come back as Python
floats so the quadrature inner loops stay cheap.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .error_manager import AccuracyError, DomainError

# Setup logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpecFunAccuracy:
    """
    Accuracy target and supported domain of the special functions.

    The plain Bessel form underflows past x ~ 700; the scaled and log forms
    stay finite up to ``x_max_scaled``.
    """

    rel_tol: float = 1e-12
    nu_max: float = 500.0
    x_max: float = 700.0
    x_max_scaled: float = 1e8

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")


DEFAULT_ACCURACY = SpecFunAccuracy()


def _unwrap(value):
    """Return a Python float for 0-d results and an ndarray otherwise."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    return arr


def _check_finite(values, what):
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise AccuracyError(f"{what} did not produce a finite value")


def ln_gamma(x):
    """
    Natural log of the Gamma function.

    Args:
        x (float or array_like): Positive argument(s)

    Returns:
        float or ndarray: ln Γ(x)
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return _unwrap(special.gammaln(arr))


def gamma(x):
    """Gamma function for positive arguments; overflows past x ~ 171, use ln_gamma there."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError(f"gamma requires x > 0, got {x}")
    result = special.gamma(arr)
    _check_finite(result, "gamma")
    return _unwrap(result)


def _check_bessel_domain(nu, x, x_max, accuracy):
    nu_arr = np.asarray(nu, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(nu_arr >= 0)) or np.any(nu_arr > accuracy.nu_max):
        raise DomainError(f"Bessel K order must lie in [0, {accuracy.nu_max}], got {nu}")
    if np.any(~(x_arr > 0)) or np.any(x_arr > x_max):
        raise DomainError(f"Bessel K argument must lie in (0, {x_max}], got {x}")
    return nu_arr, x_arr


def bessel_k(nu, x, accuracy=DEFAULT_ACCURACY):
    """
    Modified Bessel function of the second kind K_ν(x) of real order.

    Integer orders are handled by the same call; callers pass |ν|.

    Args:
        nu (float or array_like): Order, 0 <= nu <= 500
        x (float or array_like): Argument, 0 < x <= 700
        accuracy (SpecFunAccuracy): Domain and tolerance descriptor

    Returns:
        float or ndarray: K_ν(x) > 0

    Raises:
        DomainError: Order or argument out of range
        AccuracyError: Overflow or underflow; use log_bessel_k for the tails
    """
    nu_arr, x_arr = _check_bessel_domain(nu, x, accuracy.x_max, accuracy)
    result = special.kv(nu_arr, x_arr)
    _check_finite(result, "bessel_k")
    if np.any(result <= 0):
        raise AccuracyError(f"bessel_k underflowed at nu={nu}, x={x}; use log_bessel_k")
    return _unwrap(result)


def bessel_k_scaled(nu, x, accuracy=DEFAULT_ACCURACY):
    """Exponentially scaled form e^x·K_ν(x)."""
    nu_arr, x_arr = _check_bessel_domain(nu, x, accuracy.x_max_scaled, accuracy)
    result = special.kve(nu_arr, x_arr)
    _check_finite(result, "bessel_k_scaled")
    if np.any(result <= 0):
        raise AccuracyError(f"bessel_k_scaled underflowed at nu={nu}, x={x}")
    return _unwrap(result)


def _log_bessel_k_upward(nu, x):
    """
    ln K_ν(x) by upward recurrence from the fractional order ν - ⌊ν⌋.

    K_{μ+1} = K_{μ-1} + (2μ/x)·K_μ is carried as the ratio r = K_{μ+1}/K_μ,
    which stays finite where K_ν itself overflows.

    Returns:
        float: ln K_ν(x), or nan when a starting value overflows
    """
    steps = int(math.floor(nu))
    base = nu - steps
    low = special.kve(base, x)
    if steps == 0:
        return math.log(low) - x if 0.0 < low < math.inf else math.nan
    high = special.kve(base + 1.0, x)
    if not (0.0 < low < math.inf and 0.0 < high < math.inf):
        return math.nan

    ratio = high / low
    log_ratios = [math.log(ratio)]
    for j in range(1, steps):
        ratio = 1.0 / ratio + 2.0 * (base + j) / x
        log_ratios.append(math.log(ratio))
    value = math.log(low) - x + math.fsum(log_ratios)
    return value if math.isfinite(value) else math.nan


def _log_bessel_k_overflowed(nu, x, accuracy):
    value = _log_bessel_k_upward(nu, x)
    if math.isfinite(value):
        return value
    # Starting orders overflow too (x below ~1e-150): leading small-argument term
    if nu <= 1.0 or x * x / (4.0 * (nu - 1.0)) > accuracy.rel_tol:
        raise AccuracyError(f"log_bessel_k did not converge at nu={nu}, x={x}")
    return math.lgamma(nu) - math.log(2.0) + nu * math.log(2.0 / x)


def log_bessel_k(nu, x, accuracy=DEFAULT_ACCURACY):
    """
    ln K_ν(x), composed from the scaled form so neither tail over- or underflows.

    Where even e^x·K_ν(x) overflows (large order at small argument) the value
    comes from the upward recurrence in the order, started from the scaled
    form at ν - ⌊ν⌋ and ν - ⌊ν⌋ + 1.

    Args:
        nu (float or array_like): Order, 0 <= nu <= 500
        x (float or array_like): Argument, 0 < x <= 1e8

    Returns:
        float or ndarray: ln K_ν(x)

    Raises:
        DomainError: Order or argument out of range
        AccuracyError: No finite value could be formed
    """
    nu_arr, x_arr = _check_bessel_domain(nu, x, accuracy.x_max_scaled, accuracy)
    nu_arr, x_arr = np.broadcast_arrays(nu_arr, x_arr)

    with np.errstate(over='ignore', divide='ignore'):
        scaled = special.kve(nu_arr, x_arr)
    overflow = np.isinf(scaled)
    if np.any(np.isnan(scaled)) or np.any(scaled[~overflow] <= 0):
        raise AccuracyError(f"log_bessel_k failed at nu={nu}, x={x}")

    result = np.array(np.log(np.where(overflow, 1.0, scaled)) - x_arr, dtype=float)
    for index in np.ndindex(result.shape):
        if overflow[index]:
            result[index] = _log_bessel_k_overflowed(float(nu_arr[index]), float(x_arr[index]), accuracy)

    return _unwrap(result)


def log_bessel_k_scalar(nu, x, accuracy=DEFAULT_ACCURACY):
    """
    Scalar fast path of log_bessel_k for quadrature inner loops.

    Skips the array machinery when e^x·K_ν(x) is finite and positive and
    defers to log_bessel_k (with its checks) otherwise.
    """
    if 0.0 <= nu <= accuracy.nu_max and 0.0 < x <= accuracy.x_max_scaled:
        scaled = special.kve(nu, x)
        if 0.0 < scaled < math.inf:
            return math.log(scaled) - x
    return log_bessel_k(nu, x, accuracy)


def reg_lower_inc_gamma(a, x):
    """
    Regularized lower incomplete gamma P(a, x) = γ(a, x)/Γ(a).

    Args:
        a (float or array_like): Shape, a > 0
        x (float or array_like): Upper limit, x >= 0 (np.inf allowed)

    Returns:
        float or ndarray: Value in [0, 1]
    """
    a_arr = np.asarray(a, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(a_arr > 0)):
        raise DomainError(f"reg_lower_inc_gamma requires a > 0, got {a}")
    if np.any(~(x_arr >= 0)):
        raise DomainError(f"reg_lower_inc_gamma requires x >= 0, got {x}")
    return _unwrap(special.gammainc(a_arr, x_arr))


def reg_upper_inc_gamma(a, x):
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed directly."""
    a_arr = np.asarray(a, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(~(a_arr > 0)):
        raise DomainError(f"reg_upper_inc_gamma requires a > 0, got {a}")
    if np.any(~(x_arr >= 0)):
        raise DomainError(f"reg_upper_inc_gamma requires x >= 0, got {x}")
    return _unwrap(special.gammaincc(a_arr, x_arr))


def erfc(x):
    """
    Complementary error function; erfc(x) = 2Q(√2·x).

    Args:
        x (float or array_like): Any finite real

    Returns:
        float or ndarray: Value in (0, 2)
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)):
        raise DomainError(f"erfc requires a finite argument, got {x}")
    return _unwrap(special.erfc(arr))


def gaussian_q(x):
    """Gaussian Q-function, Q(x) = ½·erfc(x/√2)."""
    return _unwrap(0.5 * special.erfc(np.asarray(x, dtype=float) / np.sqrt(2.0)))
