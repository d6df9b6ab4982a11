"""
Gamma and Gamma-Gamma distributions.

Provides the pdf (evaluated in log space), CDF, raw moments, seeded sampling
and the special-case reductions of the GG law, plus the quadrature engine
``expect_under_gg`` that every metric module integrates through.

The quadrature splits [0, T] into one piece per decade, starting six decades
below the mean, and lets QUADPACK's extrapolating rule absorb the x^(c-1)
endpoint singularity in the first piece. T comes from the Markov bound on the
fourth moment so the mass beyond it is below ``QuadSpec.tail_mass_tol``; the
remaining [T, ∞) tail is still integrated so unbounded kernels stay exact.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import specfun
from .error_manager import AccuracyError, DomainError, ValidationError

# Setup logging
logger = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.random.Philox(4x64) keyed by SeedSequence(master_seed, spawn_key=(stream_id,))"

# Pieces start this many decades below the smallest scale of interest
_DECADES_BELOW = 6


@dataclass(frozen=True)
class GammaParams:
    """Gamma law with pdf x^(shape-1) e^(-x/scale) / (scale^shape Γ(shape))."""

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValidationError(f"Gamma parameters must be positive, got shape={self.shape}, scale={self.scale}")

    @property
    def mean(self):
        return self.shape * self.scale


@dataclass(frozen=True)
class GGParams:
    """
    Gamma-Gamma law GG(k, m, Ω).

    Attributes:
        k (float): Large-scale shaping parameter
        m (float): Small-scale shaping parameter
        omega (float): Mean Ω = E[γ]
    """

    k: float
    m: float
    omega: float

    def __post_init__(self):
        if not (self.k > 0 and self.m > 0 and self.omega > 0):
            raise ValidationError(
                f"GG parameters must be positive, got k={self.k}, m={self.m}, omega={self.omega}")

    @property
    def xi(self):
        """Rate constant ξ = km/Ω."""
        return self.k * self.m / self.omega

    @property
    def order(self):
        """Bessel order |k - m| (K_{-ν} = K_ν)."""
        return abs(self.k - self.m)

    @property
    def mean(self):
        return self.omega

    def scaled(self, factor):
        """Law of c·γ: GG(k, m, cΩ)."""
        return GGParams(self.k, self.m, self.omega * factor)


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances of the quadrature engine."""

    rel_tol: float = 1e-9
    abs_tol: float = 1e-14
    max_refinements: int = 60
    tail_mass_tol: float = 1e-13

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_refinements > 0 and self.tail_mass_tol > 0):
            raise ValidationError(f"QuadSpec fields must be positive: {self}")
        if not self.rel_tol < 1:
            raise ValidationError(f"QuadSpec.rel_tol must be below 1, got {self.rel_tol}")


DEFAULT_QUAD = QuadSpec()


def _as_array(x):
    return np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# Gamma law

def gamma_logpdf(p, x):
    """Log-density of the Gamma law; -inf at x = 0 when shape > 1."""
    arr = _as_array(x)
    if np.any(~(arr >= 0)):
        raise DomainError(f"gamma_pdf requires x >= 0, got {x}")
    with np.errstate(divide='ignore', invalid='ignore'):
        log_x = np.log(arr)
        body = (p.shape - 1.0) * log_x
        # x^0 at x = 0 is 1
        body = np.where(arr == 0, np.where(p.shape == 1.0, 0.0, np.where(p.shape > 1.0, -np.inf, np.inf)), body)
        result = body - arr / p.scale - p.shape * math.log(p.scale) - specfun.ln_gamma(p.shape)
    if result.ndim == 0:
        return float(result)
    return result


def gamma_pdf(p, x):
    """
    Gamma density.

    Args:
        p (GammaParams): Shape and scale
        x (float or array_like): Points, x >= 0

    Returns:
        float or ndarray: Density values
    """
    result = np.exp(gamma_logpdf(p, x))
    if np.ndim(result) == 0:
        return float(result)
    return result


# ---------------------------------------------------------------------------
# Gamma-Gamma law

@lru_cache(maxsize=4096)
def _log_norm(p):
    """ln of the x-independent factor of the GG pdf: ln 2 - lnΓ(k) - lnΓ(m) + ((k+m)/2) ln ξ."""
    return (math.log(2.0) - specfun.ln_gamma(p.k) - specfun.ln_gamma(p.m)
            + 0.5 * (p.k + p.m) * math.log(p.xi))


def _log_density_at_zero(p):
    low, high = min(p.k, p.m), max(p.k, p.m)
    if low > 1.0:
        return -math.inf
    if low == 1.0 and high > 1.0:
        # Finite limit ξ/(max - 1)
        return math.log(p.xi / (high - 1.0))
    raise DomainError(
        f"GG pdf diverges at x = 0 for k={p.k}, m={p.m} "
        f"(integrable singularity x^{min(p.k, p.m) - 1:g})")


def _gg_logpdf_scalar(p, x):
    if x == 0.0:
        return _log_density_at_zero(p)
    z = 2.0 * math.sqrt(p.xi * x)
    if z > specfun.DEFAULT_ACCURACY.x_max_scaled:
        # Density below e^(-1e8)
        return -math.inf
    return (_log_norm(p) + (0.5 * (p.k + p.m) - 1.0) * math.log(x)
            + specfun.log_bessel_k_scalar(p.order, z))


def gg_logpdf(p, x):
    """
    Log-density of GG(k, m, Ω).

    Args:
        p (GGParams): Distribution parameters
        x (float or array_like): Points, x >= 0

    Returns:
        float or ndarray: ln f(x)

    Raises:
        DomainError: x < 0, or x = 0 where the pdf diverges
    """
    if np.ndim(x) == 0:
        xf = float(x)
        if not xf >= 0:
            raise DomainError(f"gg_pdf requires x >= 0, got {x}")
        return _gg_logpdf_scalar(p, xf)

    arr = _as_array(x)
    if np.any(~(arr >= 0)):
        raise DomainError("gg_pdf requires x >= 0")
    result = np.empty_like(arr)
    zero = arr == 0
    if np.any(zero):
        result[zero] = _log_density_at_zero(p)
    positive = ~zero
    xs = arr[positive]
    z = 2.0 * np.sqrt(p.xi * xs)
    far = z > specfun.DEFAULT_ACCURACY.x_max_scaled
    log_k = np.full_like(z, -np.inf)
    if np.any(~far):
        log_k[~far] = specfun.log_bessel_k(p.order, z[~far])
    result[positive] = _log_norm(p) + (0.5 * (p.k + p.m) - 1.0) * np.log(xs) + log_k
    return result


def gg_pdf(p, x):
    """
    Density of GG(k, m, Ω), composed in log space.

    At x = 0 the analytic limit is returned (0 when min(k, m) > 1,
    ξ/(max(k, m) - 1) when min(k, m) = 1 < max(k, m)); elsewhere at 0 the
    density diverges and a DomainError is raised.
    """
    if np.ndim(x) == 0:
        return math.exp(gg_logpdf(p, x))
    return np.exp(gg_logpdf(p, x))


def k_distribution_pdf(k, omega, x):
    """
    Squared K-distribution density, the m = 1 member of the GG family.

    Written from its own closed form, independent of gg_pdf.
    """
    arr = _as_array(x)
    if np.any(~(arr > 0)):
        raise DomainError("k_distribution_pdf requires x > 0")
    norm = 2.0 * k ** ((k + 1.0) / 2.0) / (specfun.gamma(k) * omega ** ((k + 1.0) / 2.0))
    result = norm * arr ** ((k - 1.0) / 2.0) * specfun.bessel_k(abs(k - 1.0), 2.0 * np.sqrt(k * arr / omega))
    if np.ndim(result) == 0:
        return float(result)
    return result


def double_rayleigh_pdf(omega, x):
    """Double-Rayleigh power density (2/Ω)·K₀(2√(x/Ω)), the k = m = 1 member."""
    arr = _as_array(x)
    if np.any(~(arr > 0)):
        raise DomainError("double_rayleigh_pdf requires x > 0")
    result = 2.0 / omega * specfun.bessel_k(0.0, 2.0 * np.sqrt(arr / omega))
    if np.ndim(result) == 0:
        return float(result)
    return result


def gg_log_moment(p, n):
    """ln E[γ^n] = -n ln ξ + lnΓ(k+n) + lnΓ(m+n) - lnΓ(k) - lnΓ(m)."""
    if not n >= 0:
        raise DomainError(f"moment order must be >= 0, got {n}")
    if n == 0:
        return 0.0
    return (-n * math.log(p.xi) + specfun.ln_gamma(p.k + n) + specfun.ln_gamma(p.m + n)
            - specfun.ln_gamma(p.k) - specfun.ln_gamma(p.m))


def gg_moment(p, n):
    """
    Raw moment E[γ^n] of GG(k, m, Ω).

    Args:
        p (GGParams): Distribution parameters
        n (float): Order, n >= 0 (need not be an integer)

    Returns:
        float: The moment; 1 for n = 0 and Ω for n = 1
    """
    if n == 1:
        return p.omega
    return math.exp(gg_log_moment(p, n))


# ---------------------------------------------------------------------------
# Quadrature engine

def tail_cutoff(p, q=DEFAULT_QUAD):
    """Point T with P(γ > T) <= E[γ⁴]/T⁴ = tail_mass_tol."""
    return math.exp(0.25 * (gg_log_moment(p, 4) - math.log(q.tail_mass_tol)))


def _edges(p, upper, hints=()):
    """Piece boundaries [0, lo, 10·lo, ..., upper], one piece per decade."""
    scales = [p.omega] + [h for h in hints if h > 0]
    lo = min(scales) * 10.0 ** (-_DECADES_BELOW)
    if upper <= lo:
        return [0.0, upper]
    n_pieces = max(1, int(math.ceil(math.log10(upper / lo))))
    return [0.0] + list(np.geomspace(lo, upper, n_pieces + 1))


def _integrate_pieces(func, edges, q, what, tail_from=None):
    """
    Sum QUADPACK integrals of ``func`` over consecutive edges.

    Returns:
        tuple: (per-piece values as a list, total error estimate)
    """
    n_pieces = len(edges) - 1 + (1 if tail_from is not None else 0)
    piece_abs = q.abs_tol / max(n_pieces, 1)
    values = []
    total_err = 0.0
    unconverged = []

    bounds = list(zip(edges[:-1], edges[1:]))
    if tail_from is not None:
        bounds.append((tail_from, math.inf))

    for a, b in bounds:
        if not b > a:
            values.append(0.0)
            continue
        result = integrate.quad(func, a, b, epsabs=piece_abs, epsrel=q.rel_tol,
                                limit=q.max_refinements, full_output=1)
        value, abserr = result[0], result[1]
        if len(result) > 3:
            unconverged.append((a, b, abserr))
        values.append(value)
        total_err += abserr

    total = math.fsum(values)
    tolerance = max(q.abs_tol, q.rel_tol * abs(total))
    if unconverged:
        if total_err > tolerance:
            raise AccuracyError(
                f"{what}: quadrature did not converge on {len(unconverged)} piece(s), "
                f"estimated error {total_err:.3g} exceeds {tolerance:.3g}",
                achieved_error=total_err)
        logger.debug(f"{what}: QUADPACK flagged {len(unconverged)} piece(s) but total error {total_err:.3g} is within tolerance")
    if not math.isfinite(total):
        raise AccuracyError(f"{what}: quadrature produced a non-finite value", achieved_error=math.inf)
    return values, total_err


def expect_under_gg(kernel, p, q=DEFAULT_QUAD, scale_hints=()):
    """
    Compute ∫₀^∞ kernel(x)·f(x; k, m, Ω) dx.

    Args:
        kernel (callable): Real function of one nonnegative float
        p (GGParams): Law to average over
        q (QuadSpec): Tolerances
        scale_hints (iterable of float): Extra length scales of the kernel
            (for example 1 for an SNR kernel), used to place piece boundaries

    Returns:
        float: The expectation

    Raises:
        AccuracyError: Quadrature could not reach the tolerance
    """
    cutoff = tail_cutoff(p, q)
    edges = _edges(p, cutoff, scale_hints)

    def integrand(x):
        return kernel(x) * math.exp(_gg_logpdf_scalar(p, x))

    values, _ = _integrate_pieces(integrand, edges, q, "expect_under_gg", tail_from=cutoff)
    return math.fsum(values)


def gg_cdf(p, x, q=DEFAULT_QUAD):
    """
    CDF of GG(k, m, Ω) as ∫₀^x f.

    Args:
        p (GGParams): Distribution parameters
        x (float): Upper limit, x >= 0
        q (QuadSpec): Tolerances

    Returns:
        float: Value in [0, 1]
    """
    if not x >= 0:
        raise DomainError(f"gg_cdf requires x >= 0, got {x}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    edges = [e for e in _edges(p, max(x, tail_cutoff(p, q))) if e < x] + [float(x)]

    def integrand(t):
        return math.exp(_gg_logpdf_scalar(p, t))

    values, _ = _integrate_pieces(integrand, edges, q, "gg_cdf")
    return min(1.0, max(0.0, math.fsum(values)))


def gg_cdf_grid(p, xs, q=DEFAULT_QUAD):
    """
    CDF on a sorted grid, accumulated piece by piece so the result is monotone.

    Args:
        p (GGParams): Distribution parameters
        xs (array_like): Nondecreasing points, all >= 0
        q (QuadSpec): Tolerances

    Returns:
        ndarray: CDF values aligned with xs
    """
    points = _as_array(xs)
    if points.ndim != 1 or np.any(np.diff(points) < 0) or np.any(~(points >= 0)):
        raise DomainError("gg_cdf_grid requires a sorted 1-d grid of nonnegative points")
    if points.size == 0:
        return points.copy()

    finite = points[np.isfinite(points)]
    top = float(finite[-1]) if finite.size else 0.0
    edges = sorted(set(_edges(p, max(top, tail_cutoff(p, q)))) | set(float(v) for v in finite))

    def integrand(t):
        return math.exp(_gg_logpdf_scalar(p, t))

    values, _ = _integrate_pieces(integrand, edges, q, "gg_cdf_grid")
    cumulative = np.concatenate([[0.0], np.cumsum(np.maximum(values, 0.0))])
    lookup = np.searchsorted(np.asarray(edges), points, side='left')
    result = np.where(np.isinf(points), 1.0, cumulative[np.minimum(lookup, len(edges) - 1)])
    return np.clip(result, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Sampling

def make_stream(master_seed, stream_id=0):
    """
    Independent random stream derived from (master_seed, stream_id).

    Args:
        master_seed (int): Nonnegative 64-bit seed
        stream_id (int): Nonnegative stream index

    Returns:
        numpy.random.Generator: Philox-backed generator
    """
    if int(master_seed) != master_seed or master_seed < 0 or master_seed >= 2 ** 64:
        raise ValidationError(f"master_seed must be a 64-bit nonnegative integer, got {master_seed}")
    if int(stream_id) != stream_id or stream_id < 0:
        raise ValidationError(f"stream_id must be a nonnegative integer, got {stream_id}")
    sequence = np.random.SeedSequence(int(master_seed), spawn_key=(int(stream_id),))
    return np.random.Generator(np.random.Philox(sequence))


def gamma_sample(p, rng, size=None):
    """
    Draw from Gamma(shape, scale).

    numpy's sampler is the Marsaglia-Tsang squeeze method; shapes below 1 use
    the boost Gamma(shape + 1)·U^(1/shape).
    """
    draws = rng.gamma(p.shape, p.scale, size)
    if size is None:
        return float(draws)
    return draws


def gg_sample(p, rng, size=None):
    """
    Draw from GG(k, m, Ω) as the product of Gamma(k, 1/k) and Gamma(m, Ω/m).

    The first factor is drawn before the second, which fixes the stream order.
    """
    x = gamma_sample(GammaParams(p.k, 1.0 / p.k), rng, size)
    y = gamma_sample(GammaParams(p.m, p.omega / p.m), rng, size)
    return x * y
