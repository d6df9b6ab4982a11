"""
Approximations to the law of a sum of independent Gamma-Gamma variates.

Each GG variate is written as x_l·y_l with x_l ~ Gamma(k, 1/k) and
y_l ~ Gamma(m_l, Ω_l/m_l). The sum is approximated by (Σx)(Σy)/L:
  - i.i.d. variates give a single GG law whose larger shape is corrected by an
    adjustment parameter (closed-form regression or moment matching),
  - variates with a common k give a signed mixture of GG laws, with the
    Gamma-sum weights of Σy computed by a partial-fraction recursion.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from sklearn.linear_model import LinearRegression

from . import distributions
from .distributions import DEFAULT_QUAD, GGParams
from .error_manager import IllConditionedError, OptimizationError, ParameterRangeError, ValidationError

# Setup logging
logger = logging.getLogger(__name__)

# Closed-form adjustment fit: (L-1)(c0 + c1·hi + c2·lo)/(1 + c3·hi + c4·lo)
REGRESSION_COEFFICIENTS = (-0.127, -0.95, -0.0058, 0.00124, 0.98)

MAX_MOMENT_ORDER = 8
MAX_MULTINOMIAL_TERMS = 6

# Relative spacing of the Gamma scales below which the weights are refused / flagged
THETA_HARD_FLOOR = 1e-9
THETA_WARN_FLOOR = 1e-4

# Lower edge of the adjustment bracket sits this far above -L·hi
BRACKET_MARGIN = 1e-3
GRID_POINTS = 401


@dataclass(frozen=True)
class IIDSumSpec:
    """Sum of L independent copies of one GG variate."""

    L: int
    base: GGParams

    def __post_init__(self):
        if isinstance(self.L, bool) or int(self.L) != self.L or self.L < 1:
            raise ValidationError(f"L must be a positive integer, got {self.L}")
        object.__setattr__(self, 'L', int(self.L))


@dataclass(frozen=True)
class INIDSumSpec:
    """
    Sum of independent GG variates sharing one shaping parameter.

    Attributes:
        k_common (float): Shared shaping parameter
        per_variate (tuple): (m_l, Ω_l) pairs; m_l must be positive integers
        swap_roles (bool): Treat k_common as the shared *second* shape and the
            integer m_l as per-variate *first* shapes
    """

    k_common: float
    per_variate: tuple
    swap_roles: bool = False

    def __post_init__(self):
        if not self.k_common > 0:
            raise ValidationError(f"k_common must be positive, got {self.k_common}")
        if len(self.per_variate) < 1:
            raise ValidationError("per_variate must hold at least one (m, omega) pair")
        cleaned = []
        for index, (m, omega) in enumerate(self.per_variate, start=1):
            if isinstance(m, bool) or not float(m).is_integer() or m < 1:
                raise ValidationError(f"m_{index} must be a positive integer, got {m}")
            if not omega > 0:
                raise ValidationError(f"omega_{index} must be positive, got {omega}")
            cleaned.append((int(m), float(omega)))
        object.__setattr__(self, 'per_variate', tuple(cleaned))

    @property
    def L(self):
        return len(self.per_variate)

    def variate(self, index):
        """GGParams of the variate at zero-based ``index``."""
        m, omega = self.per_variate[index]
        if self.swap_roles:
            return GGParams(m, self.k_common, omega)
        return GGParams(self.k_common, m, omega)


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    params: GGParams
    i: int
    j: int


@dataclass(frozen=True)
class GGMixture:
    """
    Signed-weight mixture of GG laws.

    ``i`` in each component's provenance is the 1-based index of the first
    variate of its scale group; ``groups`` lists the members of each group.
    """

    components: tuple
    groups: tuple = ()
    warnings: tuple = field(default=())

    @property
    def weights(self):
        return np.array([c.weight for c in self.components])

    @property
    def total_weight(self):
        return math.fsum(c.weight for c in self.components)

    @property
    def mean(self):
        return math.fsum(c.weight * c.params.omega for c in self.components)


@dataclass(frozen=True)
class ErrorMoments:
    mean: float
    variance: float


@dataclass(frozen=True)
class ErrorMomentsEstimate:
    """Sample statistics of the approximation error over Monte Carlo draws."""

    mean: float
    variance: float
    mean_se: float
    variance_se: float
    excess_kurtosis: float
    n_samples: int


@dataclass(frozen=True)
class AdjustmentFit:
    """Refitted coefficients of the closed-form adjustment regression."""

    coefficients: tuple
    rms_residual: float
    n_points: int

    def evaluate(self, L, k_max, m_min):
        return adjustment_regression(L, k_max, m_min, self.coefficients)


# ---------------------------------------------------------------------------
# i.i.d. sums

def adjustment_regression(L, k_max, m_min, coefficients=REGRESSION_COEFFICIENTS):
    """
    Closed-form adjustment parameter of the i.i.d. approximation.

    Args:
        L (int): Number of variates
        k_max (float): The larger shaping parameter
        m_min (float): The smaller shaping parameter
        coefficients (tuple): (c0, c1, c2, c3, c4) of the rational fit

    Returns:
        float: ε_γ = (L-1)(c0 + c1·k_max + c2·m_min)/(1 + c3·k_max + c4·m_min)
    """
    if k_max < m_min:
        raise ValidationError(f"adjustment_regression expects k_max >= m_min, got {k_max} < {m_min}")
    c0, c1, c2, c3, c4 = coefficients
    return (L - 1) * (c0 + c1 * k_max + c2 * m_min) / (1.0 + c3 * k_max + c4 * m_min)


def _ordered_shapes(base):
    return max(base.k, base.m), min(base.k, base.m)


def _adjusted_params(spec, eps):
    """GG law of the i.i.d. approximation with the larger shape moved by eps."""
    base = spec.base
    L = spec.L
    if base.k >= base.m:
        return GGParams(L * base.k + eps, L * base.m, L * base.omega)
    return GGParams(L * base.k, L * base.m + eps, L * base.omega)


def approx_sum_iid(spec, method="regression"):
    """
    Single-GG approximation of an i.i.d. sum.

    Args:
        spec (IIDSumSpec): The sum
        method (str): "regression" for the closed-form adjustment,
            "moment_matching" for solve_adjustment

    Returns:
        GGParams: Approximating law; its mean is exactly L·Ω

    Raises:
        ParameterRangeError: The adjusted shape is not positive
    """
    if spec.L == 1:
        return spec.base
    hi, lo = _ordered_shapes(spec.base)
    if method == "regression":
        eps = adjustment_regression(spec.L, hi, lo)
    elif method == "moment_matching":
        eps = solve_adjustment(spec)
    else:
        raise ValidationError(f"Unknown adjustment method: {method}")

    if spec.L * hi + eps <= 0:
        raise ParameterRangeError(
            f"adjusted shape L·hi + ε = {spec.L * hi + eps:.6g} is not positive "
            f"for L={spec.L}, k={spec.base.k}, m={spec.base.m}")
    params = _adjusted_params(spec, eps)
    logger.debug(f"approx_sum_iid({method}): L={spec.L}, eps={eps:.6g} -> {params}")
    return params


def _variate_list(spec):
    if isinstance(spec, IIDSumSpec):
        return [spec.base] * spec.L
    if isinstance(spec, INIDSumSpec):
        return [spec.variate(i) for i in range(spec.L)]
    raise ValidationError(f"Unsupported sum type: {type(spec).__name__}")


def _check_order(nu_max, ceiling=MAX_MOMENT_ORDER):
    if isinstance(nu_max, bool) or int(nu_max) != nu_max or not 1 <= nu_max <= ceiling:
        raise ValidationError(f"nu_max must be an integer in [1, {ceiling}], got {nu_max}")
    return int(nu_max)


def sum_moments_exact(spec, nu_max):
    """
    Raw moments of the exact sum by pairwise binomial convolution.

    Args:
        spec (IIDSumSpec or INIDSumSpec): The sum
        nu_max (int): Highest order, at most 8

    Returns:
        list: [E[S], E[S²], ..., E[S^nu_max]]
    """
    nu_max = _check_order(nu_max)
    acc = None
    for params in _variate_list(spec):
        own = [distributions.gg_moment(params, n) for n in range(nu_max + 1)]
        if acc is None:
            acc = own
            continue
        acc = [math.fsum(math.comb(n, r) * acc[r] * own[n - r] for r in range(n + 1))
               for n in range(nu_max + 1)]
    return acc[1:]


def sum_moments_multinomial(spec, nu_max):
    """
    Raw moments of the exact sum by enumerating the nested multinomial expansion.

    Exponential in L; kept as an independent cross-check of sum_moments_exact.
    """
    nu_max = _check_order(nu_max)
    variates = _variate_list(spec)
    if len(variates) > MAX_MULTINOMIAL_TERMS:
        raise ValidationError(f"multinomial enumeration is limited to L <= {MAX_MULTINOMIAL_TERMS}")
    tables = [[distributions.gg_moment(p, n) for n in range(nu_max + 1)] for p in variates]

    def expand(level, remaining):
        # Variate `level` takes (remaining - nu_next); the rest share nu_next
        if level == len(tables) - 1:
            return tables[level][remaining]
        return math.fsum(
            math.comb(remaining, nu_next) * tables[level][remaining - nu_next] * expand(level + 1, nu_next)
            for nu_next in range(remaining + 1))

    return [expand(0, nu) for nu in range(1, nu_max + 1)]


def _adjustment_objective(spec, targets, mode):
    L = spec.L
    hi, lo = _ordered_shapes(spec.base)
    mean = L * spec.base.omega

    def objective(eps):
        shape = L * hi + eps
        if not shape > 0:
            return math.inf
        params = GGParams(shape, L * lo, mean)
        residuals = [abs(distributions.gg_moment(params, nu) - target) for nu, target in enumerate(targets, start=1)]
        if mode == "relative":
            residuals = [r / t for r, t in zip(residuals, targets)]
        return math.fsum(residuals)

    return objective


def solve_adjustment(spec, mode="relative"):
    """
    Adjustment parameter that best matches the first four moments of the sum.

    Scans the bracket (-L·hi + 1e-3, L·hi) on a grid, refines the best grid
    cell with bounded Brent search and returns the best of the refined point,
    the grid point, ε = 0 and the closed-form regression value.

    Args:
        spec (IIDSumSpec): The sum
        mode (str): "relative" sums |ΔE[S^ν]|/E[S^ν]; "absolute" sums |ΔE[S^ν]|

    Returns:
        float: ε*

    Raises:
        OptimizationError: No point of the bracket has a finite objective
    """
    if mode not in ("relative", "absolute"):
        raise ValidationError(f"Unknown objective mode: {mode}")
    if spec.L == 1:
        return 0.0

    hi, lo = _ordered_shapes(spec.base)
    targets = sum_moments_exact(spec, 4)
    objective = _adjustment_objective(spec, targets, mode)

    lower, upper = -spec.L * hi + BRACKET_MARGIN, spec.L * hi
    grid = np.linspace(lower, upper, GRID_POINTS)
    values = np.array([objective(e) for e in grid])
    finite = np.isfinite(values)
    if not np.any(finite):
        raise OptimizationError(f"no finite moment mismatch on ({lower:.6g}, {upper:.6g})")

    best_index = int(np.nanargmin(np.where(finite, values, np.nan)))
    candidates = [(float(values[best_index]), float(grid[best_index]))]

    left = grid[max(best_index - 1, 0)]
    right = grid[min(best_index + 1, len(grid) - 1)]
    if right > left:
        refined = optimize.minimize_scalar(objective, bounds=(left, right), method='bounded',
                                           options={'xatol': 1e-10})
        if refined.success and math.isfinite(refined.fun):
            candidates.append((float(refined.fun), float(refined.x)))

    for fallback in (0.0, adjustment_regression(spec.L, hi, lo)):
        if lower <= fallback <= upper:
            value = objective(fallback)
            if math.isfinite(value):
                candidates.append((value, fallback))

    value, eps = min(candidates)
    logger.debug(f"solve_adjustment({mode}): L={spec.L}, k={spec.base.k}, m={spec.base.m} -> eps={eps:.8g}, objective={value:.3g}")
    return eps


def adjustment_objective_value(spec, eps, mode="relative"):
    """Moment mismatch of the adjusted law at ε, as minimised by solve_adjustment."""
    return _adjustment_objective(spec, sum_moments_exact(spec, 4), mode)(eps)


def error_moments(spec):
    """
    Mean and variance of the error between the sum and its product approximation.

    Returns:
        ErrorMoments: mean 0, variance (L-1)Ω²/(km)
    """
    base = spec.base
    return ErrorMoments(mean=0.0, variance=(spec.L - 1) * base.omega ** 2 / (base.k * base.m))


def mc_error_moments(spec, n_samples, seed, chunk_size=2 ** 16):
    """
    Empirical moments of the approximation error Σx_l·y_l - (Σx_l)(Σy_l)/L.

    Chunk c is drawn from the stream (seed, c), x before y, so the estimate
    depends only on (seed, n_samples, chunk_size).

    Args:
        spec (IIDSumSpec): The sum
        n_samples (int): Number of draws, at least 10⁴
        seed (int): Master seed
        chunk_size (int): Draws per stream

    Returns:
        ErrorMomentsEstimate: Sample mean and variance with standard errors
    """
    if int(n_samples) != n_samples or n_samples < 10 ** 4:
        raise ValidationError(f"mc_error_moments needs at least 10^4 samples, got {n_samples}")
    n_samples = int(n_samples)
    base = spec.base
    L = spec.L

    pieces = []
    for chunk, start in enumerate(range(0, n_samples, chunk_size)):
        size = min(chunk_size, n_samples - start)
        rng = distributions.make_stream(seed, chunk)
        x = rng.gamma(base.k, 1.0 / base.k, (size, L))
        y = rng.gamma(base.m, base.omega / base.m, (size, L))
        pieces.append(np.sum(x * y, axis=1) - np.sum(x, axis=1) * np.sum(y, axis=1) / L)
    eps = np.concatenate(pieces)

    mean = float(np.mean(eps))
    centred = eps - mean
    variance = float(np.mean(centred ** 2))
    fourth = float(np.mean(centred ** 4))
    kurtosis = fourth / variance ** 2 - 3.0 if variance > 0 else math.nan
    return ErrorMomentsEstimate(
        mean=mean,
        variance=variance,
        mean_se=math.sqrt(variance / n_samples),
        variance_se=math.sqrt(max(fourth - variance ** 2, 0.0) / n_samples),
        excess_kurtosis=kurtosis,
        n_samples=n_samples,
    )


def fit_adjustment_regression(grid, mode="relative"):
    """
    Refit the rational adjustment formula to moment-matching optima.

    The model y = (c0 + c1·hi + c2·lo)/(1 + c3·hi + c4·lo) with y = ε*/(L-1)
    is linearised as y = c0 + c1·hi + c2·lo - c3·hi·y - c4·lo·y and solved by
    least squares.

    Args:
        grid (iterable): (L, k, m) triples with L >= 2
        mode (str): Objective mode passed to solve_adjustment

    Returns:
        AdjustmentFit: Coefficients and RMS residual of ε on the grid
    """
    rows, targets, points = [], [], []
    for L, k, m in grid:
        if L < 2:
            raise ValidationError(f"fit_adjustment_regression needs L >= 2, got {L}")
        spec = IIDSumSpec(L, GGParams(k, m, 1.0))
        hi, lo = _ordered_shapes(spec.base)
        eps = solve_adjustment(spec, mode)
        y = eps / (L - 1)
        rows.append([hi, lo, -hi * y, -lo * y])
        targets.append(y)
        points.append((L, hi, lo, eps))
    if len(rows) < 5:
        raise ValidationError("fit_adjustment_regression needs at least five grid points")

    model = LinearRegression().fit(np.array(rows), np.array(targets))
    c1, c2, c3, c4 = (float(c) for c in model.coef_)
    coefficients = (float(model.intercept_), c1, c2, c3, c4)

    residuals = []
    for L, hi, lo, eps in points:
        denominator = 1.0 + c3 * hi + c4 * lo
        fitted = (L - 1) * (coefficients[0] + c1 * hi + c2 * lo) / denominator if denominator else math.inf
        residuals.append(fitted - eps)
    rms = math.sqrt(math.fsum(r * r for r in residuals) / len(residuals))
    logger.info(f"Adjustment regression refit on {len(points)} points: {coefficients}, rms={rms:.3g}")
    return AdjustmentFit(coefficients=coefficients, rms_residual=rms, n_points=len(points))


# ---------------------------------------------------------------------------
# Non-identical sums

def _scale_groups(spec):
    """
    Merge variates with identical Gamma scale θ = Ω/m.

    Returns:
        list: (theta, total_shape, member indices) per group, in first-seen order
    """
    groups = {}
    for index, (m, omega) in enumerate(spec.per_variate):
        theta = omega / m
        if theta in groups:
            groups[theta][1] += m
            groups[theta][2].append(index)
        else:
            groups[theta] = [theta, m, [index]]
    return [tuple(g) for g in groups.values()]


def _check_spacing(thetas):
    warnings = []
    ordered = sorted(thetas)
    for a, b in zip(ordered[:-1], ordered[1:]):
        spacing = (b - a) / b
        if spacing < THETA_HARD_FLOOR:
            raise IllConditionedError(
                f"Gamma scales {a:.12g} and {b:.12g} differ by {spacing:.3g} relative; "
                "the partial-fraction weights are ill-conditioned")
        if spacing < THETA_WARN_FLOOR:
            message = f"Gamma scales {a:.12g} and {b:.12g} are clustered (relative spacing {spacing:.3g})"
            logger.warning(message)
            warnings.append(message)
    return warnings


def _group_weights(thetas, shapes, i):
    """
    Weights w(i, 1..shape_i) of one group, from the base product and downward recursion.

    With rates λ = 1/θ, 1 - λ_i/λ_h = (θ_i - θ_h)/θ_i. The θ difference is
    exact for nearby scales.
    """
    theta_i = thetas[i]
    size = shapes[i]

    sign, log_mag = 1.0, 0.0
    for h, (theta_h, m_h) in enumerate(zip(thetas, shapes)):
        if h == i:
            continue
        factor = (theta_i - theta_h) / theta_i
        if factor < 0 and m_h % 2 == 1:
            sign = -sign
        log_mag -= m_h * math.log(abs(factor))
    if log_mag > 700:
        raise IllConditionedError(f"mixture weight magnitude e^{log_mag:.1f} overflows")

    weights = [0.0] * (size + 1)
    weights[size] = sign * math.exp(log_mag)

    # (1 - λ_h/λ_i)^(-1) = θ_h/(θ_h - θ_i)
    ratios = [theta_h / (theta_h - theta_i) for h, theta_h in enumerate(thetas) if h != i]
    others = [m_h for h, m_h in enumerate(shapes) if h != i]
    for t in range(1, size):
        acc = math.fsum(
            math.fsum(m_h * r ** j for m_h, r in zip(others, ratios)) * weights[size - t + j]
            for j in range(1, t + 1))
        weights[size - t] = acc / t
    return weights[1:]


def gamma_sum_weights(spec):
    """
    Weights of the sum of independent Gamma(m_l, θ_l) variates as a signed mixture of Gamma(j, θ_i).

    Variates with exactly equal θ are merged first (their sum is a single
    Gamma). The weights of group i are read off the partial-fraction expansion
    of Π_h (1 + θ_h s)^(-m_h).

    Args:
        spec (INIDSumSpec): The sum

    Returns:
        list: (i, j, weight) triples; i is the 1-based index of the group's first variate

    Raises:
        IllConditionedError: All variates merge into one group, or scales cluster
    """
    table, _, _ = _weight_table(spec)
    return table


def _weight_table(spec):
    groups = _scale_groups(spec)
    if len(groups) == 1 and spec.L >= 2:
        raise IllConditionedError(
            "all variates share one Gamma scale (i.i.d.-degenerate input); use approx_sum_iid instead")
    warnings = _check_spacing([g[0] for g in groups])

    thetas = [theta for theta, _, _ in groups]
    shapes = [shape for _, shape, _ in groups]
    table = []
    for gi, (theta, shape, members) in enumerate(groups):
        for j, weight in enumerate(_group_weights(thetas, shapes, gi), start=1):
            table.append((members[0] + 1, j, weight))

    total = math.fsum(w for _, _, w in table)
    if abs(total - 1.0) > 1e-9:
        raise IllConditionedError(f"mixture weights sum to {total:.15g}; cancellation destroyed the expansion")
    return table, groups, warnings


def approx_sum_inid(spec):
    """
    Signed GG-mixture approximation of a sum with one common shaping parameter.

    Component (i, j) is GG(L·k, j, j·θ_i), or GG(j, L·k, j·θ_i) with swap_roles.

    Args:
        spec (INIDSumSpec): The sum

    Returns:
        GGMixture: Components, scale groups and any clustering warnings
    """
    table, groups, warnings = _weight_table(spec)
    thetas = {members[0] + 1: theta for theta, _, members in groups}
    big = spec.L * spec.k_common
    components = []
    for i, j, weight in table:
        scale = j * thetas[i]
        params = GGParams(j, big, scale) if spec.swap_roles else GGParams(big, j, scale)
        components.append(MixtureComponent(weight=weight, params=params, i=i, j=j))
    return GGMixture(
        components=tuple(components),
        groups=tuple(tuple(idx + 1 for idx in members) for _, _, members in groups),
        warnings=tuple(warnings),
    )


def mixture_pdf(mix, x):
    """Signed-weighted sum of the component densities at x > 0."""
    if np.ndim(x) == 0 and not float(x) > 0:
        raise ValidationError(f"mixture_pdf requires x > 0, got {x}")
    total = sum(c.weight * distributions.gg_pdf(c.params, x) for c in mix.components)
    if np.ndim(total) == 0:
        return float(total)
    return total


def mixture_cdf(mix, x, q=DEFAULT_QUAD):
    """Signed-weighted sum of the component CDFs; 0 at x = 0 and Σ weights at ∞."""
    return math.fsum(c.weight * distributions.gg_cdf(c.params, x, q) for c in mix.components)


def mixture_cdf_grid(mix, xs, q=DEFAULT_QUAD):
    """
    Mixture CDF on a sorted grid.

    Cancellation between signed components can leave ripples at the level of
    the quadrature tolerance; the result is made nondecreasing and clipped to [0, 1].
    """
    total = sum(c.weight * distributions.gg_cdf_grid(c.params, xs, q) for c in mix.components)
    return np.clip(np.maximum.accumulate(np.asarray(total, dtype=float)), 0.0, 1.0)


def mixture_moment(mix, n):
    """Signed-weighted sum of the component raw moments."""
    return math.fsum(c.weight * distributions.gg_moment(c.params, n) for c in mix.components)


def mixture_expect(kernel, mix, q=DEFAULT_QUAD, scale_hints=()):
    """∫ kernel·f_mix as the signed sum of per-component expectations."""
    return math.fsum(
        c.weight * distributions.expect_under_gg(kernel, c.params, q, scale_hints)
        for c in mix.components)
