import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, optimize, special

from ._errors import BracketError, ConvergenceError, DomainError


__all__ = [
    "bernstein_basis",
    "beta_density",
    "bisection_invert",
    "bisection_invert_many",
    "log_gamma",
    "quadrature",
    "regularized_incomplete_beta",
    "std_normal_cdf",
    "student_t_cdf",
    "ToleranceConfig",
]


@dataclass(frozen=True, slots=True)
class ToleranceConfig:
    """
    Numerical tolerances shared by root-finding, quadrature and coefficient validation.

    Attributes:
        abs_tol (float): Absolute tolerance. Defaults to 1e-10.
        rel_tol (float): Relative tolerance. Defaults to 1e-10.
        max_iter (int): Iteration budget of iterative methods. Defaults to 200.
        quadrature_points (int): Odd number of Simpson grid points. Defaults to 1001.
        sum_tol (float): Tolerance of the coefficient sum restriction. Defaults to 1e-9.
        order_slack (float): Slack of ordering and convexity restrictions. Defaults to 1e-12.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_iter: int = 200
    quadrature_points: int = 1001
    sum_tol: float = 1e-9
    order_slack: float = 1e-12

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("abs_tol and rel_tol must be positive.")
        if self.max_iter < 1:
            raise DomainError("max_iter must be at least 1.")
        if self.quadrature_points < 3 or self.quadrature_points % 2 == 0:
            raise DomainError("quadrature_points must be odd and at least 3.")
        if self.sum_tol < 0 or self.order_slack < 0:
            raise DomainError("sum_tol and order_slack must be nonnegative.")


DEFAULT_TOLERANCE = ToleranceConfig()
SMOOTHING_ORDER = 4


def log_gamma(x: float, /) -> float:
    """
    Returns the natural logarithm of the gamma function.

    Args:
        x (float): A positive real.

    Raises:
        DomainError: If `x <= 0`.

    Returns:
        float: `log Γ(x)`.
    """

    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}.")
    return float(special.gammaln(x))


def _check_beta_args(x: float, a: float, b: float) -> None:
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"x must lie in [0, 1], got {x!r}.")
    if not (a > 0 and b > 0):
        raise DomainError(f"shape parameters must be positive, got a={a!r}, b={b!r}.")


def beta_density(x: float, a: float, b: float, /) -> float:
    """
    Returns the beta density `Be(x|a,b)`.

    At the boundary, a zero exponent gives the finite limit, so that `Be(0|1,b) = b`
    and `Be(1|a,1) = a`.

    Args:
        x (float): A point in [0, 1].
        a (float): First shape parameter.
        b (float): Second shape parameter.

    Raises:
        DomainError: If the arguments are outside their domains.

    Returns:
        float: The density value.
    """

    _check_beta_args(x, a, b)
    log_value = special.xlogy(a - 1.0, x) + special.xlog1py(b - 1.0, -x) - special.betaln(a, b)
    return float(np.exp(log_value))


def regularized_incomplete_beta(x: float, a: float, b: float, /) -> float:
    """
    Returns the beta distribution function `B(x|a,b)`.

    Args:
        x (float): A point in [0, 1].
        a (float): First shape parameter.
        b (float): Second shape parameter.

    Raises:
        DomainError: If the arguments are outside their domains.

    Returns:
        float: The regularized incomplete beta function.
    """

    _check_beta_args(x, a, b)
    return float(special.betainc(a, b, x))


def std_normal_cdf(x: float, /) -> float:
    """
    Returns the standard normal distribution function.
    """

    return float(special.ndtr(x))


def student_t_cdf(x: float, df: float, /) -> float:
    """
    Returns the Student-t distribution function with `df` degrees of freedom.

    Raises:
        DomainError: If `df <= 0`.
    """

    if not df > 0:
        raise DomainError(f"degrees of freedom must be positive, got {df!r}.")
    return float(special.stdtr(df, x))


def bisection_invert(
        f: Callable[[float], float],
        target: float,
        lo: float,
        hi: float,
        tol: ToleranceConfig = DEFAULT_TOLERANCE,
        /
) -> float:
    """
    Solves `f(x) = target` for a monotone `f` by bisection on `[lo, hi]`.

    Args:
        f ((float) -> float): A monotone scalar function.
        target (float): The value to invert.
        lo (float): Lower end of the bracket.
        hi (float): Upper end of the bracket.
        tol (ToleranceConfig, optional): Tolerances and iteration budget.

    Raises:
        BracketError: If `f(lo)` and `f(hi)` do not enclose the target.
        ConvergenceError: If the bracket did not shrink below tolerance within `max_iter` steps.

    Returns:
        float: The root.
    """

    def g(x: float) -> float:
        return f(x) - target

    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0:
        return lo
    if g_hi == 0:
        return hi
    if np.sign(g_lo) == np.sign(g_hi):
        raise BracketError(f"target {target!r} is not enclosed by f({lo!r}) and f({hi!r}).")

    rtol = max(tol.rel_tol, 4 * np.finfo(float).eps)
    root, result = optimize.bisect(g, lo, hi, xtol=tol.abs_tol, rtol=rtol, maxiter=tol.max_iter,
                                   full_output=True, disp=False)
    if not result.converged:
        raise ConvergenceError(f"bisection did not converge in {tol.max_iter} iterations.")
    return float(root)


def bisection_invert_many(
        f: Callable[[NDArray[np.float64]], NDArray[np.float64]],
        targets: ArrayLike,
        lo: float,
        hi: float,
        tol: ToleranceConfig = DEFAULT_TOLERANCE,
        /, *,
        log_scale: bool = False,
) -> NDArray[np.float64]:
    """
    Elementwise bisection for a family of nondecreasing functions.

    `f` maps an array of abscissae to an array of the same shape as `targets`,
    element `i` being the `i`-th function evaluated at the `i`-th abscissa.

    Args:
        f ((ndarray) -> ndarray): Vectorized family of nondecreasing functions.
        targets (ArrayLike): Values to invert.
        lo (float): Common lower end of the bracket.
        hi (float): Common upper end of the bracket.
        tol (ToleranceConfig, optional): Tolerances and iteration budget.
        log_scale (bool, optional): Bisect on `log x` (requires `lo > 0`). Defaults to False.

    Raises:
        BracketError: If some target is not enclosed.
        ConvergenceError: If some bracket did not shrink below tolerance within `max_iter` steps.

    Returns:
        ndarray: The roots.
    """

    targets = np.asarray(targets, dtype=float)
    if log_scale:
        if lo <= 0:
            raise DomainError("log-scale bisection requires lo > 0.")
        to_x, a, b = np.exp, math.log(lo), math.log(hi)
    else:
        to_x, a, b = (lambda u: u), lo, hi

    low = np.full(targets.shape, a)
    high = np.full(targets.shape, b)
    if np.any(f(to_x(low)) > targets) or np.any(f(to_x(high)) < targets):
        raise BracketError("some targets are not enclosed by the bracket.")

    for _ in range(tol.max_iter):
        mid = 0.5 * (low + high)
        below = f(to_x(mid)) < targets
        low = np.where(below, mid, low)
        high = np.where(below, high, mid)
        if np.all(high - low <= tol.abs_tol + tol.rel_tol * np.abs(mid)):
            return to_x(0.5 * (low + high))
    raise ConvergenceError(f"vectorized bisection did not converge in {tol.max_iter} iterations.")


def quadrature(
        f: Callable[[float], float],
        a: float,
        b: float,
        n: int | None = None,
        tol: ToleranceConfig = DEFAULT_TOLERANCE,
        /
) -> float:
    """
    Composite Simpson estimate of `∫_a^b f` on a fixed grid of `n` points.

    An integrand that is not finite at an end is integrated after the substitution
    `x = a + (b - a) B(u|4,4)`, whose derivative vanishes to third order at both ends;
    the ends themselves are then never evaluated. This covers integrable power singularities
    such as beta densities with a shape parameter below 1.

    Args:
        f ((float) -> float): Integrand, finite on `(a, b)`.
        a (float): Lower limit.
        b (float): Upper limit, greater than `a`.
        n (int, optional): Odd number of grid points, at least 3. Defaults to `tol.quadrature_points`.
        tol (ToleranceConfig, optional): Supplies the default number of grid points.

    Raises:
        DomainError: If `n` is even or below 3, or `a >= b`.

    Returns:
        float: The integral estimate.
    """

    if n is None:
        n = tol.quadrature_points
    if n < 3 or n % 2 == 0:
        raise DomainError(f"quadrature requires an odd number of points >= 3, got {n!r}.")
    if not a < b:
        raise DomainError(f"quadrature requires a < b, got a={a!r}, b={b!r}.")

    f_a, f_b = f(a), f(b)
    if math.isfinite(f_a) and math.isfinite(f_b):
        x = np.linspace(a, b, n)
        y = np.empty(n)
        y[0], y[-1] = f_a, f_b
        y[1:-1] = np.fromiter((f(v) for v in x[1:-1]), dtype=float, count=n - 2)
        return float(integrate.simpson(y, x=x))

    u = np.linspace(0.0, 1.0, n)
    x = a + (b - a) * special.betainc(SMOOTHING_ORDER, SMOOTHING_ORDER, u)
    dx = (b - a) * np.exp(
        special.xlogy(SMOOTHING_ORDER - 1, u) + special.xlog1py(SMOOTHING_ORDER - 1, -u)
        - special.betaln(SMOOTHING_ORDER, SMOOTHING_ORDER)
    )
    y = np.zeros(n)
    for i in range(1, n - 1):
        # points rounded onto an end carry a weight below the float resolution
        if a < x[i] < b:
            y[i] = f(x[i]) * dx[i]
    return float(integrate.simpson(y, x=u))


def bernstein_basis(x: ArrayLike, k: int, /) -> NDArray[np.float64]:
    """
    Evaluates the Bernstein basis `b_j(x; k) = C(k,j) x^j (1-x)^(k-j)`, `j = 0..k`.

    Products are formed in log space so that large degrees stay finite.

    Args:
        x (ArrayLike): Points in [0, 1].
        k (int): Degree, nonnegative.

    Returns:
        ndarray: Array of shape `x.shape + (k + 1,)`.
    """

    if k < 0:
        raise DomainError(f"Bernstein degree must be nonnegative, got {k!r}.")
    j = np.arange(k + 1, dtype=float)
    log_binom = special.gammaln(k + 1.0) - special.gammaln(j + 1.0) - special.gammaln(k - j + 1.0)
    x = np.asarray(x, dtype=float)[..., np.newaxis]
    return np.exp(log_binom + special.xlogy(j, x) + special.xlog1py(k - j, -x))
