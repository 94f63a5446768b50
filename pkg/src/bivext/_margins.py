import logging
import math
import sys
from collections.abc import Mapping
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import optimize, special

from ._errors import ConvergenceError, DegenerateDataError, DomainError


if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self


__all__ = [
    "from_unit_frechet",
    "gev_cdf",
    "gev_fit_mle",
    "gev_log_likelihood",
    "gev_pdf",
    "gev_quantile",
    "GevFit",
    "GevParams",
    "to_unit_frechet",
]


logger = logging.getLogger(__name__)

GUMBEL_THRESHOLD = 1e-8
MIN_OBSERVATIONS = 10
HESSIAN_STEP = 1e-4


@dataclass(frozen=True, slots=True)
class GevParams:
    """
    Location, scale and shape of a generalised extreme value distribution.

    Attributes:
        mu (float): Location, in data units.
        sigma (float): Scale, in data units, positive.
        xi (float): Shape.
    """

    mu: float
    sigma: float
    xi: float

    def __post_init__(self) -> None:
        if not all(map(math.isfinite, (self.mu, self.sigma, self.xi))):
            raise DomainError("GEV parameters must be finite.")
        if not self.sigma > 0:
            raise DomainError(f"GEV scale must be positive, got {self.sigma!r}.")

    @property
    def is_gumbel(self) -> bool:
        return abs(self.xi) < GUMBEL_THRESHOLD

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], /) -> Self:
        return cls(float(data["mu"]), float(data["sigma"]), float(data["xi"]))


def _reduced(p: GevParams, z: NDArray[np.float64]) -> NDArray[np.float64]:
    return 1 + p.xi * (z - p.mu) / p.sigma


def gev_cdf(p: GevParams, z: ArrayLike, /) -> np.float64 | NDArray[np.float64]:
    """
    Evaluates the GEV distribution function `exp(-(1 + ξ(z-μ)/σ)^(-1/ξ))`.

    Points beyond the support map to 0 below the lower end point and 1 above the upper one.
    """

    z = np.asarray(z, dtype=float)
    if p.is_gumbel:
        return np.exp(-np.exp(-(z - p.mu) / p.sigma))[()]
    t = _reduced(p, z)
    inside = t > 0
    values = np.exp(-np.power(np.where(inside, t, 1.0), -1 / p.xi))
    return np.where(inside, values, 0.0 if p.xi > 0 else 1.0)[()]


def gev_pdf(p: GevParams, z: ArrayLike, /) -> np.float64 | NDArray[np.float64]:
    """
    Evaluates the GEV density.

    Raises:
        DomainError: If some `z` lies outside the support.
    """

    z = np.asarray(z, dtype=float)
    if p.is_gumbel:
        s = (z - p.mu) / p.sigma
        return (np.exp(-s - np.exp(-s)) / p.sigma)[()]
    t = _reduced(p, z)
    if np.any(t <= 0):
        raise DomainError("z lies outside the support of the GEV distribution.")
    u = np.power(t, -1 / p.xi)
    return (u / t * np.exp(-u) / p.sigma)[()]


def gev_quantile(p: GevParams, q: ArrayLike, /) -> np.float64 | NDArray[np.float64]:
    """
    Evaluates the GEV quantile function.

    Raises:
        DomainError: If some `q` lies outside (0, 1).
    """

    q = np.asarray(q, dtype=float)
    if not np.all((q > 0) & (q < 1)):
        raise DomainError("quantile levels must lie in (0, 1).")
    y = -np.log(q)
    if p.is_gumbel:
        return (p.mu - p.sigma * np.log(y))[()]
    return (p.mu + p.sigma * (np.power(y, -p.xi) - 1) / p.xi)[()]


def to_unit_frechet(p: GevParams, z: ArrayLike, /) -> np.float64 | NDArray[np.float64]:
    """
    Transforms GEV data to the unit-Fréchet scale, `Y = (1 + ξ(z-μ)/σ)^(1/ξ)`,
    so that `P(Y <= y) = exp(-1/y)`.

    Raises:
        DomainError: If some `z` lies outside the support.
    """

    z = np.asarray(z, dtype=float)
    if p.is_gumbel:
        return np.exp((z - p.mu) / p.sigma)[()]
    t = _reduced(p, z)
    if np.any(t <= 0):
        raise DomainError("z lies outside the support of the GEV distribution.")
    return np.power(t, 1 / p.xi)[()]


def from_unit_frechet(p: GevParams, y: ArrayLike, /) -> np.float64 | NDArray[np.float64]:
    """
    Inverse of `to_unit_frechet`.

    Raises:
        DomainError: If some `y` is not positive.
    """

    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DomainError("unit-Fréchet values must be positive.")
    if p.is_gumbel:
        return (p.mu + p.sigma * np.log(y))[()]
    return (p.mu + p.sigma * (np.power(y, p.xi) - 1) / p.xi)[()]


def _negative_log_likelihood(theta: NDArray[np.float64], x: NDArray[np.float64]) -> float:
    mu, sigma, xi = theta
    if not sigma > 0:
        return math.inf
    s = (x - mu) / sigma
    if abs(xi) < GUMBEL_THRESHOLD:
        return float(len(x) * math.log(sigma) + np.sum(s) + np.sum(np.exp(-s)))
    t = 1 + xi * s
    if np.any(t <= 0):
        return math.inf
    log_t = np.log(t)
    return float(len(x) * math.log(sigma) + (1 + 1 / xi) * np.sum(log_t) + np.sum(np.exp(-log_t / xi)))


def gev_log_likelihood(p: GevParams, data: ArrayLike, /) -> float:
    """
    Returns the GEV log-likelihood of the data, `-inf` if some observation lies outside the support.
    """

    x = np.asarray(data, dtype=float)
    return -_negative_log_likelihood(np.array([p.mu, p.sigma, p.xi]), x)


def _lmoment_start(x: NDArray[np.float64]) -> NDArray[np.float64]:
    n = len(x)
    x = np.sort(x)
    j = np.arange(n)
    b0 = np.mean(x)
    b1 = np.sum(j / (n - 1) * x) / n
    b2 = np.sum(j * (j - 1) / ((n - 1) * (n - 2)) * x) / n
    l1, l2, l3 = b0, 2 * b1 - b0, 6 * b2 - 6 * b1 + b0
    c = 2 / (3 + l3 / l2) - math.log(2) / math.log(3)
    kappa = 7.8590 * c + 2.9554 * c ** 2
    if abs(kappa) < 1e-6:
        sigma = l2 / math.log(2)
        return np.array([l1 - np.euler_gamma * sigma, sigma, 0.0])
    sigma = l2 * kappa / ((1 - 2 ** -kappa) * special.gamma(1 + kappa))
    mu = l1 - sigma * (1 - special.gamma(1 + kappa)) / kappa
    return np.array([mu, sigma, -kappa])


def _numerical_hessian(f, theta: NDArray[np.float64], x: NDArray[np.float64]) -> NDArray[np.float64]:
    # four-point central differences with step HESSIAN_STEP * max(|θ_i|, 1) per coordinate
    n = len(theta)
    h = HESSIAN_STEP * np.maximum(np.abs(theta), 1.0)
    m = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i], ej[j] = h[i], h[j]
            m[i, j] = (
                f(theta + ei + ej, x) - f(theta + ei - ej, x) - f(theta - ei + ej, x) + f(theta - ei - ej, x)
            ) / (4 * h[i] * h[j])
    return m


@dataclass(frozen=True, slots=True)
class GevFit:
    """
    Maximum-likelihood GEV fit.

    Attributes:
        params (GevParams): The estimates.
        mu_se (float): Standard error of the location, `nan` if the Hessian is not positive definite.
        sigma_se (float): Standard error of the scale.
        xi_se (float): Standard error of the shape.
        log_likelihood (float): Maximized log-likelihood.
        n (int): Number of observations.
    """

    params: GevParams
    mu_se: float
    sigma_se: float
    xi_se: float
    log_likelihood: float
    n: int

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.params.to_dict(),
            "mu_se": self.mu_se,
            "sigma_se": self.sigma_se,
            "xi_se": self.xi_se,
            "log_likelihood": self.log_likelihood,
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], /) -> Self:
        return cls(
            GevParams.from_dict(data),
            float(data.get("mu_se", math.nan)),
            float(data.get("sigma_se", math.nan)),
            float(data.get("xi_se", math.nan)),
            float(data.get("log_likelihood", math.nan)),
            int(data.get("n", 0)),
        )


def gev_fit_mle(data: ArrayLike, /, max_iter: int = 5000) -> GevFit:
    """
    Fits a GEV distribution by maximum likelihood.

    The data are standardized, the simplex search starts from L-moment estimates,
    and standard errors come from a central-difference Hessian at the optimum.

    Args:
        data (ArrayLike): At least ten observations.
        max_iter (int, optional): Iteration budget of the simplex search. Defaults to 5000.

    Raises:
        DomainError: If fewer than ten finite observations are given.
        DegenerateDataError: If the data have zero variance.
        ConvergenceError: If the simplex search did not converge.

    Returns:
        GevFit: The estimates with standard errors.
    """

    z = np.asarray(data, dtype=float).ravel()
    if len(z) < MIN_OBSERVATIONS or not np.all(np.isfinite(z)):
        raise DomainError(f"GEV fitting requires at least {MIN_OBSERVATIONS} finite observations.")
    center, scale = float(np.mean(z)), float(np.std(z))
    if not scale > 0:
        raise DegenerateDataError("GEV fitting requires data with positive variance.")
    x = (z - center) / scale

    start = _lmoment_start(x)
    if not math.isfinite(_negative_log_likelihood(start, x)):
        sigma = math.sqrt(6) / math.pi
        start = np.array([-np.euler_gamma * sigma, sigma, 0.0])

    result = optimize.minimize(_negative_log_likelihood, start, args=(x,), method="Nelder-Mead",
                               options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": max_iter, "maxfev": 4 * max_iter})
    if not result.success:
        raise ConvergenceError(f"GEV likelihood maximization did not converge: {result.message}")

    theta = result.x
    hessian = _numerical_hessian(_negative_log_likelihood, theta, x)
    try:
        covariance = np.linalg.inv(hessian)
        variances = np.diag(covariance)
    except np.linalg.LinAlgError:
        variances = np.full(3, math.nan)
    se = np.sqrt(np.where(variances > 0, variances, math.nan))
    if not np.all(np.isfinite(se)):
        logger.warning("GEV Hessian is not positive definite; standard errors unavailable.")

    params = GevParams(center + scale * theta[0], scale * theta[1], float(theta[2]))
    fit = GevFit(
        params,
        float(scale * se[0]),
        float(scale * se[1]),
        float(se[2]),
        float(-result.fun - len(z) * math.log(scale)),
        len(z),
    )
    logger.debug("GEV fit mu=%.6g sigma=%.6g xi=%.6g (n=%d, %d iterations)",
                 params.mu, params.sigma, params.xi, fit.n, result.nit)
    return fit
