import logging
import math
import sys
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, special

from ._errors import DomainError
from ._likelihood import FrechetSample
from ._numerics import DEFAULT_TOLERANCE, ToleranceConfig, bisection_invert_many


if sys.version_info >= (3, 12):
    from typing import override
else:
    from typing_extensions import override


__all__ = [
    "AsymmetricLogistic",
    "copula_cdf",
    "DependenceModel",
    "ExtremalT",
    "HueslerReiss",
    "ise",
    "parse_model",
    "sample_bivariate",
    "SymmetricLogistic",
    "true_chi",
    "true_exceedance_prob",
    "true_pickands",
    "true_point_masses",
]


logger = logging.getLogger(__name__)

CENTRAL_STEP = 1e-6
ENDPOINT_STEP = 1e-7
SECOND_STEP = 1e-4
SAMPLER_BRACKET = (1e-8, 1e12)

Values = NDArray[np.float64]


class DependenceModel(ABC):
    """
    Parametric bivariate extreme-value dependence model, described by its Pickands function.

    Subclasses implement `pickands`; derivatives default to finite differences,
    central with step 1e-6 inside the interval and one-sided with step 1e-7 near the endpoints.
    """

    __slots__ = []

    @abstractmethod
    def pickands(self, t: Values, /) -> Values:
        """
        Evaluates the Pickands function on `t` in [0, 1], without domain checks.
        """

    def pickands_d1(self, t: Values, /) -> Values:
        t = np.asarray(t, dtype=float)
        h = CENTRAL_STEP
        central = (self.pickands(np.clip(t + h, 0, 1)) - self.pickands(np.clip(t - h, 0, 1))) / (2 * h)
        forward = (self.pickands(np.minimum(t + ENDPOINT_STEP, 1)) - self.pickands(t)) / ENDPOINT_STEP
        backward = (self.pickands(t) - self.pickands(np.maximum(t - ENDPOINT_STEP, 0))) / ENDPOINT_STEP
        return np.where(t < h, forward, np.where(t > 1 - h, backward, central))

    def pickands_d2(self, t: Values, /) -> Values:
        t = np.asarray(t, dtype=float)
        h = np.minimum(SECOND_STEP, np.minimum(t, 1 - t) / 2)
        return (self.pickands(t + h) - 2 * self.pickands(t) + self.pickands(t - h)) / h ** 2

    def exceedance_prob(self, y1: ArrayLike, y2: ArrayLike, /) -> np.float64 | Values:
        """
        `R(1/y1, 1/y2)`, the approximate joint exceedance probability of unit-Fréchet margins.

        Raises:
            DomainError: If a threshold is not positive.
        """

        y1, y2 = np.broadcast_arrays(np.asarray(y1, dtype=float), np.asarray(y2, dtype=float))
        if np.any(y1 <= 0) or np.any(y2 <= 0):
            raise DomainError("exceedance thresholds must be positive.")
        s = 1 / y1 + 1 / y2
        return (s * (1 - self.pickands(y1 / (y1 + y2))))[()]

    @abstractmethod
    def spec(self) -> str:
        """
        Returns the command-line specification, e.g. `sl:0.45`.
        """


def _check_unit(name: str, value: float, *, open_lower: bool = True) -> None:
    lower_ok = value > 0 if open_lower else value >= 0
    if not (lower_ok and value <= 1):
        raise DomainError(f"{name} must lie in {'(' if open_lower else '['}0, 1], got {value!r}.")


@dataclass(frozen=True, slots=True)
class SymmetricLogistic(DependenceModel):
    """
    `A(t) = ((1-t)^(1/α) + t^(1/α))^α`, independence at `α = 1`.
    """

    alpha: float

    def __post_init__(self) -> None:
        _check_unit("alpha", self.alpha)

    def _parts(self, t: Values) -> tuple[float, Values, Values]:
        r = 1 / self.alpha
        s = np.power(1 - t, r) + np.power(t, r)
        return r, s, np.power(t, r - 1) - np.power(1 - t, r - 1)

    @override
    def pickands(self, t: Values, /) -> Values:
        t = np.asarray(t, dtype=float)
        return np.power(np.power(1 - t, 1 / self.alpha) + np.power(t, 1 / self.alpha), self.alpha)

    @override
    def pickands_d1(self, t: Values, /) -> Values:
        t = np.asarray(t, dtype=float)
        _, s, d = self._parts(t)
        return np.power(s, self.alpha - 1) * d

    @override
    def pickands_d2(self, t: Values, /) -> Values:
        t = np.asarray(t, dtype=float)
        r, s, d = self._parts(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            curvature = s * (np.power(t, r - 2) + np.power(1 - t, r - 2)) - d ** 2
        return (r - 1) * np.power(s, self.alpha - 2) * curvature

    @override
    def spec(self) -> str:
        return f"sl:{self.alpha:g}"


@dataclass(frozen=True, slots=True)
class AsymmetricLogistic(DependenceModel):
    """
    `A(t) = (1-τ1)(1-t) + (1-τ2)t + ((τ1(1-t))^(1/α) + (τ2 t)^(1/α))^α`.
    """

    alpha: float
    tau1: float
    tau2: float

    def __post_init__(self) -> None:
        _check_unit("alpha", self.alpha)
        _check_unit("tau1", self.tau1, open_lower=False)
        _check_unit("tau2", self.tau2, open_lower=False)

    @override
    def pickands(self, t: Values, /) -> Values:
        t = np.asarray(t, dtype=float)
        r = 1 / self.alpha
        joint = np.power(np.power(self.tau1 * (1 - t), r) + np.power(self.tau2 * t, r), self.alpha)
        return (1 - self.tau1) * (1 - t) + (1 - self.tau2) * t + joint

    @override
    def spec(self) -> str:
        return f"al:{self.alpha:g},{self.tau1:g},{self.tau2:g}"


@dataclass(frozen=True, slots=True)
class HueslerReiss(DependenceModel):
    """
    `A(t) = (1-t)Φ(λ + log((1-t)/t)/(2λ)) + tΦ(λ + log(t/(1-t))/(2λ))`.
    """

    lam: float

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise DomainError(f"lambda must be positive, got {self.lam!r}.")

    def _args(self, t: Values) -> tuple[Values, Values]:
        with np.errstate(divide="ignore"):
            log_odds = np.log(t) - np.log1p(-t)
        return self.lam - log_odds / (2 * self.lam), self.lam + log_odds / (2 * self.lam)

    @override
    def pickands(self, t: Values, /) -> Values:
        t = np.asarray(t, dtype=float)
        a, b = self._args(t)
        return (1 - t) * special.ndtr(a) + t * special.ndtr(b)

    @override
    def pickands_d1(self, t: Values, /) -> Values:
        t = np.asarray(t, dtype=float)
        a, b = self._args(t)
        return special.ndtr(b) - special.ndtr(a)

    @override
    def pickands_d2(self, t: Values, /) -> Values:
        t = np.asarray(t, dtype=float)
        a, b = self._args(t)
        density = np.exp(-a ** 2 / 2) + np.exp(-b ** 2 / 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            return density / math.sqrt(2 * math.pi) / (2 * self.lam * t * (1 - t))

    @override
    def spec(self) -> str:
        return f"hr:{self.lam:g}"


@dataclass(frozen=True, slots=True)
class ExtremalT(DependenceModel):
    """
    `A(t) = (1-t)T_{ν+1}(z((1-t)/t)) + tT_{ν+1}(z(t/(1-t)))` with
    `z(x) = sqrt((ν+1)/(1-ω²)) (x^(1/ν) - ω)`.
    """

    omega: float
    nu: float

    def __post_init__(self) -> None:
        if not -1 < self.omega < 1:
            raise DomainError(f"omega must lie in (-1, 1), got {self.omega!r}.")
        if not self.nu > 0:
            raise DomainError(f"nu must be positive, got {self.nu!r}.")

    def _z(self, ratio: Values) -> Values:
        scale = math.sqrt((self.nu + 1) / (1 - self.omega ** 2))
        return scale * (np.power(ratio, 1 / self.nu) - self.omega)

    @override
    def pickands(self, t: Values, /) -> Values:
        t = np.asarray(t, dtype=float)
        df = self.nu + 1
        with np.errstate(divide="ignore", invalid="ignore"):
            lower = special.stdtr(df, self._z((1 - t) / t))
            upper = special.stdtr(df, self._z(t / (1 - t)))
        return (1 - t) * lower + t * upper

    @override
    def spec(self) -> str:
        return f"et:{self.omega:g},{self.nu:g}"


def parse_model(spec: str, /) -> DependenceModel:
    """
    Parses `sl:α`, `al:α,τ1,τ2`, `hr:λ` or `et:ω,ν`.

    Raises:
        DomainError: If the specification is malformed or a parameter is out of range.
    """

    name, _, args = spec.strip().lower().partition(":")
    try:
        values = [float(v) for v in args.split(",")] if args else []
    except ValueError:
        raise DomainError(f"malformed model {spec!r}.") from None
    match name, values:
        case "sl", [alpha]:
            return SymmetricLogistic(alpha)
        case "al", [alpha, tau1, tau2]:
            return AsymmetricLogistic(alpha, tau1, tau2)
        case "hr", [lam]:
            return HueslerReiss(lam)
        case "et", [omega, nu]:
            return ExtremalT(omega, nu)
    raise DomainError(f"unknown model {spec!r}; expected sl:A, al:A,T1,T2, hr:L or et:W,NU.")


def true_pickands(m: DependenceModel, t: ArrayLike, /) -> np.float64 | Values:
    """
    Evaluates the model's Pickands function.

    Raises:
        DomainError: If some `t` lies outside [0, 1].
    """

    t = np.asarray(t, dtype=float)
    if not np.all((t >= 0) & (t <= 1)):
        raise DomainError("t must lie in [0, 1].")
    return np.asarray(m.pickands(t))[()]


def true_point_masses(m: DependenceModel, /) -> tuple[float, float]:
    """
    Vertex masses of the model's angular measure, `p0 = (1 + A'(0))/2` and `p1 = (1 - A'(1))/2`.
    """

    d1 = m.pickands_d1(np.array([0.0, 1.0]))
    p0 = min(max((1 + d1[0]) / 2, 0.0), 0.5)
    p1 = min(max((1 - d1[1]) / 2, 0.0), 0.5)
    return float(p0), float(p1)


def true_exceedance_prob(m: DependenceModel, y1: ArrayLike, y2: ArrayLike, /) -> np.float64 | Values:
    return m.exceedance_prob(y1, y2)


def true_chi(m: DependenceModel, /) -> float:
    """
    The model's coefficient of upper tail dependence `2 - 2A(1/2)`.
    """

    return float(2 - 2 * m.pickands(np.asarray(0.5)))


def copula_cdf(m: DependenceModel, u: ArrayLike, v: ArrayLike, /) -> np.float64 | Values:
    """
    Extreme-value copula `C(u, v) = exp(log(uv) A(log v / log(uv)))` of the model, for `u, v` in (0, 1).
    """

    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if not np.all((u > 0) & (u < 1) & (v > 0) & (v < 1)):
        raise DomainError("copula arguments must lie in (0, 1).")
    log_uv = np.log(u) + np.log(v)
    return np.exp(log_uv * m.pickands(np.log(v) / log_uv))[()]


def _conditional_cdf(m: DependenceModel, y1: Values, y2: Values) -> Values:
    t = y1 / (y1 + y2)
    a = m.pickands(t)
    slope = a - t * m.pickands_d1(t)
    with np.errstate(divide="ignore"):
        log_slope = np.log(np.maximum(slope, 0.0))
    return np.exp((1 - a) / y1 - a / y2 + log_slope)


def sample_bivariate(
        m: DependenceModel,
        n: int,
        rng: np.random.Generator,
        /,
        tol: ToleranceConfig = DEFAULT_TOLERANCE,
) -> FrechetSample:
    """
    Draws `n` pairs with unit-Fréchet margins and the model's dependence.

    `Y1 = 1/E` with `E` standard exponential; given `Y1 = y1`, `Y2` inverts the conditional
    distribution `F(y2 | y1) = exp(1/y1) G(y1, y2) [A(t) - tA'(t)]`, `t = y1/(y1+y2)`, by bisection
    on a log-scale bracket.

    Args:
        m (DependenceModel): The model.
        n (int): Number of pairs, positive.
        rng (Generator): Random generator.
        tol (ToleranceConfig, optional): Root-finding tolerances.

    Returns:
        FrechetSample: The pairs.
    """

    if n < 1:
        raise DomainError(f"sample size must be positive, got {n!r}.")
    y1 = 1 / np.maximum(rng.standard_exponential(n), np.finfo(float).tiny)
    u = rng.random(n)

    def conditional(y2: Values) -> Values:
        return _conditional_cdf(m, y1, y2)

    lo, hi = SAMPLER_BRACKET
    targets = np.clip(u, conditional(np.full(n, lo)), conditional(np.full(n, hi)))
    y2 = bisection_invert_many(conditional, targets, lo, hi, tol, log_scale=True)
    logger.debug("sampled %d pairs from %s", n, m.spec())
    return FrechetSample(y1, y2)


def ise(
        posterior_A: Callable[[Values], ArrayLike],
        m: DependenceModel,
        /,
        grid: int | ArrayLike | None = None,
        tol: ToleranceConfig = DEFAULT_TOLERANCE,
) -> float:
    """
    Integrated squared error `∫ (Â(t) - A(t))² dt` by Simpson's rule.

    Args:
        posterior_A ((ndarray) -> ArrayLike): Estimated Pickands function, vectorized over `t`.
        m (DependenceModel): The true model.
        grid (int | ArrayLike, optional): Number of equispaced points, or the points themselves
            covering [0, 1]. Defaults to `tol.quadrature_points`.
        tol (ToleranceConfig, optional): Supplies the default grid size.
    """

    if grid is None:
        grid = tol.quadrature_points

    t = np.linspace(0, 1, grid) if isinstance(grid, int) else np.asarray(grid, dtype=float)
    if t[0] != 0 or t[-1] != 1:
        raise DomainError("the grid must cover [0, 1].")
    diff = np.asarray(posterior_A(t), dtype=float) - m.pickands(t)
    return float(integrate.simpson(diff ** 2, x=t))
