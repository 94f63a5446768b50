import math
import sys
from abc import ABC, abstractmethod
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np
from scipy import stats

from ._errors import DomainError, InfeasiblePrefixError, InvalidCoefficientsError
from ._extremal import AngularCoefficients, PickandsCoefficients, beta_to_eta, validate_angular
from ._numerics import DEFAULT_TOLERANCE, ToleranceConfig


if sys.version_info >= (3, 12):
    from typing import override
else:
    from typing_extensions import override

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self


__all__ = [
    "beta_interval",
    "eta_interval",
    "Interval",
    "k_prior_pmf",
    "KPrior",
    "NegBinPrior",
    "p1_bounds",
    "parse_k_prior",
    "PoissonPrior",
    "prior_logdensity_beta",
    "prior_logdensity_eta",
    "PriorConfig",
    "sample_eta",
    "sample_k",
    "sample_p0",
    "sample_prior",
]


K_OFFSET = 3
INTERVAL_SLACK = 1e-12


class Interval(NamedTuple):
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def degenerate(self) -> bool:
        return self.width <= INTERVAL_SLACK

    def contains(self, x: float, /) -> bool:
        return self.lower - INTERVAL_SLACK <= x <= self.upper + INTERVAL_SLACK


class KPrior(ABC):
    """
    Prior on the order parameter `k`, a count distribution shifted by 3.
    """

    __slots__ = []

    @abstractmethod
    def _distribution(self) -> Any:
        """
        The frozen scipy distribution of `k - 3`.
        """

    @abstractmethod
    def spec(self) -> str:
        """
        Returns the command-line specification, e.g. `poisson:7`.
        """

    @abstractmethod
    def sample(self, rng: np.random.Generator, /) -> int:
        """
        Draws `k`.
        """

    def pmf(self, k: int, /) -> float:
        """
        Returns `Π(k)`, zero below 3.
        """

        return float(self._distribution().pmf(k - K_OFFSET)) if k >= K_OFFSET else 0.0

    def logpmf(self, k: int, /) -> float:
        """
        Returns `log Π(k)`, `-inf` below 3.
        """

        return float(self._distribution().logpmf(k - K_OFFSET)) if k >= K_OFFSET else -math.inf

    def mode(self) -> int:
        """
        Returns the smallest most probable `k`.
        """

        dist = self._distribution()
        upper = int(dist.ppf(0.999999)) + 1
        support = np.arange(upper + 1)
        return K_OFFSET + int(np.argmax(dist.pmf(support)))


@dataclass(frozen=True, slots=True)
class PoissonPrior(KPrior):
    """
    `k - 3 ~ Poisson(kappa)`.
    """

    kappa: float

    def __post_init__(self) -> None:
        if not self.kappa > 0:
            raise DomainError(f"Poisson mean must be positive, got {self.kappa!r}.")

    @override
    def _distribution(self) -> Any:
        return stats.poisson(self.kappa)

    @override
    def spec(self) -> str:
        return f"poisson:{self.kappa:g}"

    @override
    def sample(self, rng: np.random.Generator, /) -> int:
        return K_OFFSET + int(rng.poisson(self.kappa))


@dataclass(frozen=True, slots=True)
class NegBinPrior(KPrior):
    """
    `k - 3` negative binomial with mean `kappa` and variance `sigma2 > kappa`.
    """

    kappa: float
    sigma2: float

    def __post_init__(self) -> None:
        if not self.kappa > 0:
            raise DomainError(f"negative binomial mean must be positive, got {self.kappa!r}.")
        if not self.sigma2 > self.kappa:
            raise DomainError(f"negative binomial variance must exceed the mean, got {self.sigma2!r}.")

    @property
    def p(self) -> float:
        return self.kappa / self.sigma2

    @property
    def s(self) -> float:
        return self.kappa ** 2 / (self.sigma2 - self.kappa)

    @override
    def _distribution(self) -> Any:
        return stats.nbinom(self.s, self.p)

    @override
    def spec(self) -> str:
        return f"negbin:{self.kappa:g},{self.sigma2:g}"

    @override
    def sample(self, rng: np.random.Generator, /) -> int:
        return K_OFFSET + int(rng.negative_binomial(self.s, self.p))


def parse_k_prior(spec: str, /) -> KPrior:
    """
    Parses `poisson:KAPPA` or `negbin:KAPPA,SIGMA2`.

    Raises:
        DomainError: If the specification is malformed or out of range.
    """

    name, _, args = spec.strip().lower().partition(":")
    try:
        values = [float(v) for v in args.split(",")] if args else []
    except ValueError:
        raise DomainError(f"malformed k prior {spec!r}.") from None
    match name, values:
        case "poisson", [kappa]:
            return PoissonPrior(kappa)
        case "negbin", [kappa, sigma2]:
            return NegBinPrior(kappa, sigma2)
    raise DomainError(f"unknown k prior {spec!r}; expected poisson:KAPPA or negbin:KAPPA,SIGMA2.")


@dataclass(frozen=True, slots=True)
class PriorConfig:
    """
    Prior on `(k, η)`.

    The coefficients are uniform on their sequential intervals given `k`;
    only the prior on `k` is configurable.

    Attributes:
        k_prior (KPrior): Prior on the order. Defaults to `PoissonPrior(7)`.
    """

    k_prior: KPrior = field(default_factory=lambda: PoissonPrior(7.0))

    def pmf_table(self, k_max: int, /) -> dict[int, float]:
        """
        Returns `{k: Π(k)}` for `k = 3..k_max`.
        """

        return {k: self.k_prior.pmf(k) for k in range(K_OFFSET, k_max + 1)}

    def to_dict(self) -> dict[str, Any]:
        return {"k_prior": self.k_prior.spec()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], /) -> Self:
        return cls(parse_k_prior(data["k_prior"]))


def k_prior_pmf(cfg: PriorConfig, k: int, /) -> float:
    """
    Returns the prior probability of the order `k`.

    Raises:
        DomainError: If `k < 3`.
    """

    if k < K_OFFSET:
        raise DomainError(f"k must be at least {K_OFFSET}, got {k!r}.")
    return cfg.k_prior.pmf(k)


def sample_k(cfg: PriorConfig, rng: np.random.Generator, /) -> int:
    """
    Draws the polynomial order from the configured prior.

    Args:
        cfg (PriorConfig): The prior configuration.
        rng (np.random.Generator): Source of randomness.

    Returns:
        int: An order of at least 3.
    """

    return cfg.k_prior.sample(rng)



def sample_p0(rng: np.random.Generator, /) -> float:
    """
    Draws the mass at 0 uniformly on [0, 1/2].
    """

    return float(rng.uniform(0.0, 0.5))


def p1_bounds(k: int, p0: float, /) -> Interval:
    """
    Range of the mass at 1 that keeps the coefficient restrictions satisfiable given `p0`.

    Args:
        k (int): The order, at least 3.
        p0 (float): The mass at 0, in [0, 1/2].

    Returns:
        Interval: `(max{0, (k-1)p0 - k/2 + 1}, (p0 + k/2 - 1)/(k-1))`.
    """

    if k < K_OFFSET:
        raise DomainError(f"k must be at least {K_OFFSET}, got {k!r}.")
    lower = max(0.0, (k - 1) * p0 - k / 2 + 1)
    upper = (p0 + k / 2 - 1) / (k - 1)
    return Interval(lower, max(lower, upper))


def eta_interval(j: int, k: int, eta_prefix: Sequence[float], eta_last: float, /) -> Interval:
    """
    Widest range of `η_j` that keeps the ordering and sum restrictions satisfiable
    given `η_0..η_{j-1}` and `η_{k-1}`.

    Args:
        j (int): Index, `1 <= j <= k-2`.
        k (int): The order.
        eta_prefix (Sequence[float]): `η_0..η_{j-1}`.
        eta_last (float): `η_{k-1} = 1 - p1`.

    Raises:
        InfeasiblePrefixError: If the interval is empty beyond `1e-12`.

    Returns:
        Interval: The closed interval, possibly a single point.
    """

    if not 1 <= j <= k - 2:
        raise DomainError(f"index must lie in [1, {k - 2}], got {j!r}.")
    if len(eta_prefix) != j:
        raise DomainError(f"expected {j} prefix coefficients, got {len(eta_prefix)}.")
    p1 = 1.0 - eta_last
    total = math.fsum(eta_prefix)
    lower = max(eta_prefix[-1], k / 2 + (k - j - 1) * (p1 - 1) - total)
    upper = min(eta_last, (k / 2 + p1 - 1 - total) / (k - j - 1))
    if upper < lower - INTERVAL_SLACK:
        raise InfeasiblePrefixError(f"empty interval for η_{j}: [{lower!r}, {upper!r}].")
    if upper < lower:
        return Interval(upper, upper)
    return Interval(lower, upper)


def _uniform(rng: np.random.Generator, interval: Interval) -> float:
    if interval.degenerate:
        return interval.upper
    return float(rng.uniform(interval.lower, interval.upper))


def sample_eta(
        k: int,
        rng: np.random.Generator,
        /, *,
        p0: float | None = None,
        p1: float | None = None,
) -> AngularCoefficients:
    """
    Draws angular coefficients of order `k` from the conditional prior.

    `p0` is uniform on [0, 1/2], `p1` uniform on `p1_bounds(k, p0)`, and each inner coefficient
    uniform on its `eta_interval` in increasing index order. Degenerate intervals yield their point.

    Args:
        k (int): The order, at least 3.
        rng (Generator): Random generator.
        p0 (float, optional): Fixes the mass at 0 instead of drawing it.
        p1 (float, optional): Fixes the mass at 1 instead of drawing it.

    Returns:
        AngularCoefficients: Coefficients satisfying the ordering and sum restrictions.
    """

    if k < K_OFFSET:
        raise DomainError(f"k must be at least {K_OFFSET}, got {k!r}.")
    if p0 is None:
        p0 = sample_p0(rng)
    if p1 is None:
        p1 = _uniform(rng, p1_bounds(k, p0))

    eta = [p0]
    last = 1.0 - p1
    for j in range(1, k - 1):
        eta.append(_uniform(rng, eta_interval(j, k, eta, last)))
    eta.append(last)
    return AngularCoefficients(eta)


def sample_prior(cfg: PriorConfig, rng: np.random.Generator, /) -> AngularCoefficients:
    """
    Draws `(k, η)` jointly from the prior.
    """

    return sample_eta(sample_k(cfg, rng), rng)


def _log_uniform(x: float, interval: Interval) -> float:
    if not interval.contains(x):
        return -math.inf
    if interval.degenerate:
        return 0.0
    return -math.log(interval.width)


def prior_logdensity_eta(
        cfg: PriorConfig,
        c: AngularCoefficients,
        tol: ToleranceConfig = DEFAULT_TOLERANCE,
        /, *,
        include_k: bool = False,
) -> float:
    """
    Log prior density of angular coefficients given their order.

    Sums the log densities of the uniform laws of `p0`, `p1` and the inner coefficients on their
    sequential intervals. Degenerate intervals contribute 0.

    Args:
        cfg (PriorConfig): The prior.
        c (AngularCoefficients): The coefficients.
        tol (ToleranceConfig, optional): Validation tolerances.
        include_k (bool, optional): Adds `log Π(k)`. Defaults to False.

    Returns:
        float: The log density, `-inf` for invalid coefficients.
    """

    if not validate_angular(c, tol):
        return -math.inf
    eta, k = c.eta.tolist(), c.k
    log_density = math.log(2.0) + _log_uniform(c.p1, p1_bounds(k, min(max(c.p0, 0.0), 0.5)))
    try:
        for j in range(1, k - 1):
            log_density += _log_uniform(eta[j], eta_interval(j, k, eta[:j], eta[-1]))
    except InfeasiblePrefixError:
        return -math.inf
    if include_k:
        log_density += cfg.k_prior.logpmf(k)
    return log_density


def prior_logdensity_beta(
        cfg: PriorConfig,
        c: PickandsCoefficients,
        tol: ToleranceConfig = DEFAULT_TOLERANCE,
        /, *,
        include_k: bool = False,
) -> float:
    """
    Log prior density of Pickands coefficients, induced by the linear map from the angular ones.

    Equals the angular density of `beta_to_eta(c)` plus `(k-3) log(k/2)`.

    Returns:
        float: The log density, `-inf` for invalid coefficients.
    """

    try:
        eta = beta_to_eta(c, tol)
    except InvalidCoefficientsError:
        return -math.inf
    return prior_logdensity_eta(cfg, eta, tol, include_k=include_k) + (c.k - 3) * math.log(c.k / 2)


def beta_interval(j: int, k: int, beta_prefix: Sequence[float], beta_km1: float, /) -> Interval:
    """
    Range of `β_j` induced by the angular intervals, given `β_0..β_{j-1}` and `β_{k-1}`.

    Args:
        j (int): Index, `2 <= j <= k-2`.
        k (int): The order.
        beta_prefix (Sequence[float]): `β_0..β_{j-1}`.
        beta_km1 (float): `β_{k-1}`.

    Raises:
        InfeasiblePrefixError: If the interval is empty beyond `1e-12`.

    Returns:
        Interval: `[max{2β_{j-1} - β_{j-2}, (k-j)β_{k-1} - (k-j-1)}, (β_{k-1} + (k-j-1)β_{j-1})/(k-j)]`.
    """

    if not 2 <= j <= k - 2:
        raise DomainError(f"index must lie in [2, {k - 2}], got {j!r}.")
    if len(beta_prefix) != j:
        raise DomainError(f"expected {j} prefix coefficients, got {len(beta_prefix)}.")
    lower = max(2 * beta_prefix[-1] - beta_prefix[-2], (k - j) * beta_km1 - (k - j - 1))
    upper = (beta_km1 + (k - j - 1) * beta_prefix[-1]) / (k - j)
    if upper < lower - INTERVAL_SLACK:
        raise InfeasiblePrefixError(f"empty interval for β_{j}: [{lower!r}, {upper!r}].")
    if upper < lower:
        return Interval(upper, upper)
    return Interval(lower, upper)
