import sys
from abc import ABC, abstractmethod
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Any, NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import special

from ._errors import DomainError, InvalidCoefficientsError
from ._numerics import DEFAULT_TOLERANCE, ToleranceConfig, bernstein_basis


if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self

if sys.version_info >= (3, 12):
    from typing import override
else:
    from typing_extensions import override


__all__ = [
    "angular_cdf",
    "angular_density",
    "AngularCoefficients",
    "beta_to_eta",
    "chi",
    "elevate_degree",
    "eta_to_beta",
    "exceedance_prob",
    "pickands",
    "pickands_d1",
    "pickands_d2",
    "PickandsCoefficients",
    "Restriction",
    "stable_tail_L",
    "tail_dep_R",
    "validate_angular",
    "validate_pickands",
    "ValidityReport",
    "Violation",
]


Scalar = np.float64 | NDArray[np.float64]


class _Coefficients(ABC):
    """
    Immutable coefficient vector of a Bernstein representation.
    """

    __slots__ = ["_values"]

    _values: NDArray[np.float64]

    def __init__(self, values: ArrayLike, /) -> None:
        array = np.array(values, dtype=float)
        if array.ndim != 1:
            raise DomainError("coefficients must form a one-dimensional sequence.")
        if not np.all(np.isfinite(array)):
            raise DomainError("coefficients must be finite.")
        array.setflags(write=False)
        self._values = array
        if self.k < 3:
            raise DomainError(f"the order k must be at least 3, got {self.k}.")

    @property
    @abstractmethod
    def k(self) -> int:
        """
        The order parameter `k`.
        """

    @property
    @abstractmethod
    def p0(self) -> float:
        """
        The mass of the angular measure at 0.
        """

    @property
    @abstractmethod
    def p1(self) -> float:
        """
        The mass of the angular measure at 1.
        """

    @abstractmethod
    def to_dict(self) -> dict[str, Any]:
        """
        Returns the JSON-compatible representation.
        """

    @override
    def __eq__(self, other: object, /) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    @override
    def __hash__(self) -> int:
        return hash((type(self), self._values.tobytes()))

    @override
    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._values.tolist()!r})"


class AngularCoefficients(_Coefficients):
    """
    Coefficients `η_0..η_{k-1}` of the angular distribution function `H_{k-1}`.

    The vertex masses are views of the end coefficients, `p0 = η_0` and `p1 = 1 - η_{k-1}`.
    """

    __slots__ = []

    def __init__(self, eta: ArrayLike, /) -> None:
        """
        Initializes a new instance of the `AngularCoefficients` class.

        Args:
            eta (ArrayLike): The coefficients, `k` of them.

        Raises:
            DomainError: If fewer than three finite coefficients are given.
        """

        super().__init__(eta)

    @property
    def eta(self) -> NDArray[np.float64]:
        """
        The read-only coefficient array.
        """

        return self._values

    @property
    @override
    def k(self) -> int:
        return len(self._values)

    @property
    @override
    def p0(self) -> float:
        return float(self._values[0])

    @property
    @override
    def p1(self) -> float:
        return float(1.0 - self._values[-1])

    @override
    def to_dict(self) -> dict[str, Any]:
        return {"k": self.k, "eta": self._values.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], /) -> Self:
        """
        Reads coefficients from `{"k": int, "eta": [floats]}`.

        Raises:
            DomainError: If `k` disagrees with the number of coefficients.
        """

        c = cls(data["eta"])
        if "k" in data and int(data["k"]) != c.k:
            raise DomainError(f"k={data['k']} does not match {c.k} coefficients.")
        return c


class PickandsCoefficients(_Coefficients):
    """
    Coefficients `β_0..β_k` of the Pickands dependence function `A_k`.
    """

    __slots__ = []

    def __init__(self, beta: ArrayLike, /) -> None:
        """
        Initializes a new instance of the `PickandsCoefficients` class.

        Args:
            beta (ArrayLike): The coefficients, `k + 1` of them.

        Raises:
            DomainError: If fewer than four finite coefficients are given.
        """

        super().__init__(beta)

    @property
    def beta(self) -> NDArray[np.float64]:
        """
        The read-only coefficient array.
        """

        return self._values

    @property
    @override
    def k(self) -> int:
        return len(self._values) - 1

    @property
    @override
    def p0(self) -> float:
        return float((self.k * self._values[1] - (self.k - 1)) / 2)

    @property
    @override
    def p1(self) -> float:
        return float((self.k * self._values[-2] - (self.k - 1)) / 2)

    @override
    def to_dict(self) -> dict[str, Any]:
        return {"k": self.k, "beta": self._values.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], /) -> Self:
        """
        Reads coefficients from `{"k": int, "beta": [floats]}`.

        Raises:
            DomainError: If `k` disagrees with the number of coefficients.
        """

        c = cls(data["beta"])
        if "k" in data and int(data["k"]) != c.k:
            raise DomainError(f"k={data['k']} does not match {c.k + 1} coefficients.")
        return c

    @classmethod
    def from_function(cls, f: Callable[[float], float], k: int, /) -> Self:
        """
        Bernstein projection `β_j = f(j/k)` of a Pickands dependence function.

        Args:
            f ((float) -> float): A Pickands dependence function on [0, 1].
            k (int): The order, at least 3.

        Returns:
            PickandsCoefficients: The projected coefficients.
        """

        return cls([f(j / k) for j in range(k + 1)])


class Restriction(Enum):
    """
    Validity restrictions of the Bernstein representations.
    """

    RANGE = "coefficients lie in [0, 1]"
    ORDER = "coefficients are nondecreasing"
    SUM = "coefficients sum to k/2"
    VERTEX_MASS = "vertex masses lie in [0, 1/2]"
    ENDPOINTS = "end coefficients equal 1"
    UPPER_BOUND = "coefficients do not exceed 1"
    ENDPOINT_SLOPE = "end slopes correspond to vertex masses in [0, 1/2]"
    CONVEXITY = "second differences are nonnegative"


class Violation(NamedTuple):
    restriction: Restriction
    index: int
    message: str


@dataclass(frozen=True, slots=True)
class ValidityReport:
    """
    Outcome of a coefficient validation.

    Attributes:
        violations (tuple[Violation, ...]): Violated restrictions with the offending indices.
    """

    violations: tuple[Violation, ...] = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def restrictions(self) -> frozenset[Restriction]:
        """
        The set of violated restrictions.
        """

        return frozenset(v.restriction for v in self.violations)

    def __bool__(self) -> bool:
        return self.valid

    @override
    def __str__(self) -> str:
        if self.valid:
            return "valid"
        return "; ".join(f"{v.restriction.name}[{v.index}]: {v.message}" for v in self.violations)


def validate_angular(c: AngularCoefficients, tol: ToleranceConfig = DEFAULT_TOLERANCE, /) -> ValidityReport:
    """
    Checks the angular coefficients against the ordering, sum and vertex-mass restrictions.

    Args:
        c (AngularCoefficients): The coefficients.
        tol (ToleranceConfig, optional): Tolerances.

    Returns:
        ValidityReport: Every violated restriction with its offending index.
    """

    eta, k, slack = c.eta, c.k, tol.order_slack
    violations: list[Violation] = []

    for j in np.flatnonzero((eta < -slack) | (eta > 1 + slack)):
        violations.append(Violation(Restriction.RANGE, int(j), f"η_{j} = {eta[j]!r}"))
    for j in np.flatnonzero(np.diff(eta) < -slack):
        violations.append(Violation(Restriction.ORDER, int(j) + 1, f"η_{j + 1} < η_{j}"))

    total = float(np.sum(eta))
    if abs(total - k / 2) > tol.sum_tol:
        violations.append(Violation(Restriction.SUM, k - 1, f"sum {total!r} != {k / 2!r}"))

    if c.p0 > 0.5 + slack:
        violations.append(Violation(Restriction.VERTEX_MASS, 0, f"p0 = {c.p0!r}"))
    if c.p1 > 0.5 + slack:
        violations.append(Violation(Restriction.VERTEX_MASS, k - 1, f"p1 = {c.p1!r}"))

    return ValidityReport(tuple(violations))


def validate_pickands(c: PickandsCoefficients, tol: ToleranceConfig = DEFAULT_TOLERANCE, /) -> ValidityReport:
    """
    Checks the Pickands coefficients against the endpoint, bound, slope and convexity restrictions.

    Args:
        c (PickandsCoefficients): The coefficients.
        tol (ToleranceConfig, optional): Tolerances.

    Returns:
        ValidityReport: Every violated restriction with its offending index.
    """

    beta, k, slack = c.beta, c.k, tol.order_slack
    violations: list[Violation] = []

    for j in (0, k):
        if abs(beta[j] - 1) > tol.sum_tol:
            violations.append(Violation(Restriction.ENDPOINTS, j, f"β_{j} = {beta[j]!r}"))
    for j in np.flatnonzero(beta > 1 + tol.sum_tol):
        violations.append(Violation(Restriction.UPPER_BOUND, int(j), f"β_{j} = {beta[j]!r}"))

    for j, p in ((1, c.p0), (k - 1, c.p1)):
        if not (-tol.sum_tol <= p <= 0.5 + tol.sum_tol):
            violations.append(Violation(Restriction.ENDPOINT_SLOPE, j, f"implied vertex mass {p!r}"))

    for j in np.flatnonzero(np.diff(beta, 2) < -slack):
        violations.append(Violation(Restriction.CONVEXITY, int(j), f"β_{j + 2} - 2β_{j + 1} + β_{j} < 0"))

    return ValidityReport(tuple(violations))


def _eta_to_beta_array(eta: NDArray[np.float64]) -> NDArray[np.float64]:
    k = eta.shape[-1]
    j = np.arange(k)
    beta = np.ones(eta.shape[:-1] + (k + 1,))
    beta[..., 1:] = (2 * np.cumsum(eta, axis=-1) + k - j - 1) / k
    return beta


def _beta_to_eta_array(beta: NDArray[np.float64]) -> NDArray[np.float64]:
    k = beta.shape[-1] - 1
    return k / 2 * np.diff(beta, axis=-1) + 0.5


def beta_to_eta(c: PickandsCoefficients, tol: ToleranceConfig = DEFAULT_TOLERANCE, /) -> AngularCoefficients:
    """
    Converts Pickands coefficients to the angular coefficients of the same order,
    `η_j = (k/2)(β_{j+1} - β_j + 1/k)`.

    Raises:
        InvalidCoefficientsError: If `c` fails validation.
    """

    report = validate_pickands(c, tol)
    if not report:
        raise InvalidCoefficientsError(report)
    return AngularCoefficients(_beta_to_eta_array(c.beta))


def eta_to_beta(c: AngularCoefficients, tol: ToleranceConfig = DEFAULT_TOLERANCE, /) -> PickandsCoefficients:
    """
    Converts angular coefficients to the Pickands coefficients of the same order,
    `β_0 = 1`, `β_{j+1} = (2 Σ_{i<=j} η_i + k - j - 1)/k`.

    Raises:
        InvalidCoefficientsError: If `c` fails validation.
    """

    report = validate_angular(c, tol)
    if not report:
        raise InvalidCoefficientsError(report)
    return PickandsCoefficients(_eta_to_beta_array(c.eta))


def _unit_interval(x: ArrayLike, name: str, *, open_: bool = False) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1) if open_ else (x >= 0) & (x <= 1)
    if not np.all(inside):
        interval = "(0, 1)" if open_ else "[0, 1]"
        raise DomainError(f"{name} must lie in {interval}.")
    return x


def _angular_cdf_values(eta: NDArray[np.float64], w: NDArray[np.float64]) -> NDArray[np.float64]:
    k = eta.shape[-1]
    values = bernstein_basis(w, k - 1) @ eta
    return np.where(w >= 1, 1.0, values)


def _angular_density_values(eta: NDArray[np.float64], w: NDArray[np.float64]) -> NDArray[np.float64]:
    k = eta.shape[-1]
    return (k - 1) * (bernstein_basis(w, k - 2) @ np.diff(eta))


def _pickands_values(beta: NDArray[np.float64], t: NDArray[np.float64]) -> NDArray[np.float64]:
    return bernstein_basis(t, beta.shape[-1] - 1) @ beta


def _pickands_d1_values(beta: NDArray[np.float64], t: NDArray[np.float64]) -> NDArray[np.float64]:
    k = beta.shape[-1] - 1
    return k * (bernstein_basis(t, k - 1) @ np.diff(beta))


def _pickands_d2_values(beta: NDArray[np.float64], t: NDArray[np.float64]) -> NDArray[np.float64]:
    k = beta.shape[-1] - 1
    return k * (k - 1) * (bernstein_basis(t, k - 2) @ np.diff(beta, 2))


def angular_cdf(c: AngularCoefficients, w: ArrayLike, /) -> Scalar:
    """
    Evaluates the angular distribution function `H_{k-1}([0, w])`.

    Equals `Σ η_j b_j(w; k-1)` for `w < 1`, and 1 at `w = 1`.

    Args:
        c (AngularCoefficients): The coefficients.
        w (ArrayLike): Points in [0, 1].

    Raises:
        DomainError: If some `w` lies outside [0, 1].
    """

    w = _unit_interval(w, "w")
    return _angular_cdf_values(c.eta, w)[()]


def angular_density(c: AngularCoefficients, w: ArrayLike, /) -> Scalar:
    """
    Evaluates the density of the angular measure in the interior of the simplex,
    `h_{k-1}(w) = Σ (η_{j+1} - η_j) Be(w | j+1, k-j-1)`.

    Raises:
        DomainError: If some `w` lies outside (0, 1).
    """

    w = _unit_interval(w, "w", open_=True)
    return _angular_density_values(c.eta, w)[()]


def pickands(c: PickandsCoefficients, t: ArrayLike, /) -> Scalar:
    """
    Evaluates the Pickands dependence function `A_k(t) = Σ β_j b_j(t; k)`.

    Raises:
        DomainError: If some `t` lies outside [0, 1].
    """

    t = _unit_interval(t, "t")
    return _pickands_values(c.beta, t)[()]


def pickands_d1(c: PickandsCoefficients, t: ArrayLike, /) -> Scalar:
    """
    Evaluates `A_k'(t)`, one-sided at the endpoints.

    Raises:
        DomainError: If some `t` lies outside [0, 1].
    """

    t = _unit_interval(t, "t")
    return _pickands_d1_values(c.beta, t)[()]


def pickands_d2(c: PickandsCoefficients, t: ArrayLike, /) -> Scalar:
    """
    Evaluates `A_k''(t)` on the open interval.

    Raises:
        DomainError: If some `t` lies outside (0, 1).
    """

    t = _unit_interval(t, "t", open_=True)
    return _pickands_d2_values(c.beta, t)[()]


def stable_tail_L(c: PickandsCoefficients, x1: ArrayLike, x2: ArrayLike, /) -> Scalar:
    """
    Evaluates the stable-tail dependence function `L(x1, x2) = (x1 + x2) A(x2 / (x1 + x2))`.

    Args:
        c (PickandsCoefficients): The coefficients.
        x1 (ArrayLike): Nonnegative first argument.
        x2 (ArrayLike): Nonnegative second argument.

    Raises:
        DomainError: If an argument is negative.

    Returns:
        The function value; `L(0, 0) = 0`.
    """

    x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
    if np.any(x1 < 0) or np.any(x2 < 0):
        raise DomainError("stable-tail arguments must be nonnegative.")
    s = x1 + x2
    t = np.divide(x2, s, out=np.zeros_like(s), where=s > 0)
    return (s * _pickands_values(c.beta, t))[()]


def tail_dep_R(c: PickandsCoefficients, x1: ArrayLike, x2: ArrayLike, /) -> Scalar:
    """
    Evaluates `R(x1, x2) = x1 + x2 - L(x1, x2)`.

    Raises:
        DomainError: If an argument is negative.
    """

    return (np.add(x1, x2) - stable_tail_L(c, x1, x2))[()]


def chi(c: PickandsCoefficients, /) -> float:
    """
    Returns the coefficient of upper tail dependence `χ = 2 - 2A(1/2)`.
    """

    return float(2 - 2 * _pickands_values(c.beta, np.asarray(0.5)))


def _exceedance_values(eta: NDArray[np.float64], y1: NDArray[np.float64], y2: NDArray[np.float64]) -> NDArray[np.float64]:
    k = eta.shape[-1]
    j = np.arange(k - 1, dtype=float)
    c = (y1 / (y1 + y2))[..., np.newaxis]
    lower = (j + 1) * special.betainc(j + 2, k - j - 1, c) / y1[..., np.newaxis]
    upper = (k - j - 1) * special.betainc(k - j, j + 1, 1 - c) / y2[..., np.newaxis]
    return 2 / k * np.sum(np.diff(eta) * (lower + upper), axis=-1)


def exceedance_prob(c: AngularCoefficients, y1: ArrayLike, y2: ArrayLike, /) -> Scalar:
    """
    Approximates the joint exceedance probability `P(Y1 > y1, Y2 > y2)` of unit-Fréchet
    margins by `R(1/y1, 1/y2)`, through the closed form in regularized incomplete beta functions.

    Args:
        c (AngularCoefficients): The coefficients.
        y1 (ArrayLike): Positive first threshold.
        y2 (ArrayLike): Positive second threshold.

    Raises:
        DomainError: If a threshold is not positive.
    """

    y1, y2 = np.broadcast_arrays(np.asarray(y1, dtype=float), np.asarray(y2, dtype=float))
    if np.any(y1 <= 0) or np.any(y2 <= 0):
        raise DomainError("exceedance thresholds must be positive.")
    return _exceedance_values(c.eta, y1, y2)[()]


def elevate_degree(c: AngularCoefficients, /) -> AngularCoefficients:
    """
    Raises the order by one without changing the angular distribution,
    `η*_j = η_j (k-j)/k + η_{j-1} j/k` for `j = 0..k`.
    """

    eta, k = c.eta, c.k
    j = np.arange(k + 1)
    padded = np.concatenate(([0.0], eta, [0.0]))
    return AngularCoefficients(padded[1:] * (k - j) / k + padded[:-1] * j / k)
