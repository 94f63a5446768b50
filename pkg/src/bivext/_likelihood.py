import logging
import warnings
from collections.abc import Iterator
from os import PathLike

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from ._errors import DensityUnderflowWarning, DomainError
from ._extremal import (
    AngularCoefficients,
    PickandsCoefficients,
    _eta_to_beta_array,
    _pickands_d1_values,
    _pickands_d2_values,
    _pickands_values,
    eta_to_beta,
)
from ._numerics import bernstein_basis


__all__ = [
    "BernsteinLikelihood",
    "FrechetSample",
    "log_density",
    "log_likelihood",
    "log_likelihood_eta",
    "max_stable_cdf",
]


logger = logging.getLogger(__name__)

DENSITY_FLOOR = 1e-300


class FrechetSample:
    """
    Pairs `(y1, y2)` on the unit-Fréchet scale.
    """

    __slots__ = ["__y1", "__y2"]

    def __init__(self, y1: ArrayLike, y2: ArrayLike, /) -> None:
        """
        Initializes a new instance of the `FrechetSample` class.

        Args:
            y1 (ArrayLike): First coordinates.
            y2 (ArrayLike): Second coordinates, as many as `y1`.

        Raises:
            DomainError: If the sample is empty, ragged, or has a nonpositive or nonfinite coordinate.
        """

        y1 = np.array(y1, dtype=float).ravel()
        y2 = np.array(y2, dtype=float).ravel()
        if len(y1) != len(y2):
            raise DomainError(f"coordinate lengths differ: {len(y1)} and {len(y2)}.")
        if len(y1) == 0:
            raise DomainError("a sample needs at least one pair.")
        if not (np.all(np.isfinite(y1)) and np.all(np.isfinite(y2))):
            raise DomainError("coordinates must be finite.")
        if np.any(y1 <= 0) or np.any(y2 <= 0):
            raise DomainError("unit-Fréchet coordinates must be positive.")
        y1.setflags(write=False)
        y2.setflags(write=False)
        self.__y1 = y1
        self.__y2 = y2

    @property
    def y1(self) -> NDArray[np.float64]:
        return self.__y1

    @property
    def y2(self) -> NDArray[np.float64]:
        return self.__y2

    @property
    def n(self) -> int:
        return len(self.__y1)

    @property
    def t(self) -> NDArray[np.float64]:
        """
        The pseudo-angles `y1 / (y1 + y2)`.
        """

        return self.__y1 / (self.__y1 + self.__y2)

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return zip(self.__y1.tolist(), self.__y2.tolist())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"y1": self.__y1, "y2": self.__y2})

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, /) -> "FrechetSample":
        """
        Reads the `y1` and `y2` columns.

        Raises:
            DomainError: If a column is missing or not numeric.
        """

        missing = {"y1", "y2"} - set(frame.columns)
        if missing:
            raise DomainError(f"missing columns: {', '.join(sorted(missing))}.")
        try:
            y1 = frame["y1"].to_numpy(dtype=float)
            y2 = frame["y2"].to_numpy(dtype=float)
        except (TypeError, ValueError) as e:
            raise DomainError(f"non-numeric coordinates: {e}") from e
        return cls(y1, y2)

    @classmethod
    def read_csv(cls, path: str | PathLike[str], /) -> "FrechetSample":
        """
        Reads a CSV file with header `y1,y2`.

        Raises:
            OSError: If the file cannot be read.
            DomainError: If the content is not a valid sample.
        """

        try:
            frame = pd.read_csv(path, float_precision="round_trip")
        except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
            raise DomainError(f"unreadable sample {str(path)!r}: {e}") from e
        return cls.from_frame(frame)


def _positive_pair(y1: ArrayLike, y2: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    y1, y2 = np.broadcast_arrays(np.asarray(y1, dtype=float), np.asarray(y2, dtype=float))
    if np.any(y1 <= 0) or np.any(y2 <= 0):
        raise DomainError("max-stable arguments must be positive.")
    return y1, y2


def _log_density_terms(
        a: NDArray[np.float64],
        d1: NDArray[np.float64],
        d2: NDArray[np.float64],
        y1: NDArray[np.float64],
        y2: NDArray[np.float64],
) -> NDArray[np.float64]:
    t = y1 / (y1 + y2)
    bracket = (a - t * d1) * (a + (1 - t) * d1) / (y1 * y2) ** 2 + d2 / (y1 + y2) ** 3
    underflow = bracket < DENSITY_FLOOR
    if np.any(underflow):
        warnings.warn(f"density underflow at {int(np.sum(underflow))} point(s)", DensityUnderflowWarning, stacklevel=3)
    log_bracket = np.log(np.where(underflow, 1.0, bracket))
    return np.where(underflow, -np.inf, -(1 / y1 + 1 / y2) * a + log_bracket)


def max_stable_cdf(c: PickandsCoefficients, y1: ArrayLike, y2: ArrayLike, /) -> np.float64 | NDArray[np.float64]:
    """
    Evaluates `G(y1, y2) = exp{-(1/y1 + 1/y2) A(y1 / (y1 + y2))}`.

    Raises:
        DomainError: If an argument is not positive.
    """

    y1, y2 = _positive_pair(y1, y2)
    a = _pickands_values(c.beta, y1 / (y1 + y2))
    return np.exp(-(1 / y1 + 1 / y2) * a)[()]


def log_density(c: PickandsCoefficients, y1: ArrayLike, y2: ArrayLike, /) -> np.float64 | NDArray[np.float64]:
    """
    Evaluates the log of the max-stable density

    `g = G [(A - tA')(A + (1-t)A') / (y1 y2)^2 + A'' / (y1 + y2)^3]`, `t = y1 / (y1 + y2)`.

    Where the bracket falls below `1e-300` the value is `-inf` and a `DensityUnderflowWarning` is issued.

    Raises:
        DomainError: If an argument is not positive.
    """

    y1, y2 = _positive_pair(y1, y2)
    t = y1 / (y1 + y2)
    beta = c.beta
    terms = _log_density_terms(
        _pickands_values(beta, t), _pickands_d1_values(beta, t), _pickands_d2_values(beta, t), y1, y2,
    )
    return terms[()]


def log_likelihood(c: PickandsCoefficients, data: FrechetSample, /) -> float:
    """
    Sum of `log_density` over the pairs of the sample.
    """

    return float(np.sum(log_density(c, data.y1, data.y2)))


def log_likelihood_eta(c: AngularCoefficients, data: FrechetSample, /) -> float:
    """
    Log-likelihood in angular coordinates, through the conversion to Pickands coefficients.
    """

    return log_likelihood(eta_to_beta(c), data)


class BernsteinLikelihood:
    """
    Log-likelihood of a fixed sample with the Bernstein bases at the sample angles cached per order.

    Instances are called with angular coefficient arrays and skip validation; the sampler only
    proposes coefficients drawn from the prior.
    """

    __slots__ = ["__data", "__bases"]

    def __init__(self, data: FrechetSample, /) -> None:
        self.__data = data
        self.__bases: dict[int, NDArray[np.float64]] = {}

    @property
    def data(self) -> FrechetSample:
        return self.__data

    def __basis(self, degree: int) -> NDArray[np.float64]:
        basis = self.__bases.get(degree)
        if basis is None:
            basis = self.__bases[degree] = bernstein_basis(self.__data.t, degree)
        return basis

    def __call__(self, eta: NDArray[np.float64], /) -> float:
        """
        Evaluates the log-likelihood of angular coefficients `η_0..η_{k-1}`.

        With `Δβ_j = (2η_j - 1)/k`, the derivatives reduce to `A' = Σ (2η_j - 1) b_j(t; k-1)` and
        `A'' = 2(k-1) Σ (η_{j+1} - η_j) b_j(t; k-2)`.
        """

        k = len(eta)
        a = self.__basis(k) @ _eta_to_beta_array(eta)
        d1 = self.__basis(k - 1) @ (2 * eta - 1)
        d2 = 2 * (k - 1) * (self.__basis(k - 2) @ np.diff(eta))
        return float(np.sum(_log_density_terms(a, d1, d2, self.__data.y1, self.__data.y2)))

    def from_eta(self, c: AngularCoefficients, /) -> float:
        return self(c.eta)

    def from_beta(self, c: PickandsCoefficients, /) -> float:
        return log_likelihood(c, self.__data)
