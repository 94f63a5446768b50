import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray
from scipy import integrate

from ._errors import DomainError, EmptyChainError
from ._extremal import _eta_to_beta_array, _exceedance_values
from ._margins import GevParams, to_unit_frechet
from ._mcmc import ChainOutput
from ._models import DependenceModel
from ._numerics import DEFAULT_TOLERANCE, ToleranceConfig, bernstein_basis


__all__ = [
    "ConditionalExceedance",
    "conditional_exceedance",
    "posterior_mean_ise",
    "posterior_mean_pickands",
    "PosteriorSummary",
    "predictive_exceedance",
    "predictive_grid",
    "Quantiles",
    "summarize",
]


logger = logging.getLogger(__name__)

DEFAULT_GRID = 101
K_PRIOR_TABLE_MAX = 30


class Quantiles(NamedTuple):
    mean: float
    median: float
    q05: float
    q95: float

    @classmethod
    def of(cls, values: ArrayLike, /) -> "Quantiles":
        values = np.asarray(values, dtype=float)
        q05, median, q95 = np.quantile(values, [0.05, 0.5, 0.95])
        return cls(float(np.mean(values)), float(median), float(q05), float(q95))

    def to_dict(self) -> dict[str, float]:
        return self._asdict()


def _groups(chain: ChainOutput) -> Iterator[tuple[int, NDArray[np.intp], NDArray[np.float64]]]:
    """
    Yields `(k, state indices, stacked coefficients)` per order, in increasing `k`.
    """

    if not chain.states:
        raise EmptyChainError("the chain has no kept states.")
    ks = chain.ks
    for k in np.unique(ks).tolist():
        index = np.flatnonzero(ks == k)
        yield k, index, np.stack([chain.states[i].eta.eta for i in index])


def _unit_grid(grid: int | ArrayLike) -> NDArray[np.float64]:
    t = np.linspace(0, 1, grid) if isinstance(grid, int) else np.asarray(grid, dtype=float)
    if t.ndim != 1 or len(t) < 2 or not np.all((t >= 0) & (t <= 1)):
        raise DomainError("the grid must be a sequence of points in [0, 1].")
    return t


def _pickands_rows(etas: NDArray[np.float64], t: NDArray[np.float64]) -> NDArray[np.float64]:
    k = etas.shape[1]
    return _eta_to_beta_array(etas) @ bernstein_basis(t, k).T


def _density_rows(etas: NDArray[np.float64], t: NDArray[np.float64]) -> NDArray[np.float64]:
    k = etas.shape[1]
    return (k - 1) * (np.diff(etas, axis=1) @ bernstein_basis(t, k - 2).T)


@dataclass(frozen=True, slots=True, eq=False)
class PosteriorSummary:
    """
    Pointwise posterior summaries of the Pickands function and the angular density, with
    posterior laws of the order, the vertex masses and the tail dependence coefficient.

    The density is evaluated on the closed grid through its polynomial form.
    """

    grid: NDArray[np.float64]
    a_mean: NDArray[np.float64]
    a_q05: NDArray[np.float64]
    a_q95: NDArray[np.float64]
    h_mean: NDArray[np.float64]
    h_q05: NDArray[np.float64]
    h_q95: NDArray[np.float64]
    k_posterior: dict[int, float]
    p0: Quantiles
    p1: Quantiles
    chi: Quantiles
    n_states: int
    k_prior: dict[int, float] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.grid,
            "A_mean": self.a_mean,
            "A_q05": self.a_q05,
            "A_q95": self.a_q95,
            "h_mean": self.h_mean,
            "h_q05": self.h_q05,
            "h_q95": self.h_q95,
        })

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_states": self.n_states,
            "k_posterior": {str(k): p for k, p in self.k_posterior.items()},
            "k_prior": {str(k): p for k, p in self.k_prior.items()},
            "p0": self.p0.to_dict(),
            "p1": self.p1.to_dict(),
            "chi": self.chi.to_dict(),
        }


def summarize(chain: ChainOutput, /, grid: int | ArrayLike = DEFAULT_GRID) -> PosteriorSummary:
    """
    Summarizes the kept states of a chain.

    Args:
        chain (ChainOutput): A chain with kept states.
        grid (int | ArrayLike, optional): Number of equispaced points on [0, 1], or the points. Defaults to 101.

    Raises:
        EmptyChainError: If the chain has no kept states.

    Returns:
        PosteriorSummary: Pointwise means and 0.05/0.95 quantiles, and posterior laws of the scalars.
    """

    t = _unit_grid(grid)
    n = len(chain)
    a = np.empty((n, len(t)))
    h = np.empty((n, len(t)))
    chi = np.empty(n)
    p0 = np.empty(n)
    p1 = np.empty(n)
    k_posterior: dict[int, float] = {}
    half = np.array([0.5])
    for k, index, etas in _groups(chain):
        a[index] = _pickands_rows(etas, t)
        h[index] = _density_rows(etas, t)
        chi[index] = 2 - 2 * _pickands_rows(etas, half)[:, 0]
        p0[index] = etas[:, 0]
        p1[index] = 1 - etas[:, -1]
        k_posterior[k] = len(index) / n

    a_q05, a_q95 = np.quantile(a, [0.05, 0.95], axis=0)
    h_q05, h_q95 = np.quantile(h, [0.05, 0.95], axis=0)
    k_prior = {}
    if chain.config is not None:
        k_prior = chain.config.prior.pmf_table(max(max(k_posterior), K_PRIOR_TABLE_MAX))
    logger.debug("summarized %d states over %d orders", n, len(k_posterior))
    return PosteriorSummary(
        t, a.mean(axis=0), a_q05, a_q95, h.mean(axis=0), h_q05, h_q95,
        k_posterior, Quantiles.of(p0), Quantiles.of(p1), Quantiles.of(chi), n, k_prior,
    )


def predictive_exceedance(chain: ChainOutput, y1: float, y2: float, /) -> float:
    """
    Posterior predictive probability of a joint exceedance of unit-Fréchet thresholds,
    the average of `R(1/y1, 1/y2)` over the kept states.

    Raises:
        DomainError: If a threshold is not positive.
        EmptyChainError: If the chain has no kept states.
    """

    if not (y1 > 0 and y2 > 0):
        raise DomainError("exceedance thresholds must be positive.")
    y1_, y2_ = np.asarray(float(y1)), np.asarray(float(y2))
    total = math.fsum(
        float(np.sum(_exceedance_values(etas, y1_, y2_))) for _, _, etas in _groups(chain)
    )
    return min(max(total / len(chain), 0.0), 1.0)


def predictive_grid(chain: ChainOutput, y1_values: ArrayLike, y2_values: ArrayLike, /) -> NDArray[np.float64]:
    """
    Predictive joint exceedance probabilities over a threshold grid; entry `[i, j]` is for `(y1_i, y2_j)`.
    """

    y1_values = np.asarray(y1_values, dtype=float).ravel()
    y2_values = np.asarray(y2_values, dtype=float).ravel()
    return np.array([[predictive_exceedance(chain, a, b) for b in y2_values] for a in y1_values])


@dataclass(frozen=True, slots=True)
class ConditionalExceedance:
    """
    Predictive probability that one variable exceeds its threshold given that the other does.

    Attributes:
        thresholds (tuple[float, float]): Unit-Fréchet thresholds `(y1*, y2*)`.
        joint (float): Predictive joint exceedance probability.
        marginal (float): Exceedance probability `1 - exp(-1/y*)` of the conditioning variable.
        conditional (float): `joint / marginal`, capped at 1.
        condition_on (int): The conditioning variable, 1 or 2.
    """

    thresholds: tuple[float, float]
    joint: float
    marginal: float
    conditional: float
    condition_on: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "y1": self.thresholds[0],
            "y2": self.thresholds[1],
            "joint": self.joint,
            "marginal": self.marginal,
            "conditional": self.conditional,
            "condition_on": self.condition_on,
        }


def conditional_exceedance(
        chain: ChainOutput,
        margins: tuple[GevParams, GevParams],
        q: float | tuple[float, float],
        /,
        condition_on: int = 1,
) -> ConditionalExceedance:
    """
    Predictive probability that the other variable exceeds its data-scale threshold given that
    the `condition_on` variable exceeds its own.

    The thresholds are moved to the unit-Fréchet scale with each variable's GEV parameters.

    Args:
        chain (ChainOutput): A chain with kept states.
        margins (tuple[GevParams, GevParams]): Marginal GEV parameters of the two variables.
        q (float | tuple[float, float]): Data-scale threshold shared by both variables, or one per variable.
        condition_on (int, optional): The conditioning variable, 1 or 2. Defaults to 1.

    Raises:
        DomainError: If a threshold is outside a margin's support or `condition_on` is not 1 or 2.
        EmptyChainError: If the chain has no kept states.
    """

    if condition_on not in (1, 2):
        raise DomainError(f"condition_on must be 1 or 2, got {condition_on!r}.")
    q1, q2 = (q, q) if isinstance(q, (int, float)) else q
    y1 = float(to_unit_frechet(margins[0], q1))
    y2 = float(to_unit_frechet(margins[1], q2))
    joint = predictive_exceedance(chain, y1, y2)
    marginal = -math.expm1(-1 / (y1 if condition_on == 1 else y2))
    return ConditionalExceedance((y1, y2), joint, marginal, min(joint / marginal, 1.0), condition_on)


def posterior_mean_pickands(chain: ChainOutput, /) -> Callable[[ArrayLike], NDArray[np.float64]]:
    """
    Returns the pointwise posterior mean of the Pickands function as a vectorized callable.
    """

    groups = list(_groups(chain))
    n = len(chain)

    def mean_pickands(t: ArrayLike) -> NDArray[np.float64]:
        t = np.asarray(t, dtype=float)
        return sum(_pickands_rows(etas, t.ravel()).sum(axis=0) for _, _, etas in groups).reshape(t.shape) / n

    return mean_pickands


def posterior_mean_ise(
        chain: ChainOutput,
        m: DependenceModel,
        /,
        grid: int | None = None,
        tol: ToleranceConfig = DEFAULT_TOLERANCE,
) -> Quantiles:
    """
    Integrated squared error of every kept state's Pickands function against the model's,
    summarized by its mean and quantiles. The grid has `tol.quadrature_points` points unless given.

    Raises:
        EmptyChainError: If the chain has no kept states.
    """

    t = _unit_grid(tol.quadrature_points if grid is None else grid)
    truth = m.pickands(t)
    errors = np.empty(len(chain))
    for _, index, etas in _groups(chain):
        errors[index] = integrate.simpson((_pickands_rows(etas, t) - truth) ** 2, x=t, axis=1)
    return Quantiles.of(errors)
