import json
import logging
import math
import os
import sys
import time
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from os import PathLike
from typing import Any, NamedTuple

import numpy as np
from joblib import Parallel, delayed
from numpy.typing import ArrayLike, NDArray

from ._errors import ChainFormatError, DomainError, EmptyChainError, InitializationError
from ._extremal import AngularCoefficients, validate_angular
from ._hooks import Hook
from ._io import atomic_open
from ._likelihood import BernsteinLikelihood, FrechetSample
from ._prior import K_OFFSET, PriorConfig, sample_eta


if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self


__all__ = [
    "acceptance_log_ratio",
    "ChainOutput",
    "ChainState",
    "Diagnostics",
    "diagnostics",
    "effective_sample_size",
    "KProposal",
    "McmcConfig",
    "propose_k",
    "run",
    "run_chains",
    "step",
    "TransDimensionalSampler",
]


logger = logging.getLogger(__name__)

CHAIN_FORMAT = "bivext-chain"
CHAIN_FORMAT_VERSION = 1
RECOMMENDED_KEPT = 1000
MAX_INIT_ATTEMPTS = 100
LOG_HALF = math.log(0.5)
THREADS_VARIABLE = "BIVEXT_THREADS"


@dataclass(frozen=True, slots=True)
class ChainState:
    """
    A state of the chain.

    Attributes:
        eta (AngularCoefficients): Angular coefficients; their count is the order `k`.
        loglik (float): Cached log-likelihood of `eta`, 0 for a flat likelihood.
    """

    eta: AngularCoefficients
    loglik: float

    @property
    def k(self) -> int:
        return self.eta.k


@dataclass(frozen=True, slots=True)
class McmcConfig:
    """
    Run settings of the trans-dimensional sampler.

    Attributes:
        iterations (int): Total number of iterations `M`. Defaults to 500000.
        burn_in (int): Discarded leading iterations `m < M`. Defaults to 400000.
        thin (int): Keeps every `thin`-th iteration after burn-in. Defaults to 4.
        seed (int): Nonnegative seed of the random generator. Defaults to 0.
        prior (PriorConfig): Prior on `(k, η)`. Defaults to a Poisson(7) prior on `k - 3`.
        init_k (int | None): Starting order; the prior mode when `None`.
        refresh_probability (float): Probability of a same-order redraw of `η` per iteration. Defaults to 0.5.
        chain_index (int | None): Index among concurrent chains; seeds the generator with `[seed, chain_index]`.
    """

    iterations: int = 500_000
    burn_in: int = 400_000
    thin: int = 4
    seed: int = 0
    prior: PriorConfig = field(default_factory=PriorConfig)
    init_k: int | None = None
    refresh_probability: float = 0.5
    chain_index: int | None = None

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise DomainError("iterations must be positive.")
        if not 0 <= self.burn_in < self.iterations:
            raise DomainError("burn_in must be nonnegative and smaller than iterations.")
        if self.thin < 1:
            raise DomainError("thin must be positive.")
        if self.seed < 0:
            raise DomainError("seed must be nonnegative.")
        if self.init_k is not None and self.init_k < K_OFFSET:
            raise DomainError(f"init_k must be at least {K_OFFSET}.")
        if not 0.0 <= self.refresh_probability <= 1.0:
            raise DomainError("refresh_probability must lie in [0, 1].")
        if self.chain_index is not None and self.chain_index < 0:
            raise DomainError("chain_index must be nonnegative.")

    @property
    def kept_count(self) -> int:
        return (self.iterations - self.burn_in) // self.thin

    def make_rng(self) -> np.random.Generator:
        if self.chain_index is None:
            return np.random.default_rng(self.seed)
        return np.random.default_rng([self.seed, self.chain_index])

    def to_dict(self) -> dict[str, Any]:
        return {
            "iterations": self.iterations,
            "burn_in": self.burn_in,
            "thin": self.thin,
            "seed": self.seed,
            "prior": self.prior.to_dict(),
            "init_k": self.init_k,
            "refresh_probability": self.refresh_probability,
            "chain_index": self.chain_index,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], /) -> Self:
        return cls(
            iterations=int(data["iterations"]),
            burn_in=int(data["burn_in"]),
            thin=int(data["thin"]),
            seed=int(data["seed"]),
            prior=PriorConfig.from_dict(data["prior"]),
            init_k=None if data.get("init_k") is None else int(data["init_k"]),
            refresh_probability=float(data.get("refresh_probability", 0.5)),
            chain_index=None if data.get("chain_index") is None else int(data["chain_index"]),
        )


class KProposal(NamedTuple):
    k_new: int
    log_forward: float
    log_backward: float


def propose_k(k_current: int, rng: np.random.Generator, /) -> KProposal:
    """
    Proposes a neighbouring order: up or down with probability 1/2 each, always up from 3.

    Returns:
        KProposal: The proposed order with the log probabilities of the forward and reverse moves.
    """

    if k_current < K_OFFSET:
        raise DomainError(f"k must be at least {K_OFFSET}, got {k_current!r}.")
    if k_current == K_OFFSET:
        return KProposal(K_OFFSET + 1, 0.0, LOG_HALF)
    k_new = k_current + 1 if rng.random() < 0.5 else k_current - 1
    return KProposal(k_new, LOG_HALF, 0.0 if k_new == K_OFFSET else LOG_HALF)


def acceptance_log_ratio(cfg: McmcConfig, current: ChainState, proposal: ChainState, q: KProposal, /) -> float:
    """
    Log Metropolis-Hastings ratio of an order move whose coefficients are redrawn from the conditional prior.

    The coefficient proposal cancels against the coefficient prior, leaving
    `log Π(k') - log Π(k) + ℓ' - ℓ + log q(k|k') - log q(k'|k)`.
    """

    if proposal.loglik == -math.inf:
        return -math.inf
    if current.loglik == -math.inf:
        return math.inf
    k_prior = cfg.prior.k_prior
    return (
        k_prior.logpmf(proposal.k) - k_prior.logpmf(current.k)
        + proposal.loglik - current.loglik
        + q.log_backward - q.log_forward
    )


class TransDimensionalSampler:
    """
    Metropolis-Hastings sampler over the order `k` and the angular coefficients `η`.

    Each iteration either redraws `η` at the current order (with `refresh_probability`) or
    proposes `k ± 1` together with a fresh `η` from the conditional prior. Without data the
    likelihood is flat and the chain targets the prior.

    Attributes:
        iteration_completed (Hook[int, ChainState, bool]): Raised after every iteration with the
            1-based iteration number, the current state and whether the proposal was accepted.
        state_kept (Hook[int, ChainState]): Raised for every state kept after burn-in and thinning.
    """

    __slots__ = ["__cfg", "__likelihood", "iteration_completed", "state_kept"]

    def __init__(self, cfg: McmcConfig, data: FrechetSample | None = None, /) -> None:
        """
        Initializes a new instance of the `TransDimensionalSampler` class.

        Args:
            cfg (McmcConfig): Run settings.
            data (FrechetSample, optional): Unit-Fréchet sample; `None` for a flat likelihood.
        """

        self.__cfg = cfg
        self.__likelihood = None if data is None else BernsteinLikelihood(data)
        self.iteration_completed: Hook[int, ChainState, bool] = Hook()
        self.state_kept: Hook[int, ChainState] = Hook()

    @property
    def config(self) -> McmcConfig:
        return self.__cfg

    def loglik(self, eta: AngularCoefficients, /) -> float:
        if self.__likelihood is None:
            return 0.0
        return self.__likelihood(eta.eta)

    def __state(self, eta: AngularCoefficients) -> ChainState:
        return ChainState(eta, self.loglik(eta))

    def initial_state(self, rng: np.random.Generator, /) -> ChainState:
        """
        Draws a starting state at `init_k` (or the prior mode) from the conditional prior.

        Raises:
            InitializationError: If no draw has a finite log-likelihood.
        """

        k = self.__cfg.init_k or self.__cfg.prior.k_prior.mode()
        for _ in range(MAX_INIT_ATTEMPTS):
            state = self.__state(sample_eta(k, rng))
            if math.isfinite(state.loglik):
                return state
        raise InitializationError(f"no starting state with finite likelihood at k={k} in {MAX_INIT_ATTEMPTS} draws.")

    def step(self, state: ChainState, rng: np.random.Generator, /) -> tuple[ChainState, bool]:
        """
        Performs one iteration.

        Returns:
            tuple[ChainState, bool]: The next state and whether the proposal was accepted.
        """

        if rng.random() < self.__cfg.refresh_probability:
            proposal = self.__state(sample_eta(state.k, rng))
            if proposal.loglik == -math.inf:
                log_ratio = -math.inf
            elif state.loglik == -math.inf:
                log_ratio = math.inf
            else:
                log_ratio = proposal.loglik - state.loglik
        else:
            q = propose_k(state.k, rng)
            proposal = self.__state(sample_eta(q.k_new, rng))
            log_ratio = acceptance_log_ratio(self.__cfg, state, proposal, q)

        u = rng.random()
        if log_ratio >= 0 or u < math.exp(log_ratio):
            return proposal, True
        return state, False

    def run(self, initial: ChainState | None = None, /) -> "ChainOutput":
        """
        Runs the chain with burn-in and thinning.

        Args:
            initial (ChainState, optional): Starting state; drawn by `initial_state` when omitted.

        Raises:
            InitializationError: If the starting state is invalid or has no finite likelihood.

        Returns:
            ChainOutput: The kept states.
        """

        cfg = self.__cfg
        rng = cfg.make_rng()
        if initial is None:
            state = self.initial_state(rng)
        else:
            report = validate_angular(initial.eta)
            if not report:
                raise InitializationError(f"invalid starting coefficients: {report}")
            state = self.__state(initial.eta)
            if not math.isfinite(state.loglik):
                raise InitializationError("the starting state has no finite likelihood.")

        if cfg.kept_count < RECOMMENDED_KEPT:
            logger.warning("only %d states will be kept; at least %d are recommended", cfg.kept_count, RECOMMENDED_KEPT)
        logger.info("sampling %d iterations (burn-in %d, thin %d) from k=%d", cfg.iterations, cfg.burn_in, cfg.thin,
                    state.k)

        started = time.perf_counter()
        k_trace = np.empty(cfg.iterations, dtype=np.int32)
        kept: list[ChainState] = []
        accepted = 0
        for i in range(1, cfg.iterations + 1):
            state, moved = self.step(state, rng)
            accepted += moved
            k_trace[i - 1] = state.k
            if self.iteration_completed:
                self.iteration_completed(i, state, moved)
            if i > cfg.burn_in and (i - cfg.burn_in) % cfg.thin == 0:
                kept.append(state)
                if self.state_kept:
                    self.state_kept(len(kept), state)

        output = ChainOutput(tuple(kept), accepted / cfg.iterations, k_trace, cfg)
        logger.info("kept %d states, acceptance rate %.4f, %.2f s", len(kept), output.acceptance_rate,
                    time.perf_counter() - started)
        return output


def step(
        cfg: McmcConfig,
        state: ChainState,
        data: FrechetSample | None,
        rng: np.random.Generator,
        /
) -> ChainState:
    """
    Performs one iteration of a sampler for `cfg` and `data`.
    """

    return TransDimensionalSampler(cfg, data).step(state, rng)[0]


def run(cfg: McmcConfig, data: FrechetSample | None, /) -> "ChainOutput":
    """
    Runs a chain for `cfg` on `data` (`None` for a flat likelihood).
    """

    return TransDimensionalSampler(cfg, data).run()


@dataclass(frozen=True, slots=True, eq=False)
class ChainOutput:
    """
    Kept states of a run.

    Attributes:
        states (tuple[ChainState, ...]): States kept after burn-in and thinning.
        acceptance_rate (float): Fraction of accepted proposals over all iterations.
        k_trace (ndarray): Order after every iteration. Not persisted; empty for loaded chains.
        config (McmcConfig | None): Run settings.
        metadata (dict[str, Any]): Extra header entries such as the data digest.
    """

    states: tuple[ChainState, ...]
    acceptance_rate: float
    k_trace: NDArray[np.int32] = field(default_factory=lambda: np.empty(0, dtype=np.int32))
    config: McmcConfig | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def ks(self) -> NDArray[np.int64]:
        return np.fromiter((s.k for s in self.states), dtype=np.int64, count=len(self.states))

    @property
    def logliks(self) -> NDArray[np.float64]:
        return np.fromiter((s.loglik for s in self.states), dtype=float, count=len(self.states))

    @classmethod
    def from_coefficients(cls, etas: Sequence[AngularCoefficients | ArrayLike], /) -> Self:
        """
        Builds a chain from coefficient vectors with zero log-likelihoods and no run settings.
        """

        states = tuple(
            ChainState(e if isinstance(e, AngularCoefficients) else AngularCoefficients(e), 0.0) for e in etas
        )
        return cls(states, 0.0)

    def header(self) -> dict[str, Any]:
        return {
            "format": CHAIN_FORMAT,
            "version": CHAIN_FORMAT_VERSION,
            "config": None if self.config is None else self.config.to_dict(),
            "acceptance_rate": self.acceptance_rate,
            "kept": len(self.states),
            **self.metadata,
        }

    def save(self, path: str | PathLike[str], /) -> None:
        """
        Writes the chain as JSON lines: a header object, then one `{"k", "eta", "ll"}` object per state.
        """

        with atomic_open(path) as f:
            f.write(json.dumps(self.header(), sort_keys=True))
            f.write("\n")
            for s in self.states:
                f.write(json.dumps({"k": s.k, "eta": s.eta.eta.tolist(), "ll": s.loglik}))
                f.write("\n")

    @classmethod
    def load(cls, path: str | PathLike[str], /) -> Self:
        """
        Reads a chain written by `save`.

        Raises:
            OSError: If the file cannot be read.
            ChainFormatError: If the header or a record is malformed.
        """

        with open(path, encoding="utf-8") as f:
            lines = [line for line in f if line.strip()]
        if not lines:
            raise ChainFormatError(f"{os.fspath(path)!r} is empty.")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as e:
            raise ChainFormatError(f"malformed chain header: {e}") from e
        if not isinstance(header, dict) or header.get("format") != CHAIN_FORMAT:
            raise ChainFormatError(f"{os.fspath(path)!r} is not a chain file.")

        states = []
        for number, line in enumerate(lines[1:], start=2):
            try:
                record = json.loads(line)
                eta = AngularCoefficients(record["eta"])
                if int(record["k"]) != eta.k:
                    raise ChainFormatError(f"line {number}: k={record['k']} does not match {eta.k} coefficients.")
                states.append(ChainState(eta, float(record["ll"])))
            except ChainFormatError:
                raise
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                raise ChainFormatError(f"line {number}: malformed state: {e}") from e
        if "kept" in header and header["kept"] != len(states):
            raise ChainFormatError(f"header announces {header['kept']} states, found {len(states)}.")

        try:
            config = None if header.get("config") is None else McmcConfig.from_dict(header["config"])
        except (KeyError, TypeError, ValueError) as e:
            raise ChainFormatError(f"malformed run settings: {e}") from e
        reserved = {"format", "version", "config", "acceptance_rate", "kept"}
        metadata = {key: value for key, value in header.items() if key not in reserved}
        return cls(tuple(states), float(header.get("acceptance_rate", 0.0)), config=config, metadata=metadata)


def _run_chain(cfg: McmcConfig, data: FrechetSample | None) -> ChainOutput:
    return TransDimensionalSampler(cfg, data).run()


def _env_threads() -> int:
    value = os.environ.get(THREADS_VARIABLE, "1")
    try:
        return int(value)
    except ValueError:
        raise DomainError(f"{THREADS_VARIABLE} must be a positive integer, got {value!r}.") from None


def run_chains(
        cfg: McmcConfig,
        data: FrechetSample | None,
        n_chains: int,
        /,
        n_jobs: int | None = None,
) -> list[ChainOutput]:
    """
    Runs independent chains concurrently, chain `i` seeded with `[cfg.seed, i]`.

    Args:
        cfg (McmcConfig): Shared run settings.
        data (FrechetSample | None): The sample, `None` for a flat likelihood.
        n_chains (int): Number of chains.
        n_jobs (int, optional): Worker count; `BIVEXT_THREADS` or 1 when omitted.

    Returns:
        list[ChainOutput]: Outputs ordered by chain index.
    """

    if n_chains < 1:
        raise DomainError("n_chains must be positive.")
    if n_jobs is None:
        n_jobs = _env_threads()
    if n_jobs < 1:
        raise DomainError(f"the worker count must be positive, got {n_jobs!r}.")
    configs = [replace(cfg, chain_index=i) for i in range(n_chains)]
    logger.info("running %d chains on %d workers", n_chains, n_jobs)
    return list(Parallel(n_jobs=n_jobs)(delayed(_run_chain)(c, data) for c in configs))


def _autocovariance(x: NDArray[np.float64]) -> NDArray[np.float64]:
    n = len(x)
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    centered = x - np.mean(x)
    spectrum = np.fft.rfft(centered, size)
    return np.fft.irfft(spectrum * np.conjugate(spectrum), size)[:n] / n


def effective_sample_size(trace: ArrayLike, /) -> float:
    """
    Effective sample size of a single trace with Geyer's initial monotone sequence estimator.

    A constant trace has effective size 1.
    """

    x = np.asarray(trace, dtype=float).ravel()
    n = len(x)
    if n == 0:
        raise EmptyChainError("effective sample size of an empty trace.")
    if not np.all(np.isfinite(x)):
        return math.nan
    if n < 4 or np.ptp(x) == 0:
        return 1.0

    acov = _autocovariance(x)
    rho = acov / acov[0]
    rho_t = np.zeros(n)
    rho_t[0] = rho_even = 1.0
    rho_t[1] = rho_odd = rho[1]

    t = 1
    while t < n - 2 and rho_even + rho_odd >= 0.0:
        rho_even, rho_odd = rho[t + 1], rho[t + 2]
        rho_t[t + 1] = rho_even
        if rho_even + rho_odd >= 0.0:
            rho_t[t + 2] = rho_odd
        t += 2
    max_t = t

    t = 1
    while t <= max_t - 2:
        if rho_t[t + 1] + rho_t[t + 2] > rho_t[t - 1] + rho_t[t]:
            rho_t[t + 1] = rho_t[t + 2] = (rho_t[t - 1] + rho_t[t]) / 2
        t += 2

    tau = -1.0 + 2.0 * np.sum(rho_t[:max_t]) + np.sum(rho_t[max_t + 1:max_t + 2])
    return float(n / max(tau, 1.0 / np.log10(n)))


@dataclass(frozen=True, slots=True)
class Diagnostics:
    """
    Run diagnostics.

    Attributes:
        n_kept (int): Number of kept states.
        acceptance_rate (float): Fraction of accepted proposals.
        k_histogram (dict[int, int]): Counts of the kept orders.
        k_median (float): Median kept order.
        ess_loglik (float): Effective sample size of the kept log-likelihood trace.
    """

    n_kept: int
    acceptance_rate: float
    k_histogram: dict[int, int]
    k_median: float
    ess_loglik: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_kept": self.n_kept,
            "acceptance_rate": self.acceptance_rate,
            "k_histogram": {str(k): v for k, v in self.k_histogram.items()},
            "k_median": self.k_median,
            "ess_loglik": self.ess_loglik,
        }


def diagnostics(out: ChainOutput, /) -> Diagnostics:
    """
    Summarizes a run.

    Raises:
        EmptyChainError: If no state was kept.
    """

    if not out.states:
        raise EmptyChainError("diagnostics of a chain without kept states.")
    ks = out.ks
    values, counts = np.unique(ks, return_counts=True)
    return Diagnostics(
        len(out),
        out.acceptance_rate,
        {int(k): int(c) for k, c in zip(values, counts)},
        float(np.median(ks)),
        effective_sample_size(out.logliks),
    )
