import json
import logging
import math
from dataclasses import replace
from pathlib import Path
from unittest.mock import Mock

import numpy as np
import pytest

from bivext import (
    AngularCoefficients,
    ChainFormatError,
    ChainOutput,
    ChainState,
    DomainError,
    EmptyChainError,
    InitializationError,
    KProposal,
    McmcConfig,
    PoissonPrior,
    PriorConfig,
    SymmetricLogistic,
    TransDimensionalSampler,
    acceptance_log_ratio,
    diagnostics,
    effective_sample_size,
    log_likelihood_eta,
    propose_k,
    run,
    run_chains,
    sample_bivariate,
    step,
    validate_angular,
)


LOG_HALF = math.log(0.5)


def _small(**kwargs) -> McmcConfig:
    return McmcConfig(**{"iterations": 3000, "burn_in": 1000, "thin": 2, "seed": 1, **kwargs})


@pytest.mark.parametrize("kwargs", [
    {"iterations": 0},
    {"iterations": 10, "burn_in": 10},
    {"burn_in": -1},
    {"thin": 0},
    {"seed": -1},
    {"init_k": 2},
    {"refresh_probability": 1.5},
    {"chain_index": -1},
])
def test_McmcConfig_invalid(kwargs: dict) -> None:
    with pytest.raises(DomainError):
        McmcConfig(**kwargs)


def test_McmcConfig() -> None:
    cfg = McmcConfig(iterations=1000, burn_in=200, thin=4, prior=PriorConfig(PoissonPrior(3.0)), init_k=5)
    assert cfg.kept_count == 200
    assert McmcConfig().kept_count == 25_000
    assert McmcConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg

    assert cfg.make_rng().random() == McmcConfig(seed=cfg.seed).make_rng().random()
    assert replace(cfg, chain_index=0).make_rng().random() != replace(cfg, chain_index=1).make_rng().random()


def test_propose_k() -> None:
    assert propose_k(3, np.random.default_rng(0)) == KProposal(4, 0.0, LOG_HALF)

    rng = Mock()
    rng.random.return_value = 0.2
    assert propose_k(4, rng) == KProposal(5, LOG_HALF, LOG_HALF)
    rng.random.return_value = 0.7
    assert propose_k(4, rng) == KProposal(3, LOG_HALF, 0.0)
    assert propose_k(6, rng) == KProposal(5, LOG_HALF, LOG_HALF)

    with pytest.raises(DomainError):
        propose_k(2, rng)


def test_acceptance_log_ratio() -> None:
    cfg = McmcConfig()
    four = ChainState(AngularCoefficients([0.1, 0.4, 0.6, 0.9]), -10.0)
    five = ChainState(AngularCoefficients([0.1, 0.3, 0.5, 0.7, 0.9]), -9.0)
    up = KProposal(5, LOG_HALF, LOG_HALF)
    down = KProposal(4, LOG_HALF, LOG_HALF)

    ratio = acceptance_log_ratio(cfg, four, five, up)
    assert ratio == pytest.approx(math.log(7 / 2) + 1.0)
    assert acceptance_log_ratio(cfg, five, four, down) == pytest.approx(-ratio)

    three = ChainState(AngularCoefficients([0.2, 0.6, 0.7]), -10.0)
    to_four = KProposal(4, 0.0, LOG_HALF)
    to_three = KProposal(3, LOG_HALF, 0.0)
    assert acceptance_log_ratio(cfg, three, four, to_four) == pytest.approx(
        -acceptance_log_ratio(cfg, four, three, to_three)
    )

    assert acceptance_log_ratio(cfg, four, replace(five, loglik=-math.inf), up) == -math.inf
    assert acceptance_log_ratio(cfg, replace(four, loglik=-math.inf), five, up) == math.inf


def test_run_flat() -> None:
    cfg = _small()
    sampler = TransDimensionalSampler(cfg)
    sampler.iteration_completed += (completed := Mock())
    sampler.state_kept += (kept := Mock())

    out = sampler.run()
    assert len(out) == cfg.kept_count == 1000
    assert completed.call_count == cfg.iterations
    assert kept.call_count == cfg.kept_count
    assert completed.call_args.args[0] == cfg.iterations
    assert kept.call_args.args[0] == cfg.kept_count
    assert len(out.k_trace) == cfg.iterations
    assert out.config is cfg
    assert 0 < out.acceptance_rate <= 1
    assert np.all(out.logliks == 0.0)
    assert all(validate_angular(s.eta) for s in out.states)

    again = run(cfg, None)
    assert [s.eta for s in again.states] == [s.eta for s in out.states]


def _k_distance(cfg: McmcConfig) -> float:
    out = TransDimensionalSampler(cfg).run()
    values, counts = np.unique(out.ks, return_counts=True)
    empirical = dict(zip(values.tolist(), (counts / len(out)).tolist()))
    table = cfg.prior.pmf_table(max(max(empirical), 40))
    return 0.5 * sum(abs(empirical.get(k, 0.0) - p) for k, p in table.items())


def test_run_recovers_k_prior() -> None:
    cfg = McmcConfig(iterations=100_000, burn_in=1000, thin=1, seed=3, refresh_probability=0.0)
    assert _k_distance(cfg) < 0.06


@pytest.mark.slow
def test_run_recovers_k_prior_long() -> None:
    cfg = McmcConfig(iterations=1_000_000, burn_in=10_000, thin=1, seed=4, refresh_probability=0.0)
    assert _k_distance(cfg) < 0.01


def test_run_data() -> None:
    data = sample_bivariate(SymmetricLogistic(0.5), 50, np.random.default_rng(5))
    cfg = McmcConfig(iterations=2000, burn_in=1000, thin=1, seed=6)
    out = TransDimensionalSampler(cfg, data).run()

    assert len(out) == 1000
    assert np.all(np.isfinite(out.logliks))
    for s in out.states[::100]:
        assert s.loglik == pytest.approx(log_likelihood_eta(s.eta, data), rel=1e-9)


def test_run_initial() -> None:
    sampler = TransDimensionalSampler(_small())
    initial = ChainState(AngularCoefficients([0.2, 0.6, 0.7]), 0.0)
    assert sampler.run(initial).k_trace[0] in (3, 4)

    with pytest.raises(InitializationError):
        sampler.run(ChainState(AngularCoefficients([0.6, 0.5, 0.4]), 0.0))


def test_run_warns_few_states(caplog: pytest.LogCaptureFixture) -> None:
    with caplog.at_level(logging.WARNING, logger="bivext"):
        TransDimensionalSampler(McmcConfig(iterations=100, burn_in=50, thin=1)).run()
    assert "recommended" in caplog.text


def test_step() -> None:
    cfg = _small(refresh_probability=1.0)
    state = ChainState(AngularCoefficients([0.1, 0.4, 0.6, 0.9]), 0.0)
    rng = np.random.default_rng(7)
    for _ in range(20):
        state = step(cfg, state, None, rng)
        assert state.k == 4


def test_ChainOutput_save_load(tmp_path: Path) -> None:
    cfg = _small()
    out = TransDimensionalSampler(cfg).run()
    out = replace(out, metadata={"data_sha256": "abc", "data_n": 3})
    path = tmp_path / "chain.jsonl"
    out.save(path)

    back = ChainOutput.load(path)
    assert [s.eta for s in back.states] == [s.eta for s in out.states]
    assert back.logliks.tolist() == out.logliks.tolist()
    assert back.acceptance_rate == out.acceptance_rate
    assert back.config == cfg
    assert back.metadata == {"data_sha256": "abc", "data_n": 3}
    assert len(back.k_trace) == 0


def test_ChainOutput_from_coefficients() -> None:
    out = ChainOutput.from_coefficients([[0.0, 0.5, 1.0], AngularCoefficients([0.1, 0.4, 0.6, 0.9])])
    assert out.ks.tolist() == [3, 4]
    assert out.logliks.tolist() == [0.0, 0.0]
    assert out.config is None


@pytest.mark.parametrize("content", [
    "",
    "{\n",
    '{"format": "other"}\n',
    '{"format": "bivext-chain"}\n{"k": 3, "eta": [0.0, 0.5]}\n',
    '{"format": "bivext-chain"}\n{"k": 4, "eta": [0.0, 0.5, 1.0], "ll": 0.0}\n',
    '{"format": "bivext-chain"}\n{"k": 3, "eta": [0.0, "x", 1.0], "ll": 0.0}\n',
    '{"format": "bivext-chain", "kept": 2}\n{"k": 3, "eta": [0.0, 0.5, 1.0], "ll": 0.0}\n',
    '{"format": "bivext-chain", "config": {"iterations": 1}}\n',
])
def test_ChainOutput_load_invalid(tmp_path: Path, content: str) -> None:
    path = tmp_path / "chain.jsonl"
    path.write_text(content)
    with pytest.raises(ChainFormatError):
        ChainOutput.load(path)


def test_ChainOutput_load_missing(tmp_path: Path) -> None:
    with pytest.raises(OSError):
        ChainOutput.load(tmp_path / "missing.jsonl")


def test_run_chains() -> None:
    cfg = _small(iterations=1200, burn_in=200, thin=1)
    outs = run_chains(cfg, None, 2, n_jobs=1)

    assert [o.config.chain_index for o in outs] == [0, 1]
    assert [s.eta for s in outs[0].states] != [s.eta for s in outs[1].states]

    second = TransDimensionalSampler(replace(cfg, chain_index=1)).run()
    assert [s.eta for s in second.states] == [s.eta for s in outs[1].states]

    with pytest.raises(DomainError):
        run_chains(cfg, None, 0)
    with pytest.raises(DomainError):
        run_chains(cfg, None, 2, n_jobs=0)


@pytest.mark.parametrize("value", ["two", "1.5", "0", ""])
def test_run_chains_threads_variable(value: str, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("BIVEXT_THREADS", value)
    with pytest.raises(DomainError):
        run_chains(_small(iterations=10, burn_in=0, thin=1), None, 2)


def test_effective_sample_size() -> None:
    rng = np.random.default_rng(8)
    assert effective_sample_size(np.full(100, 2.0)) == 1.0
    assert math.isnan(effective_sample_size([1.0, math.nan, 2.0, 3.0]))

    iid = rng.standard_normal(5000)
    assert 0.7 * 5000 < effective_sample_size(iid) < 1.3 * 5000

    n = 20_000
    ar = np.empty(n)
    ar[0] = rng.standard_normal()
    noise = rng.standard_normal(n) * math.sqrt(1 - 0.9 ** 2)
    for i in range(1, n):
        ar[i] = 0.9 * ar[i - 1] + noise[i]
    assert 600 < effective_sample_size(ar) < 1600

    with pytest.raises(EmptyChainError):
        effective_sample_size([])


def test_diagnostics() -> None:
    out = ChainOutput.from_coefficients([[0.0, 0.5, 1.0], [0.1, 0.4, 0.6, 0.9], [0.1, 0.4, 0.6, 0.9]])
    d = diagnostics(out)

    assert d.n_kept == 3
    assert d.k_histogram == {3: 1, 4: 2}
    assert d.k_median == 4.0
    assert d.ess_loglik == 1.0
    assert d.to_dict()["k_histogram"] == {"3": 1, "4": 2}

    with pytest.raises(EmptyChainError):
        diagnostics(ChainOutput((), 0.0))
