import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from bivext import (
    AngularCoefficients,
    AsymmetricLogistic,
    BernsteinLikelihood,
    DensityUnderflowWarning,
    DomainError,
    FrechetSample,
    PickandsCoefficients,
    SymmetricLogistic,
    eta_to_beta,
    log_density,
    log_likelihood,
    log_likelihood_eta,
    max_stable_cdf,
    sample_bivariate,
    sample_eta,
)
from bivext._io import write_csv


INDEPENDENCE = PickandsCoefficients([1.0, 1.0, 1.0, 1.0])
BETA3 = eta_to_beta(AngularCoefficients([0.0, 0.5, 1.0]))


def test_FrechetSample() -> None:
    data = FrechetSample([1.0, 3.0], [1.0, 1.0])
    assert data.n == len(data) == 2
    assert data.t == pytest.approx([0.5, 0.75])
    assert list(data) == [(1.0, 1.0), (3.0, 1.0)]

    with pytest.raises(ValueError):
        data.y1[0] = 2.0


@pytest.mark.parametrize("y1, y2", [
    ([], []),
    ([1.0, 2.0], [1.0]),
    ([1.0, 0.0], [1.0, 1.0]),
    ([1.0, -2.0], [1.0, 1.0]),
    ([1.0, float("nan")], [1.0, 1.0]),
    ([1.0, float("inf")], [1.0, 1.0]),
])
def test_FrechetSample_invalid(y1: list, y2: list) -> None:
    with pytest.raises(DomainError):
        FrechetSample(y1, y2)


def test_FrechetSample_csv(tmp_path: Path) -> None:
    path = tmp_path / "sample.csv"
    data = FrechetSample([0.5, 12.25, 3.0], [2.0, 0.75, 1e3])
    data.to_frame().to_csv(path, index=False)

    back = FrechetSample.read_csv(path)
    assert back.y1.tolist() == data.y1.tolist()
    assert back.y2.tolist() == data.y2.tolist()

    with pytest.raises(DomainError):
        FrechetSample.from_frame(pd.DataFrame({"y1": [1.0]}))
    with pytest.raises(DomainError):
        FrechetSample.from_frame(pd.DataFrame({"y1": ["a"], "y2": [1.0]}))

    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(DomainError):
        FrechetSample.read_csv(tmp_path / "empty.csv")
    with pytest.raises(OSError):
        FrechetSample.read_csv(tmp_path / "missing.csv")


def test_max_stable_cdf() -> None:
    assert max_stable_cdf(INDEPENDENCE, 1.0, 2.0) == pytest.approx(math.exp(-1.5))
    assert max_stable_cdf(BETA3, 1.0, 1.0) == pytest.approx(math.exp(-1.5))

    with pytest.raises(DomainError):
        max_stable_cdf(BETA3, 0.0, 1.0)


@pytest.mark.parametrize("beta, y1, y2, expected", [
    (INDEPENDENCE, 1.0, 1.0, -2.0),
    (INDEPENDENCE, 2.0, 2.0, -1.0 - 4 * math.log(2)),
    (BETA3, 1.0, 1.0, -1.5 + math.log(0.8125)),
])
def test_log_density(beta: PickandsCoefficients, y1: float, y2: float, expected: float) -> None:
    assert log_density(beta, y1, y2) == pytest.approx(expected, abs=1e-10)


def test_log_likelihood() -> None:
    data = FrechetSample([1.0, 2.0], [1.0, 2.0])
    assert log_likelihood(INDEPENDENCE, data) == pytest.approx(-3.0 - 4 * math.log(2), abs=1e-10)
    assert log_likelihood_eta(AngularCoefficients([0.5, 0.5, 0.5]), data) == pytest.approx(
        log_likelihood(INDEPENDENCE, data), abs=1e-12
    )

    with pytest.raises(DomainError):
        log_density(BETA3, [1.0, -1.0], 1.0)


def test_log_density_matches_mixed_derivative() -> None:
    rng = np.random.default_rng(0)
    asymmetric = AsymmetricLogistic(0.6, 0.3, 0.8)

    def projected(t: float) -> float:
        return float(asymmetric.pickands(t))

    for i in range(100):
        if i % 4 == 0:
            beta = PickandsCoefficients.from_function(projected, int(rng.integers(5, 26)))
        else:
            beta = eta_to_beta(sample_eta(int(rng.integers(3, 11)), rng))
        y1, y2 = rng.uniform(0.5, 20.0, size=2)
        h1, h2 = 1e-3 * y1, 1e-3 * y2

        def cdf(a: float, b: float) -> float:
            return float(max_stable_cdf(beta, a, b))

        mixed = (
            cdf(y1 + h1, y2 + h2) - cdf(y1 + h1, y2 - h2) - cdf(y1 - h1, y2 + h2) + cdf(y1 - h1, y2 - h2)
        ) / (4 * h1 * h2)
        assert math.exp(log_density(beta, y1, y2)) == pytest.approx(mixed, rel=1e-4)


def test_log_density_underflow() -> None:
    with pytest.warns(DensityUnderflowWarning):
        assert log_density(INDEPENDENCE, 1e76, 1e76) == -math.inf


@pytest.mark.parametrize("eta", [
    AngularCoefficients([0.5, 0.5, 0.5]),
    AngularCoefficients([0.0, 0.5, 1.0]),
    AngularCoefficients([0.2, 0.5, 0.8]),
    AngularCoefficients([0.1, 0.55, 0.85]),
])
def test_log_density_normalized(eta: AngularCoefficients) -> None:
    # midpoint rule after y = -1/log(u) on both axes
    n = 600
    u = (np.arange(n) + 0.5) / n
    y = -1 / np.log(u)
    jacobian = y ** 2 / u
    y1, y2 = np.meshgrid(y, y, indexing="ij")
    density = np.exp(log_density(eta_to_beta(eta), y1, y2)) * np.outer(jacobian, jacobian)
    assert density.sum() / n ** 2 == pytest.approx(1.0, abs=0.01)


def test_FrechetSample_csv_exact(tmp_path: Path) -> None:
    rng = np.random.default_rng(11)
    data = sample_bivariate(SymmetricLogistic(0.45), 1000, rng)
    path = tmp_path / "sample.csv"
    write_csv(data.to_frame(), path)

    back = FrechetSample.read_csv(path)
    assert np.array_equal(back.y1, data.y1)
    assert np.array_equal(back.y2, data.y2)


def test_log_density_exchangeable() -> None:
    rng = np.random.default_rng(1)
    y1, y2 = rng.uniform(0.5, 20.0, size=(2, 50))
    for _ in range(20):
        eta = sample_eta(int(rng.integers(3, 11)), rng)
        mirrored = AngularCoefficients(1 - eta.eta[::-1])
        assert log_density(eta_to_beta(mirrored), y2, y1) == pytest.approx(
            log_density(eta_to_beta(eta), y1, y2), abs=1e-9
        )


def test_BernsteinLikelihood() -> None:
    rng = np.random.default_rng(2)
    data = FrechetSample(*rng.uniform(0.5, 50.0, size=(2, 200)))
    likelihood = BernsteinLikelihood(data)
    assert likelihood.data is data

    for _ in range(50):
        eta = sample_eta(int(rng.integers(3, 16)), rng)
        expected = log_likelihood_eta(eta, data)
        assert likelihood(eta.eta) == pytest.approx(expected, rel=1e-10)
        assert likelihood.from_eta(eta) == pytest.approx(expected, rel=1e-10)
        assert likelihood.from_beta(eta_to_beta(eta)) == pytest.approx(expected, rel=1e-10)
