import math

import numpy as np
import pytest
from scipy import stats

from bivext import (
    DegenerateDataError,
    DomainError,
    GevFit,
    GevParams,
    from_unit_frechet,
    gev_cdf,
    gev_fit_mle,
    gev_log_likelihood,
    gev_pdf,
    gev_quantile,
    to_unit_frechet,
)
from bivext._margins import _numerical_hessian


MARGIN1 = GevParams(0.0055, 0.0025, 0.0249)
MARGIN2 = GevParams(0.0068, 0.0030, 0.1199)


def test_GevParams() -> None:
    p = GevParams(1.0, 2.0, 0.0)
    assert p.is_gumbel
    assert not MARGIN1.is_gumbel
    assert GevParams.from_dict(MARGIN2.to_dict()) == MARGIN2

    with pytest.raises(DomainError):
        GevParams(0.0, 0.0, 0.1)
    with pytest.raises(DomainError):
        GevParams(0.0, 1.0, math.nan)


@pytest.mark.parametrize("p", [
    GevParams(0.0, 1.0, 0.0),
    GevParams(10.0, 2.0, 0.3),
    GevParams(-1.0, 0.5, -0.4),
    MARGIN1,
])
def test_gev_matches_scipy(p: GevParams) -> None:
    dist = stats.genextreme(-p.xi, loc=p.mu, scale=p.sigma)
    q = np.linspace(0.01, 0.99, 25)
    z = dist.ppf(q)

    assert gev_quantile(p, q) == pytest.approx(z, rel=1e-10, abs=1e-12)
    assert gev_cdf(p, z) == pytest.approx(q, abs=1e-10)
    assert gev_pdf(p, z) == pytest.approx(dist.pdf(z), rel=1e-8)
    assert gev_log_likelihood(p, z) == pytest.approx(np.sum(dist.logpdf(z)), rel=1e-10)


def test_gev_outside_support() -> None:
    heavy = GevParams(0.0, 1.0, 0.5)
    assert gev_cdf(heavy, -3.0) == 0.0
    assert gev_log_likelihood(heavy, [0.0, -3.0]) == -math.inf
    with pytest.raises(DomainError):
        gev_pdf(heavy, -3.0)
    with pytest.raises(DomainError):
        to_unit_frechet(heavy, [-3.0])

    bounded = GevParams(0.0, 1.0, -0.5)
    assert gev_cdf(bounded, 3.0) == 1.0

    with pytest.raises(DomainError):
        gev_quantile(heavy, 1.0)


@pytest.mark.parametrize("p", [GevParams(0.0, 1.0, 0.0), GevParams(10.0, 2.0, 0.3), MARGIN2])
def test_unit_frechet(p: GevParams) -> None:
    z = gev_quantile(p, np.linspace(0.05, 0.95, 7))
    y = to_unit_frechet(p, z)

    assert np.exp(-1 / y) == pytest.approx(gev_cdf(p, z), abs=1e-12)
    assert from_unit_frechet(p, y) == pytest.approx(z, rel=1e-10)

    with pytest.raises(DomainError):
        from_unit_frechet(p, 0.0)


def test_unit_frechet_gumbel() -> None:
    assert to_unit_frechet(GevParams(0.0, 1.0, 0.0), math.log(10)) == pytest.approx(10.0)
    assert to_unit_frechet(GevParams(1.0, 1.0, 1.0), 5.0) == pytest.approx(5.0)


def test_unit_frechet_thresholds() -> None:
    q1, q2 = 0.0162, 0.0221

    assert to_unit_frechet(MARGIN1, q1) == pytest.approx(58.38, rel=1e-3)
    assert to_unit_frechet(MARGIN2, q1) == pytest.approx(14.30, rel=1e-3)
    assert to_unit_frechet(MARGIN1, q1) == pytest.approx(57.25, rel=0.02)
    assert to_unit_frechet(MARGIN2, q1) == pytest.approx(14.12, rel=0.02)
    assert to_unit_frechet(MARGIN1, q2) == pytest.approx(450.23, rel=0.04)
    assert to_unit_frechet(MARGIN2, q2) == pytest.approx(52.32, rel=0.04)

    assert gev_cdf(MARGIN1, q1) == pytest.approx(0.983, abs=1e-3)
    assert gev_quantile(MARGIN1, 0.99) == pytest.approx(0.0177, abs=1e-4)


def test_gev_fit_mle() -> None:
    rng = np.random.default_rng(0)
    data = stats.genextreme(-0.1, loc=10.0, scale=2.0).rvs(500, random_state=rng)
    fit = gev_fit_mle(data)

    assert fit.n == 500
    assert fit.params.mu == pytest.approx(10.0, abs=0.4)
    assert fit.params.sigma == pytest.approx(2.0, abs=0.3)
    assert fit.params.xi == pytest.approx(0.1, abs=0.12)
    assert all(map(math.isfinite, (fit.mu_se, fit.sigma_se, fit.xi_se)))
    assert 0 < fit.xi_se < 0.1
    assert fit.log_likelihood == pytest.approx(gev_log_likelihood(fit.params, data), rel=1e-9)

    nearby = GevParams(fit.params.mu + 0.05, fit.params.sigma, fit.params.xi)
    assert gev_log_likelihood(nearby, data) < fit.log_likelihood

    assert GevFit.from_dict(fit.to_dict()) == fit


def test_gev_fit_mle_gumbel_units() -> None:
    rng = np.random.default_rng(1)
    data = stats.gumbel_r(loc=0.01, scale=0.003).rvs(300, random_state=rng)
    fit = gev_fit_mle(data)

    assert fit.params.mu == pytest.approx(0.01, abs=0.001)
    assert fit.params.sigma == pytest.approx(0.003, rel=0.2)
    assert abs(fit.params.xi) < 0.15


@pytest.mark.parametrize("data, error", [
    (np.arange(9.0), DomainError),
    ([1.0] * 9 + [math.nan], DomainError),
    ([3.0] * 20, DegenerateDataError),
])
def test_gev_fit_mle_invalid(data, error: type) -> None:
    with pytest.raises(error):
        gev_fit_mle(data)


def test_numerical_hessian_quadratic() -> None:
    a = np.array([[2.0, 0.5, -0.3], [0.5, 1.0, 0.2], [-0.3, 0.2, 4.0]])
    theta = np.array([1.0, -2.0, 0.3])
    hessian = _numerical_hessian(lambda t, x: 0.5 * t @ a @ t + x @ t, theta, np.array([1.0, 2.0, 3.0]))
    assert hessian == pytest.approx(a, abs=1e-5)
