import numpy as np
import pytest
from scipy import integrate

from bivext import (
    AngularCoefficients,
    DomainError,
    InvalidCoefficientsError,
    PickandsCoefficients,
    Restriction,
    angular_cdf,
    angular_density,
    beta_to_eta,
    chi,
    elevate_degree,
    eta_to_beta,
    exceedance_prob,
    pickands,
    pickands_d1,
    pickands_d2,
    sample_eta,
    stable_tail_L,
    tail_dep_R,
    validate_angular,
    validate_pickands,
)


ETA4 = AngularCoefficients([0.1, 0.4, 0.6, 0.9])
BETA4 = PickandsCoefficients([1.0, 0.8, 0.75, 0.8, 1.0])
ETA3 = AngularCoefficients([0.0, 0.5, 1.0])


def test_AngularCoefficients() -> None:
    assert ETA4.k == 4
    assert ETA4.p0 == pytest.approx(0.1)
    assert ETA4.p1 == pytest.approx(0.1)
    assert ETA4 == AngularCoefficients((0.1, 0.4, 0.6, 0.9))
    assert hash(ETA4) == hash(AngularCoefficients((0.1, 0.4, 0.6, 0.9)))
    assert ETA4 != ETA3
    assert AngularCoefficients.from_dict(ETA4.to_dict()) == ETA4

    with pytest.raises(ValueError):
        ETA4.eta[0] = 0.2


@pytest.mark.parametrize("values", [
    [0.5, 0.5],
    [0.0, float("nan"), 1.0],
    [[0.0, 0.5, 1.0]],
])
def test_AngularCoefficients_invalid(values: list) -> None:
    with pytest.raises(DomainError):
        AngularCoefficients(values)


def test_from_dict_mismatch() -> None:
    with pytest.raises(DomainError):
        AngularCoefficients.from_dict({"k": 5, "eta": [0.1, 0.4, 0.6, 0.9]})
    with pytest.raises(DomainError):
        PickandsCoefficients.from_dict({"k": 3, "beta": [1.0, 0.8, 0.75, 0.8, 1.0]})


def test_PickandsCoefficients() -> None:
    assert BETA4.k == 4
    assert BETA4.p0 == pytest.approx(0.1)
    assert BETA4.p1 == pytest.approx(0.1)
    assert PickandsCoefficients.from_dict(BETA4.to_dict()) == BETA4

    flat = PickandsCoefficients.from_function(lambda t: 1.0, 5)
    assert flat.k == 5
    assert np.all(flat.beta == 1.0)
    assert pickands(flat, np.linspace(0, 1, 11)) == pytest.approx(np.ones(11))


def test_validate_angular() -> None:
    assert validate_angular(ETA4)
    assert validate_angular(ETA3).valid
    assert str(validate_angular(ETA3)) == "valid"

    report = validate_angular(AngularCoefficients([0.6, 0.5, 0.4]))
    assert not report
    assert report.restrictions == {Restriction.ORDER, Restriction.VERTEX_MASS}

    report = validate_angular(AngularCoefficients([0.1, 0.4, 0.6, 0.8]))
    assert report.restrictions == {Restriction.SUM}
    assert "SUM" in str(report)

    report = validate_angular(AngularCoefficients([-0.1, 0.6, 1.0]))
    assert Restriction.RANGE in report.restrictions


def test_validate_pickands() -> None:
    assert validate_pickands(BETA4)

    report = validate_pickands(PickandsCoefficients([1.0, 0.5, 1.1, 1.0]))
    assert report.restrictions == {Restriction.UPPER_BOUND, Restriction.ENDPOINT_SLOPE, Restriction.CONVEXITY}

    report = validate_pickands(PickandsCoefficients([0.9, 0.8, 0.8, 1.0]))
    assert Restriction.ENDPOINTS in report.restrictions


def test_conversion() -> None:
    beta = eta_to_beta(ETA4)
    assert beta.beta == pytest.approx(BETA4.beta, abs=1e-14)
    assert beta_to_eta(BETA4).eta == pytest.approx(ETA4.eta, abs=1e-14)

    with pytest.raises(InvalidCoefficientsError) as e:
        eta_to_beta(AngularCoefficients([0.6, 0.5, 0.4]))
    assert Restriction.ORDER in e.value.report.restrictions


def _check_round_trip(n: int, rng: np.random.Generator) -> None:
    for k in range(3, 31):
        for _ in range(n):
            eta = sample_eta(k, rng)
            beta = eta_to_beta(eta)
            assert validate_pickands(beta)
            assert np.max(np.abs(beta_to_eta(beta).eta - eta.eta)) < 1e-12


def test_conversion_round_trip() -> None:
    _check_round_trip(50, np.random.default_rng(1))


@pytest.mark.slow
def test_conversion_round_trip_many() -> None:
    _check_round_trip(1000, np.random.default_rng(11))


def test_derivative_identities() -> None:
    rng = np.random.default_rng(2)
    closed = np.linspace(0, 1, 101)[:-1]
    open_ = np.linspace(0, 1, 101)[1:-1]
    for _ in range(200):
        eta = sample_eta(int(rng.integers(3, 16)), rng)
        beta = eta_to_beta(eta)
        assert pickands_d1(beta, closed) == pytest.approx(2 * angular_cdf(eta, closed) - 1, abs=1e-10)
        assert pickands_d2(beta, open_) == pytest.approx(2 * angular_density(eta, open_), abs=1e-10)


def test_pickands_bounds() -> None:
    rng = np.random.default_rng(3)
    t = np.linspace(0, 1, 101)
    for _ in range(50):
        beta = eta_to_beta(sample_eta(int(rng.integers(3, 20)), rng))
        a = pickands(beta, t)
        assert a[0] == pytest.approx(1.0) and a[-1] == pytest.approx(1.0)
        assert np.all(a <= 1 + 1e-12)
        assert np.all(a >= np.maximum(t, 1 - t) - 1e-12)


def test_angular_values() -> None:
    assert angular_cdf(ETA4, 0.0) == pytest.approx(0.1)
    assert angular_cdf(ETA4, 1.0) == 1.0
    assert angular_cdf(ETA4, 0.5) == pytest.approx((0.1 + 3 * 0.4 + 3 * 0.6 + 0.9) / 8)
    assert angular_density(ETA4, 0.5) == pytest.approx(0.75)
    assert pickands(BETA4, 0.5) == pytest.approx(0.80625)
    assert pickands_d1(BETA4, 0.5) == pytest.approx(0.0, abs=1e-14)
    assert pickands_d2(BETA4, 0.5) == pytest.approx(1.5)


@pytest.mark.parametrize("f, c, x", [
    (angular_cdf, ETA4, 1.5),
    (angular_density, ETA4, 0.0),
    (angular_density, ETA4, 1.0),
    (pickands, BETA4, -0.1),
    (pickands_d2, BETA4, 1.0),
])
def test_domain(f, c, x: float) -> None:
    with pytest.raises(DomainError):
        f(c, x)


def test_tail_functions() -> None:
    assert stable_tail_L(BETA4, 0.0, 0.0) == 0.0
    assert stable_tail_L(BETA4, 2.0, 0.0) == pytest.approx(2.0)
    assert stable_tail_L(BETA4, 1.0, 1.0) == pytest.approx(2 * 0.80625)
    assert tail_dep_R(BETA4, 1.0, 1.0) == pytest.approx(chi(BETA4))
    assert tail_dep_R(BETA4, 0.1, 0.1) == pytest.approx(0.03875)
    assert chi(BETA4) == pytest.approx(0.3875)
    assert chi(eta_to_beta(ETA3)) == pytest.approx(0.5)

    with pytest.raises(DomainError):
        stable_tail_L(BETA4, -1.0, 1.0)


@pytest.mark.parametrize("eta, y1, y2, expected", [
    (ETA3, 10.0, 10.0, 0.05),
    (ETA4, 10.0, 10.0, 0.03875),
])
def test_exceedance_prob(eta: AngularCoefficients, y1: float, y2: float, expected: float) -> None:
    assert exceedance_prob(eta, y1, y2) == pytest.approx(expected, abs=1e-12)


def test_exceedance_prob_quadrature() -> None:
    rng = np.random.default_rng(4)
    for _ in range(100):
        eta = sample_eta(int(rng.integers(3, 12)), rng)
        y1, y2 = rng.uniform(0.5, 50.0, size=2)
        c = y1 / (y1 + y2)

        def integrand(w: float) -> float:
            return min(w / y1, (1 - w) / y2) * angular_density(eta, w)

        lower = integrate.quad(integrand, 0, c, epsabs=1e-13, epsrel=1e-12)[0]
        upper = integrate.quad(integrand, c, 1, epsabs=1e-13, epsrel=1e-12)[0]
        assert abs(exceedance_prob(eta, y1, y2) - 2 * (lower + upper)) < 1e-8
        assert exceedance_prob(eta, y1, y2) == pytest.approx(tail_dep_R(eta_to_beta(eta), 1 / y1, 1 / y2), abs=1e-12)


def test_angular_mean() -> None:
    rng = np.random.default_rng(6)
    for _ in range(50):
        eta = sample_eta(int(rng.integers(3, 16)), rng)
        interior = integrate.quad(lambda w: w * angular_density(eta, w), 0, 1, epsabs=1e-13, epsrel=1e-12)[0]
        assert interior + eta.p1 == pytest.approx(0.5, abs=1e-8)


@pytest.mark.parametrize("scale", [0.5, 2.0, 10.0])
def test_exceedance_prob_homogeneous(scale: float) -> None:
    rng = np.random.default_rng(8)
    for _ in range(50):
        eta = sample_eta(int(rng.integers(3, 12)), rng)
        y1, y2 = rng.uniform(0.5, 50.0, size=2)
        assert exceedance_prob(eta, scale * y1, scale * y2) == pytest.approx(
            exceedance_prob(eta, y1, y2) / scale, abs=1e-12
        )


def test_exceedance_prob_domain() -> None:
    with pytest.raises(DomainError):
        exceedance_prob(ETA4, 0.0, 1.0)


def test_elevate_degree() -> None:
    rng = np.random.default_rng(5)
    w = np.linspace(0, 1, 51)[:-1]
    for _ in range(20):
        eta = sample_eta(int(rng.integers(3, 12)), rng)
        raised = elevate_degree(eta)
        assert raised.k == eta.k + 1
        assert validate_angular(raised)
        assert (raised.p0, raised.p1) == pytest.approx((eta.p0, eta.p1))
        assert angular_cdf(raised, w) == pytest.approx(angular_cdf(eta, w), abs=1e-12)
        assert exceedance_prob(raised, 3.0, 7.0) == pytest.approx(exceedance_prob(eta, 3.0, 7.0), abs=1e-12)
