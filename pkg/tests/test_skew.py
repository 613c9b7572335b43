import math

import pytest

from skewlab.cocycle import FourierCocycle
from skewlab.exceptions import InvalidRates
from skewlab.skew import (
    BunchingRates,
    SkewSystem,
    apply_skew,
    apply_skew_inverse,
    check_center_bunched,
    check_partial_hyperbolicity,
    check_r_bunched,
    check_strong_r_bunched,
    holonomy_exponent,
    rates,
    skew_orbit,
)
from skewlab.torus import TorusPoint, torus_distance


@pytest.fixture
def cat_rates(cat) -> BunchingRates:
    return rates(SkewSystem(base=cat, cocycle=FourierCocycle()))


def test_translation_fiber_rates(cat, cat_rates) -> None:
    assert 1.0 / cat.expansion == pytest.approx(cat_rates.nu)
    assert cat_rates.nu == cat_rates.nu_hat
    assert 1.0 == cat_rates.gamma == cat_rates.gamma_hat


def test_skew_step_and_inverse(cat, obstructed) -> None:
    system = SkewSystem(base=cat, cocycle=obstructed, fiber="line")
    start = (TorusPoint(x1=0.3, x2=0.8), 0.25)

    image = apply_skew(system, start)
    back = apply_skew_inverse(system, image)

    assert 0.25 + obstructed(start[0]) == pytest.approx(image[1])
    assert torus_distance(back[0], start[0]) < 1e-12
    assert 0.25 == pytest.approx(back[1])


def test_circle_fiber_wraps(cat, obstructed) -> None:
    system = SkewSystem(base=cat, cocycle=obstructed)

    orbit = skew_orbit(system, (TorusPoint.origin(), 0.0), 3)

    assert 4 == len(orbit)
    assert all(0.0 <= t < 1.0 for _, t in orbit)
    assert 2 == len(skew_orbit(system, (TorusPoint.origin(), 0.5), -1))


def test_cat_map_is_partially_hyperbolic_and_bunched(cat_rates) -> None:
    assert check_partial_hyperbolicity(cat_rates).holds
    assert check_center_bunched(cat_rates).holds
    for order in (1.0, 2.0, 5.0):
        assert check_r_bunched(cat_rates, order).holds
        assert check_strong_r_bunched(cat_rates, order).holds


def test_failed_inequalities_are_named() -> None:
    r = BunchingRates(nu=0.5, nu_hat=0.5, gamma=0.9, gamma_hat=0.9)

    report = check_strong_r_bunched(r, 8.0)

    assert not report.holds
    assert "max(ν, ν̂) < γ^r" in report.failed
    assert all(check.margin < 0 for check in report.checks if not check.holds)


def test_not_partially_hyperbolic() -> None:
    r = BunchingRates(nu=1.2, nu_hat=0.5, gamma=1.0, gamma_hat=1.0)

    assert "ν < 1" in check_partial_hyperbolicity(r).failed
    with pytest.raises(InvalidRates):
        holonomy_exponent(r, 0.5)


def test_rates_must_be_positive() -> None:
    with pytest.raises(InvalidRates):
        BunchingRates(nu=0.0, nu_hat=0.5, gamma=1.0, gamma_hat=1.0)


@pytest.mark.parametrize("alpha, expected", [(1.0, 0.5), (0.5, 0.25)])
def test_holonomy_exponent_of_cat_rates(cat_rates, alpha, expected) -> None:
    exponent = holonomy_exponent(cat_rates, alpha)

    assert expected == pytest.approx(exponent.theta_sup)
    assert exponent.open_supremum


def test_holonomy_exponent_binding_for_translations(cat_rates) -> None:
    assert "ν < (νν̂)^{θ/α}" == holonomy_exponent(cat_rates, 0.7).binding

    with pytest.raises(InvalidRates):
        holonomy_exponent(cat_rates, 1.5)


def test_holonomy_exponent_with_fiber_contraction() -> None:
    r = BunchingRates(nu=0.4, nu_hat=0.4, gamma=0.8, gamma_hat=1.0)

    exponent = holonomy_exponent(r, 1.0)

    assert math.log(0.5) / math.log(0.16) == pytest.approx(exponent.theta_sup)
    assert "ν/γ < (νν̂)^{θ/α}" == exponent.binding


def test_bunching_order_must_be_non_negative(cat_rates) -> None:
    with pytest.raises(InvalidRates):
        check_r_bunched(cat_rates, -1.0)
