import math

import numpy as np
import pytest

from skewlab.exceptions import DegenerateSamples, InvalidInput
from skewlab.regularity import (
    expansion_fit,
    exponents,
    holder_from_callable,
    holder_from_grid,
    holder_from_pairs,
    pair_rows,
    sample_disc,
)


def power(exponent: float):
    def fn(points: np.ndarray) -> np.ndarray:
        return np.abs(np.atleast_2d(points)[:, 0]) ** exponent

    return fn


def weierstrass(points: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(points)[:, 0]
    return sum(0.5 ** n * np.cos(3.0 ** n * math.pi * x) for n in range(30))


def test_exponents() -> None:
    assert [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] == exponents(2, 2)
    assert [(0,), (1,)] == exponents(1, 1)


def test_sample_disc() -> None:
    points, values = sample_disc(power(1.0), [0.0], 1.0, radii=10)

    assert (20, 1) == points.shape
    assert np.allclose(np.abs(points[:, 0]), values)
    with pytest.raises(InvalidInput):
        sample_disc(power(1.0), [0.0, 0.0, 0.0], 1.0)


def quadratic(points: np.ndarray) -> np.ndarray:
    return 1.0 + points[:, 0] - 2.0 * points[:, 0] * points[:, 1] + 0.5 * points[:, 1] ** 2


def test_quadratic_is_fitted_exactly() -> None:
    points, values = sample_disc(quadratic, [0.2, -0.1], 0.1)

    report = expansion_fit(points, values, [0.2, -0.1], 2, 1.0)

    assert report.C <= 1e-6
    assert "admits" == report.verdict
    assert quadratic(np.array([[0.25, -0.05]]))[0] == pytest.approx(report.polynomial.evaluate([0.25, -0.05])[0])


def test_kinked_power_admits_its_exponent() -> None:
    points, values = sample_disc(power(2.5), [0.0], 1.0, inner=1e-10)

    report = expansion_fit(points, values, [0.0], 2, 0.5)

    assert "admits" == report.verdict
    assert report.C <= 3.0


def test_kinked_power_fails_above_its_exponent() -> None:
    points, values = sample_disc(power(2.5), [0.0], 1.0, inner=1e-10)

    assert "fails" == expansion_fit(points, values, [0.0], 2, 0.9).verdict


@pytest.mark.parametrize("order", [1, 2])
@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_power_family(order, alpha) -> None:
    points, values = sample_disc(power(order + alpha), [0.0], 1.0, inner=1e-10)

    assert "admits" == expansion_fit(points, values, [0.0], order, alpha).verdict
    if alpha + 0.4 <= 1.0:
        assert "fails" == expansion_fit(points, values, [0.0], order, alpha + 0.4).verdict


def test_smooth_function_admits(psi) -> None:
    center = [0.3, 0.1]
    points, values = sample_disc(psi.evaluate_points, center, 1e-3, inner=1e-3)

    report = expansion_fit(points, values, center, 2, 0.5)

    assert "admits" == report.verdict
    assert report.C <= 5.0


def test_minimax_does_not_worsen_fit(psi) -> None:
    center = [0.3, 0.1]
    points, values = sample_disc(psi.evaluate_points, center, 1e-2, inner=1e-2)

    lstsq = expansion_fit(points, values, center, 1, 0.5)
    minimax = expansion_fit(points, values, center, 1, 0.5, mode="minimax")

    assert "minimax" == minimax.mode
    assert minimax.C <= lstsq.C * (1.0 + 1e-3) + 1e-6


def test_expansion_fit_rejects() -> None:
    with pytest.raises(DegenerateSamples):
        expansion_fit(np.array([[0.1], [0.2]]), np.array([1.0, 2.0]), [0.0], 2, 0.5)
    with pytest.raises(InvalidInput):
        expansion_fit(np.array([[0.1], [0.2]]), np.array([1.0]), [0.0], 0, 0.5)
    with pytest.raises(InvalidInput):
        expansion_fit(np.array([[0.1], [0.2]]), np.array([1.0, 2.0]), [0.0], 0, 1.5)


def test_holder_of_linear_increments() -> None:
    distances = np.geomspace(1e-6, 1e-1, 200)

    estimate = holder_from_pairs(distances, 3.0 * distances)

    assert 1.0 == pytest.approx(estimate.alpha, abs=0.01)
    assert 1.0 == pytest.approx(estimate.r_squared, abs=1e-3)
    assert not estimate.flagged


def test_holder_of_weierstrass_function() -> None:
    estimate = holder_from_callable(weierstrass, seed=2)

    assert 0.55 <= estimate.alpha <= 0.71


def test_constant_function_is_flagged() -> None:
    estimate = holder_from_callable(lambda points: np.ones(len(points)))

    assert estimate.flagged
    assert math.isnan(estimate.alpha)
    assert "constant" in estimate.reason


def test_holder_needs_enough_pairs() -> None:
    with pytest.raises(InvalidInput):
        holder_from_pairs(np.ones(50), np.ones(50))
    with pytest.raises(InvalidInput):
        holder_from_callable(lambda points: points[:, 0], pair_budget=10)


def test_holder_of_smooth_grid() -> None:
    axis = np.arange(64) / 64
    x, y = np.meshgrid(axis, axis, indexing="ij")

    estimate = holder_from_grid(np.sin(2 * math.pi * x) + np.cos(2 * math.pi * y))

    assert 0.85 <= estimate.alpha <= 1.05
    with pytest.raises(InvalidInput):
        holder_from_grid(np.zeros((4, 4)))


def test_pair_rows() -> None:
    distances = np.geomspace(1e-3, 1e-1, 100)
    deltas = np.where(np.arange(100) % 2 == 0, distances, 0.0)

    rows = pair_rows(holder_from_pairs(distances, deltas))

    assert 100 == len(rows)
    assert math.log(1e-3) == pytest.approx(rows[0][2])
    assert rows[0][2] == pytest.approx(rows[0][3])
    assert -math.inf == rows[1][3]
