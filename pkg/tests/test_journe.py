import math

import numpy as np
import pytest

from skewlab.exceptions import InvalidInput, ResolutionExhausted
from skewlab.journe import (
    PlaquePair,
    build_grids,
    cone_agreement,
    cone_samples,
    in_cone,
    journe_limit_poly,
    journe_ratio_bound,
    plaque_bracket,
    swapped_cone_limit,
)


def cubic(points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    return points[:, 0] ** 2 * points[:, 1] + points[:, 1] ** 3


def kinked(points: np.ndarray) -> np.ndarray:
    return np.abs(np.atleast_2d(points)[:, 0]) ** 2.5


def smooth(points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    return np.sin(points[:, 0]) + points[:, 0] * np.cos(points[:, 1]) + points[:, 1] ** 2


def test_flat_grid_ratios() -> None:
    grids = build_grids(PlaquePair.flat(), 0.5, 2, None, m_max=5)

    by_m = {grid.m: grid for grid in grids}
    assert [2, 3, 4, 5] == sorted(by_m)
    assert 2.0 * math.sqrt(2.0) == pytest.approx(by_m[4].ratio)
    assert 0.125 == pytest.approx(by_m[4].eta)
    assert 4.47 == pytest.approx(by_m[5].ratio, abs=0.01)
    assert 6.0 == journe_ratio_bound(0.5, 2)
    assert all(grid.ratio_ok and grid.radius_ok for grid in grids)


def test_substituted_plaque() -> None:
    grids = build_grids(PlaquePair.flat(), 0.5, 2, (0.3, 0.0), m_max=6)

    by_m = {grid.m: grid for grid in grids}
    assert 2 == by_m[4].substituted
    assert 0.3 in by_m[4].grid.axis_x
    assert by_m[6].substituted is None


def test_substitution_outside_cone() -> None:
    with pytest.raises(InvalidInput):
        build_grids(PlaquePair.flat(), 0.5, 2, (0.01, 0.5), m_max=6)


def test_grid_scale_below_resolution() -> None:
    with pytest.raises(ResolutionExhausted):
        build_grids(PlaquePair.flat(), 0.5, 2, None, m_max=100)


@pytest.mark.parametrize("r, order", [(1.0, 2), (0.5, 0)])
def test_build_grids_rejects(r, order) -> None:
    with pytest.raises(InvalidInput):
        build_grids(PlaquePair.flat(), r, order, None, m_max=6)


def test_bent_plaques_meet() -> None:
    plaques = PlaquePair.bent(0.1)
    z1, z2 = np.array([0.3, 0.05]), np.array([0.02, 0.2])

    point = plaque_bracket(plaques, z1, z2)

    assert point[1] - z2[1] == pytest.approx(plaques.beta_h(z2, point[0] - z2[0]), abs=1e-14)
    assert point[0] - z1[0] == pytest.approx(plaques.beta_v(z1, point[1] - z1[1]), abs=1e-14)


def test_cone_membership() -> None:
    points = np.array([[1.0, 1.5], [1.0, 3.0], [0.0, 0.0]])

    assert [True, False, True] == in_cone(points, 2.0).tolist()
    assert [True, True, True] == in_cone(points, 2.0, swapped=True).tolist()
    assert (2 * 24 * 9, 2) == cone_samples(2.0, 1e-3, 1.0).shape


def test_polynomial_is_reproduced() -> None:
    report = journe_limit_poly(cubic, PlaquePair.flat(), 3, 0.5, m_range=(2, 12))

    monomials = report.polynomial.to_monomials(tol=1e-8)
    assert {(2, 1), (0, 3)} == set(monomials)
    assert 1.0 == pytest.approx(monomials[(2, 1)][0])
    assert 1.0 == pytest.approx(monomials[(0, 3)][0])
    assert max(report.differences) <= 1e-8
    assert "admits" == report.verdict


def test_kinked_function_admits_low_exponent() -> None:
    report = journe_limit_poly(kinked, PlaquePair.flat(), 2, 0.5)

    assert "admits" == report.verdict
    assert float(np.max(np.abs(report.coefficients[-1]))) <= 0.05
    assert 0.5 == pytest.approx(report.decay_exponents[(2, 0)], abs=0.15)
    assert 1.5 == pytest.approx(report.decay_exponents[(1, 0)], abs=0.15)


def test_kinked_function_fails_high_exponent() -> None:
    report = journe_limit_poly(kinked, PlaquePair.flat(), 2, 0.9)

    assert "fails" == report.verdict
    assert report.max_ratio > 10.0


def test_cone_limits_agree_for_smooth_function() -> None:
    report = journe_limit_poly(smooth, PlaquePair.flat(), 2, 0.5)
    swapped = swapped_cone_limit(smooth, PlaquePair.flat(), 2, 0.5)

    assert cone_agreement(report.polynomial, swapped.polynomial, report.grids[-1].R) <= 1e-8


def test_alpha_range() -> None:
    with pytest.raises(InvalidInput):
        journe_limit_poly(smooth, PlaquePair.flat(), 2, 1.0)
