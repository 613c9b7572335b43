import math

import numpy as np
import pytest
from pydantic import ValidationError

from skewlab.exceptions import BoundExceeded, InvalidInput, NotAnosov, SearchRadiusExhausted
from skewlab.torus import (
    TorusPoint,
    bracket,
    bracket_candidates,
    bracket_displacements,
    eigen_frame,
    orbit_of,
    periodic_point_count,
    periodic_points,
    quad_cycle,
    su_path,
    torus_distance,
    wrap,
)


def test_cat_map_eigen_frame(cat) -> None:
    golden = (3.0 + math.sqrt(5.0)) / 2.0

    assert golden == pytest.approx(cat.lambda_u)
    assert 1.0 / golden == pytest.approx(cat.lambda_s)
    for kind in ("unstable", "stable"):
        direction = cat.direction(kind)
        assert 1.0 == pytest.approx(np.linalg.norm(direction))
        assert direction[0] > 0
        assert np.allclose(cat.matrix @ direction, cat.rate(kind) * direction, atol=1e-12)


@pytest.mark.parametrize("matrix", [((1, 1), (0, 1)), ((2, 0), (0, 1)), (1, 0, 0, 1)])
def test_eigen_frame_rejects_non_anosov(matrix) -> None:
    with pytest.raises(NotAnosov):
        eigen_frame(matrix)


def test_eigen_frame_rejects_wrong_shape() -> None:
    with pytest.raises(InvalidInput):
        eigen_frame((2, 1, 1))


def test_negative_trace() -> None:
    A = eigen_frame(((-2, 1), (1, -1)))

    assert A.lambda_u < -1.0
    assert A.expansion == pytest.approx(abs(A.lambda_u))
    assert A.expansion * A.contraction == pytest.approx(1.0)


def test_wrap() -> None:
    p = wrap((1.25, -0.25))

    assert (0.25, 0.75) == pytest.approx(p.as_tuple())
    assert 0.0 == wrap((-1e-17, 0.0)).x1


def test_torus_point_rejects_out_of_range() -> None:
    with pytest.raises(ValidationError):
        TorusPoint(x1=1.0, x2=0.0)


def test_torus_distance_is_minimal_image() -> None:
    assert 0.1 == pytest.approx(torus_distance(TorusPoint(x1=0.95, x2=0.0), TorusPoint(x1=0.05, x2=0.0)))


def test_bracket_legs_chain(cat) -> None:
    x = TorusPoint(x1=0.1, x2=0.2)
    y = TorusPoint(x1=0.7, x2=0.4)

    z, (unstable, stable) = bracket(cat, x, y, 2.0)

    assert "unstable" == unstable.kind
    assert "stable" == stable.kind
    assert torus_distance(unstable.end, z) < 1e-12
    assert torus_distance(stable.end, y) < 1e-12
    assert torus_distance(wrap(x.lift() + unstable.displacement * cat.direction("unstable")), z) < 1e-12


def test_bracket_candidates_are_ranked(cat) -> None:
    x = TorusPoint(x1=0.3, x2=0.6)
    y = TorusPoint(x1=0.9, x2=0.1)

    costs = [candidate.cost for candidate in bracket_candidates(cat, x, y, 2.0)]

    assert costs == sorted(costs)
    assert len(costs) == 13


def test_bracket_displacements_match_scalar_bracket(cat) -> None:
    rng = np.random.default_rng(3)
    starts, ends = rng.random((20, 2)), rng.random((20, 2))

    s, t = bracket_displacements(cat, starts, ends, 2.0)

    for index in range(20):
        best = bracket_candidates(cat, wrap(starts[index]), wrap(ends[index]), 2.0)[0]
        assert best.legs[0].displacement == pytest.approx(s[index], abs=1e-12)
        assert best.legs[1].displacement == pytest.approx(-t[index], abs=1e-12)


def test_empty_search_radius(cat) -> None:
    with pytest.raises(SearchRadiusExhausted):
        bracket(cat, TorusPoint.origin(), TorusPoint(x1=0.5, x2=0.5), 0.0)


def test_su_path_and_reverse(cat) -> None:
    x = TorusPoint(x1=0.1, x2=0.9)
    y = TorusPoint(x1=0.5, x2=0.5)

    path = su_path(cat, x, y, 2.0)
    back = path.reversed()

    assert torus_distance(path.end, y) < 1e-12
    assert torus_distance(back.end, x) < 1e-12
    assert [-leg.displacement for leg in reversed(path.legs)] == [leg.displacement for leg in back.legs]


def test_quad_cycle_closes(cat) -> None:
    x = TorusPoint(x1=0.25, x2=0.5)

    cycle = quad_cycle(cat, x, 0.3, -0.2)

    assert 4 == len(cycle.path.legs)
    assert x == cycle.path.end
    assert ["unstable", "stable", "unstable", "stable"] == [leg.kind for leg in cycle.path.legs]


@pytest.mark.parametrize("n, count, periods", [(1, 1, [1]), (2, 5, [1, 2, 2]), (3, 16, [1, 3, 3, 3, 3, 3])])
def test_periodic_points_of_cat_map(cat, n, count, periods) -> None:
    orbits = periodic_points(cat, n)

    assert count == periodic_point_count(cat, n)
    assert count == sum(orbit.period for orbit in orbits)
    assert periods == sorted(orbit.period for orbit in orbits)
    for orbit in orbits:
        assert torus_distance(cat.iterate(orbit.start, orbit.period), orbit.start) < 1e-12


def test_periodic_points_origin_first(cat) -> None:
    origin = periodic_points(cat, 4)[0]

    assert ((0, 0),) == origin.numerators
    assert 1 == origin.period


def test_periodic_points_bounds(cat, with_config) -> None:
    with pytest.raises(InvalidInput):
        periodic_points(cat, 0)

    with_config(MAX_PERIOD=3)
    with pytest.raises(BoundExceeded):
        periodic_points(cat, 4)


def test_orbit_of_rational_point(cat) -> None:
    orbit = orbit_of(cat, (1, 2), 5)

    assert 2 == orbit.period
    assert ((1, 2), (4, 3)) == orbit.numerators
    assert set(orbit.numerators) in [set(o.numerators) for o in periodic_points(cat, 2)]
    assert ((0, 0),) == orbit_of(cat, (5, -10), 5).numerators
    with pytest.raises(InvalidInput):
        orbit_of(cat, (1, 2), 0)
