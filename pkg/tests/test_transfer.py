import numpy as np
import pytest

from skewlab import config
from skewlab.cocycle import FourierCocycle, coboundary_of
from skewlab.exceptions import InvalidInput
from skewlab.torus import TorusPoint
from skewlab.transfer import (
    ClassifyConfig,
    averaged_increment,
    classify,
    consistency_check,
    grid_rows,
    periodic_obstruction,
    residual,
    residual_bound,
    solve_via_su_paths,
    sup_deviation,
)


def test_solution_recovers_transfer_function(cat, psi, coboundary) -> None:
    sol = solve_via_su_paths(coboundary, cat, TorusPoint.origin(), 64, 1e-7)

    assert (64, 64) == sol.values.shape
    assert 0.0 == pytest.approx(sol.values[0, 0], abs=1e-7)
    assert sup_deviation(sol, psi) <= 1e-6


def test_solution_with_shifted_anchor(cat, psi, coboundary) -> None:
    anchor = TorusPoint(x1=0.3, x2=0.6)

    sol = solve_via_su_paths(coboundary.evolve_self(mean=0.7), cat, anchor, 16, 1e-8)

    assert 0.7 == sol.c
    assert sup_deviation(sol, psi) <= 1e-7


def test_residual_within_interpolation_bound(cat, psi, coboundary) -> None:
    sol = solve_via_su_paths(coboundary, cat, TorusPoint.origin(), 32, 1e-7)

    assert residual(coboundary, cat, sol) <= residual_bound(psi, sol)
    assert residual(coboundary, cat, sol, at="nodes") <= 4e-7


def test_residual_is_second_order(cat, coboundary) -> None:
    coarse = solve_via_su_paths(coboundary, cat, TorusPoint.origin(), 32, 1e-9)
    fine = solve_via_su_paths(coboundary, cat, TorusPoint.origin(), 64, 1e-9)

    ratio = residual(coboundary, cat, coarse) / residual(coboundary, cat, fine)

    assert 3.0 <= ratio <= 5.0


@pytest.mark.parametrize("grid_n, tol", [(3, 1e-7), (8, 0.0)])
def test_solve_rejects(cat, coboundary, grid_n, tol) -> None:
    with pytest.raises(InvalidInput):
        solve_via_su_paths(coboundary, cat, TorusPoint.origin(), grid_n, tol)


def test_periodic_obstruction_of_cosine(cat, obstructed) -> None:
    witnesses = periodic_obstruction(obstructed, cat, 3)

    first = witnesses[0]
    assert "periodic_orbit" == first.kind
    assert 1 == first.payload.period
    assert 1.0 == pytest.approx(first.value, abs=1e-9)
    assert [] == periodic_obstruction(FourierCocycle(), cat, 3)


def test_coboundary_has_no_periodic_obstruction(cat, coboundary) -> None:
    assert [] == periodic_obstruction(coboundary, cat, 5)

    with pytest.raises(InvalidInput):
        periodic_obstruction(coboundary, cat, 0)


def test_classify_coboundary(cat, psi, coboundary) -> None:
    result = classify(coboundary, cat, ClassifyConfig(grid_n=16, sample_nodes=6))

    sol = result.unwrap()
    assert sup_deviation(sol, psi) <= 1e-6
    assert sol.consistency_spread <= 4e-7
    assert sol.residual_sup > 0.0


def test_classify_obstructed(cat, obstructed) -> None:
    witness = classify(obstructed, cat).failure()

    assert "periodic_orbit" == witness.kind
    assert ((0, 0),) == witness.payload.numerators
    assert 1.0 == pytest.approx(witness.magnitude, abs=1e-9)
    assert witness.certified_floor > 0.5


def test_consistency_check_on_coboundary(cat, coboundary) -> None:
    sol = solve_via_su_paths(coboundary, cat, TorusPoint.origin(), 16, 1e-8)

    report = consistency_check(coboundary, cat, sol, n_alternates=2, seed=7, sample_nodes=5)

    assert 5 == len(report.nodes)
    assert report.spread <= report.error_bound + 1e-9
    assert report.worst_cycle is not None
    assert all(abs(value) <= error + 1e-9 for value, error in zip(report.cycle_values, report.cycle_errors))
    assert len(report.nodes) == len(report.node_bounds)


def test_consistency_check_is_seeded(cat, coboundary) -> None:
    sol = solve_via_su_paths(coboundary, cat, TorusPoint.origin(), 8, 1e-8)

    first = consistency_check(coboundary, cat, sol, 1, seed=3, sample_nodes=4)
    second = consistency_check(coboundary, cat, sol, 1, seed=3, sample_nodes=4)

    assert first.nodes == second.nodes
    assert first.cycle_values == second.cycle_values
    with pytest.raises(InvalidInput):
        consistency_check(coboundary, cat, sol, 0, seed=3)


def test_averaged_increment(cat, psi, coboundary) -> None:
    x0 = TorusPoint(x1=0.2, x2=0.3)
    x1 = TorusPoint(x1=0.6, x2=0.1)

    increment = averaged_increment(coboundary, cat, x0, x1, n_repeats=4, tol=1e-10)

    assert psi(x1) - psi(x0) == pytest.approx(increment.direct, abs=1e-9)
    assert abs(increment.boundary_term) <= 2.0 * 0.65 / 4 + increment.error_bound
    assert increment.direct - increment.averaged == pytest.approx(increment.boundary_term)


def test_grid_rows(cat, coboundary) -> None:
    sol = solve_via_su_paths(coboundary, cat, TorusPoint.origin(), 4, 1e-8)

    rows = grid_rows(sol)

    assert 16 == len(rows)
    assert (0, 1, 0.0, 0.25) == rows[1][:4]
    assert np.isclose(rows[5][4], sol.values[1, 1])


@pytest.mark.parametrize("seed", range(6))
def test_reconstruction_of_random_transfer_functions(cat, random_cocycle, seed) -> None:
    rng = np.random.default_rng(seed)
    psi = random_cocycle(rng, n_modes=1 + seed % 3)
    anchor = TorusPoint(x1=rng.random(), x2=rng.random())

    sol = solve_via_su_paths(coboundary_of(psi, cat), cat, anchor, 16, 1e-8)

    assert sup_deviation(sol, psi) <= 1e-8 + 1e-9


def test_consistency_spread_of_obstruction(cat, obstructed, long_sum_pcf) -> None:
    sol = solve_via_su_paths(obstructed, cat, TorusPoint.origin(), 8, 1e-9)

    report = consistency_check(obstructed, cat, sol, n_alternates=1, seed=5, sample_nodes=4)
    oracle = [sum(long_sum_pcf(obstructed, cat, leg, terms=200) for leg in cycle.path.legs) for cycle in report.cycles]

    for value, error, expected in zip(report.cycle_values, report.cycle_errors, oracle):
        assert -expected == pytest.approx(value, abs=error + 1e-9)
    floor = max(abs(expected) - error for expected, error in zip(oracle, report.cycle_errors))
    assert floor > 1e-3
    assert report.spread >= floor - 1e-9
    assert report.spread - report.error_bound > config.OBSTRUCTION_MARGIN


def test_classify_finds_accessible_cycle(cat, long_sum_pcf) -> None:
    phi = FourierCocycle.sine(1, 0)
    assert [] == periodic_obstruction(phi, cat, 1)

    witness = classify(phi, cat, ClassifyConfig(grid_n=8, max_period=1, n_alternates=1, sample_nodes=4)).failure()
    expected = sum(long_sum_pcf(phi, cat, leg, terms=200) for leg in witness.payload.path.legs)

    assert "accessible_cycle" == witness.kind
    assert TorusPoint.origin() == witness.payload.anchor
    assert abs(witness.value) == witness.magnitude
    assert witness.certified_floor > config.OBSTRUCTION_MARGIN
    assert -expected == pytest.approx(witness.value, abs=witness.magnitude - witness.certified_floor + 1e-9)
