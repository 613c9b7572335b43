"""
The relative cohomological equation φ = Φ∘A − Φ + c.

Φ is reconstructed by lifting su-paths from an anchor: the fiber coordinate picked up along the lifted stable and
unstable leaves is −PCF, so Φ(y) = −PCF(anchor → y; φ − c) with Φ(anchor) = 0. The reconstruction is consistent
exactly when the PCF of every accessible cycle vanishes; the consistency check measures this on alternate paths.
"""
import logging
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from returns.result import Failure, Result, Success
from scipy.interpolate import RegularGridInterpolator

from skewlab import config
from skewlab.cocycle import FourierCocycle, c2_bound
from skewlab.entities import ImmutableEvolvableModel
from skewlab.exceptions import InvalidInput
from skewlab.helpers import make_rng
from skewlab.pcf import pcf_batch, pcf_path
from skewlab.torus import (
    AccessibleCycle,
    HyperbolicAutomorphism,
    PeriodicOrbit,
    SuPath,
    TorusPoint,
    bracket_candidates,
    bracket_displacements,
    path_through,
    periodic_points,
    su_path,
    wrap,
    wrap_array,
)
from skewlab.types import FloatArray

logger = logging.getLogger(__name__)

ResidualPoints = Literal["centers", "nodes"]


class TransferSolution(ImmutableEvolvableModel):
    grid_n: int
    values: FloatArray
    pcf_errors: FloatArray
    c: float
    anchor: TorusPoint
    tol: float
    residual_sup: float = 0.0
    consistency_spread: float = 0.0

    def node(self, i: int, j: int) -> TorusPoint:
        return TorusPoint(x1=i / self.grid_n, x2=j / self.grid_n)

    def nodes(self) -> FloatArray:
        axis = np.arange(self.grid_n) / self.grid_n
        x1, x2 = np.meshgrid(axis, axis, indexing="ij")
        return np.column_stack([x1.ravel(), x2.ravel()])

    def interpolate(self, points: FloatArray) -> FloatArray:
        """
        Periodic bilinear interpolation of the grid values.
        """
        n = self.grid_n
        padded = np.empty((n + 1, n + 1))
        padded[:n, :n] = self.values
        padded[n, :n] = self.values[0, :]
        padded[:n, n] = self.values[:, 0]
        padded[n, n] = self.values[0, 0]
        axis = np.arange(n + 1) / n
        interpolator = RegularGridInterpolator((axis, axis), padded, method="linear")
        return interpolator(wrap_array(np.atleast_2d(np.asarray(points, dtype=float))))


class ObstructionWitness(ImmutableEvolvableModel):
    kind: Literal["periodic_orbit", "accessible_cycle"]
    payload: Union[PeriodicOrbit, AccessibleCycle]
    value: float
    magnitude: float
    certified_floor: float


class ConsistencyReport(ImmutableEvolvableModel):
    """
    ``node_bounds`` bound the error of each node spread: the errors of the two estimates it lies between.
    ``cycle_errors`` bound the error of each cycle value in the same way.
    """

    spread: float
    error_bound: float
    nodes: Tuple[Tuple[int, int], ...]
    node_spreads: Tuple[float, ...]
    node_bounds: Tuple[float, ...]
    cycles: Tuple[AccessibleCycle, ...]
    cycle_values: Tuple[float, ...]
    cycle_errors: Tuple[float, ...]

    @property
    def worst_index(self) -> Optional[int]:
        if not self.cycles:
            return None
        return int(np.argmax(np.abs(self.cycle_values)))

    @property
    def worst_cycle(self) -> Optional[AccessibleCycle]:
        index = self.worst_index
        return None if index is None else self.cycles[index]


class AveragedIncrement(ImmutableEvolvableModel):
    direct: float
    averaged: float
    boundary_term: float
    n_repeats: int
    error_bound: float


class ClassifyConfig(ImmutableEvolvableModel):
    anchor: TorusPoint = TorusPoint(x1=0.0, x2=0.0)
    grid_n: int = 32
    tol: float = 1e-7
    max_period: int = 6
    n_alternates: int = 2
    sample_nodes: int = 16
    seed: int = 0
    radius: float = 2.0


def mean_constant(phi: FourierCocycle) -> float:
    """
    Integrating the equation against Lebesgue measure forces c = ∫φ, the Fourier mean.
    """
    return phi.mean


def periodic_obstruction(
    phi: FourierCocycle, A: HyperbolicAutomorphism, max_period: int
) -> List[ObstructionWitness]:
    """
    Birkhoff sums of φ − c over every periodic orbit of minimal period at most ``max_period``. Orbits whose sum
    exceeds the roundoff floor by ``OBSTRUCTION_MARGIN`` are returned, largest first.
    """
    if max_period < 1:
        raise InvalidInput("max_period must be at least 1, got {}".format(max_period))
    centered = phi.centered()
    witnesses = []
    for period in range(1, max_period + 1):
        orbits = [orbit for orbit in periodic_points(A, period) if orbit.period == period]
        if not orbits:
            continue
        points = np.concatenate([orbit.as_array() for orbit in orbits])
        values = centered.evaluate_points(points).reshape(len(orbits), period)
        sums = values.sum(axis=1)
        roundoff = 1e-13 * period * max(1.0, float(np.max(np.abs(values))))
        for orbit, total in zip(orbits, sums):
            magnitude = abs(float(total))
            if magnitude > roundoff + config.OBSTRUCTION_MARGIN:
                witnesses.append(
                    ObstructionWitness(
                        kind="periodic_orbit",
                        payload=orbit,
                        value=float(total),
                        magnitude=magnitude,
                        certified_floor=magnitude - roundoff,
                    )
                )
    witnesses.sort(key=lambda witness: (-witness.magnitude, witness.payload.period))
    logger.debug("periodic obstruction up to period %d: %d witnesses", max_period, len(witnesses))
    return witnesses


def _path_values(
    phi: FourierCocycle, A: HyperbolicAutomorphism, starts: FloatArray, s: FloatArray, t: FloatArray, tol: float
) -> Tuple[FloatArray, float]:
    """
    −PCF of the two-leg paths start → start + s·v_u → start + s·v_u − t·v_s, for many paths at once.
    """
    unstable = pcf_batch(phi, A, "unstable", starts, s, tol / 2.0)
    corners = wrap_array(starts + s[:, None] * A.direction("unstable")[None, :])
    stable = pcf_batch(phi, A, "stable", corners, -t, tol / 2.0)
    return -(unstable.values + stable.values), unstable.error_bound + stable.error_bound


def solve_via_su_paths(
    phi: FourierCocycle,
    A: HyperbolicAutomorphism,
    anchor: TorusPoint,
    grid_n: int,
    tol: float,
    radius: Optional[float] = None,
) -> TransferSolution:
    """
    Fill Φ on the ``grid_n × grid_n`` grid by lifting the shortest su-path from ``anchor`` to every node.

    :param tol: PCF error allowed per node
    :raises BudgetExceeded: If a path needs more series terms than the configured budget
    """
    if grid_n < 4:
        raise InvalidInput("grid_n must be at least 4, got {}".format(grid_n))
    if tol <= 0:
        raise InvalidInput("tolerance must be positive, got {}".format(tol))
    radius = config.BRACKET_RADIUS if radius is None else radius
    centered = phi.centered()

    axis = np.arange(grid_n) / grid_n
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    targets = np.column_stack([x1.ravel(), x2.ravel()])
    starts = np.broadcast_to(anchor.lift(), targets.shape).copy()
    s, t = bracket_displacements(A, starts, targets, radius)

    values, error = _path_values(centered, A, starts, s, t, tol)
    values = values.reshape(grid_n, grid_n)
    logger.info("solved Φ on a %dx%d grid, PCF error bound %.3e", grid_n, grid_n, error)
    return TransferSolution(
        grid_n=grid_n,
        values=values,
        pcf_errors=np.full((grid_n, grid_n), error),
        c=mean_constant(phi),
        anchor=anchor,
        tol=tol,
    )


def residual(
    phi: FourierCocycle, A: HyperbolicAutomorphism, sol: TransferSolution, at: ResidualPoints = "centers"
) -> float:
    """
    sup |φ(p) − Φ̃(Ap) + Φ̃(p) − c| with Φ̃ the bilinear interpolant of the grid values.

    An integer matrix maps grid nodes to grid nodes, so at ``"nodes"`` the residual only sees PCF errors; the
    default evaluates at cell centres where the interpolation error shows up at order grid_n^{-2}.
    """
    points = sol.nodes()
    if at == "centers":
        points = points + 0.5 / sol.grid_n
    images = A.apply_points(points)
    defect = phi.evaluate_points(points) - sol.interpolate(images) + sol.interpolate(points) - sol.c
    return float(np.max(np.abs(defect)))


def residual_bound(psi: FourierCocycle, sol: TransferSolution) -> float:
    """
    Error bound for :func:`residual` when φ is the coboundary of ``psi``: two bilinear interpolation errors
    (h²/8)·‖D²Ψ‖ plus two PCF errors.
    """
    h = 1.0 / sol.grid_n
    return 2.0 * h * h / 8.0 * c2_bound(psi) + 2.0 * float(np.max(sol.pcf_errors))


def _alternate_paths(
    A: HyperbolicAutomorphism, anchor: TorusPoint, target: TorusPoint, n_alternates: int, radius: float, rng: np.random.Generator
) -> List[SuPath]:
    translates = bracket_candidates(A, anchor, target, radius)
    paths = []
    for rank in range(1, n_alternates + 1):
        if rank < len(translates):
            paths.append(SuPath(legs=translates[rank].legs, anchor=anchor))
        detour = wrap(rng.random(2))
        paths.append(su_path(A, anchor, detour, radius).concat(su_path(A, detour, target, radius)))
    return paths


def consistency_check(
    phi: FourierCocycle,
    A: HyperbolicAutomorphism,
    sol: TransferSolution,
    n_alternates: int,
    seed: int,
    sample_nodes: int = 16,
    radius: Optional[float] = None,
) -> ConsistencyReport:
    """
    Recompute Φ on a pseudorandom sample of nodes along alternate su-paths: other lattice translates of the
    bracket and detours through random intermediate points. The spread of the recomputed values at a node is at
    least the largest |PCF| over the cycles "primary path, then alternate path backwards".
    """
    if n_alternates < 1:
        raise InvalidInput("n_alternates must be at least 1, got {}".format(n_alternates))
    radius = config.BRACKET_RADIUS if radius is None else radius
    rng = make_rng(seed)
    centered = phi.centered()
    count = min(sample_nodes, sol.grid_n * sol.grid_n)
    flat = rng.choice(sol.grid_n * sol.grid_n, size=count, replace=False)

    nodes, node_spreads, node_bounds = [], [], []
    cycles, cycle_values, cycle_errors = [], [], []
    for index in sorted(int(k) for k in flat):
        i, j = divmod(index, sol.grid_n)
        target = sol.node(i, j)
        primary_path = su_path(A, sol.anchor, target, radius)
        primary = float(sol.values[i, j])
        primary_error = float(sol.pcf_errors[i, j])
        estimates = [(primary, primary_error)]
        for path in _alternate_paths(A, sol.anchor, target, n_alternates, radius, rng):
            pcf = pcf_path(centered, A, path, sol.tol)
            estimates.append((-pcf.value, pcf.error_bound))
            cycles.append(AccessibleCycle(path=primary_path.concat(path.reversed())))
            cycle_values.append(primary + pcf.value)
            cycle_errors.append(primary_error + pcf.error_bound)
        highest = max(estimates, key=lambda estimate: estimate[0])
        lowest = min(estimates, key=lambda estimate: estimate[0])
        nodes.append((i, j))
        node_spreads.append(highest[0] - lowest[0])
        node_bounds.append(highest[1] + lowest[1])

    worst = int(np.argmax(node_spreads)) if node_spreads else None
    spread = 0.0 if worst is None else node_spreads[worst]
    error_bound = max(node_bounds, default=float(np.max(sol.pcf_errors)))
    logger.info("consistency spread %.3e over %d nodes", spread, len(nodes))
    return ConsistencyReport(
        spread=spread,
        error_bound=error_bound,
        nodes=tuple(nodes),
        node_spreads=tuple(node_spreads),
        node_bounds=tuple(node_bounds),
        cycles=tuple(cycles),
        cycle_values=tuple(cycle_values),
        cycle_errors=tuple(cycle_errors),
    )


def averaged_increment(
    phi: FourierCocycle,
    A: HyperbolicAutomorphism,
    x0: TorusPoint,
    x1: TorusPoint,
    n_repeats: int,
    tol: float,
    radius: Optional[float] = None,
) -> AveragedIncrement:
    """
    Estimate Φ(x1) − Φ(x0) by averaging over repeated path maps.

    With w the su displacement from x0 to x1, the i-th path map translates by i·w and picks up the fiber
    increment β_i. Then Φ(x1) − Φ(x0) = (Φ(x_{i+1}) − Φ(x_i)) + β_i(x0) − β_i(x1) with x_i = x0 + i·w, and summing
    over i = 1..n leaves (Φ(x_{n+1}) − Φ(x_1))/n as the only difference between the direct and averaged estimates.
    """
    if n_repeats < 1:
        raise InvalidInput("n_repeats must be at least 1, got {}".format(n_repeats))
    radius = config.BRACKET_RADIUS if radius is None else radius
    centered = phi.centered()
    best = bracket_candidates(A, x0, x1, radius)[0]
    s, t = best.legs[0].displacement, -best.legs[1].displacement

    def increment(start: TorusPoint, repeat: int) -> Tuple[float, float]:
        path = path_through(A, start, [("unstable", repeat * s), ("stable", -repeat * t)])
        pcf = pcf_path(centered, A, path, tol)
        return -pcf.value, pcf.error_bound

    direct, direct_error = increment(x0, 1)
    differences = []
    error = 0.0
    for repeat in range(1, n_repeats + 1):
        at_x0, error_x0 = increment(x0, repeat)
        at_x1, error_x1 = increment(x1, repeat)
        differences.append(at_x0 - at_x1)
        error = max(error, error_x0 + error_x1)
    averaged = float(np.mean(differences))
    return AveragedIncrement(
        direct=direct,
        averaged=averaged,
        boundary_term=direct - averaged,
        n_repeats=n_repeats,
        error_bound=direct_error + error,
    )


def classify(
    phi: FourierCocycle, A: HyperbolicAutomorphism, classify_config: Optional[ClassifyConfig] = None
) -> Result[TransferSolution, ObstructionWitness]:
    """
    ``Success(solution)`` when no obstruction is found at the tested scale, ``Failure(witness)`` otherwise.

    Periodic orbits are tested first (the smallest period wins); then Φ is solved and the path-consistency spread
    must stay within its certified error floor plus ``OBSTRUCTION_MARGIN``.
    """
    settings = classify_config or ClassifyConfig()
    witnesses = periodic_obstruction(phi, A, settings.max_period)
    if witnesses:
        return Failure(min(witnesses, key=lambda witness: (witness.payload.period, -witness.magnitude)))

    sol = solve_via_su_paths(phi, A, settings.anchor, settings.grid_n, settings.tol, settings.radius)
    report = consistency_check(phi, A, sol, settings.n_alternates, settings.seed, settings.sample_nodes, settings.radius)
    worst = report.worst_index
    if report.spread - report.error_bound > config.OBSTRUCTION_MARGIN and worst is not None:
        value = report.cycle_values[worst]
        return Failure(
            ObstructionWitness(
                kind="accessible_cycle",
                payload=report.cycles[worst],
                value=value,
                magnitude=abs(value),
                certified_floor=abs(value) - report.cycle_errors[worst],
            )
        )
    return Success(sol.evolve_self(residual_sup=residual(phi, A, sol), consistency_spread=report.spread))


def sup_deviation(sol: TransferSolution, exact: FourierCocycle) -> float:
    """
    sup over the grid of |Φ − (Ψ − Ψ(anchor))|.
    """
    reference = exact.evaluate_points(sol.nodes()) - exact.evaluate_points(sol.anchor.lift()[None, :])[0]
    return float(np.max(np.abs(sol.values.ravel() - reference)))


def grid_rows(sol: TransferSolution) -> List[Tuple[int, int, float, float, float, float]]:
    rows = []
    for i in range(sol.grid_n):
        for j in range(sol.grid_n):
            rows.append((i, j, i / sol.grid_n, j / sol.grid_n, float(sol.values[i, j]), float(sol.pcf_errors[i, j])))
    return rows
