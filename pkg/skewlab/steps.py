"""
Pipeline steps behind the command line: every subcommand is a chain of :class:`~skewlab.pipeline.TypedStep`
objects passing a :class:`~skewlab.entities.Ledger` along.
"""
import csv
import logging
import math
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from returns import pipeline as returns_pipeline
from returns.result import Result
from typing_extensions import Annotated

from skewlab import reports
from skewlab.cocycle import FourierCocycle, birkhoff_sum
from skewlab.entities import ImmutableEvolvableModel
from skewlab.exceptions import InvalidInput, ScenarioError
from skewlab.helpers import make_rng
from skewlab.jets import h1_cross_check, jet_family, random_jet, search_scale, verify_fiber_contraction
from skewlab.journe import PlaquePair, cone_agreement, journe_limit_poly, swapped_cone_limit
from skewlab.pcf import PcfValue, pcf_path
from skewlab.pipeline import StepT, TypedStep
from skewlab.regularity import expansion_fit, holder_from_callable, holder_from_grid, holder_from_pairs, sample_disc
from skewlab.scenario import Scenario, load_scenario, with_overrides
from skewlab.skew import (
    BunchingRates,
    BunchingReport,
    SkewSystem,
    check_center_bunched,
    check_partial_hyperbolicity,
    check_strong_r_bunched,
    rates,
)
from skewlab.torus import HyperbolicAutomorphism, TorusPoint, path_through, periodic_points, quad_cycle
from skewlab.transfer import ClassifyConfig, ObstructionWitness, TransferSolution, classify, sup_deviation
from skewlab.types import FloatArray

logger = logging.getLogger(__name__)


class Outcome(ImmutableEvolvableModel):
    exit_code: int
    written: Tuple[str, ...]
    summary: Tuple[str, ...]


def _weierstrass(points: FloatArray) -> FloatArray:
    x = np.atleast_2d(points)[:, 0]
    n = np.arange(1, 21)
    return np.sum(2.0 ** -n[None, :] * np.cos(2.0 * math.pi * 3.0 ** n[None, :] * x[:, None]), axis=1)


def fixture_function(name: str, exponent: float = 2.5) -> Callable[[FloatArray], FloatArray]:
    """
    Builtin test functions of (N, d) point arrays. ``polynomial`` and ``smooth`` use the second coordinate
    when there is one.
    """

    def second(points: FloatArray) -> FloatArray:
        return points[:, 1] if points.shape[1] > 1 else np.zeros(points.shape[0])

    table: Dict[str, Callable[[FloatArray], FloatArray]] = {
        "abs_power": lambda p: np.abs(p[:, 0]) ** exponent,
        "weierstrass": _weierstrass,
        "linear": lambda p: p[:, 0].copy(),
        "polynomial": lambda p: p[:, 0] ** 2 * second(p) + second(p) ** 3,
        "smooth": lambda p: np.sin(2.0 * math.pi * p[:, 0]) + 0.5 * np.cos(2.0 * math.pi * second(p)),
    }
    if name not in table:
        raise InvalidInput("unknown regularity fixture {!r}".format(name))
    fn = table[name]
    return lambda points: fn(np.atleast_2d(np.asarray(points, dtype=float)))


class LoadScenario(TypedStep):
    def __call__(
        self,
        scenario_path: Optional[str] = None,
        seed: Optional[int] = None,
        grid: Optional[int] = None,
        tol: Optional[float] = None,
        out: Optional[str] = None,
    ) -> Annotated[Scenario, "scenario"]:
        scenario = Scenario() if scenario_path is None else load_scenario(scenario_path)
        return with_overrides(scenario, seed=seed, grid=grid, tol=tol, out=out)


class BuildAutomorphism(TypedStep):
    def __call__(self, scenario: Scenario) -> Annotated[HyperbolicAutomorphism, "automorphism"]:
        return scenario.automorphism()


class BuildCocycle(TypedStep):
    def __call__(self, scenario: Scenario, automorphism: HyperbolicAutomorphism) -> Annotated[FourierCocycle, "phi"]:
        return scenario.phi(automorphism)


class ComputePcf(TypedStep):
    """
    PCF of the quad cycle or of the leg list of the ``[pcf]`` section.
    """

    def __call__(
        self, scenario: Scenario, automorphism: HyperbolicAutomorphism, phi: FourierCocycle
    ) -> Annotated[Tuple[PcfValue, str], "pcf"]:
        section = scenario.pcf
        start = TorusPoint(x1=section.start[0] % 1.0, x2=section.start[1] % 1.0)
        if section.cycle is not None:
            a, b = section.cycle
            path = quad_cycle(automorphism, start, a, b).path
            description = "quad cycle a={!r} b={!r} at {}".format(a, b, start.as_tuple())
        else:
            legs = section.leg_list()
            if not legs:
                raise ScenarioError("the [pcf] section needs either cycle or legs")
            path = path_through(automorphism, start, legs)
            description = " ".join("{}:{!r}".format(kind, displacement) for kind, displacement in legs)
        return pcf_path(phi, automorphism, path, section.tol), description


class WritePcfReport(TypedStep):
    def __call__(self, scenario: Scenario, pcf: Tuple[PcfValue, str]) -> Annotated[Outcome, "outcome"]:
        value, description = pcf
        path = reports.write(scenario.run.out, "pcf.json", reports.json_text(reports.pcf_payload(value, description)))
        summary = "PCF {!r} ± {!r} ({} terms)".format(value.value, value.error_bound, value.terms_used)
        return Outcome(exit_code=0, written=(str(path),), summary=(summary,))


class ClassifyCocycle(TypedStep):
    def __call__(
        self, scenario: Scenario, automorphism: HyperbolicAutomorphism, phi: FourierCocycle
    ) -> Annotated[Result[TransferSolution, ObstructionWitness], "classification"]:
        solver = scenario.solver
        settings = ClassifyConfig(
            anchor=scenario.anchor(),
            grid_n=solver.grid_n,
            tol=solver.tol,
            max_period=solver.max_period,
            n_alternates=solver.n_alternates,
            sample_nodes=solver.sample_nodes,
            seed=scenario.run.seed,
            radius=solver.radius,
        )
        return classify(phi, automorphism, settings)


class WriteSolveReports(TypedStep):
    """
    Grid CSV and classification JSON; the Hölder estimate of the computed Φ and, for ``[coboundary]`` scenarios,
    the deviation from the exact transfer function are added to the report.
    """

    def __call__(
        self, scenario: Scenario, classification: Result[TransferSolution, ObstructionWitness]
    ) -> Annotated[Outcome, "outcome"]:
        out = scenario.run.out
        if not returns_pipeline.is_successful(classification):
            witness = classification.failure()
            payload = reports.classification_payload(classification)
            path = reports.write(out, "classification.json", reports.json_text(payload))
            summary = "Obstructed: {} witness, value {!r}".format(witness.kind, witness.value)
            return Outcome(exit_code=1, written=(str(path),), summary=(summary,))

        sol = classification.unwrap()
        holder = holder_from_grid(sol.values, seed=scenario.run.seed) if sol.grid_n >= 8 else None
        exact = scenario.exact_transfer()
        deviation = sup_deviation(sol, exact) if exact is not None else None
        payload = reports.classification_payload(classification, holder, deviation)
        written = (
            reports.write(out, "grid.csv", reports.grid_csv(sol)),
            reports.write(out, "classification.json", reports.json_text(payload)),
        )
        summary = "Coboundary: c = {!r}, residual {!r}, spread {!r}".format(sol.c, sol.residual_sup, sol.consistency_spread)
        return Outcome(exit_code=0, written=tuple(str(p) for p in written), summary=(summary,))


class BunchingTable(TypedStep):
    """
    Partial hyperbolicity, center bunching and strong r-bunching for each order; rates come from the
    ``[bunching]`` section or from the base automorphism with a translation fiber action.
    """

    def __call__(self, scenario: Scenario, automorphism: HyperbolicAutomorphism) -> Annotated[List[BunchingReport], "bunching"]:
        given = scenario.bunching.bunching_rates()
        r: BunchingRates = given if given is not None else rates(SkewSystem(base=automorphism, cocycle=FourierCocycle()))
        table = [check_partial_hyperbolicity(r)]
        if scenario.bunching.orders:
            table.append(check_center_bunched(r))
        table.extend(check_strong_r_bunched(r, order) for order in scenario.bunching.orders)
        return table


class WriteBunchingReport(TypedStep):
    def __call__(self, scenario: Scenario, bunching: List[BunchingReport]) -> Annotated[Outcome, "outcome"]:
        path = reports.write(scenario.run.out, "bunching.csv", reports.bunching_csv(bunching))
        summary = tuple("{} r={:g}: {}".format(report.kind, report.order, report.holds) for report in bunching)
        return Outcome(exit_code=0, written=(str(path),), summary=summary)


def _read_pairs(path: str) -> Tuple[FloatArray, FloatArray]:
    try:
        with open(path, newline="", encoding="utf-8") as stream:
            rows = list(csv.DictReader(stream))
        return np.array([float(row["pair_dist"]) for row in rows]), np.array([float(row["delta"]) for row in rows])
    except (OSError, KeyError, ValueError) as err:
        raise InvalidInput("cannot read pair samples from {}: {}".format(path, err)) from err


class RunRegularity(TypedStep):
    """
    ``journe`` runs the limit polynomial on both cones, ``expansion`` fits at ``center`` and ``holder``
    estimates the exponent of a fixture or of a ``pair_dist,delta`` samples file.
    """

    def __call__(self, scenario: Scenario) -> Annotated[Outcome, "outcome"]:
        section = scenario.regularity
        out = scenario.run.out
        fn = fixture_function(section.fixture, section.exponent)

        if section.mode == "journe":
            plaques = PlaquePair.bent(section.epsilon) if section.epsilon else PlaquePair.flat()
            m_range = (section.m_min, section.m_max)
            report = journe_limit_poly(fn, plaques, section.order, section.alpha, section.r, None, m_range)
            other = swapped_cone_limit(fn, plaques, section.order, section.alpha, section.r, m_range)
            agreement = cone_agreement(report.polynomial, other.polynomial, report.grids[-1].R)
            written = (
                reports.write(out, "journe.csv", reports.csv_text(reports.JOURNE_HEADER, reports.journe_rows(report))),
                reports.write(out, "regularity.json", reports.json_text(reports.journe_payload(report, agreement))),
            )
            summary = "limit polynomial: {}, max ratio {!r}".format(report.verdict, report.max_ratio)
            code = 0 if report.verdict == "admits" else 1
        elif section.mode == "expansion":
            points, values = sample_disc(fn, section.center, section.radius)
            fit = expansion_fit(points, values, section.center, section.order, section.alpha, section.fit)
            written = (reports.write(out, "regularity.json", reports.json_text(reports.expansion_payload(fit))),)
            summary = "({}, {!r})-expansion: {}, C = {!r}".format(fit.order, fit.alpha, fit.verdict, fit.C)
            code = 0 if fit.verdict == "admits" else 1
        else:
            if section.samples is not None:
                estimate = holder_from_pairs(*_read_pairs(section.samples))
            else:
                estimate = holder_from_callable(fn, section.dim, section.pair_budget, scenario.run.seed)
            payload = {"mode": "holder", **reports.holder_payload(estimate)}
            written = (
                reports.write(out, "holder_pairs.csv", reports.pairs_csv(estimate)),
                reports.write(out, "regularity.json", reports.json_text(payload)),
            )
            summary = "Hölder exponent {!r} (r² {!r})".format(estimate.alpha, estimate.r_squared)
            code = 1 if estimate.flagged else 0
        return Outcome(exit_code=code, written=tuple(str(p) for p in written), summary=(summary,))


class RunJets(TypedStep):
    """
    Fiber contraction of the chosen family at the configured L (or the smallest working power of ten) and the
    largest gap between the explicit first-order transform and the composed one over random jets.
    """

    def __call__(self, scenario: Scenario) -> Annotated[Outcome, "outcome"]:
        section = scenario.jets
        seed = scenario.run.seed
        family = jet_family(section.family, section.order)
        if section.L is not None:
            report = verify_fiber_contraction(family.H, family.kappa, family.epsilon, section.L, section.samples, seed, order=section.order)
        else:
            report = search_scale(family.H, family.kappa, family.epsilon, section.samples, seed, order=section.order)
        rng = make_rng(seed)
        gaps = []
        for _ in range(section.samples):
            psi = random_jet(1, 1, 1, rng, scale=0.5, center=rng.uniform(-0.05, 0.05, size=1))
            gaps.append(h1_cross_check(family.H, psi))
        payload = reports.jets_payload(family.name, report, max(gaps) if gaps else 0.0)
        path = reports.write(scenario.run.out, "jets.json", reports.json_text(payload))
        summary = "{} at L={!r}: max ratio {!r} (κ = {!r}), hypotheses {}".format(
            family.name, report.L, report.max_ratio, report.kappa, "hold" if report.hypotheses_hold else "violated"
        )
        return Outcome(exit_code=0 if report.holds else 1, written=(str(path),), summary=(summary,))


class ListPeriodicOrbits(TypedStep):
    """
    Periodic orbits of minimal period up to ``solver.max_period`` with the Birkhoff sums of φ − c over them; the
    zero cocycle is used when the scenario has none.
    """

    def __call__(self, scenario: Scenario, automorphism: HyperbolicAutomorphism) -> Annotated[Outcome, "outcome"]:
        has_cocycle = scenario.cocycle is not None or scenario.coboundary is not None
        phi = scenario.phi(automorphism).centered() if has_cocycle else FourierCocycle()
        rows: List[Tuple[Any, ...]] = []
        for period in range(1, scenario.solver.max_period + 1):
            for orbit in periodic_points(automorphism, period):
                if orbit.period != period:
                    continue
                start = orbit.start
                total = birkhoff_sum(phi, automorphism, start, period)
                n1, n2 = orbit.numerators[0]
                rows.append((period, orbit.denominator, n1, n2, start.x1, start.x2, total))
        path = reports.write(scenario.run.out, "periodic.csv", reports.periodic_csv(rows))
        return Outcome(exit_code=0, written=(str(path),), summary=("{} periodic orbits".format(len(rows)),))


def command_pipeline(command: str) -> StepT:
    """
    :raises InvalidInput: For an unknown subcommand
    """
    load = LoadScenario()
    if command == "pcf":
        return load >> BuildAutomorphism() >> BuildCocycle() >> ComputePcf() >> WritePcfReport()
    if command == "solve":
        return load >> BuildAutomorphism() >> BuildCocycle() >> ClassifyCocycle() >> WriteSolveReports()
    if command == "bunching":
        return load >> BuildAutomorphism() >> BunchingTable() >> WriteBunchingReport()
    if command == "regularity":
        return load >> RunRegularity()
    if command == "jets":
        return load >> RunJets()
    if command == "periodic":
        return load >> BuildAutomorphism() >> ListPeriodicOrbits()
    raise InvalidInput("unknown command {!r}".format(command))
