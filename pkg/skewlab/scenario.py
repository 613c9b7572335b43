"""
Experiment scenarios: sectioned ``key = value`` files read with :mod:`configparser` and validated by pydantic.

Every section is optional and falls back to its defaults; unknown sections and unknown keys are errors. Tuple
values are written space separated and cocycles use the ``k1 k2 a b`` literal, one mode per line::

    [system]
    matrix = 2 1 1 1

    [cocycle]
    modes =
        1 0 1.0 0.0
    mean = 0.0

    [run]
    seed = 7
"""
import configparser
import math
import typing
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from skewlab.cocycle import FourierCocycle, coboundary_of, format_cocycle, parse_cocycle
from skewlab.exceptions import InvalidInput, ScenarioError
from skewlab.jets import FamilyName
from skewlab.skew import BunchingRates, FiberKind
from skewlab.torus import HyperbolicAutomorphism, LegKind, TorusPoint, eigen_frame


class Section(BaseModel):
    """
    Base of the scenario sections: frozen, strict about unknown keys, and able to read tuples written as
    space or comma separated text.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    @model_validator(mode="before")
    @classmethod
    def _split_sequences(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        parsed = dict(data)
        for name, value in data.items():
            field = cls.model_fields.get(name)
            if field is not None and isinstance(value, str) and _is_tuple(field.annotation):
                parsed[name] = tuple(value.replace(",", " ").split())
        return parsed

    def to_entries(self) -> Dict[str, str]:
        entries = {}
        for name, value in self.model_dump().items():
            if value is None:
                continue
            if isinstance(value, (tuple, list)):
                entries[name] = " ".join(_format_scalar(item) for item in value)
            else:
                entries[name] = _format_scalar(value)
        return entries


def _is_tuple(annotation: Any) -> bool:
    if typing.get_origin(annotation) is Union:
        return any(_is_tuple(arg) for arg in typing.get_args(annotation))
    return typing.get_origin(annotation) is tuple


def _format_scalar(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class SystemSection(Section):
    matrix: Tuple[int, int, int, int] = (2, 1, 1, 1)
    fiber: FiberKind = "circle"


class CocycleSection(Section):
    """
    ``modes`` holds the literal mode lines; ``mean`` is the constant term.
    """

    modes: str = ""
    mean: float = 0.0

    @field_validator("modes", mode="before")
    @classmethod
    def _normalize_lines(cls, value: Any) -> Any:
        if isinstance(value, str):
            return "\n".join(line.strip() for line in value.splitlines() if line.strip())
        return value

    @model_validator(mode="after")
    def _parses(self) -> "CocycleSection":
        self.cocycle()
        return self

    def cocycle(self) -> FourierCocycle:
        return parse_cocycle(self.modes.splitlines() + ["mean {!r}".format(self.mean)])

    def to_entries(self) -> Dict[str, str]:
        return {"modes": "\n" + self.modes if self.modes else "", "mean": repr(self.mean)}

    @classmethod
    def from_cocycle(cls, phi: FourierCocycle) -> "CocycleSection":
        return cls(modes="\n".join(line for line in format_cocycle(phi) if not line.startswith("mean")), mean=phi.mean)


class SolverSection(Section):
    grid_n: int = 32
    tol: float = 1e-7
    anchor: Tuple[float, float] = (0.0, 0.0)
    max_period: int = 6
    n_alternates: int = 2
    sample_nodes: int = 16
    radius: float = 2.0

    @field_validator("anchor")
    @classmethod
    def _anchor_on_torus(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not all(math.isfinite(x) and 0.0 <= x < 1.0 for x in value):
            raise ValueError("anchor coordinates must lie in [0, 1), got {}".format(value))
        return value


class PcfSection(Section):
    """
    Either a cycle ``cycle = a b`` (the quad cycle with those leg lengths) or a path given as ``legs`` of
    ``unstable``/``stable`` displacement pairs, starting at ``start``.
    """

    start: Tuple[float, float] = (0.0, 0.0)
    legs: Tuple[str, ...] = ()
    cycle: Optional[Tuple[float, float]] = None
    tol: float = 1e-10

    @field_validator("start")
    @classmethod
    def _finite_start(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not all(math.isfinite(x) for x in value):
            raise ValueError("start must be finite, got {}".format(value))
        return value

    def leg_list(self) -> List[Tuple[LegKind, float]]:
        if len(self.legs) % 2:
            raise ScenarioError("legs must come in kind/displacement pairs, got {}".format(self.legs))
        legs: List[Tuple[LegKind, float]] = []
        for kind, displacement in zip(self.legs[::2], self.legs[1::2]):
            if kind not in ("stable", "unstable"):
                raise ScenarioError("unknown leg kind {!r}".format(kind))
            try:
                legs.append((kind, float(displacement)))  # type: ignore[arg-type]
            except ValueError as err:
                raise ScenarioError("leg displacement {!r} is not a number".format(displacement)) from err
        return legs


class BunchingSection(Section):
    orders: Tuple[float, ...] = (1.0, 2.0, 5.0)
    rates: Optional[Tuple[float, float, float, float]] = None

    def bunching_rates(self) -> Optional[BunchingRates]:
        if self.rates is None:
            return None
        nu, nu_hat, gamma, gamma_hat = self.rates
        return BunchingRates(nu=nu, nu_hat=nu_hat, gamma=gamma, gamma_hat=gamma_hat)


RegularityMode = Literal["journe", "expansion", "holder"]
FixtureName = Literal["abs_power", "weierstrass", "linear", "polynomial", "smooth"]


class RegularitySection(Section):
    mode: RegularityMode = "expansion"
    fixture: FixtureName = "abs_power"
    exponent: float = 2.5
    order: int = 2
    alpha: float = 0.5
    center: Tuple[float, float] = (0.0, 0.0)
    radius: float = 0.5
    fit: Literal["lstsq", "minimax"] = "lstsq"
    r: float = 0.5
    epsilon: float = 0.0
    m_min: int = 2
    m_max: int = 40
    dim: int = 1
    pair_budget: int = 4000
    samples: Optional[str] = None


class JetsSection(Section):
    family: FamilyName = "diagonal"
    order: int = 2
    samples: int = 200
    L: Optional[float] = None


class RunSection(Section):
    seed: int = 0
    out: str = "out"


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    system: SystemSection = SystemSection()
    cocycle: Optional[CocycleSection] = None
    coboundary: Optional[CocycleSection] = None
    solver: SolverSection = SolverSection()
    pcf: PcfSection = PcfSection()
    bunching: BunchingSection = BunchingSection()
    regularity: RegularitySection = RegularitySection()
    jets: JetsSection = JetsSection()
    run: RunSection = RunSection()

    @model_validator(mode="after")
    def _positive_tolerances(self) -> "Scenario":
        for name, value in (("solver.tol", self.solver.tol), ("pcf.tol", self.pcf.tol)):
            if not value > 0:
                raise ValueError("{} must be positive, got {}".format(name, value))
        if self.cocycle is not None and self.coboundary is not None:
            raise ValueError("give either [cocycle] or [coboundary], not both")
        return self

    def automorphism(self) -> HyperbolicAutomorphism:
        a, b, c, d = self.system.matrix
        return eigen_frame(((a, b), (c, d)))

    def anchor(self) -> TorusPoint:
        return TorusPoint(x1=self.solver.anchor[0], x2=self.solver.anchor[1])

    def phi(self, A: Optional[HyperbolicAutomorphism] = None) -> FourierCocycle:
        """
        The cocycle of the scenario; a ``[coboundary]`` section gives Ψ∘A − Ψ + mean.

        :raises ScenarioError: If neither section is present
        """
        if self.cocycle is not None:
            return self.cocycle.cocycle()
        if self.coboundary is not None:
            A = A or self.automorphism()
            return coboundary_of(self.coboundary.cocycle().evolve_self(mean=0.0), A) + FourierCocycle.constant(
                self.coboundary.mean
            )
        raise ScenarioError("the scenario defines no cocycle: add a [cocycle] or [coboundary] section")

    def exact_transfer(self) -> Optional[FourierCocycle]:
        return None if self.coboundary is None else self.coboundary.cocycle().evolve_self(mean=0.0)


SECTION_ORDER = ("system", "cocycle", "coboundary", "solver", "pcf", "bunching", "regularity", "jets", "run")


def parse_scenario(text: str) -> Scenario:
    """
    :raises ScenarioError: On syntax errors, unknown sections or keys, and invalid values
    """
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ScenarioError("malformed scenario: {}".format(err)) from err
    unknown = [name for name in parser.sections() if name not in SECTION_ORDER]
    if unknown:
        raise ScenarioError("unknown scenario sections: {}".format(", ".join(unknown)))
    try:
        return Scenario(**{name: dict(parser.items(name)) for name in parser.sections()})
    except ValidationError as err:
        raise ScenarioError("invalid scenario: {}".format(err)) from err
    except InvalidInput as err:
        raise ScenarioError(str(err)) from err


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ScenarioError("cannot read scenario {}: {}".format(path, err)) from err
    return parse_scenario(text)


def format_scenario(scenario: Scenario) -> str:
    """
    The text form of ``scenario``; ``parse_scenario(format_scenario(s)) == s``.
    """
    blocks = []
    for name in SECTION_ORDER:
        section = getattr(scenario, name)
        if section is None:
            continue
        lines = ["[{}]".format(name)]
        for key, value in section.to_entries().items():
            if "\n" in value:
                lines.append("{} = {}".format(key, value.replace("\n", "\n    ")))
            else:
                lines.append("{} = {}".format(key, value))
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def with_overrides(
    scenario: Scenario, seed: Optional[int] = None, grid: Optional[int] = None, tol: Optional[float] = None, out: Optional[str] = None
) -> Scenario:
    """
    Apply command line overrides.

    :raises ScenarioError: If an override is invalid
    """
    solver = scenario.solver.model_dump()
    run = scenario.run.model_dump()
    pcf = scenario.pcf.model_dump()
    if seed is not None:
        run["seed"] = seed
    if out is not None:
        run["out"] = out
    if grid is not None:
        solver["grid_n"] = grid
    if tol is not None:
        solver["tol"] = tol
        pcf["tol"] = tol
    try:
        return Scenario(**{**scenario.model_dump(), "solver": solver, "run": run, "pcf": pcf})
    except ValidationError as err:
        raise ScenarioError("invalid override: {}".format(err)) from err
