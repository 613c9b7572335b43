import math
from pathlib import Path
from typing import Callable, Tuple, Type

import mpmath
import numpy as np
import pytest
from typing_extensions import Annotated

from skewlab import config
from skewlab.cocycle import FourierCocycle, coboundary_of
from skewlab.pipeline import TypedStep
from skewlab.torus import CAT_MAP, HyperbolicAutomorphism, LegKind, SuLeg, TorusPoint, eigen_frame


@pytest.fixture
def with_verbose_errors():
    current_mode = config.VERBOSE_ERRORS
    config.VERBOSE_ERRORS = True
    yield
    config.VERBOSE_ERRORS = current_mode


@pytest.fixture
def with_config():
    """
    Temporarily override config values: ``with_config(LEAF_SAMPLES=256)``.
    """
    saved = {}

    def override(**values):
        for key, value in values.items():
            saved.setdefault(key, getattr(config, key))
            setattr(config, key, value)

    yield override
    for key, value in saved.items():
        setattr(config, key, value)


@pytest.fixture
def cat() -> HyperbolicAutomorphism:
    return eigen_frame(CAT_MAP)


@pytest.fixture
def psi() -> FourierCocycle:
    return FourierCocycle.create([(1, 0, 0.3, 0.0), (1, 1, 0.0, 0.2), (0, 2, 0.05, 0.1)])


@pytest.fixture
def coboundary(psi, cat) -> FourierCocycle:
    return coboundary_of(psi, cat)


@pytest.fixture
def obstructed() -> FourierCocycle:
    return FourierCocycle.cosine(1, 0)


@pytest.fixture
def scenario_file(tmp_path) -> Callable[[str], str]:
    def write(text: str, name: str = "scenario.ini") -> str:
        path = Path(tmp_path) / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def double_typed_step_cls() -> Type[TypedStep]:
    class Double(TypedStep):
        def __call__(self, x: int) -> Annotated[int, "double"]:
            return x * 2

    return Double


@pytest.fixture
def double_typed_step(double_typed_step_cls) -> TypedStep:
    return double_typed_step_cls()


@pytest.fixture
def random_cocycle() -> Callable[..., FourierCocycle]:
    """
    Random trigonometric polynomial with ``n_modes`` modes of index at most ``max_index``.
    """

    def build(rng: np.random.Generator, n_modes: int = 3, max_index: int = 2) -> FourierCocycle:
        modes = []
        while len(modes) < n_modes:
            k1, k2 = (int(k) for k in rng.integers(-max_index, max_index + 1, size=2))
            if (k1, k2) != (0, 0):
                a, b = rng.uniform(-1.0, 1.0, size=2)
                modes.append((k1, k2, float(a), float(b)))
        return FourierCocycle.create(modes)

    return build


def _exact_direction(A: HyperbolicAutomorphism, kind: LegKind) -> Tuple[mpmath.mpf, mpmath.mpf]:
    trace, det = A.a + A.d, A.a * A.d - A.b * A.c
    root = mpmath.sqrt(trace * trace - 4 * det)
    lambda_u = (trace + (root if trace > 0 else -root)) / 2
    eigenvalue = lambda_u if kind == "unstable" else det / lambda_u
    slope = (eigenvalue - A.a) / A.b
    norm = mpmath.sqrt(1 + slope * slope)
    return 1 / norm, slope / norm


def _long_summation(
    phi: FourierCocycle, A: HyperbolicAutomorphism, kind: LegKind, start: TorusPoint, displacement: float, terms: int
) -> float:
    with mpmath.workdps(int(terms * math.log10(A.expansion)) + 40):
        direction = _exact_direction(A, kind)
        ((a, b), (c, d)) = A.as_rows() if kind == "stable" else A.inverse_matrix.tolist()
        own = (mpmath.mpf(start.x1), mpmath.mpf(start.x2))
        partner = (own[0] + displacement * direction[0], own[1] + displacement * direction[1])

        def step(p: Tuple[mpmath.mpf, mpmath.mpf]) -> Tuple[mpmath.mpf, mpmath.mpf]:
            return mpmath.frac(a * p[0] + b * p[1]), mpmath.frac(c * p[0] + d * p[1])

        own_points, partner_points = [], []
        for _ in range(terms):
            if kind == "unstable":
                own, partner = step(own), step(partner)
            own_points.append((float(own[0]), float(own[1])))
            partner_points.append((float(partner[0]), float(partner[1])))
            if kind == "stable":
                own, partner = step(own), step(partner)

    differences = phi.evaluate_points(np.array(partner_points)) - phi.evaluate_points(np.array(own_points))
    return math.fsum(differences) if kind == "stable" else -math.fsum(differences)


@pytest.fixture
def long_sum_pcf() -> Callable[..., float]:
    """
    PCF of a leg by brute-force summation of ``terms`` terms. Both orbits are followed with mpmath at a
    working precision that absorbs their expansion.
    """

    def pcf(phi: FourierCocycle, A: HyperbolicAutomorphism, leg: SuLeg, terms: int = 10_000) -> float:
        return _long_summation(phi, A, leg.kind, leg.start, leg.displacement, terms)

    return pcf
