"""
Real-valued cocycles on T² held as finite Fourier series

    φ(x) = mean + Σ_k a_k cos(2π k·x) + b_k sin(2π k·x)

Modes are kept in the half plane k1 > 0 or (k1 = 0, k2 > 0); composition with an integer matrix relabels modes
exactly, so every bound derived here is honest.
"""
import math
from typing import Dict, Iterable, List, Mapping, Tuple, Union

import numpy as np
from pydantic import model_validator

from skewlab.entities import ImmutableEvolvableModel
from skewlab.exceptions import InvalidInput
from skewlab.torus import HyperbolicAutomorphism, TorusPoint
from skewlab.types import FloatArray

Mode = Tuple[int, int, float, float]
TORUS_DIAMETER = math.sqrt(2.0) / 2.0


def _canonical(k1: int, k2: int, a: float, b: float) -> Mode:
    if k1 > 0 or (k1 == 0 and k2 > 0):
        return k1, k2, a, b
    return -k1, -k2, a, -b


def _merge(modes: Iterable[Mode]) -> Tuple[Mode, ...]:
    merged: Dict[Tuple[int, int], List[float]] = {}
    for k1, k2, a, b in modes:
        if k1 == 0 and k2 == 0:
            raise InvalidInput("the zero mode is the mean, not a Fourier mode")
        k1, k2, a, b = _canonical(int(k1), int(k2), float(a), float(b))
        entry = merged.setdefault((k1, k2), [0.0, 0.0])
        entry[0] += a
        entry[1] += b
    return tuple(
        (k1, k2, a, b) for (k1, k2), (a, b) in sorted(merged.items()) if a != 0.0 or b != 0.0
    )


class FourierCocycle(ImmutableEvolvableModel):
    modes: Tuple[Mode, ...] = ()
    mean: float = 0.0

    @model_validator(mode="after")
    def _finite(self) -> "FourierCocycle":
        if not math.isfinite(self.mean) or any(not (math.isfinite(a) and math.isfinite(b)) for _, _, a, b in self.modes):
            raise ValueError("cocycle coefficients must be finite")
        return self

    @classmethod
    def create(cls, modes: Union[Iterable[Mode], Mapping[Tuple[int, int], Tuple[float, float]]] = (), mean: float = 0.0) -> "FourierCocycle":
        """
        Build a cocycle in canonical form; ``modes`` is either ``(k1, k2, a, b)`` rows or a mapping
        ``{(k1, k2): (a, b)}``. Opposite modes are folded together.
        """
        if isinstance(modes, Mapping):
            rows = [(k[0], k[1], ab[0], ab[1]) for k, ab in modes.items()]
        else:
            rows = list(modes)
        return cls(modes=_merge(rows), mean=float(mean))

    @classmethod
    def cosine(cls, k1: int, k2: int, amplitude: float = 1.0) -> "FourierCocycle":
        return cls.create([(k1, k2, amplitude, 0.0)])

    @classmethod
    def sine(cls, k1: int, k2: int, amplitude: float = 1.0) -> "FourierCocycle":
        return cls.create([(k1, k2, 0.0, amplitude)])

    @classmethod
    def constant(cls, mean: float) -> "FourierCocycle":
        return cls(mean=float(mean))

    @property
    def is_zero(self) -> bool:
        return not self.modes and self.mean == 0.0

    @property
    def max_mode_index(self) -> int:
        return max((max(abs(k1), abs(k2)) for k1, k2, _, _ in self.modes), default=0)

    def _arrays(self) -> Tuple[FloatArray, FloatArray, FloatArray]:
        if not self.modes:
            empty = np.zeros(0)
            return np.zeros((0, 2)), empty, empty
        table = np.array(self.modes, dtype=float)
        return table[:, :2], table[:, 2], table[:, 3]

    def evaluate_points(self, points: FloatArray) -> FloatArray:
        """
        Evaluate on an ``(N, 2)`` array of points.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        wavevectors, cos_coefficients, sin_coefficients = self._arrays()
        phases = 2.0 * np.pi * (points @ wavevectors.T)
        return self.mean + np.cos(phases) @ cos_coefficients + np.sin(phases) @ sin_coefficients

    def __call__(self, p: TorusPoint) -> float:
        return evaluate(self, p)

    def __add__(self, other: "FourierCocycle") -> "FourierCocycle":
        return FourierCocycle.create(self.modes + other.modes, mean=self.mean + other.mean)

    def __neg__(self) -> "FourierCocycle":
        return self.scale(-1.0)

    def __sub__(self, other: "FourierCocycle") -> "FourierCocycle":
        return self + (-other)

    def scale(self, factor: float) -> "FourierCocycle":
        return FourierCocycle.create([(k1, k2, factor * a, factor * b) for k1, k2, a, b in self.modes], self.mean * factor)

    def centered(self) -> "FourierCocycle":
        """
        The same cocycle with its mean removed.
        """
        return self.evolve_self(mean=0.0)


def evaluate(phi: FourierCocycle, p: TorusPoint) -> float:
    """
    φ(p) = mean + Σ a_k cos(2π k·p) + b_k sin(2π k·p)
    """
    return float(phi.evaluate_points(p.lift()[None, :])[0])


def lipschitz_bound(phi: FourierCocycle) -> float:
    """
    Σ 2π‖k‖(|a_k| + |b_k|), an upper bound for the Lipschitz constant.
    """
    return float(sum(2.0 * math.pi * math.hypot(k1, k2) * (abs(a) + abs(b)) for k1, k2, a, b in phi.modes))


class RegularityBound(ImmutableEvolvableModel):
    lipschitz: float

    def holder(self, alpha: float) -> float:
        if not 0.0 < alpha <= 1.0:
            raise InvalidInput("Hölder exponent must lie in (0, 1], got {}".format(alpha))
        return self.lipschitz * TORUS_DIAMETER ** (1.0 - alpha)


def regularity_bound(phi: FourierCocycle) -> RegularityBound:
    return RegularityBound(lipschitz=lipschitz_bound(phi))


def holder_bound(phi: FourierCocycle, alpha: float) -> float:
    """
    Hölder constant for exponent ``alpha`` from the Lipschitz bound over the torus diameter:
    C_α = Lip · diam^{1 − α}.
    """
    return regularity_bound(phi).holder(alpha)


def sup_norm_bound(phi: FourierCocycle) -> float:
    return abs(phi.mean) + float(sum(abs(a) + abs(b) for _, _, a, b in phi.modes))


def c2_bound(phi: FourierCocycle) -> float:
    """
    Σ (2π‖k‖)²(|a_k| + |b_k|), a bound for the operator norm of the Hessian.
    """
    return float(sum((2.0 * math.pi) ** 2 * (k1 * k1 + k2 * k2) * (abs(a) + abs(b)) for k1, k2, a, b in phi.modes))


def compose_with(phi: FourierCocycle, A: HyperbolicAutomorphism) -> FourierCocycle:
    """
    φ∘A exactly: mode k becomes Aᵀk with the same coefficients.
    """
    modes = [(A.a * k1 + A.c * k2, A.b * k1 + A.d * k2, a, b) for k1, k2, a, b in phi.modes]
    return FourierCocycle.create(modes, mean=phi.mean)


def coboundary_of(psi: FourierCocycle, A: HyperbolicAutomorphism) -> FourierCocycle:
    """
    Ψ∘A − Ψ, computed in Fourier space; its mean is zero.
    """
    result = compose_with(psi, A) - psi
    return result.evolve_self(mean=0.0)


def birkhoff_sum(phi: FourierCocycle, A: HyperbolicAutomorphism, x: TorusPoint, n: int) -> float:
    """
    Σ_{i=0}^{n−1} φ(A^i x)
    """
    if n < 1:
        raise InvalidInput("Birkhoff sums need n >= 1, got {}".format(n))
    points = np.empty((n, 2))
    current = x.lift()
    matrix = A.matrix.astype(float)
    for i in range(n):
        points[i] = current
        current = np.mod(matrix @ current, 1.0)
    return float(np.sum(phi.evaluate_points(points)))


def grid_mean(phi: FourierCocycle, n: int) -> float:
    """
    Average over the uniform ``n × n`` grid; exact for ``n`` above twice the largest mode index.
    """
    axis = np.arange(n) / n
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    return float(np.mean(phi.evaluate_points(np.column_stack([x1.ravel(), x2.ravel()]))))


def parse_cocycle(lines: Iterable[str]) -> FourierCocycle:
    """
    Parse the literal format: one ``k1 k2 a b`` line per mode plus an optional ``mean m`` line.
    Blank lines and ``#`` comments are ignored.
    """
    modes = []
    mean = 0.0
    seen_mean = False
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if fields[0] == "mean":
            if len(fields) != 2 or seen_mean:
                raise InvalidInput("malformed mean line: {!r}".format(raw))
            mean = _parse_float(fields[1], raw)
            seen_mean = True
            continue
        if len(fields) != 4:
            raise InvalidInput("cocycle mode lines need 'k1 k2 a b', got {!r}".format(raw))
        try:
            k1, k2 = int(fields[0]), int(fields[1])
        except ValueError as err:
            raise InvalidInput("mode indices must be integers in {!r}".format(raw)) from err
        if k1 == 0 and k2 == 0:
            raise InvalidInput("use 'mean m' for the constant term, got {!r}".format(raw))
        modes.append((k1, k2, _parse_float(fields[2], raw), _parse_float(fields[3], raw)))
    return FourierCocycle.create(modes, mean=mean)


def _parse_float(token: str, line: str) -> float:
    try:
        value = float(token)
    except ValueError as err:
        raise InvalidInput("not a number: {!r} in {!r}".format(token, line)) from err
    if not math.isfinite(value):
        raise InvalidInput("non-finite coefficient in {!r}".format(line))
    return value


def format_cocycle(phi: FourierCocycle) -> List[str]:
    lines = ["{} {} {!r} {!r}".format(k1, k2, a, b) for k1, k2, a, b in phi.modes]
    if phi.mean != 0.0:
        lines.append("mean {!r}".format(phi.mean))
    return lines
