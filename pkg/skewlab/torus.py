"""
Exact geometry of the 2-torus and its hyperbolic automorphisms.

All leaf computations happen in the universal cover R²; points are wrapped into [0, 1)² only at the end.
"""
import itertools
import logging
import math
from typing import List, Literal, Sequence, Tuple, Union

import numpy as np
from pydantic import field_validator, model_validator

from skewlab import config
from skewlab.entities import ImmutableEvolvableModel
from skewlab.exceptions import BoundExceeded, InvalidInput, NotAnosov, SearchRadiusExhausted
from skewlab.types import FloatArray, IntArray, RealPair

logger = logging.getLogger(__name__)

LegKind = Literal["stable", "unstable"]
MatrixLike = Union[Sequence[Sequence[int]], Sequence[int], IntArray]

CAT_MAP = ((2, 1), (1, 1))
CHAIN_TOLERANCE = 1e-9


class TorusPoint(ImmutableEvolvableModel):
    x1: float
    x2: float

    @field_validator("x1", "x2")
    @classmethod
    def _in_unit_interval(cls, value: float) -> float:
        if not math.isfinite(value) or not 0.0 <= value < 1.0:
            raise ValueError("torus coordinates must lie in [0, 1), got {}".format(value))
        return value

    def lift(self) -> FloatArray:
        return np.array([self.x1, self.x2], dtype=float)

    def as_tuple(self) -> Tuple[float, float]:
        return self.x1, self.x2

    @classmethod
    def origin(cls) -> "TorusPoint":
        return cls(x1=0.0, x2=0.0)


class LatticeVector(ImmutableEvolvableModel):
    k1: int
    k2: int

    def as_array(self) -> FloatArray:
        return np.array([self.k1, self.k2], dtype=float)


def _reduce(value: float) -> float:
    reduced = value % 1.0
    # -1e-17 % 1.0 == 1.0 in floating point
    return 0.0 if reduced >= 1.0 else reduced


def wrap(v: RealPair) -> TorusPoint:
    """
    Reduce a point of the plane modulo Z² into [0, 1)².

    :raises InvalidInput: On non-finite coordinates
    """
    x1, x2 = float(v[0]), float(v[1])
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise InvalidInput("cannot wrap non-finite point ({}, {})".format(x1, x2))
    return TorusPoint(x1=_reduce(x1), x2=_reduce(x2))


def wrap_array(points: FloatArray) -> FloatArray:
    reduced = np.mod(points, 1.0)
    reduced[reduced >= 1.0] = 0.0
    return reduced


def lift(p: TorusPoint) -> FloatArray:
    return p.lift()


def torus_distance(p: TorusPoint, q: TorusPoint) -> float:
    """
    Distance on T² = R²/Z², the minimum over lattice translates.
    """
    delta = p.lift() - q.lift()
    delta -= np.round(delta)
    return float(np.hypot(delta[0], delta[1]))


class HyperbolicAutomorphism(ImmutableEvolvableModel):
    """
    Integer 2×2 matrix with |det| = 1 and |trace| > 2, together with its eigen frame.

    ``lambda_u`` is the eigenvalue of modulus larger than one. It is negative when the trace is, so expansion
    rates use ``abs(lambda_u)``. Eigendirections are unit vectors with positive first component.
    """

    a: int
    b: int
    c: int
    d: int
    lambda_u: float
    lambda_s: float
    v_u: Tuple[float, float]
    v_s: Tuple[float, float]

    @property
    def matrix(self) -> IntArray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.int64)

    @property
    def inverse_matrix(self) -> IntArray:
        det = self.det
        return np.array([[self.d * det, -self.b * det], [-self.c * det, self.a * det]], dtype=np.int64)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def expansion(self) -> float:
        return abs(self.lambda_u)

    @property
    def contraction(self) -> float:
        return abs(self.lambda_s)

    def direction(self, kind: LegKind) -> FloatArray:
        return np.array(self.v_u if kind == "unstable" else self.v_s, dtype=float)

    def rate(self, kind: LegKind) -> float:
        return self.lambda_u if kind == "unstable" else self.lambda_s

    def apply(self, p: TorusPoint) -> TorusPoint:
        return wrap(self.matrix @ p.lift())

    def apply_inverse(self, p: TorusPoint) -> TorusPoint:
        return wrap(self.inverse_matrix @ p.lift())

    def apply_points(self, points: FloatArray, inverse: bool = False) -> FloatArray:
        """
        Apply the map (or its inverse) to an ``(N, 2)`` array of points, wrapping the result.
        """
        matrix = self.inverse_matrix if inverse else self.matrix
        return wrap_array(points @ matrix.T.astype(float))

    def iterate(self, p: TorusPoint, n: int) -> TorusPoint:
        step = self.apply if n >= 0 else self.apply_inverse
        for _ in range(abs(n)):
            p = step(p)
        return p

    def as_rows(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        return (self.a, self.b), (self.c, self.d)


def _as_integer_matrix(matrix: MatrixLike) -> Tuple[int, int, int, int]:
    flat = np.asarray(matrix, dtype=object).reshape(-1).tolist()
    if len(flat) != 4:
        raise InvalidInput("expected a 2×2 matrix, got {} entries".format(len(flat)))
    entries = []
    for entry in flat:
        if isinstance(entry, (bool, np.bool_)) or float(entry) != int(entry):
            raise InvalidInput("matrix entries must be integers, got {}".format(entry))
        entries.append(int(entry))
    return entries[0], entries[1], entries[2], entries[3]


def _eigenvector(a: int, b: int, c: int, d: int, eigenvalue: float) -> Tuple[float, float]:
    vector = np.array([b, eigenvalue - a], dtype=float) if b != 0 else np.array([eigenvalue - d, c], dtype=float)
    vector /= np.linalg.norm(vector)
    if vector[0] < 0 or (vector[0] == 0 and vector[1] < 0):
        vector = -vector
    return float(vector[0]), float(vector[1])


def eigen_frame(matrix: MatrixLike) -> HyperbolicAutomorphism:
    """
    Build a :class:`HyperbolicAutomorphism` with its eigenvalues and unit eigendirections.

    :param matrix: Integer 2×2 matrix, nested or flat
    :raises NotAnosov: If |det| ≠ 1 or |trace| ≤ 2
    """
    a, b, c, d = _as_integer_matrix(matrix)
    det = a * d - b * c
    trace = a + d
    if abs(det) != 1:
        raise NotAnosov("determinant must be ±1, got {}".format(det))
    if abs(trace) <= 2:
        raise NotAnosov("|trace| must exceed 2 for hyperbolicity, got trace {}".format(trace))

    root = math.sqrt(trace * trace - 4 * det)
    lambda_u = (trace + math.copysign(root, trace)) / 2.0
    lambda_s = det / lambda_u
    v_u = _eigenvector(a, b, c, d, lambda_u)
    v_s = _eigenvector(a, b, c, d, lambda_s)

    matrix_f = np.array([[a, b], [c, d]], dtype=float)
    for eigenvalue, vector in ((lambda_u, v_u), (lambda_s, v_s)):
        residual = np.linalg.norm(matrix_f @ np.array(vector) - eigenvalue * np.array(vector))
        if residual > 1e-12 * max(1.0, abs(eigenvalue)):
            raise NotAnosov("eigen frame residual {} too large".format(residual))

    return HyperbolicAutomorphism(a=a, b=b, c=c, d=d, lambda_u=lambda_u, lambda_s=lambda_s, v_u=v_u, v_s=v_s)


class SuLeg(ImmutableEvolvableModel):
    kind: LegKind
    start: TorusPoint
    end: TorusPoint
    displacement: float

    def reversed(self) -> "SuLeg":
        return SuLeg(kind=self.kind, start=self.end, end=self.start, displacement=-self.displacement)


def make_leg(A: HyperbolicAutomorphism, start: TorusPoint, kind: LegKind, displacement: float) -> SuLeg:
    end = wrap(start.lift() + displacement * A.direction(kind))
    return SuLeg(kind=kind, start=start, end=end, displacement=displacement)


class SuPath(ImmutableEvolvableModel):
    legs: Tuple[SuLeg, ...]
    anchor: TorusPoint

    @model_validator(mode="after")
    def _legs_chain(self) -> "SuPath":
        if self.legs and torus_distance(self.legs[0].start, self.anchor) > CHAIN_TOLERANCE:
            raise ValueError("anchor must be the start of the first leg")
        for previous, following in zip(self.legs, self.legs[1:]):
            if torus_distance(previous.end, following.start) > CHAIN_TOLERANCE:
                raise ValueError("legs do not chain: {} vs {}".format(previous.end, following.start))
        return self

    @property
    def end(self) -> TorusPoint:
        return self.legs[-1].end if self.legs else self.anchor

    def reversed(self) -> "SuPath":
        return SuPath(legs=tuple(leg.reversed() for leg in reversed(self.legs)), anchor=self.end)

    def concat(self, other: "SuPath") -> "SuPath":
        return SuPath(legs=self.legs + other.legs, anchor=self.anchor)


class AccessibleCycle(ImmutableEvolvableModel):
    path: SuPath

    @model_validator(mode="after")
    def _closes(self) -> "AccessibleCycle":
        if torus_distance(self.path.end, self.path.anchor) > CHAIN_TOLERANCE:
            raise ValueError("cycle does not close: end {} anchor {}".format(self.path.end, self.path.anchor))
        return self

    @property
    def anchor(self) -> TorusPoint:
        return self.path.anchor


class BracketSolution(ImmutableEvolvableModel):
    point: TorusPoint
    legs: Tuple[SuLeg, SuLeg]
    shift: LatticeVector
    cost: float


def _lattice_candidates(radius: float) -> List[Tuple[int, int]]:
    bound = int(math.floor(radius))
    return [
        (k1, k2)
        for k1, k2 in itertools.product(range(-bound, bound + 1), repeat=2)
        if math.hypot(k1, k2) <= radius
    ]


def bracket_candidates(
    A: HyperbolicAutomorphism, x: TorusPoint, y: TorusPoint, radius: float
) -> List[BracketSolution]:
    """
    All points W^u(x) ∩ W^s(y) obtained from lattice translates with norm at most ``radius``, sorted by the total
    leafwise length |s| + |t| and then lexicographically by the lattice vector.

    :raises SearchRadiusExhausted: If the search set is empty
    """
    if radius <= 0:
        raise SearchRadiusExhausted("no lattice translate lies within radius {}".format(radius))
    shifts = _lattice_candidates(radius)
    if not shifts:
        raise SearchRadiusExhausted("no lattice translate lies within radius {}".format(radius))

    frame = np.column_stack([A.direction("unstable"), -A.direction("stable")])
    offsets = np.array(shifts, dtype=float) + (y.lift() - x.lift())
    solutions = np.linalg.solve(frame, offsets.T).T

    ranked = sorted(
        zip(shifts, solutions),
        key=lambda item: (round(abs(item[1][0]) + abs(item[1][1]), 12), item[0][0], item[0][1]),
    )
    results = []
    for (k1, k2), (s, t) in ranked:
        s, t = float(s), float(t)
        z = wrap(x.lift() + s * A.direction("unstable"))
        unstable = SuLeg(kind="unstable", start=x, end=z, displacement=s)
        stable = SuLeg(kind="stable", start=z, end=y, displacement=-t)
        results.append(
            BracketSolution(
                point=z, legs=(unstable, stable), shift=LatticeVector(k1=k1, k2=k2), cost=abs(s) + abs(t)
            )
        )
    return results


def bracket(
    A: HyperbolicAutomorphism, x: TorusPoint, y: TorusPoint, radius: float
) -> Tuple[TorusPoint, Tuple[SuLeg, SuLeg]]:
    """
    The local product point z = W^u(x) ∩ W^s(y) with the shortest leafwise legs.

    :return: ``z`` and the legs (unstable x → z, stable z → y)
    """
    best = bracket_candidates(A, x, y, radius)[0]
    return best.point, best.legs


def su_path(A: HyperbolicAutomorphism, x: TorusPoint, y: TorusPoint, radius: float) -> SuPath:
    _, legs = bracket(A, x, y, radius)
    return SuPath(legs=legs, anchor=x)


def path_through(A: HyperbolicAutomorphism, anchor: TorusPoint, displacements: Sequence[Tuple[LegKind, float]]) -> SuPath:
    """
    Build a path from leg kinds and leafwise displacements starting at ``anchor``.
    """
    legs = []
    start = anchor
    for kind, displacement in displacements:
        leg = make_leg(A, start, kind, displacement)
        legs.append(leg)
        start = leg.end
    return SuPath(legs=tuple(legs), anchor=anchor)


def quad_cycle(A: HyperbolicAutomorphism, x: TorusPoint, a: float, b: float) -> AccessibleCycle:
    """
    Four-leg cycle (+a along u, +b along s, −a along u, −b along s). The leaves of a linear automorphism are
    parallel lines, so the translations commute and the last leg ends at the anchor.
    """
    path = path_through(A, x, [("unstable", a), ("stable", b), ("unstable", -a), ("stable", -b)])
    last = path.legs[-1].evolve_self(end=x)
    return AccessibleCycle(path=SuPath(legs=path.legs[:-1] + (last,), anchor=x))


class PeriodicOrbit(ImmutableEvolvableModel):
    """
    A periodic orbit held exactly: the points are ``numerators / denominator`` modulo 1.
    """

    period: int
    denominator: int
    numerators: Tuple[Tuple[int, int], ...]

    @property
    def points(self) -> List[TorusPoint]:
        return [TorusPoint(x1=n1 / self.denominator, x2=n2 / self.denominator) for n1, n2 in self.numerators]

    @property
    def start(self) -> TorusPoint:
        return self.points[0]

    def as_array(self) -> FloatArray:
        return np.array(self.numerators, dtype=float) / self.denominator


def _matrix_power(rows: Tuple[Tuple[int, int], Tuple[int, int]], n: int) -> List[List[int]]:
    result = [[1, 0], [0, 1]]
    base = [list(rows[0]), list(rows[1])]
    while n:
        if n & 1:
            result = [[sum(result[i][k] * base[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
        base = [[sum(base[i][k] * base[k][j] for k in range(2)) for j in range(2)] for i in range(2)]
        n >>= 1
    return result


def periodic_point_count(A: HyperbolicAutomorphism, n: int) -> int:
    power = _matrix_power(A.as_rows(), n)
    return abs((power[0][0] - 1) * (power[1][1] - 1) - power[0][1] * power[1][0])


def periodic_points(A: HyperbolicAutomorphism, n: int) -> List[PeriodicOrbit]:
    """
    All solutions of A^n p ≡ p (mod Z²), grouped into orbits (minimal periods divide ``n``).

    The solution group B^{-1}Z²/Z² with B = A^n − I is generated by the columns of B^{-1} = adj(B)/det(B). It is
    enumerated exactly with integer numerators over |det(B)|: multiples of the first generator, then the cosets of
    the second one.

    :raises InvalidInput: If ``n`` < 1
    :raises BoundExceeded: If ``n`` exceeds ``MAX_PERIOD`` or the point count exceeds ``MAX_PERIODIC_POINTS``
    """
    if n < 1:
        raise InvalidInput("period must be a positive integer, got {}".format(n))
    if n > config.MAX_PERIOD:
        raise BoundExceeded("period {} exceeds the configured bound {}".format(n, config.MAX_PERIOD))

    power = _matrix_power(A.as_rows(), n)
    b11, b12, b21, b22 = power[0][0] - 1, power[0][1], power[1][0], power[1][1] - 1
    det = b11 * b22 - b12 * b21
    count = abs(det)
    if count > config.MAX_PERIODIC_POINTS:
        raise BoundExceeded("{} periodic points of period {} exceed the configured bound".format(count, n))

    sign = 1 if det > 0 else -1
    first = (sign * b22 % count, -sign * b21 % count)
    second = (-sign * b12 % count, sign * b11 % count)
    order_first = count // math.gcd(math.gcd(first[0], first[1]), count)
    cosets = count // order_first

    i = np.arange(order_first, dtype=np.int64)[:, None]
    j = np.arange(cosets, dtype=np.int64)[None, :]
    n1 = ((i * first[0]) % count + (j * second[0]) % count) % count
    n2 = ((i * first[1]) % count + (j * second[1]) % count) % count
    numerators = np.column_stack([n1.reshape(-1), n2.reshape(-1)])

    keys = numerators[:, 0] * count + numerators[:, 1]
    order = np.argsort(keys)
    keys, numerators = keys[order], numerators[order]
    if len(np.unique(keys)) != count:
        raise BoundExceeded("periodic point enumeration produced duplicates for period {}".format(n))

    images = np.column_stack(
        [
            (A.a * numerators[:, 0] + A.b * numerators[:, 1]) % count,
            (A.c * numerators[:, 0] + A.d * numerators[:, 1]) % count,
        ]
    )
    successor = np.searchsorted(keys, images[:, 0] * count + images[:, 1])

    visited = np.zeros(count, dtype=bool)
    orbits = []
    for index in range(count):
        if visited[index]:
            continue
        members = []
        current = index
        while not visited[current]:
            visited[current] = True
            members.append((int(numerators[current, 0]), int(numerators[current, 1])))
            current = int(successor[current])
        orbits.append(PeriodicOrbit(period=len(members), denominator=count, numerators=tuple(members)))

    logger.debug("period %d: %d points in %d orbits", n, count, len(orbits))
    return orbits


def orbit_of(A: HyperbolicAutomorphism, numerators: Tuple[int, int], denominator: int) -> PeriodicOrbit:
    """
    Orbit of the rational point ``numerators / denominator``. A permutes the points of (1/q)Z²/Z², so every
    rational point is periodic; the orbit is followed exactly in integers modulo q.

    :raises InvalidInput: If the denominator is not positive
    :raises BoundExceeded: If the orbit is longer than ``MAX_PERIODIC_POINTS``
    """
    if denominator < 1:
        raise InvalidInput("denominator must be a positive integer, got {}".format(denominator))
    start = (numerators[0] % denominator, numerators[1] % denominator)
    members = [start]
    n1, n2 = start
    while True:
        n1, n2 = (A.a * n1 + A.b * n2) % denominator, (A.c * n1 + A.d * n2) % denominator
        if (n1, n2) == start:
            break
        members.append((n1, n2))
        if len(members) > config.MAX_PERIODIC_POINTS:
            raise BoundExceeded("orbit of {}/{} exceeds the configured bound".format(start, denominator))
    return PeriodicOrbit(period=len(members), denominator=denominator, numerators=tuple(members))


def bracket_displacements(
    A: HyperbolicAutomorphism, starts: FloatArray, ends: FloatArray, radius: float, rank: int = 0
) -> Tuple[FloatArray, FloatArray]:
    """
    Vectorized :func:`bracket` for many pairs: the leafwise displacements (s, t) of the ``rank``-th ranked lattice
    translate for every row of ``starts``/``ends``. The unstable leg has displacement s and the stable leg −t.
    """
    if radius <= 0:
        raise SearchRadiusExhausted("no lattice translate lies within radius {}".format(radius))
    shifts = np.array(_lattice_candidates(radius), dtype=float)
    if rank >= len(shifts):
        raise SearchRadiusExhausted("radius {} holds {} translates, rank {} requested".format(radius, len(shifts), rank))
    frame_inverse = np.linalg.inv(np.column_stack([A.direction("unstable"), -A.direction("stable")]))
    offsets = (np.atleast_2d(ends) - np.atleast_2d(starts))[:, None, :] + shifts[None, :, :]
    solutions = offsets @ frame_inverse.T
    costs = np.round(np.abs(solutions[..., 0]) + np.abs(solutions[..., 1]), 12)
    # stable sort keeps the lexicographic order of the shifts among equal costs
    chosen = np.argsort(costs, axis=1, kind="stable")[:, rank]
    picked = solutions[np.arange(solutions.shape[0]), chosen]
    return picked[:, 0], picked[:, 1]
