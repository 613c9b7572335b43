"""
Jets as truncated polynomial maps R^m → R^n and the graph transform they induce.

A :class:`JetPoly` of order ℓ stores symmetric tensors ℘_0, …, ℘_ℓ with ``tensors[i]`` of shape ``(n,) + (m,) * i``
and represents P(x) = Σ_i ℘_i[(x − center)^{⊗i}], so ℘_i is the i-th derivative divided by i!.
"""
import itertools
import logging
import math
from typing import Dict, Iterable, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from skewlab.entities import ImmutableEvolvableModel
from skewlab.exceptions import DimensionMismatch, GraphTransformUndefined, InvalidInput, NonConvergence, SingularJet
from skewlab.helpers import make_rng
from skewlab.skew import InequalityCheck
from skewlab.types import FloatArray

logger = logging.getLogger(__name__)

SINGULAR_CONDITION = 1e12
FamilyName = Literal["diagonal", "coupled", "nonlinear", "identity", "violating"]


def symmetrize(tensor: FloatArray) -> FloatArray:
    """
    Average over all permutations of the input axes (every axis but the first).
    """
    degree = tensor.ndim - 1
    if degree < 2:
        return tensor
    permutations = list(itertools.permutations(range(1, degree + 1)))
    return sum(np.transpose(tensor, (0,) + p) for p in permutations) / len(permutations)


def _contract_last(tensor: FloatArray, h: FloatArray, times: int) -> FloatArray:
    for _ in range(times):
        tensor = np.tensordot(tensor, h, axes=([tensor.ndim - 1], [0]))
    return tensor


class JetPoly(ImmutableEvolvableModel):
    m: int
    n: int
    order: int
    tensors: Tuple[FloatArray, ...]
    center: FloatArray

    def model_post_init(self, __context: object) -> None:
        if len(self.tensors) != self.order + 1:
            raise DimensionMismatch("order {} needs {} tensors, got {}".format(self.order, self.order + 1, len(self.tensors)))
        if self.center.shape != (self.m,):
            raise DimensionMismatch("center must have shape ({},), got {}".format(self.m, self.center.shape))
        for i, tensor in enumerate(self.tensors):
            expected = (self.n,) + (self.m,) * i
            if tensor.shape != expected:
                raise DimensionMismatch("℘_{} must have shape {}, got {}".format(i, expected, tensor.shape))

    @classmethod
    def create(
        cls, tensors: Sequence[Union[FloatArray, Sequence, float]], center: Optional[Sequence[float]] = None
    ) -> "JetPoly":
        """
        Build a jet from its tensors; the dimensions are read from ℘_0 and ℘_1, and scalars are promoted.
        """
        arrays = [np.atleast_1d(np.asarray(tensors[0], dtype=float))]
        n = arrays[0].shape[0]
        m = np.asarray(tensors[1], dtype=float).reshape(n, -1).shape[1] if len(tensors) > 1 else (
            1 if center is None else len(center)
        )
        for i, tensor in enumerate(tensors[1:], start=1):
            arrays.append(np.asarray(tensor, dtype=float).reshape((n,) + (m,) * i))
        origin = np.zeros(m) if center is None else np.asarray(center, dtype=float).reshape(m)
        return cls(m=m, n=n, order=len(arrays) - 1, tensors=tuple(arrays), center=origin)

    @classmethod
    def identity(cls, m: int, order: int, center: Optional[Sequence[float]] = None) -> "JetPoly":
        origin = np.zeros(m) if center is None else np.asarray(center, dtype=float)
        tensors = [origin.copy(), np.eye(m)] + [np.zeros((m,) + (m,) * i) for i in range(2, order + 1)]
        return cls(m=m, n=m, order=order, tensors=tuple(tensors[: order + 1]), center=origin)

    @classmethod
    def zero(cls, m: int, n: int, order: int, center: Optional[Sequence[float]] = None) -> "JetPoly":
        origin = np.zeros(m) if center is None else np.asarray(center, dtype=float)
        return cls(m=m, n=n, order=order, tensors=tuple(np.zeros((n,) + (m,) * i) for i in range(order + 1)), center=origin)

    @classmethod
    def from_monomials(
        cls,
        m: int,
        n: int,
        order: int,
        monomials: Mapping[Tuple[int, ...], Union[float, Sequence[float]]],
        center: Optional[Sequence[float]] = None,
    ) -> "JetPoly":
        """
        Build a jet from ``{exponents: coefficient}`` with monomials in x − center. Each coefficient is spread
        evenly over the index tuples of its monomial so that the tensors are symmetric.
        """
        jet = cls.zero(m, n, order, center)
        tensors = [tensor.copy() for tensor in jet.tensors]
        for exponents, coefficient in monomials.items():
            if len(exponents) != m:
                raise DimensionMismatch("monomial {} has {} exponents, expected {}".format(exponents, len(exponents), m))
            degree = sum(exponents)
            if degree > order:
                raise DimensionMismatch("monomial {} exceeds order {}".format(exponents, order))
            canonical = tuple(j for j, power in enumerate(exponents) for _ in range(power))
            indices = set(itertools.permutations(canonical))
            value = np.broadcast_to(np.asarray(coefficient, dtype=float), (n,))
            for index in indices:
                tensors[degree][(slice(None),) + index] += value / len(indices)
        return jet.evolve_self(tensors=tuple(tensors))

    def to_monomials(self, tol: float = 0.0) -> Dict[Tuple[int, ...], FloatArray]:
        monomials = {}
        for degree, tensor in enumerate(self.tensors):
            for canonical in itertools.combinations_with_replacement(range(self.m), degree):
                exponents = tuple(canonical.count(j) for j in range(self.m))
                multiplicity = math.factorial(degree) // math.prod(math.factorial(e) for e in exponents)
                coefficient = tensor[(slice(None),) + canonical] * multiplicity
                if np.max(np.abs(coefficient)) > tol:
                    monomials[exponents] = coefficient
        return monomials

    def evaluate(self, x: Union[Sequence[float], FloatArray]) -> FloatArray:
        h = np.asarray(x, dtype=float).reshape(self.m) - self.center
        return sum(_contract_last(tensor, h, i) for i, tensor in enumerate(self.tensors))

    def jacobian(self, x: Union[Sequence[float], FloatArray]) -> FloatArray:
        """
        DP(x) as an ``(n, m)`` matrix, using Σ_i i·℘_i[h^{i−1}, ·] for symmetric tensors.
        """
        h = np.asarray(x, dtype=float).reshape(self.m) - self.center
        result = np.zeros((self.n, self.m))
        for i, tensor in enumerate(self.tensors[1:], start=1):
            # contract all but the last input axis
            moved = np.moveaxis(tensor, tensor.ndim - 1, 1)
            result += i * _contract_last(moved, h, i - 1)
        return result

    def truncate(self, order: int) -> "JetPoly":
        order = min(order, self.order)
        return self.evolve_self(order=order, tensors=self.tensors[: order + 1])

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        """
        Adjacent transpositions generate all permutations, so checking them is enough.
        """
        for tensor in self.tensors[2:]:
            for axis in range(1, tensor.ndim - 1):
                if np.max(np.abs(tensor - np.swapaxes(tensor, axis, axis + 1))) > tol:
                    return False
        return True

    def max_difference(self, other: "JetPoly") -> float:
        if (self.m, self.n) != (other.m, other.n):
            raise DimensionMismatch("cannot compare {}→{} with {}→{}".format(self.m, self.n, other.m, other.n))
        order = min(self.order, other.order)
        gaps = [float(np.max(np.abs(a - b))) for a, b in zip(self.tensors[: order + 1], other.tensors[: order + 1])]
        return max(gaps + [float(np.max(np.abs(self.center - other.center)))])


def random_jet(
    m: int, n: int, order: int, rng: np.random.Generator, scale: float = 1.0, center: Optional[Sequence[float]] = None
) -> JetPoly:
    tensors = [symmetrize(scale * rng.standard_normal((n,) + (m,) * i)) for i in range(order + 1)]
    origin = np.zeros(m) if center is None else np.asarray(center, dtype=float)
    return JetPoly(m=m, n=n, order=order, tensors=tuple(tensors), center=origin)


def _multiply(power: List[FloatArray], q: List[FloatArray], factors: int, order: int) -> List[FloatArray]:
    """
    Multiply a product of ``factors`` copies of Q by one more copy, truncated at ``order``.
    """
    product = []
    for degree in range(order + 1):
        total = None
        for d1 in range(degree + 1):
            term = np.multiply.outer(power[d1], q[degree - d1])
            term = np.moveaxis(term, factors + d1, factors)
            total = term if total is None else total + term
        product.append(total)
    return product


def jet_compose(outer: JetPoly, inner: JetPoly) -> JetPoly:
    """
    Truncated composition outer ∘ inner, centered at the center of ``inner``.

    ``outer`` is used as the polynomial it stores, so the constant term of ``inner`` need not coincide with the
    center of ``outer``; when it does, the result is the jet of the composition.

    :raises DimensionMismatch: If the dimensions do not chain
    """
    if outer.m != inner.n:
        raise DimensionMismatch("cannot compose {}→{} after {}→{}".format(outer.m, outer.n, inner.m, inner.n))
    order = min(outer.order, inner.order)
    q = [inner.tensors[0] - outer.center] + list(inner.tensors[1: order + 1])
    result = [np.zeros((outer.n,) + (inner.m,) * d) for d in range(order + 1)]
    result[0] = result[0] + outer.tensors[0]

    power = q
    for i in range(1, outer.order + 1):
        if i > 1:
            power = _multiply(power, q, i - 1, order)
        axes = (list(range(1, i + 1)), list(range(i)))
        for degree in range(order + 1):
            result[degree] = result[degree] + np.tensordot(outer.tensors[i], power[degree], axes=axes)

    tensors = tuple(symmetrize(tensor) for tensor in result)
    return JetPoly(m=inner.m, n=outer.n, order=order, tensors=tensors, center=inner.center.copy())


def jet_invert(jet: JetPoly) -> JetPoly:
    """
    Truncated compositional inverse, centered at ℘_0 and sending it back to the center of ``jet``.

    Each correction step G ← G − ℘_1^{-1}(P∘G − id) fixes one more degree.

    :raises DimensionMismatch: If the jet is not square
    :raises SingularJet: If ℘_1 is not invertible
    """
    if jet.m != jet.n:
        raise DimensionMismatch("only square jets can be inverted, got {}→{}".format(jet.m, jet.n))
    linear = jet.tensors[1] if jet.order >= 1 else np.zeros((jet.n, jet.m))
    if jet.order < 1 or np.linalg.cond(linear) > SINGULAR_CONDITION:
        raise SingularJet("linear part is singular: {}".format(linear.tolist()))
    linear_inverse = np.linalg.inv(linear)

    target = JetPoly.identity(jet.n, jet.order, center=jet.tensors[0])
    inverse = JetPoly(
        m=jet.n,
        n=jet.m,
        order=jet.order,
        tensors=(jet.center.copy(), linear_inverse) + tuple(np.zeros((jet.m,) + (jet.n,) * i) for i in range(2, jet.order + 1)),
        center=jet.tensors[0].copy(),
    )
    for _ in range(jet.order):
        composed = jet_compose(jet, inverse)
        corrections = [np.tensordot(linear_inverse, a - b, axes=1) for a, b in zip(composed.tensors, target.tensors)]
        tensors = (inverse.tensors[0],) + tuple(t - c for t, c in zip(inverse.tensors[1:], corrections[1:]))
        inverse = inverse.evolve_self(tensors=tensors)
    return inverse


def graph_jet(psi: JetPoly) -> JetPoly:
    """
    The jet of x ↦ (x, ψ(x)).
    """
    m, n = psi.m, psi.n
    tensors = [np.concatenate([psi.center, psi.tensors[0]])]
    if psi.order >= 1:
        tensors.append(np.vstack([np.eye(m), psi.tensors[1]]))
    for i in range(2, psi.order + 1):
        tensors.append(np.concatenate([np.zeros((m,) + (m,) * i), psi.tensors[i]], axis=0))
    return JetPoly(m=m, n=m + n, order=psi.order, tensors=tuple(tensors), center=psi.center.copy())


def _rows(jet: JetPoly, rows: slice, count: int) -> JetPoly:
    return JetPoly(m=jet.m, n=count, order=jet.order, tensors=tuple(t[rows] for t in jet.tensors), center=jet.center)


def jet_graph_transform(H: JetPoly, psi: JetPoly, order: Optional[int] = None) -> JetPoly:
    """
    The jet ψ' with graph(ψ') = H(graph(ψ)): writing H = (h, g), ψ' = (g∘(id, ψ)) ∘ (h∘(id, ψ))^{-1}.

    :raises DimensionMismatch: If H does not act on R^{m+n}
    :raises GraphTransformUndefined: If A + B·℘_1 is singular
    """
    m, n = psi.m, psi.n
    if H.m != m + n or H.n != m + n:
        raise DimensionMismatch("H must map R^{} to itself, got {}→{}".format(m + n, H.m, H.n))
    order = psi.order if order is None else order
    lifted = jet_compose(H, graph_jet(psi.truncate(order)))
    h_part = _rows(lifted, slice(0, m), m)
    g_part = _rows(lifted, slice(m, m + n), n)
    try:
        h_inverse = jet_invert(h_part)
    except SingularJet as err:
        raise GraphTransformUndefined("A + B·℘_1 is singular at {}".format(psi.center.tolist())) from err
    return jet_compose(g_part, h_inverse)


class BlockLinearMap(ImmutableEvolvableModel):
    """
    Blocks of a linear map of R^m × R^n: A (m×m), B (R^n → R^m), C (R^m → R^n), K (n×n).
    """

    A: FloatArray
    B: FloatArray
    C: FloatArray
    K: FloatArray

    def model_post_init(self, __context: object) -> None:
        m, n = self.A.shape[0], self.K.shape[0]
        if self.A.shape != (m, m) or self.B.shape != (m, n) or self.C.shape != (n, m) or self.K.shape != (n, n):
            raise DimensionMismatch(
                "inconsistent blocks A{} B{} C{} K{}".format(self.A.shape, self.B.shape, self.C.shape, self.K.shape)
            )
        if conorm(self.A) <= 0.0 or np.linalg.cond(self.A) > SINGULAR_CONDITION:
            raise SingularJet("block A is not invertible")

    @classmethod
    def create(cls, A: object, B: object, C: object, K: object) -> "BlockLinearMap":
        A_ = np.atleast_2d(np.asarray(A, dtype=float))
        K_ = np.atleast_2d(np.asarray(K, dtype=float))
        m, n = A_.shape[0], K_.shape[0]
        return cls(
            A=A_,
            B=np.asarray(B, dtype=float).reshape(m, n),
            C=np.asarray(C, dtype=float).reshape(n, m),
            K=K_,
        )

    @classmethod
    def from_jet(cls, H: JetPoly, m: int, point: Optional[Sequence[float]] = None) -> "BlockLinearMap":
        """
        Split DH at ``point`` (default: the center of H) into its blocks.
        """
        at = H.center if point is None else np.asarray(point, dtype=float)
        J = H.jacobian(at)
        return cls(A=J[:m, :m], B=J[:m, m:], C=J[m:, :m], K=J[m:, m:])

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.K.shape[0]


def conorm(matrix: FloatArray) -> float:
    """
    m(A) = min_{|v|=1} |Av|, the smallest singular value.
    """
    return float(np.linalg.svd(np.atleast_2d(matrix), compute_uv=False)[-1])


def q_norm_bound(blocks: BlockLinearMap, order: int) -> float:
    """
    ‖K‖ / m(A)^ℓ with spectral norms.
    """
    return float(np.linalg.norm(blocks.K, 2)) / conorm(blocks.A) ** order


def q_operator(blocks: BlockLinearMap, tensor: FloatArray) -> FloatArray:
    """
    ℘ ↦ K ℘ (A^{-1})^{⊗ℓ}, the linear part of the order-ℓ graph transform.
    """
    tensor = np.asarray(tensor, dtype=float)
    A_inverse = np.linalg.inv(blocks.A)
    result = np.tensordot(blocks.K, tensor, axes=1)
    for axis in range(1, result.ndim):
        result = np.moveaxis(np.tensordot(result, A_inverse, axes=([axis], [0])), result.ndim - 1, axis)
    return result


def first_order_graph_transform(blocks: BlockLinearMap, p1: FloatArray) -> FloatArray:
    """
    (C + K℘_1)(A + B℘_1)^{-1}

    :raises GraphTransformUndefined: If A + B℘_1 is singular
    """
    p1 = np.asarray(p1, dtype=float).reshape(blocks.n, blocks.m)
    denominator = blocks.A + blocks.B @ p1
    if np.linalg.cond(denominator) > SINGULAR_CONDITION:
        raise GraphTransformUndefined("A + B·℘_1 is singular")
    return (blocks.C + blocks.K @ p1) @ np.linalg.inv(denominator)


def scaled_norm(L: float, jets: Iterable[Union[float, FloatArray]]) -> float:
    """
    |(℘_1, …, ℘_ℓ)|_L = L^ℓ|℘_1| + L^{ℓ−1}|℘_2| + … + L|℘_ℓ| with Frobenius norms.
    """
    norms = [float(np.linalg.norm(np.ravel(np.asarray(jet, dtype=float)))) for jet in jets]
    order = len(norms)
    return float(sum(L ** (order - i) * norm for i, norm in enumerate(norms)))


def contraction_ratio(H: JetPoly, psi: JetPoly, psi_prime: JetPoly, L: float, order: int) -> Optional[float]:
    """
    |H^ℓ(ψ) − H^ℓ(ψ')|_L / |ψ − ψ'|_L, or None when the jets coincide.
    """
    before = scaled_norm(L, [a - b for a, b in zip(psi.tensors[1: order + 1], psi_prime.tensors[1: order + 1])])
    if before == 0.0:
        return None
    image = jet_graph_transform(H, psi, order)
    image_prime = jet_graph_transform(H, psi_prime, order)
    after = scaled_norm(L, [a - b for a, b in zip(image.tensors[1:], image_prime.tensors[1:])])
    return after / before


class FiberContractionReport(ImmutableEvolvableModel):
    kappa: float
    epsilon: float
    L: float
    order: int
    max_ratio: float
    pairs_used: int
    skipped: int
    hypotheses: Tuple[InequalityCheck, ...]

    @property
    def hypotheses_hold(self) -> bool:
        return all(check.holds for check in self.hypotheses)

    @property
    def contraction_holds(self) -> bool:
        return self.max_ratio <= self.kappa + 1e-9

    @property
    def holds(self) -> bool:
        return self.hypotheses_hold and self.contraction_holds


def _normalized(jet: JetPoly, L: float, order: int, size: float) -> JetPoly:
    norm = scaled_norm(L, jet.tensors[1: order + 1])
    factor = size / norm if norm > 0 else 0.0
    return jet.evolve_self(tensors=(jet.tensors[0],) + tuple(factor * t for t in jet.tensors[1:]))


def verify_fiber_contraction(
    H: JetPoly,
    kappa: float,
    epsilon: float,
    L: float,
    sample_count: int,
    seed: int,
    m: int = 1,
    order: int = 2,
    base_radius: float = 0.05,
) -> FiberContractionReport:
    """
    Measure the contraction of the jet graph transform in the scaled norm over pseudorandom pairs of jets with
    |·|_L ≤ 1 that share ℘_0.

    The hypotheses ‖B‖ ≤ ε, ‖K‖/m(A) ≤ κ and ‖K‖/m(A)^ℓ ≤ κ are evaluated at every sampled (x, ℘_0) and the
    worst case is reported; a violated hypothesis shows up in the report, it does not stop the measurement.
    """
    n = H.n - m
    rng = make_rng(seed)
    worst_b, worst_first, worst_order = 0.0, 0.0, 0.0
    ratios = []
    skipped = 0
    for _ in range(sample_count):
        p0 = rng.uniform(-base_radius, base_radius, size=n)
        psi = _normalized(random_jet(m, n, order, rng), L, order, rng.uniform(0.0, 1.0))
        psi = psi.evolve_self(tensors=(p0,) + psi.tensors[1:])
        other = _normalized(random_jet(m, n, order, rng), L, order, rng.uniform(0.0, 1.0))
        other = other.evolve_self(tensors=(p0,) + other.tensors[1:])

        blocks = BlockLinearMap.from_jet(H, m, np.concatenate([psi.center, p0]))
        k_norm, a_conorm = float(np.linalg.norm(blocks.K, 2)), conorm(blocks.A)
        worst_b = max(worst_b, float(np.linalg.norm(blocks.B, 2)))
        worst_first = max(worst_first, k_norm / a_conorm)
        worst_order = max(worst_order, k_norm / a_conorm ** order)

        ratio = contraction_ratio(H, psi, other, L, order)
        if ratio is None:
            skipped += 1
        else:
            ratios.append(ratio)

    hypotheses = (
        _at_most("‖B‖ <= ε", worst_b, epsilon),
        _at_most("‖K‖/m(A) <= κ", worst_first, kappa),
        _at_most("‖K‖/m(A)^ℓ <= κ", worst_order, kappa),
    )
    report = FiberContractionReport(
        kappa=kappa,
        epsilon=epsilon,
        L=L,
        order=order,
        max_ratio=max(ratios) if ratios else 0.0,
        pairs_used=len(ratios),
        skipped=skipped,
        hypotheses=hypotheses,
    )
    logger.debug("fiber contraction at L=%g: max ratio %.6f over %d pairs", L, report.max_ratio, len(ratios))
    return report


def _at_most(name: str, lhs: float, rhs: float) -> InequalityCheck:
    return InequalityCheck(name=name, lhs=lhs, rhs=rhs, holds=lhs <= rhs, margin=rhs - lhs, strict=False)


def search_scale(
    H: JetPoly,
    kappa: float,
    epsilon: float,
    sample_count: int,
    seed: int,
    m: int = 1,
    order: int = 2,
    max_exponent: int = 6,
) -> FiberContractionReport:
    """
    Smallest L among 1, 10, …, 10^max_exponent whose measured one-step ratio stays within κ.

    :raises NonConvergence: If no candidate scale works
    """
    report = None
    for exponent in range(max_exponent + 1):
        report = verify_fiber_contraction(H, kappa, epsilon, 10.0 ** exponent, sample_count, seed, m, order)
        if report.contraction_holds:
            logger.info("scale L = 1e%d gives max ratio %.6f <= κ = %g", exponent, report.max_ratio, kappa)
            return report
    raise NonConvergence(
        "no scale up to 1e{} contracts within κ = {}, last max ratio {}".format(
            max_exponent, kappa, report.max_ratio if report else math.nan
        )
    )


class JetFamily(ImmutableEvolvableModel):
    name: str
    H: JetPoly
    kappa: float
    epsilon: float


def jet_family(name: FamilyName, order: int = 2) -> JetFamily:
    """
    Synthetic maps of R × R for the contraction experiments: ``diagonal`` (A = 2, K = 0.5), ``coupled`` (small
    linear B and C), ``nonlinear`` (quadratic terms), ``identity`` and ``violating`` (B far above ε).
    """
    degree = max(order, 2)
    if name == "diagonal":
        H = JetPoly.from_monomials(2, 2, degree, {(1, 0): [2.0, 0.0], (0, 1): [0.0, 0.5]})
        return JetFamily(name=name, H=H, kappa=0.25, epsilon=0.01)
    if name == "coupled":
        H = JetPoly.from_monomials(2, 2, degree, {(1, 0): [2.0, 0.3], (0, 1): [0.01, 0.5]})
        return JetFamily(name=name, H=H, kappa=0.3, epsilon=0.02)
    if name == "nonlinear":
        H = JetPoly.from_monomials(
            2, 2, degree, {(1, 0): [2.0, 0.0], (0, 1): [0.0, 0.5], (0, 2): [0.01, 0.0], (2, 0): [0.0, 0.3], (1, 1): [0.0, 0.1]}
        )
        return JetFamily(name=name, H=H, kappa=0.3, epsilon=0.01)
    if name == "identity":
        return JetFamily(name=name, H=JetPoly.identity(2, degree), kappa=1.0, epsilon=0.01)
    if name == "violating":
        H = JetPoly.from_monomials(2, 2, degree, {(1, 0): [2.0, 0.0], (0, 1): [1.0, 0.5]})
        return JetFamily(name=name, H=H, kappa=0.25, epsilon=0.01)
    raise InvalidInput("unknown jet family {!r}".format(name))


def h1_cross_check(H: JetPoly, psi: JetPoly) -> float:
    """
    Gap between the order-1 part of :func:`jet_graph_transform` and the explicit first-order formula with the
    blocks of DH at (x, ℘_0).
    """
    blocks = BlockLinearMap.from_jet(H, psi.m, np.concatenate([psi.center, psi.tensors[0]]))
    explicit = first_order_graph_transform(blocks, psi.tensors[1])
    composed = jet_graph_transform(H, psi, 1)
    return float(np.max(np.abs(composed.tensors[1] - explicit)))
