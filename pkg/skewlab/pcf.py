"""
The periodic cycles functional with certified truncation.

For a stable pair the series Σ_{i≥0} φ(A^i x') − φ(A^i x) is summed along the orbit of ``x`` only; the partner
orbit is the same point shifted by the analytically known displacement d·λ_s^i·v_s. Iterating ``x'`` on its own
would amplify roundoff by λ_u^i. Unstable pairs mirror this with A^{-1}.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from skewlab import config
from skewlab.cocycle import FourierCocycle, lipschitz_bound
from skewlab.entities import ImmutableEvolvableModel
from skewlab.exceptions import BudgetExceeded, InvalidInput
from skewlab.torus import HyperbolicAutomorphism, LegKind, SuLeg, SuPath, TorusPoint, wrap_array
from skewlab.types import FloatArray

logger = logging.getLogger(__name__)

LEAF_TOLERANCE = 1e-9


class PcfValue(ImmutableEvolvableModel):
    value: float
    error_bound: float
    terms_used: int

    def __add__(self, other: "PcfValue") -> "PcfValue":
        return PcfValue(
            value=self.value + other.value,
            error_bound=self.error_bound + other.error_bound,
            terms_used=self.terms_used + other.terms_used,
        )

    def __neg__(self) -> "PcfValue":
        return self.evolve_self(value=-self.value)


class BatchPcf(ImmutableEvolvableModel):
    values: FloatArray
    error_bound: float
    terms_used: int


def terms_needed(lipschitz: float, displacement: float, contraction: float, tol: float, first_index: int) -> Tuple[int, float]:
    """
    Smallest number of terms whose geometric tail Lip·|d|·μ^{n+first_index}/(1−μ) is at most ``tol``.

    :return: Number of terms and the resulting tail bound
    """
    if tol <= 0 or not math.isfinite(tol):
        raise InvalidInput("tolerance must be positive, got {}".format(tol))
    scale = lipschitz * abs(displacement) / (1.0 - contraction)
    if scale == 0.0:
        return 1, 0.0
    n = max(1, math.ceil(math.log(tol / scale) / math.log(contraction)) - first_index)
    while scale * contraction ** (n + first_index) > tol:
        n += 1
    if n > config.PCF_TERM_BUDGET:
        raise BudgetExceeded(
            "tolerance {} needs {} terms, over the budget of {}".format(tol, n, config.PCF_TERM_BUDGET)
        )
    return n, scale * contraction ** (n + first_index)


def _sum_along_orbit(
    phi: FourierCocycle,
    A: HyperbolicAutomorphism,
    kind: LegKind,
    starts: FloatArray,
    displacements: FloatArray,
    tol: float,
) -> BatchPcf:
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    displacements = np.broadcast_to(np.asarray(displacements, dtype=float), (starts.shape[0],))
    largest = float(np.max(np.abs(displacements))) if displacements.size else 0.0

    if kind == "stable":
        contraction, first_index, matrix = A.contraction, 0, A.matrix.astype(float)
        rate = A.lambda_s
    else:
        contraction, first_index, matrix = 1.0 / A.expansion, 1, A.inverse_matrix.astype(float)
        rate = 1.0 / A.lambda_u

    n, tail = terms_needed(lipschitz_bound(phi), largest, contraction, tol, first_index)
    direction = A.direction(kind)
    offsets = displacements[:, None] * direction[None, :]
    base = starts.copy()
    totals = np.zeros(starts.shape[0])

    if largest > 0.0:
        if kind == "unstable":
            base = wrap_array(base @ matrix.T)
            offsets = offsets * rate
        for _ in range(n):
            partner = phi.evaluate_points(base + offsets)
            own = phi.evaluate_points(base)
            totals += partner - own if kind == "stable" else own - partner
            base = wrap_array(base @ matrix.T)
            offsets = offsets * rate

    logger.debug("%s pcf: %d terms, tail %.3e, %d pairs", kind, n, tail, starts.shape[0])
    return BatchPcf(values=totals, error_bound=tail * (1.0 + config.ROUNDOFF_SLACK), terms_used=n)


def _leaf_displacement(A: HyperbolicAutomorphism, kind: LegKind, x: TorusPoint, x_prime: TorusPoint) -> float:
    delta = x_prime.lift() - x.lift()
    delta -= np.round(delta)
    direction = A.direction(kind)
    along = float(delta @ direction)
    across = np.linalg.norm(delta - along * direction)
    if across > LEAF_TOLERANCE:
        raise InvalidInput("{} is not on the local {} leaf of {}".format(x_prime, kind, x))
    return along


def pcf_stable(
    phi: FourierCocycle,
    A: HyperbolicAutomorphism,
    x: TorusPoint,
    x_prime: TorusPoint,
    tol: float,
    displacement: Optional[float] = None,
) -> PcfValue:
    """
    PCF of a stable pair, Σ_{i≥0} φ(A^i x') − φ(A^i x).

    :param displacement: Signed leafwise length from ``x`` to ``x_prime`` along v_s; when omitted it is recovered
        from the minimal-image difference, which only works for short legs
    :raises BudgetExceeded: If more than ``PCF_TERM_BUDGET`` terms are needed
    """
    d = _leaf_displacement(A, "stable", x, x_prime) if displacement is None else displacement
    batch = _sum_along_orbit(phi, A, "stable", x.lift(), np.array([d]), tol)
    return PcfValue(value=float(batch.values[0]), error_bound=batch.error_bound, terms_used=batch.terms_used)


def pcf_unstable(
    phi: FourierCocycle,
    A: HyperbolicAutomorphism,
    x: TorusPoint,
    x_prime: TorusPoint,
    tol: float,
    displacement: Optional[float] = None,
) -> PcfValue:
    """
    PCF of an unstable pair, Σ_{i≥1} φ(A^{-i} x) − φ(A^{-i} x').
    """
    d = _leaf_displacement(A, "unstable", x, x_prime) if displacement is None else displacement
    batch = _sum_along_orbit(phi, A, "unstable", x.lift(), np.array([d]), tol)
    return PcfValue(value=float(batch.values[0]), error_bound=batch.error_bound, terms_used=batch.terms_used)


def pcf_batch(
    phi: FourierCocycle,
    A: HyperbolicAutomorphism,
    kind: LegKind,
    starts: FloatArray,
    displacements: FloatArray,
    tol: float,
) -> BatchPcf:
    """
    Vectorized PCF for many legs of one kind; a single truncation index (from the largest displacement) serves
    every leg so the error bound is common.
    """
    return _sum_along_orbit(phi, A, kind, starts, displacements, tol)


def pcf_leg(phi: FourierCocycle, A: HyperbolicAutomorphism, leg: SuLeg, tol: float) -> PcfValue:
    compute = pcf_stable if leg.kind == "stable" else pcf_unstable
    return compute(phi, A, leg.start, leg.end, tol, displacement=leg.displacement)


def pcf_path(phi: FourierCocycle, A: HyperbolicAutomorphism, path: SuPath, tol: float) -> PcfValue:
    """
    Sum of the leg PCFs; each leg gets ``tol / len(legs)``.
    """
    if not path.legs:
        return PcfValue(value=0.0, error_bound=0.0, terms_used=1)
    per_leg = tol / len(path.legs)
    total = PcfValue(value=0.0, error_bound=0.0, terms_used=0)
    for leg in path.legs:
        total = total + pcf_leg(phi, A, leg, per_leg)
    return total


def lifted_leaf_point(
    phi: FourierCocycle, A: HyperbolicAutomorphism, point: Tuple[TorusPoint, float], leg: SuLeg, tol: float
) -> Tuple[TorusPoint, float]:
    """
    The point of the lifted leaf through ``(x, t)`` over the end of ``leg``.

    With f_φ(p, t) = (Ap, t + φ(p)) orbits of (x, t) and (x', t') converge exactly when t' = t − PCF_{(x,x')}φ.
    """
    x, t = point
    if leg.start != x:
        raise InvalidInput("leg starts at {} but the point is over {}".format(leg.start, x))
    return leg.end, t - pcf_leg(phi, A, leg, tol).value
