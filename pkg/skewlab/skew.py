"""
The skew product f_φ(p, t) = (Ap, t + φ(p)) on T² × S¹ (or T² × R) and the partial hyperbolicity and bunching
inequalities for constant rates ν, ν̂, γ, γ̂.
"""
import math
from typing import List, Literal, Tuple

from skewlab.cocycle import FourierCocycle, evaluate
from skewlab.entities import ImmutableEvolvableModel
from skewlab.exceptions import InvalidRates
from skewlab.pcf import lifted_leaf_point
from skewlab.torus import HyperbolicAutomorphism, SuLeg, TorusPoint

FiberKind = Literal["circle", "line"]
SkewPoint = Tuple[TorusPoint, float]


class SkewSystem(ImmutableEvolvableModel):
    base: HyperbolicAutomorphism
    cocycle: FourierCocycle
    fiber: FiberKind = "circle"


class BunchingRates(ImmutableEvolvableModel):
    nu: float
    nu_hat: float
    gamma: float
    gamma_hat: float

    def model_post_init(self, __context: object) -> None:
        if min(self.nu, self.nu_hat, self.gamma, self.gamma_hat) <= 0:
            raise InvalidRates("rates must be positive: {}".format(self))


class InequalityCheck(ImmutableEvolvableModel):
    name: str
    lhs: float
    rhs: float
    holds: bool
    margin: float
    strict: bool = True


class BunchingReport(ImmutableEvolvableModel):
    kind: str
    order: float
    checks: Tuple[InequalityCheck, ...]

    @property
    def holds(self) -> bool:
        return all(check.holds for check in self.checks)

    @property
    def failed(self) -> List[str]:
        return [check.name for check in self.checks if not check.holds]


class HolonomyExponent(ImmutableEvolvableModel):
    """
    θ_sup is a supremum that is never attained, every θ < θ_sup works.
    """

    theta_sup: float
    alpha: float
    binding: str
    open_supremum: bool = True


def _fiber(S: SkewSystem, t: float) -> float:
    return t % 1.0 if S.fiber == "circle" else t


def apply_skew(S: SkewSystem, point: SkewPoint) -> SkewPoint:
    p, t = point
    return S.base.apply(p), _fiber(S, t + evaluate(S.cocycle, p))


def apply_skew_inverse(S: SkewSystem, point: SkewPoint) -> SkewPoint:
    p, t = point
    previous = S.base.apply_inverse(p)
    return previous, _fiber(S, t - evaluate(S.cocycle, previous))


def skew_orbit(S: SkewSystem, point: SkewPoint, n: int) -> List[SkewPoint]:
    """
    ``n`` forward steps (backward when ``n`` is negative), including the starting point.
    """
    step = apply_skew if n >= 0 else apply_skew_inverse
    points = [point]
    for _ in range(abs(n)):
        points.append(step(S, points[-1]))
    return points


def rates(S: SkewSystem) -> BunchingRates:
    """
    The fiber is acted on by translations, so γ = γ̂ = 1 and ν = ν̂ = 1/|λ_u|.
    """
    nu = 1.0 / S.base.expansion
    return BunchingRates(nu=nu, nu_hat=nu, gamma=1.0, gamma_hat=1.0)


def _strict(name: str, lhs: float, rhs: float) -> InequalityCheck:
    return InequalityCheck(name=name, lhs=lhs, rhs=rhs, holds=lhs < rhs, margin=rhs - lhs)


def _weak(name: str, lhs: float, rhs: float) -> InequalityCheck:
    return InequalityCheck(name=name, lhs=lhs, rhs=rhs, holds=lhs <= rhs, margin=rhs - lhs, strict=False)


def check_partial_hyperbolicity(r: BunchingRates) -> BunchingReport:
    checks = (
        _strict("ν < 1", r.nu, 1.0),
        _strict("ν̂ < 1", r.nu_hat, 1.0),
        _strict("ν < γ", r.nu, r.gamma),
        _weak("γ <= γ̂^-1", r.gamma, 1.0 / r.gamma_hat),
        _strict("γ̂^-1 < ν̂^-1", 1.0 / r.gamma_hat, 1.0 / r.nu_hat),
    )
    return BunchingReport(kind="partially_hyperbolic", order=0.0, checks=checks)


def check_center_bunched(r: BunchingRates) -> BunchingReport:
    return BunchingReport(
        kind="center_bunched",
        order=1.0,
        checks=(_strict("max(ν, ν̂) < γγ̂", max(r.nu, r.nu_hat), r.gamma * r.gamma_hat),),
    )


def check_r_bunched(r: BunchingRates, order: float) -> BunchingReport:
    """
    Partial hyperbolicity plus ν < γ^r, ν̂ < γ̂^r, ν < γγ̂^r and ν̂ < γ̂γ^r. Order 0 is partial hyperbolicity.
    """
    if order < 0:
        raise InvalidRates("bunching order must be non-negative, got {}".format(order))
    base = check_partial_hyperbolicity(r).checks
    if order == 0:
        return BunchingReport(kind="r_bunched", order=0.0, checks=base)
    checks = base + (
        _strict("ν < γ^r", r.nu, r.gamma ** order),
        _strict("ν̂ < γ̂^r", r.nu_hat, r.gamma_hat ** order),
        _strict("ν < γγ̂^r", r.nu, r.gamma * r.gamma_hat ** order),
        _strict("ν̂ < γ̂γ^r", r.nu_hat, r.gamma_hat * r.gamma ** order),
    )
    return BunchingReport(kind="r_bunched", order=float(order), checks=checks)


def check_strong_r_bunched(r: BunchingRates, order: float) -> BunchingReport:
    """
    Partial hyperbolicity plus max(ν, ν̂) < γ^r, max(ν, ν̂) < γ̂^r and the r-bunching pair
    ν < γγ̂^r, ν̂ < γ̂γ^r.
    """
    if order < 0:
        raise InvalidRates("bunching order must be non-negative, got {}".format(order))
    worst = max(r.nu, r.nu_hat)
    checks = check_partial_hyperbolicity(r).checks + (
        _strict("max(ν, ν̂) < γ^r", worst, r.gamma ** order),
        _strict("max(ν, ν̂) < γ̂^r", worst, r.gamma_hat ** order),
        _strict("ν < γγ̂^r", r.nu, r.gamma * r.gamma_hat ** order),
        _strict("ν̂ < γ̂γ^r", r.nu_hat, r.gamma_hat * r.gamma ** order),
    )
    return BunchingReport(kind="strong_r_bunched", order=float(order), checks=checks)


def holonomy_exponent(r: BunchingRates, alpha: float) -> HolonomyExponent:
    """
    Supremum of θ ∈ (0, α] with ν < (νν̂)^{θ/α} and ν/γ < (νν̂)^{θ/α}.

    Since νν̂ < 1, each constraint reads θ < α·log(bound)/log(νν̂).
    """
    if not 0.0 < alpha <= 1.0:
        raise InvalidRates("α must lie in (0, 1], got {}".format(alpha))
    if not check_partial_hyperbolicity(r).holds:
        raise InvalidRates("rates are not partially hyperbolic: {}".format(r))
    product = r.nu * r.nu_hat
    if not 0.0 < product < 1.0:
        raise InvalidRates("log(νν̂) is degenerate for νν̂ = {}".format(product))

    denominator = math.log(product)
    candidates = [
        ("α", alpha),
        ("ν < (νν̂)^{θ/α}", alpha * math.log(r.nu) / denominator),
        ("ν/γ < (νν̂)^{θ/α}", alpha * math.log(r.nu / r.gamma) / denominator),
    ]
    binding, theta = min(candidates, key=lambda item: item[1])
    if theta <= 0:
        raise InvalidRates("no positive exponent satisfies the constraints for {}".format(r))
    return HolonomyExponent(theta_sup=theta, alpha=alpha, binding=binding)


def stable_gap(S: SkewSystem, x: TorusPoint, leg: SuLeg, n: int, tol: float = 1e-13) -> float:
    """
    Fiber distance after ``n`` steps between the orbits of (x, 0) and of its lifted stable leaf point over the end
    of ``leg``. Tends to zero when the leaf is computed correctly.
    """
    start: SkewPoint = (x, 0.0)
    partner = lifted_leaf_point(S.cocycle, S.base, start, leg, tol)
    t_start, t_partner = 0.0, partner[1]
    p = x.lift()
    offset = leg.displacement * S.base.direction("stable")
    matrix = S.base.matrix.astype(float)
    for _ in range(n):
        t_start += S.cocycle.evaluate_points(p[None, :])[0]
        t_partner += S.cocycle.evaluate_points((p + offset)[None, :])[0]
        p = (matrix @ p) % 1.0
        offset = offset * S.base.lambda_s
    return abs(t_partner - t_start)
