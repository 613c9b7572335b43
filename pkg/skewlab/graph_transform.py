"""
Lifted unstable leaves of the skew product as the fixed point of a graph transform.

Over a fixed point ``base`` of A the unstable leaf is parametrized by u ↦ base + u·v_u. A section over it is a
function g with g(0) = 0 and the transform pulls it back one step along the leaf:

    T(g)(u) = g(u/λ_u) + φ(base + (u/λ_u)·v_u) − φ(base)

T is a contraction in the Hölder α-norm with factor |λ_u|^{-α}; its fixed point is the lifted leaf through
(base, 0) and serves as an oracle independent of the PCF series.
"""
import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np
from pydantic import model_validator
from scipy.interpolate import CubicSpline, PchipInterpolator

from skewlab import config
from skewlab.cocycle import FourierCocycle
from skewlab.entities import ImmutableEvolvableModel
from skewlab.exceptions import InvalidBase, InvalidInput, NonConvergence
from skewlab.pcf import pcf_batch
from skewlab.torus import HyperbolicAutomorphism, TorusPoint, torus_distance, wrap_array
from skewlab.types import FloatArray

logger = logging.getLogger(__name__)

NOISE_FLOOR = 1e-13
FIXED_POINT_TOLERANCE = 1e-12


class LeafGraph(ImmutableEvolvableModel):
    """
    Samples of g over the uniform grid of ``samples.size`` leaf parameters in [−radius, radius]; the count is odd
    so that u = 0 is a node.
    """

    base: TorusPoint
    radius: float
    samples: FloatArray

    @model_validator(mode="after")
    def _normalized(self) -> "LeafGraph":
        if self.radius <= 0:
            raise ValueError("leaf radius must be positive, got {}".format(self.radius))
        if self.samples.ndim != 1 or self.samples.size < 3 or self.samples.size % 2 == 0:
            raise ValueError("a leaf graph needs an odd number of samples, got shape {}".format(self.samples.shape))
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("leaf graph samples must be finite")
        if abs(self.samples[self.samples.size // 2]) > 1e-12:
            raise ValueError("g(0) must vanish, got {}".format(self.samples[self.samples.size // 2]))
        return self

    @classmethod
    def zero(cls, base: TorusPoint, radius: Optional[float] = None, samples: Optional[int] = None) -> "LeafGraph":
        radius = config.LEAF_RADIUS if radius is None else radius
        count = (config.LEAF_SAMPLES if samples is None else samples) + 1
        return cls(base=base, radius=radius, samples=np.zeros(count))

    @classmethod
    def from_function(
        cls,
        base: TorusPoint,
        fn: Callable[[FloatArray], FloatArray],
        radius: Optional[float] = None,
        samples: Optional[int] = None,
    ) -> "LeafGraph":
        """
        Sample ``fn`` over the leaf parameters; ``fn(0)`` is subtracted so that g(0) = 0.
        """
        template = cls.zero(base, radius, samples)
        values = np.asarray(fn(template.parameters), dtype=float)
        return template.evolve_self(samples=values - values[values.size // 2])

    @property
    def parameters(self) -> FloatArray:
        return np.linspace(-self.radius, self.radius, self.samples.size)

    def interpolant(self) -> PchipInterpolator:
        return PchipInterpolator(self.parameters, self.samples)

    def holder_norm(self, alpha: float) -> float:
        """
        max |g(u)| / |u|^α over the nonzero grid parameters.
        """
        if not 0.0 < alpha <= 1.0:
            raise InvalidInput("Hölder exponent must lie in (0, 1], got {}".format(alpha))
        u = self.parameters
        mask = u != 0.0
        return float(np.max(np.abs(self.samples[mask]) / np.abs(u[mask]) ** alpha))

    def distance(self, other: "LeafGraph") -> float:
        return float(np.max(np.abs(self.samples - other.samples)))


class FixedPointRun(ImmutableEvolvableModel):
    graph: LeafGraph
    rate_estimate: float
    iterations: int
    distances: Tuple[float, ...]


def leaf_points(A: HyperbolicAutomorphism, base: TorusPoint, parameters: FloatArray) -> FloatArray:
    return wrap_array(base.lift()[None, :] + np.asarray(parameters, dtype=float)[:, None] * A.direction("unstable")[None, :])


def _check_fixed(A: HyperbolicAutomorphism, base: TorusPoint) -> None:
    if torus_distance(A.apply(base), base) > FIXED_POINT_TOLERANCE:
        raise InvalidBase("{} is not a fixed point of the base map".format(base))


def graph_transform_step(phi: FourierCocycle, A: HyperbolicAutomorphism, g: LeafGraph) -> LeafGraph:
    """
    One application of T, resampling g(u/λ_u) with monotone cubic interpolation.

    :raises InvalidBase: If ``g.base`` is not fixed by A
    """
    _check_fixed(A, g.base)
    pulled = g.parameters / A.lambda_u
    increments = phi.evaluate_points(leaf_points(A, g.base, pulled)) - phi(g.base)
    samples = g.interpolant()(pulled) + increments
    samples[samples.size // 2] = 0.0
    return g.evolve_self(samples=samples)


def iterate_to_fixed_point(
    phi: FourierCocycle,
    A: HyperbolicAutomorphism,
    g0: LeafGraph,
    max_iter: int = 200,
    tol: float = FIXED_POINT_TOLERANCE,
) -> FixedPointRun:
    """
    Iterate T until two successive graphs are within ``tol`` in the sup norm.

    The rate estimate is the geometric mean of the ratios of successive distances over the second half of the
    run, ignoring distances below the roundoff floor; it is NaN when the start was already a fixed point.

    :raises NonConvergence: If ``max_iter`` steps do not reach ``tol``
    """
    current = g0
    distances = []
    for iteration in range(1, max_iter + 1):
        following = graph_transform_step(phi, A, current)
        distances.append(following.distance(current))
        current = following
        if distances[-1] <= tol:
            rate = _rate_estimate(distances)
            logger.debug("graph transform converged after %d steps, rate %.4f", iteration, rate)
            return FixedPointRun(graph=current, rate_estimate=rate, iterations=iteration, distances=tuple(distances))
    raise NonConvergence(
        "graph transform did not reach {} in {} steps, last distance {}".format(tol, max_iter, distances[-1])
    )


def _rate_estimate(distances: list) -> float:
    ratios = [
        later / earlier
        for earlier, later in zip(distances, distances[1:])
        if earlier > NOISE_FLOOR and later > NOISE_FLOOR
    ]
    if not ratios:
        return math.nan
    tail = ratios[len(ratios) // 2:]
    return float(np.exp(np.mean(np.log(tail))))


def lifted_leaf_heights(
    phi: FourierCocycle, A: HyperbolicAutomorphism, base: TorusPoint, parameters: FloatArray, tol: float
) -> FloatArray:
    """
    Fiber heights of the lifted unstable leaf through (base, 0) from the PCF series: t(u) = −PCF(base, base + u·v_u).
    """
    parameters = np.asarray(parameters, dtype=float)
    starts = np.broadcast_to(base.lift(), (parameters.size, 2)).copy()
    return -pcf_batch(phi, A, "unstable", starts, parameters, tol).values


def resampling_error(g: LeafGraph) -> float:
    """
    Size of the resampling error: the largest gap between the monotone cubic interpolant and the cubic spline of
    the same samples, at the cell midpoints.
    """
    u = g.parameters
    midpoints = (u[:-1] + u[1:]) / 2.0
    return float(np.max(np.abs(g.interpolant()(midpoints) - CubicSpline(u, g.samples)(midpoints))))
