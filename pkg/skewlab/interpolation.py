"""
Polynomial interpolation with coefficient bounds on the scale of the nodes.

For nodes with R = max |z_j| and η = min |z_j − z_j'| the interpolant Σ c_p x^p of values b_j satisfies
Σ |c_p| R^p ≤ C_0(B)·sup |b_j| whenever R/η ≤ B. C_0(B) is calibrated on a randomized suite and capped by the
closed-form Lagrange bound (4B)^ℓ/ℓ!.
"""
import functools
import logging
import math
import zlib
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import model_validator

from skewlab import config
from skewlab.entities import ImmutableEvolvableModel
from skewlab.exceptions import GridDegenerate, InvalidInput, SingularSystem
from skewlab.helpers import make_rng
from skewlab.types import FloatArray

logger = logging.getLogger(__name__)


class Interpolation1D(ImmutableEvolvableModel):
    coefficients: FloatArray
    R: float
    eta: float
    coefficient_sum: float
    sup_value: float
    constant: float

    @property
    def bound_holds(self) -> bool:
        return self.coefficient_sum <= self.constant * self.sup_value * (1.0 + config.ROUNDOFF_SLACK)

    def __call__(self, x: FloatArray) -> FloatArray:
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), self.coefficients)


class InterpolationGrid(ImmutableEvolvableModel):
    """
    Points z_{j,k} near the product grid (x_j, y_k), 0 ≤ j, k ≤ ℓ.
    """

    points: FloatArray
    axis_x: FloatArray
    axis_y: FloatArray
    R: float
    eta: float
    ratio_bound: float

    @model_validator(mode="after")
    def _shape(self) -> "InterpolationGrid":
        size = self.axis_x.size
        if self.axis_y.size != size or self.points.shape != (size, size, 2):
            raise ValueError("grid points must have shape ({0}, {0}, 2), got {1}".format(size, self.points.shape))
        return self

    @classmethod
    def create(
        cls,
        points: FloatArray,
        axis_x: Sequence[float],
        axis_y: Sequence[float],
        ratio_bound: Optional[float] = None,
    ) -> "InterpolationGrid":
        """
        :raises SingularSystem: If two points coincide
        :raises GridDegenerate: If R/η exceeds ``ratio_bound``
        """
        points = np.asarray(points, dtype=float)
        flat = points.reshape(-1, 2)
        R, eta = scale_and_separation(flat)
        bound = config.INTERPOLATION_RATIO_BOUND if ratio_bound is None else ratio_bound
        if R / eta > bound:
            raise GridDegenerate("R/η = {} exceeds the ratio bound {}".format(R / eta, bound))
        return cls(
            points=points,
            axis_x=np.asarray(axis_x, dtype=float),
            axis_y=np.asarray(axis_y, dtype=float),
            R=R,
            eta=eta,
            ratio_bound=bound,
        )

    @classmethod
    def product(cls, axis_x: Sequence[float], axis_y: Sequence[float], ratio_bound: Optional[float] = None) -> "InterpolationGrid":
        x, y = np.meshgrid(np.asarray(axis_x, dtype=float), np.asarray(axis_y, dtype=float), indexing="ij")
        return cls.create(np.stack([x, y], axis=-1), axis_x, axis_y, ratio_bound)

    @property
    def order(self) -> int:
        return self.axis_x.size - 1

    @property
    def perturbation(self) -> float:
        """
        max |z_{j,k} − (x_j, y_k)| / η
        """
        x, y = np.meshgrid(self.axis_x, self.axis_y, indexing="ij")
        offsets = self.points - np.stack([x, y], axis=-1)
        return float(np.max(np.hypot(offsets[..., 0], offsets[..., 1]))) / self.eta


class RectInterpolation(ImmutableEvolvableModel):
    """
    c_pq of Σ_{p,q ≤ ℓ} c_pq x^p y^q.
    """

    coefficients: FloatArray
    R: float
    coefficient_sum: float
    sup_value: float
    condition: float
    perturbation: float

    def __call__(self, points: FloatArray) -> FloatArray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.polynomial.polynomial.polyval2d(points[:, 0], points[:, 1], self.coefficients)

    def low_degree(self, order: int) -> FloatArray:
        """
        The coefficients with p + q ≤ ``order``; the others are zeroed.
        """
        p, q = np.indices(self.coefficients.shape)
        return np.where(p + q <= order, self.coefficients, 0.0)


def scale_and_separation(points: FloatArray) -> Tuple[float, float]:
    """
    R = max |z| and η = min distance between distinct entries.

    :raises SingularSystem: If two points coincide
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    gaps = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)
    gaps[np.diag_indices(len(points))] = np.inf
    eta = float(np.min(gaps))
    if eta == 0.0:
        raise SingularSystem("interpolation nodes must be distinct")
    return float(np.max(np.linalg.norm(points, axis=-1))), eta


def lagrange_bound(order: int, B: float) -> float:
    """
    (4B)^ℓ/ℓ!: each Lagrange basis polynomial has coefficient sum at most (2R)^ℓ over a denominator of at least
    j!(ℓ−j)!η^ℓ.
    """
    return (4.0 * B) ** order / math.factorial(order)


def interpolation_norm(nodes: FloatArray) -> float:
    """
    max over |b| ≤ 1 of Σ |c_p| R^p, bounded by Σ_p R^p Σ_j |(V^{-1})_{pj}| in scaled coordinates.
    """
    nodes = np.asarray(nodes, dtype=float)
    R, _ = scale_and_separation(nodes)
    inverse = np.linalg.inv(np.vander(nodes / R, increasing=True))
    return float(np.sum(np.abs(inverse)))


def _random_nodes(order: int, B: float, rng: np.random.Generator) -> FloatArray:
    while True:
        nodes = rng.uniform(-1.0, 1.0, size=order + 1)
        R, eta = scale_and_separation(nodes)
        if R / eta <= B:
            return nodes


def calibrate_interpolation_constant(
    order: int, B: float, trials: Optional[int] = None, version: Optional[str] = None
) -> float:
    """
    The calibrated C_0(B): the largest :func:`interpolation_norm` over ``trials`` random node sets with R/η ≤ B,
    times ``CALIBRATION_SAFETY_FACTOR``, capped by :func:`lagrange_bound`. The suite is seeded from
    (order, B, version), so the table is reproducible per version.
    """
    if order < 1 or B < 1.0:
        raise InvalidInput("calibration needs order >= 1 and B >= 1, got {} and {}".format(order, B))
    return _calibrated(
        order,
        float(B),
        config.CALIBRATION_TRIALS if trials is None else trials,
        config.CALIBRATION_VERSION if version is None else version,
        config.CALIBRATION_SAFETY_FACTOR,
    )


@functools.lru_cache(maxsize=64)
def _calibrated(order: int, B: float, trials: int, version: str, safety: float) -> float:
    seed = zlib.crc32("{}:{!r}:{}".format(order, float(B), version).encode())
    rng = make_rng(seed)
    observed = max(interpolation_norm(_random_nodes(order, B, rng)) for _ in range(trials))
    constant = min(safety * observed, lagrange_bound(order, B))
    logger.debug("C_0(ℓ=%d, B=%g) = %.6g (observed %.6g)", order, B, constant, observed)
    return constant


def interpolate_1d(nodes: Sequence[float], values: Sequence[float], B: Optional[float] = None) -> Interpolation1D:
    """
    The unique polynomial of degree ≤ ℓ through (z_j, b_j), with its coefficient bound report.

    :raises SingularSystem: If two nodes coincide
    :raises GridDegenerate: If R/η exceeds B
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.shape != values.shape or nodes.ndim != 1 or nodes.size < 1:
        raise InvalidInput("nodes and values must be matching 1-D arrays")
    bound = config.INTERPOLATION_RATIO_BOUND if B is None else B
    order = nodes.size - 1
    if order == 0:
        return Interpolation1D(
            coefficients=values.copy(),
            R=float(abs(nodes[0])),
            eta=math.inf,
            coefficient_sum=float(abs(values[0])),
            sup_value=float(abs(values[0])),
            constant=1.0,
        )
    R, eta = scale_and_separation(nodes)
    if R / eta > bound:
        raise GridDegenerate("R/η = {} exceeds B = {}".format(R / eta, bound))
    scaled = np.linalg.solve(np.vander(nodes / R, increasing=True), values)
    coefficients = scaled / R ** np.arange(order + 1)
    return Interpolation1D(
        coefficients=coefficients,
        R=R,
        eta=eta,
        coefficient_sum=float(np.sum(np.abs(scaled))),
        sup_value=float(np.max(np.abs(values))),
        constant=calibrate_interpolation_constant(order, float(bound)),
    )


def interpolate_rect(grid: InterpolationGrid, values: FloatArray, strict: bool = True) -> RectInterpolation:
    """
    The unique Σ_{p,q ≤ ℓ} c_pq x^p y^q with ℘(z_{j,k}) = b_{j,k}, solved directly in coordinates scaled by R.

    :param strict: Reject grids farther than ``PERTURBATION_THETA``·η from the product grid
    :raises GridDegenerate: If the perturbation or the condition number is out of range
    """
    values = np.asarray(values, dtype=float)
    size = grid.order + 1
    if values.shape != (size, size):
        raise InvalidInput("expected {0}×{0} values, got {1}".format(size, values.shape))
    if strict and grid.perturbation > config.PERTURBATION_THETA:
        raise GridDegenerate(
            "grid is {:.3g}·η from the product grid, above θ_0 = {}".format(grid.perturbation, config.PERTURBATION_THETA)
        )
    scaled_points = grid.points.reshape(-1, 2) / grid.R
    matrix = np.polynomial.polynomial.polyvander2d(scaled_points[:, 0], scaled_points[:, 1], [grid.order, grid.order])
    condition = float(np.linalg.cond(matrix))
    if not math.isfinite(condition) or condition > config.GRID_CONDITION_LIMIT:
        raise GridDegenerate("interpolation matrix condition {:.3g} exceeds {:.3g}".format(condition, config.GRID_CONDITION_LIMIT))
    scaled = np.linalg.solve(matrix, values.reshape(-1)).reshape(size, size)
    p, q = np.indices((size, size))
    return RectInterpolation(
        coefficients=scaled / grid.R ** (p + q),
        R=grid.R,
        coefficient_sum=float(np.sum(np.abs(scaled))),
        sup_value=float(np.max(np.abs(values))),
        condition=condition,
        perturbation=grid.perturbation,
    )
