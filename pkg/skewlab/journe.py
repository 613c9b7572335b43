"""
Limit polynomials from grids of transverse plaques in R².

A vertical plaque through z is {z + (β^V_z(t), t)} and a horizontal one is {z + (s, β^H_z(s))}, with
β_z(0) = 0 and flat plaques through the origin. The base grid uses the vertical plaques through (r^j, 0) and the
horizontal plaques through (0, r^k); the set S_{j,k} is the (ℓ+1)×(ℓ+1) rectangle

    {0, x_j, …, x_{j+ℓ−1}} × {0, y_k, …, y_{k+ℓ−1}}

realized by plaque intersections, and S_{2k} = S_{k,k}, S_{2k+1} = S_{k,k+1}. Interpolating ψ on S_m and keeping
the terms of degree ≤ ℓ gives polynomials ℘̄_m which converge when ψ is regular enough.
"""
import logging
import math
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.stats import linregress

from skewlab import config
from skewlab.entities import ImmutableEvolvableModel
from skewlab.exceptions import DomainExhausted, InvalidInput, ResolutionExhausted
from skewlab.interpolation import InterpolationGrid, RectInterpolation, interpolate_rect
from skewlab.jets import JetPoly
from skewlab.types import FloatArray

logger = logging.getLogger(__name__)

PLAQUE_DOMAIN = 1.0
RESOLUTION_FLOOR = 1e-14
RESIDUAL_FLOOR = 1e-11
Function2D = Callable[[FloatArray], FloatArray]
PlaqueFamily = Literal["flat", "bent"]


class PlaquePair(ImmutableEvolvableModel):
    """
    β^H_z(s) = ε·(z_1 + z_2)·s² and β^V_z(t) = ε·(z_1 − z_2)·t²; ε = 0 gives the flat pair of coordinate lines.
    """

    epsilon: float = 0.0

    @classmethod
    def flat(cls) -> "PlaquePair":
        return cls()

    @classmethod
    def bent(cls, epsilon: float) -> "PlaquePair":
        return cls(epsilon=epsilon)

    def beta_h(self, z: FloatArray, s: float) -> float:
        return self.epsilon * (z[0] + z[1]) * s * s

    def beta_v(self, z: FloatArray, t: float) -> float:
        return self.epsilon * (z[0] - z[1]) * t * t

    def horizontal(self, z: FloatArray, s: float) -> FloatArray:
        return np.asarray(z, dtype=float) + np.array([s, self.beta_h(z, s)])

    def vertical(self, z: FloatArray, t: float) -> FloatArray:
        return np.asarray(z, dtype=float) + np.array([self.beta_v(z, t), t])


def plaque_bracket(plaques: PlaquePair, vertical_through: FloatArray, horizontal_through: FloatArray) -> FloatArray:
    """
    The intersection of the vertical plaque through ``vertical_through`` with the horizontal plaque through
    ``horizontal_through``, found by a 1-D root search on the vertical parameter.

    :raises DomainExhausted: If the plaques do not meet inside the plaque domain
    """
    z1 = np.asarray(vertical_through, dtype=float)
    z2 = np.asarray(horizontal_through, dtype=float)

    def mismatch(t: float) -> float:
        s = z1[0] + plaques.beta_v(z1, t) - z2[0]
        return z1[1] + t - z2[1] - plaques.beta_h(z2, s)

    if plaques.epsilon == 0.0:
        return np.array([z1[0], z2[1]])
    low, high = -PLAQUE_DOMAIN, PLAQUE_DOMAIN
    if mismatch(low) * mismatch(high) > 0:
        raise DomainExhausted("plaques through {} and {} do not meet inside the domain".format(z1.tolist(), z2.tolist()))
    t = brentq(mismatch, low, high, xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=200)
    return plaques.vertical(z1, t)


class JourneGrid(ImmutableEvolvableModel):
    m: int
    j: int
    k: int
    grid: InterpolationGrid
    substituted: Optional[int] = None
    radius_bound: float
    ratio_bound: float

    @property
    def R(self) -> float:
        return self.grid.R

    @property
    def eta(self) -> float:
        return self.grid.eta

    @property
    def ratio(self) -> float:
        return self.grid.R / self.grid.eta

    @property
    def radius_ok(self) -> bool:
        return self.R <= self.radius_bound

    @property
    def ratio_ok(self) -> bool:
        return self.ratio <= self.ratio_bound


def journe_ratio_bound(r: float, order: int) -> float:
    """
    6·r^{2−ℓ}. The exponent 2 − ℓ is the one for which geometric grids satisfy the bound.
    """
    return 6.0 * r ** (2 - order)


def substitution_index(plaques: PlaquePair, r: float, w: FloatArray, max_index: int) -> int:
    """
    j ≥ 1 minimizing |[w, 0] − r^j| where [w, 0] is where the vertical plaque through w meets the horizontal axis.
    """
    foot = plaque_bracket(plaques, w, np.zeros(2))[0]
    indices = np.arange(1, max_index + 1)
    return int(indices[np.argmin(np.abs(foot - r ** indices))])


def in_cone(points: FloatArray, kappa: float, swapped: bool = False) -> FloatArray:
    """
    Membership in K_κ = {|v| ≤ κ|u|}, or in K'_κ = {|u| ≤ κ|v|} when ``swapped``.
    """
    points = np.atleast_2d(points)
    u, v = (points[:, 1], points[:, 0]) if swapped else (points[:, 0], points[:, 1])
    return np.abs(v) <= kappa * np.abs(u)


def build_grids(
    plaques: PlaquePair,
    r: float,
    order: int,
    w: Optional[Sequence[float]],
    m_max: int,
    m_min: int = 2,
    kappa: Optional[float] = None,
) -> List[JourneGrid]:
    """
    The rectangles S_m for m_min ≤ m ≤ m_max, with R_m, η_m and the checks R_m ≤ 3r^{(m−1)/2} and
    R_m/η_m ≤ 6r^{2−ℓ}. When ``w`` is given, the vertical plaque of index j(w) is replaced by the one through w.

    :raises InvalidInput: If r ∉ (0, 1), ℓ < 1, m_min < 2 or w lies outside the cone
    :raises ResolutionExhausted: If the grid scale falls below floating point resolution
    :raises DomainExhausted: If two plaques fail to intersect
    """
    if not 0.0 < r < 1.0 or order < 1 or m_min < 2 or m_max < m_min:
        raise InvalidInput("invalid grid request r={}, ℓ={}, m in [{}, {}]".format(r, order, m_min, m_max))
    kappa = config.CONE_APERTURE if kappa is None else kappa
    deepest = m_max // 2 + 1 + order
    if r ** deepest < RESOLUTION_FLOOR:
        raise ResolutionExhausted("r^{} = {:.3g} is below the resolution floor".format(deepest, r ** deepest))

    vertical_centers: Dict[int, FloatArray] = {index: np.array([r ** index, 0.0]) for index in range(1, deepest + 1)}
    substituted = None
    if w is not None:
        w = np.asarray(w, dtype=float)
        if not in_cone(w, kappa)[0] or not np.any(w):
            raise InvalidInput("w = {} must be a nonzero point of the cone |v| <= {}|u|".format(w.tolist(), kappa))
        substituted = substitution_index(plaques, r, w, deepest)
        vertical_centers[substituted] = w

    grids = []
    for m in range(m_min, m_max + 1):
        j, k = m // 2, m // 2 + m % 2
        columns = [np.zeros(2)] + [vertical_centers[index] for index in range(j, j + order)]
        rows = [np.zeros(2)] + [np.array([0.0, r ** index]) for index in range(k, k + order)]
        points = np.array([[plaque_bracket(plaques, column, row) for row in rows] for column in columns])
        axis_x = [plaque_bracket(plaques, column, np.zeros(2))[0] for column in columns]
        axis_y = [row[1] for row in rows]
        bound = journe_ratio_bound(r, order)
        grid = InterpolationGrid.create(points, axis_x, axis_y, ratio_bound=math.inf)
        touched = substituted if substituted is not None and j <= substituted < j + order else None
        grids.append(
            JourneGrid(
                m=m,
                j=j,
                k=k,
                grid=grid.evolve_self(ratio_bound=bound),
                substituted=touched,
                radius_bound=3.0 * r ** ((m - 1) / 2.0),
                ratio_bound=bound,
            )
        )
    logger.debug("built %d grids, R from %.3g to %.3g", len(grids), grids[0].R, grids[-1].R)
    return grids


class JourneReport(ImmutableEvolvableModel):
    order: int
    alpha: float
    polynomial: JetPoly
    grids: Tuple[JourneGrid, ...]
    coefficients: Tuple[FloatArray, ...]
    differences: Tuple[float, ...]
    decay_exponents: Dict[Tuple[int, int], float]
    row_exponents: Tuple[Optional[float], ...]
    max_ratio: float
    ratio_trend: float
    verdict: Literal["admits", "fails"]


def low_degree_jet(coefficients: FloatArray, order: int) -> JetPoly:
    monomials = {
        (p, q): float(coefficients[p, q])
        for p in range(coefficients.shape[0])
        for q in range(coefficients.shape[1])
        if p + q <= order
    }
    return JetPoly.from_monomials(2, 1, order, monomials)


def cone_samples(kappa: float, r_min: float, r_max: float, radii: int = 24, angles: int = 9, swapped: bool = False) -> FloatArray:
    """
    Deterministic points of the cone at geometrically spaced distances from the origin, on both sides.
    """
    spread = math.atan(kappa)
    theta = np.linspace(-spread, spread, angles)
    scale = np.geomspace(r_min, r_max, radii)
    directions = np.concatenate([np.column_stack([np.cos(theta), np.sin(theta)]), -np.column_stack([np.cos(theta), np.sin(theta)])])
    points = (scale[:, None, None] * directions[None, :, :]).reshape(-1, 2)
    return points[:, ::-1] if swapped else points


def _noise_floor(fit: RectInterpolation, p: int, q: int) -> float:
    return 1e-11 * max(fit.sup_value, 1e-300) / fit.R ** (p + q)


def journe_limit_poly(
    psi: Function2D,
    plaques: PlaquePair,
    order: int,
    alpha: float,
    r: Optional[float] = None,
    w: Optional[Sequence[float]] = None,
    m_range: Tuple[int, int] = (2, 40),
    kappa: Optional[float] = None,
) -> JourneReport:
    """
    Interpolate ψ on S_m for m in ``m_range``, keep the terms of degree ≤ ℓ and report how they converge.

    The decay exponent of c_pq is the slope of log|c^m_pq − c^{m+1}_pq| against log T_m with T_m = 3r^{(m−1)/2},
    fitted over the differences above roundoff; the limit polynomial is the last iterate. Residual ratios
    |ψ − ℘̄|/|z|^{ℓ+α}, less a relative roundoff floor, are evaluated on cone points between the smallest and the
    largest grid scale and the verdict is ``admits`` when they stay below ``EXPANSION_CEILING``.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidInput("α must lie in (0, 1) for plaque grids, got {}".format(alpha))
    r = config.JOURNE_R if r is None else r
    kappa = config.CONE_APERTURE if kappa is None else kappa
    grids = build_grids(plaques, r, order, w, m_range[1], m_range[0], kappa)

    fits = []
    for journe_grid in grids:
        values = np.asarray(psi(journe_grid.grid.points.reshape(-1, 2)), dtype=float).reshape(order + 1, order + 1)
        fits.append(interpolate_rect(journe_grid.grid, values, strict=False))
    coefficients = [fit.low_degree(order) for fit in fits]

    log_scale = np.array([math.log(3.0) + (g.m - 1) / 2.0 * math.log(r) for g in grids])
    exponents: Dict[Tuple[int, int], float] = {}
    for p in range(order + 1):
        for q in range(order + 1 - p):
            xs, ys = [], []
            for index in range(len(fits) - 1):
                delta = abs(coefficients[index + 1][p, q] - coefficients[index][p, q])
                if delta > _noise_floor(fits[index], p, q):
                    xs.append(log_scale[index])
                    ys.append(math.log(delta))
            if len(xs) >= 2 and np.ptp(xs) > 0:
                exponents[(p, q)] = float(linregress(xs, ys).slope)

    largest = [float(np.max(np.abs(b - a))) for a, b in zip(coefficients, coefficients[1:])]
    row_exponents: List[Optional[float]] = [None] * len(grids)
    for index in range(2, len(largest)):
        if largest[index] > 0 and largest[index - 2] > 0:
            row_exponents[index] = math.log(largest[index] / largest[index - 2]) / (log_scale[index] - log_scale[index - 2])

    polynomial = low_degree_jet(coefficients[-1], order)
    samples = cone_samples(kappa, grids[-1].R, grids[0].R)
    distances = np.linalg.norm(samples, axis=1)
    fitted = np.array([polynomial.evaluate(point)[0] for point in samples])
    exact = np.asarray(psi(samples), dtype=float)
    floor = RESIDUAL_FLOOR * max(1.0, float(np.max(np.abs(exact))))
    ratios = np.maximum(np.abs(exact - fitted) - floor, 0.0) / distances ** (order + alpha)
    positive = ratios > 0
    trend = float(linregress(np.log(distances[positive]), np.log(ratios[positive])).slope) if positive.sum() > 2 else 0.0
    max_ratio = float(np.max(ratios))
    verdict: Literal["admits", "fails"] = "admits" if max_ratio <= config.EXPANSION_CEILING else "fails"
    logger.info("limit polynomial of order %d, max residual ratio %.4g: %s", order, max_ratio, verdict)

    return JourneReport(
        order=order,
        alpha=alpha,
        polynomial=polynomial,
        grids=tuple(grids),
        coefficients=tuple(coefficients),
        differences=tuple(largest),
        decay_exponents=exponents,
        row_exponents=tuple(row_exponents),
        max_ratio=max_ratio,
        ratio_trend=trend,
        verdict=verdict,
    )


def swap_function(psi: Function2D) -> Function2D:
    def swapped(points: FloatArray) -> FloatArray:
        return psi(np.atleast_2d(points)[:, ::-1])

    return swapped


def swapped_cone_limit(
    psi: Function2D,
    plaques: PlaquePair,
    order: int,
    alpha: float,
    r: Optional[float] = None,
    m_range: Tuple[int, int] = (2, 40),
    kappa: Optional[float] = None,
) -> JourneReport:
    """
    The same construction with the roles of the coordinates exchanged, i.e. on the cone K' = {|u| ≤ κ|v|}; the
    returned polynomial is expressed in the original coordinates.
    """
    report = journe_limit_poly(
        swap_function(psi), plaques, order, alpha, r, None, m_range, kappa
    )
    monomials = {(q, p): value for (p, q), value in report.polynomial.to_monomials().items()}
    return report.evolve_self(polynomial=JetPoly.from_monomials(2, 1, order, monomials))


def cone_agreement(first: JetPoly, second: JetPoly, radius: float, kappa: Optional[float] = None) -> float:
    """
    max |℘ − ℘'| over sample points of K ∩ K' within ``radius`` of the origin.
    """
    kappa = config.CONE_APERTURE if kappa is None else kappa
    samples = cone_samples(kappa, radius * 1e-3, radius)
    shared = samples[in_cone(samples, kappa) & in_cone(samples, kappa, swapped=True)]
    return float(max(abs(first.evaluate(point)[0] - second.evaluate(point)[0]) for point in shared))
