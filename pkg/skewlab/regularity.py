"""
Pointwise polynomial expansions and empirical Hölder exponents of sampled functions.

A function ψ has an (ℓ, α, C)-expansion at z when some polynomial ℘ of degree ≤ ℓ satisfies
|ψ(z') − ℘(z')| ≤ C|z − z'|^{ℓ+α} near z; :func:`expansion_fit` measures the smallest such C on a sample set.
The Hölder estimators fit the slope of log|Δψ| against log d over binned pairs of nearby points.
"""
import itertools
import logging
import math
from typing import Callable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog
from scipy.stats import linregress, theilslopes

from skewlab import config
from skewlab.entities import ImmutableEvolvableModel
from skewlab.exceptions import DegenerateSamples, InvalidInput
from skewlab.helpers import make_rng
from skewlab.jets import JetPoly
from skewlab.types import FloatArray

logger = logging.getLogger(__name__)

MIN_PAIRS = 100
MIN_BIN_PAIRS = 5
RESIDUAL_FLOOR = 1e-13
FitMode = Literal["lstsq", "minimax"]
FunctionND = Callable[[FloatArray], FloatArray]


class ExpansionReport(ImmutableEvolvableModel):
    order: int
    alpha: float
    polynomial: JetPoly
    C: float
    max_ratio: float
    ceiling: float
    verdict: Literal["admits", "fails"]
    mode: FitMode


def exponents(dim: int, order: int) -> List[Tuple[int, ...]]:
    return [
        tuple(canonical.count(j) for j in range(dim))
        for degree in range(order + 1)
        for canonical in itertools.combinations_with_replacement(range(dim), degree)
    ]


def _monomials(offsets: FloatArray, powers: Sequence[Tuple[int, ...]]) -> FloatArray:
    return np.column_stack([np.prod(offsets ** np.asarray(power), axis=1) for power in powers])


def sample_disc(
    fn: FunctionND,
    center: Sequence[float],
    radius: float,
    radii: int = 24,
    angles: int = 16,
    inner: float = 1e-5,
) -> Tuple[FloatArray, FloatArray]:
    """
    Points on geometrically spaced spheres around ``center`` (from ``inner``·radius to radius) and ψ at them.
    In one dimension both sides of the centre are sampled; in two, ``angles`` equally spaced directions.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    scales = np.geomspace(inner * radius, radius, radii)
    if center.size == 1:
        directions = np.array([[1.0], [-1.0]])
    elif center.size == 2:
        theta = np.linspace(0.0, 2.0 * math.pi, angles, endpoint=False) + 0.5 / angles
        directions = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        raise InvalidInput("disc sampling supports one or two dimensions, got {}".format(center.size))
    points = center[None, :] + (scales[:, None, None] * directions[None, :, :]).reshape(-1, center.size)
    return points, np.asarray(fn(points), dtype=float)


def expansion_fit(
    points: FloatArray,
    values: FloatArray,
    center: Sequence[float],
    order: int,
    alpha: float,
    mode: FitMode = "lstsq",
    ceiling: Optional[float] = None,
) -> ExpansionReport:
    """
    Fit ℘ of degree ≤ ℓ around ``center`` and report C = max |ψ(z') − ℘(z')|/|z − z'|^{ℓ+α} over all samples,
    with residuals below the roundoff floor ``RESIDUAL_FLOOR``·max(1, sup|ψ|) counted as zero.

    ``lstsq`` fits on the inner half of the sample distances (in log scale) with rows weighted by
    |z − z'|^{−(ℓ+α)}; ``minimax`` starts from that fit and minimizes C itself with a linear program.

    :raises DegenerateSamples: If the samples do not determine a polynomial of degree ℓ
    :raises InvalidInput: If shapes disagree or α is out of range
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    points = np.asarray(points, dtype=float).reshape(-1, center.size)
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size != points.shape[0]:
        raise InvalidInput("{} points but {} values".format(points.shape[0], values.size))
    if order < 0 or not 0.0 < alpha <= 1.0:
        raise InvalidInput("need ℓ >= 0 and α in (0, 1], got {} and {}".format(order, alpha))
    ceiling = config.EXPANSION_CEILING if ceiling is None else ceiling

    offsets = points - center[None, :]
    distances = np.linalg.norm(offsets, axis=1)
    keep = distances > 0
    offsets, distances, values = offsets[keep], distances[keep], values[keep]
    powers = exponents(center.size, order)
    if values.size < len(powers):
        raise DegenerateSamples("{} samples cannot determine {} coefficients".format(values.size, len(powers)))

    scale = float(np.max(distances))
    shift = float(values[np.argmin(distances)])
    design = _monomials(offsets / scale, powers)
    weights = (distances / scale) ** -(order + alpha)
    rows = design * weights[:, None]
    columns = np.linalg.norm(rows, axis=0)
    if np.any(columns == 0):
        raise DegenerateSamples("a monomial vanishes on every sample")
    rows = rows / columns[None, :]
    target = (values - shift) * weights

    inner = distances <= math.sqrt(np.min(distances) * scale)
    if np.linalg.matrix_rank(rows[inner]) < len(powers):
        inner = np.ones_like(inner)
    if np.linalg.matrix_rank(rows[inner]) < len(powers):
        raise DegenerateSamples("samples are not in general position for degree {}".format(order))
    solution = np.linalg.lstsq(rows[inner], target[inner], rcond=None)[0]

    if mode == "minimax":
        solution = _minimax(rows, target, solution)
    elif mode != "lstsq":
        raise InvalidInput("unknown expansion fit mode {!r}".format(mode))

    coefficients = solution / columns
    coefficients = coefficients / scale ** np.array([sum(power) for power in powers], dtype=float)
    coefficients[0] += shift
    fitted = _monomials(offsets, powers) @ coefficients
    floor = RESIDUAL_FLOOR * max(1.0, float(np.max(np.abs(values))))
    ratios = np.maximum(np.abs(values - fitted) - floor, 0.0) / distances ** (order + alpha)
    max_ratio = float(np.max(ratios))
    polynomial = JetPoly.from_monomials(
        center.size, 1, order, {power: value for power, value in zip(powers, coefficients)}, center=center
    )
    logger.debug("(%d, %.3g)-expansion fit (%s): C = %.6g", order, alpha, mode, max_ratio)
    return ExpansionReport(
        order=order,
        alpha=alpha,
        polynomial=polynomial,
        C=max_ratio,
        max_ratio=max_ratio,
        ceiling=ceiling,
        verdict="admits" if max_ratio <= ceiling else "fails",
        mode=mode,
    )


def _minimax(rows: FloatArray, target: FloatArray, start: FloatArray) -> FloatArray:
    """
    min t subject to |target − rows·c| ≤ t, solved for the correction to ``start``.
    """
    residual = target - rows @ start
    size = rows.shape[1]
    objective = np.zeros(size + 1)
    objective[-1] = 1.0
    ones = np.ones((rows.shape[0], 1))
    A_ub = np.vstack([np.hstack([rows, -ones]), np.hstack([-rows, -ones])])
    b_ub = np.concatenate([residual, -residual])
    result = linprog(objective, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * (size + 1), method="highs")
    if not result.success:
        logger.warning("minimax expansion fit failed (%s), keeping the least squares fit", result.message)
        return start
    return start + result.x[:size]


class HolderEstimate(ImmutableEvolvableModel):
    alpha: float
    r_squared: float
    flagged: bool
    reason: Optional[str] = None
    pair_count: int
    bin_distances: FloatArray
    bin_increments: FloatArray
    distances: FloatArray
    deltas: FloatArray


def holder_from_pairs(distances: FloatArray, deltas: FloatArray, bins: int = 12) -> HolderEstimate:
    """
    Median-of-slopes fit of log mean|Δψ| against log d over logarithmic distance bins.

    The estimate is flagged, with α = NaN, when every increment vanishes or fewer than two bins are populated.

    :raises InvalidInput: With fewer than 100 pairs or non-positive distances
    """
    distances = np.asarray(distances, dtype=float).reshape(-1)
    deltas = np.abs(np.asarray(deltas, dtype=float).reshape(-1))
    if distances.size != deltas.size or distances.size < MIN_PAIRS:
        raise InvalidInput("Hölder estimation needs at least {} matching pairs, got {}".format(MIN_PAIRS, distances.size))
    if np.any(distances <= 0):
        raise InvalidInput("pair distances must be positive")

    def flagged(reason: str, centers: FloatArray = np.empty(0), means: FloatArray = np.empty(0)) -> HolderEstimate:
        logger.info("Hölder estimate flagged: %s", reason)
        return HolderEstimate(
            alpha=math.nan,
            r_squared=math.nan,
            flagged=True,
            reason=reason,
            pair_count=distances.size,
            bin_distances=centers,
            bin_increments=means,
            distances=distances,
            deltas=deltas,
        )

    if not np.any(deltas > 0):
        return flagged("constant function, increments vanish")
    log_d = np.log(distances)
    edges = np.linspace(log_d.min(), log_d.max(), bins + 1) if np.ptp(log_d) > 0 else np.array([log_d[0], log_d[0]])
    index = np.clip(np.searchsorted(edges, log_d, side="right") - 1, 0, max(edges.size - 2, 0))
    centers, means = [], []
    for b in range(edges.size - 1):
        members = index == b
        if members.sum() >= MIN_BIN_PAIRS and np.mean(deltas[members]) > 0:
            centers.append(float(np.exp(np.mean(log_d[members]))))
            means.append(float(np.mean(deltas[members])))
    if len(centers) < 2:
        return flagged("fewer than two populated distance bins", np.array(centers), np.array(means))

    x, y = np.log(centers), np.log(means)
    slope = float(theilslopes(y, x)[0])
    r_squared = float(linregress(x, y).rvalue ** 2)
    logger.debug("Hölder estimate %.4f over %d bins, r² = %.4f", slope, len(centers), r_squared)
    return HolderEstimate(
        alpha=slope,
        r_squared=r_squared,
        flagged=False,
        pair_count=distances.size,
        bin_distances=np.array(centers),
        bin_increments=np.array(means),
        distances=distances,
        deltas=deltas,
    )


def holder_from_callable(
    fn: FunctionND,
    dim: int = 1,
    pair_budget: int = 4000,
    seed: int = 0,
    scales: Tuple[float, float] = (1e-8, 1e-2),
    bins: int = 13,
    domain: Tuple[float, float] = (0.0, 1.0),
) -> HolderEstimate:
    """
    Pairs (x, x + d·e) with x uniform in the ``domain`` box, e a random unit vector and d spread evenly over
    ``bins`` geometrically spaced scales.
    """
    if pair_budget < MIN_PAIRS:
        raise InvalidInput("pair budget {} is below {}".format(pair_budget, MIN_PAIRS))
    rng = make_rng(seed)
    levels = np.geomspace(scales[0], scales[1], bins)
    distances = np.repeat(levels, int(math.ceil(pair_budget / bins)))[:pair_budget]
    starts = rng.uniform(domain[0], domain[1], size=(pair_budget, dim))
    directions = rng.standard_normal((pair_budget, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    ends = starts + distances[:, None] * directions
    deltas = np.asarray(fn(ends), dtype=float) - np.asarray(fn(starts), dtype=float)
    return holder_from_pairs(distances, deltas, bins=bins)


def holder_from_grid(values: FloatArray, pair_budget: int = 4000, seed: int = 0) -> HolderEstimate:
    """
    Pairs of nodes of a periodic n×n grid over the unit torus at integer offsets of length 1 to n/4 cells.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if values.ndim != 2 or values.shape[1] != n or n < 8:
        raise InvalidInput("expected a square periodic grid of side >= 8, got {}".format(values.shape))
    rng = make_rng(seed)
    lengths = rng.uniform(1.0, n / 4.0, size=pair_budget)
    angles = rng.uniform(0.0, 2.0 * math.pi, size=pair_budget)
    offsets = np.rint(np.column_stack([lengths * np.cos(angles), lengths * np.sin(angles)])).astype(int)
    offsets = offsets[np.any(offsets != 0, axis=1)]
    i = rng.integers(0, n, size=len(offsets))
    j = rng.integers(0, n, size=len(offsets))
    deltas = values[(i + offsets[:, 0]) % n, (j + offsets[:, 1]) % n] - values[i, j]
    return holder_from_pairs(np.linalg.norm(offsets, axis=1) / n, deltas, bins=8)


def pair_rows(estimate: HolderEstimate) -> List[Tuple[float, float, float, float]]:
    """
    Rows ``pair_dist,delta,log_dist,log_delta``; log_delta is −inf for a vanishing increment.
    """
    with np.errstate(divide="ignore"):
        log_deltas = np.log(estimate.deltas)
    return [
        (float(d), float(delta), float(math.log(d)), float(log_delta))
        for d, delta, log_delta in zip(estimate.distances, estimate.deltas, log_deltas)
    ]
