"""
Almgren's frequency for 2-dimensional Q-valued maps

H(x, r) = int_{dB_r(x)} |f|^2, D(x, r) = int_{B_r(x)} |Df|^2, I = r D / H,
the monotonicity identity and the growth estimates built on them.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import roots_legendre

from qfreq.config import settings
from qfreq.curve_eval import (
    branch_points,
    curve_from_key,
    fiber_array,
    jet_arrays,
    rescale_curve,
)
from qfreq.errors import (
    DegenerateRescalingError,
    DomainError,
    InvariantViolation,
    QuadratureError,
    SingularEvaluationError,
    UsageError,
)
from qfreq.middleware.guards import height_floor, require_positive_height, require_q_point
from qfreq.models.curve import AlgebraicCurve
from qfreq.models.profile import (
    GrowthReport,
    HomogeneityReport,
    MonotonicityReport,
    PoincareReport,
    RadialProfile,
    SlackCheck,
)
from qfreq.models.qpoint import QPoint

logger = logging.getLogger(__name__)

# Trapezoid nodes sit at 2 pi (k + offset) / n
GOLDEN_OFFSET = (math.sqrt(5.0) - 1.0) / 2.0
# Circles passing closer than this fraction of r to a branch point get graded panels
NEAR_FRACTION = 0.25
# Closer than this fraction of r, the circle runs through the branch point
THROUGH_FRACTION = 1e-10
GRADING_DEPTH = 40
# Radial grading toward a circle through a branch point stops at this depth
RADIAL_DEPTH = 20
# Largest share of the circle whose jets may be dropped as degenerate
MASKED_WEIGHT = 1e-9
BASE_ORDER = 8
MAX_LEVEL = 12
AREA_ORDERS = (8, 16, 32)
MONOTONICITY_RTOL = 1e-3
SANDWICH_SLACK = 1e-6
LOG_DERIVATIVE_STEP = 1e-4
BLOWUP_ENERGY_TOL = 1e-3


class CircleIntegrals(NamedTuple):
    """Boundary integrals over dB_r(x)"""
    height: float  # int |f|^2
    radial: float  # int |d_r f|^2
    flux: float  # int <d_r f, f>
    nodes: int


# Quadrature rules

@lru_cache(maxsize=32)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    return roots_legendre(order)


def _grading_depth(length: float, scale: float) -> int:
    depth = math.ceil(math.log2(max(abs(length) / scale, 1.0))) + 3
    return int(min(max(depth, 1), GRADING_DEPTH))


def _graded_panels(start: float, length: float, depth: int) -> np.ndarray:
    """Panels on [start, start + length] halving toward start; length may be negative"""
    edges = start + length * 0.5 ** np.arange(depth + 1)
    edges = np.append(edges, start)
    return np.column_stack([edges[1:], edges[:-1]])


def _panel_nodes(panels: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = _legendre(order)
    mid = panels.mean(axis=1)
    half = 0.5 * (panels[:, 1] - panels[:, 0])
    nodes = (mid[:, None] + half[:, None] * t[None, :]).ravel()
    weights = (np.abs(half)[:, None] * w[None, :]).ravel()
    return nodes, weights


def _circle_rule(x: complex, r: float, level: int, branch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Angles and weights (summing to 2 pi) for the circle |z - x| = r.

    Away from branch points this is the periodic trapezoid rule; when the
    circle passes near one, the circle is cut at the nearest angles and
    Gauss-Legendre panels are graded geometrically toward the cuts.
    """
    near = np.zeros(0, dtype=bool)
    if branch.size:
        offsets = branch - x
        gaps = np.abs(np.abs(offsets) - r)
        near = gaps < NEAR_FRACTION * r
    if not near.any():
        n = settings.MIN_CIRCLE_NODES * 2 ** level
        theta = 2.0 * np.pi * (np.arange(n) + GOLDEN_OFFSET) / n
        return theta, np.full(n, 2.0 * np.pi / n)

    angles = np.mod(np.angle(offsets[near]), 2.0 * np.pi)
    scales = np.maximum(gaps[near], THROUGH_FRACTION * r) / r
    order = np.argsort(angles)
    angles, scales = angles[order], scales[order]
    keep = np.append(True, np.diff(angles) > 1e-14)
    cut_angles, cut_scales = [], []
    for angle, scale, fresh in zip(angles, scales, keep):
        if fresh:
            cut_angles.append(angle)
            cut_scales.append(scale)
        else:
            cut_scales[-1] = min(cut_scales[-1], scale)

    panels = []
    count = len(cut_angles)
    for i in range(count):
        start = cut_angles[i]
        stop = cut_angles[i + 1] if i + 1 < count else cut_angles[0] + 2.0 * np.pi
        half = 0.5 * (stop - start)
        panels.append(_graded_panels(start, half, _grading_depth(half, cut_scales[i])))
        panels.append(_graded_panels(stop, -half, _grading_depth(half, cut_scales[(i + 1) % count])))
    return _panel_nodes(np.vstack(panels), BASE_ORDER * 2 ** level)


def _integrate_on_circle(
    curve: AlgebraicCurve,
    x: complex,
    r: float,
    theta: np.ndarray,
    weights: np.ndarray,
    jets: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """(height, radial, flux) on one rule plus the integrals of their moduli"""
    direction = np.exp(1j * theta)
    z = x + r * direction
    if not jets:
        roots = fiber_array(curve, z)
        height = np.sum(np.abs(roots) ** 2, axis=1)
        values = np.array([height @ weights, 0.0, 0.0])
        return r * values, r * values

    roots, derivatives, valid = jet_arrays(curve, z)
    masked = ~np.all(valid, axis=1)
    if masked.any():
        if weights[masked].sum() > MASKED_WEIGHT * 2.0 * np.pi:
            row = int(np.argwhere(masked)[0][0])
            raise SingularEvaluationError("quadrature node on the discriminant", z=complex(z[row]), r=r)
        derivatives = np.where(masked[:, None], 0j, derivatives)
    radial_w = derivatives * direction[:, None]
    height = np.sum(np.abs(roots) ** 2, axis=1)
    radial = np.sum(np.abs(radial_w) ** 2, axis=1)
    flux = np.sum((np.conj(radial_w) * roots).real, axis=1)
    flux_size = np.sum(np.abs(radial_w) * np.abs(roots), axis=1)
    values = np.array([height @ weights, radial @ weights, flux @ weights])
    sizes = np.array([values[0], values[1], flux_size @ weights])
    return r * values, r * sizes


def _runs_through_branch_point(branch: np.ndarray, x: complex, r: float) -> bool:
    return bool(branch.size) and bool(np.min(np.abs(np.abs(branch - x) - r)) <= THROUGH_FRACTION * r)


def _circle_integrals(curve: AlgebraicCurve, x: complex, r: float, rtol: float, jets: bool) -> CircleIntegrals:
    """
    Refines the rule until every integral settles. On a circle through a
    branch point int |d_r f|^2 diverges logarithmically; it is reported as
    infinite and only the height and the flux have to settle.
    """
    branch = branch_points(curve)
    through = jets and _runs_through_branch_point(branch, x, r)
    watched = np.array([True, not through, True])
    previous: Optional[np.ndarray] = None
    change = np.full(3, np.inf)
    nodes = 0
    for level in range(MAX_LEVEL + 1):
        theta, weights = _circle_rule(x, r, level, branch)
        nodes = theta.size
        if nodes > settings.MAX_CIRCLE_NODES:
            break
        current, sizes = _integrate_on_circle(curve, x, r, theta, weights, jets)
        if previous is not None:
            change = np.abs(current - previous)
            logger.debug(f"circle x={x} r={r} nodes={nodes} change={change.max():.3e}")
            if np.all(change[watched] <= rtol * sizes[watched]):
                return CircleIntegrals(
                    height=float(current[0]),
                    radial=math.inf if through else float(current[1]),
                    flux=float(current[2]),
                    nodes=nodes,
                )
        previous = current
    raise QuadratureError(
        "circle quadrature did not converge",
        x=complex(x),
        r=r,
        nodes=nodes,
        change=float(np.max(change[watched])),
    )


@lru_cache(maxsize=8192)
def _cached_integrals(key: tuple, x: complex, r: float, rtol: float, jets: bool) -> CircleIntegrals:
    return _circle_integrals(curve_from_key(key), x, r, rtol, jets)


def _check_radius(r: float) -> float:
    if not r > 0:
        raise DomainError("radius must be positive", r=r)
    return float(r)


def circle_integrals(curve: AlgebraicCurve, x: complex, r: float, rtol: Optional[float] = None) -> CircleIntegrals:
    """Height, radial energy and flux on dB_r(x), converged to FLUX_RTOL"""
    r = _check_radius(r)
    return _cached_integrals(curve.key(), complex(x), r, rtol or settings.FLUX_RTOL, True)


def _singular_radii(curve: AlgebraicCurve, x: complex, lo: float, hi: float) -> list[float]:
    """Radii in (lo, hi) whose circles about x meet a branch point"""
    distances = np.sort(np.abs(branch_points(curve) - x))
    margin = THROUGH_FRACTION * hi
    radii: list[float] = []
    for d in distances:
        if lo + margin < d < hi - margin and (not radii or d - radii[-1] > settings.DEDUP_TOL):
            radii.append(float(d))
    return radii


def _quad(
    func: Callable[[float], float],
    a: float,
    b: float,
    points: Sequence[float],
    epsrel: float = 1e-9,
    epsabs: float = 1e-14,
) -> float:
    kwargs = {"limit": 200, "epsabs": epsabs, "epsrel": epsrel, "full_output": 1}
    if points:
        kwargs["points"] = list(points)
    result = quad(func, a, b, **kwargs)
    if len(result) > 3:
        logger.warning(f"Radial quadrature on [{a:.6g}, {b:.6g}]: {result[3]}")
    return float(result[0])


# H, D and I

def height_H(curve: AlgebraicCurve, x: complex, r: float) -> float:
    """H(x, r) = int_{dB_r(x)} |f|^2, converged to HEIGHT_RTOL"""
    r = _check_radius(r)
    return _cached_integrals(curve.key(), complex(x), r, settings.HEIGHT_RTOL, False).height


def circle_mean_height(curve: AlgebraicCurve, x: complex, r: float) -> float:
    """The mean of |f|^2 over dB_r(x); nondecreasing in r for minimizers"""
    return height_H(curve, x, r) / (2.0 * np.pi * r)


def _energy_area(curve: AlgebraicCurve, x: complex, r: float) -> float:
    """
    int_0^r (int_{dB_s} |Df|^2) ds with Gauss-Legendre panels graded toward
    the center (when it is a branch point) and toward every radius whose
    circle meets a branch point. The ring integral has a logarithmic
    singularity at those radii; grading stops at RADIAL_DEPTH and the
    Gauss rule of the innermost panel absorbs the rest.
    """
    x = complex(x)
    distances = np.abs(branch_points(curve) - x)
    interior = _singular_radii(curve, x, 0.0, r)
    center_singular = bool(np.any(distances <= settings.DEDUP_TOL * (1.0 + abs(x))))
    edge_singular = bool(np.any(np.abs(distances - r) <= THROUGH_FRACTION * r))
    breaks = [0.0, *interior, r]
    depths = [
        GRADING_DEPTH if center_singular else 2,
        *([RADIAL_DEPTH] * len(interior)),
        RADIAL_DEPTH if edge_singular else 2,
    ]

    panels = []
    for i in range(len(breaks) - 1):
        start, stop = breaks[i], breaks[i + 1]
        half = 0.5 * (stop - start)
        panels.append(_graded_panels(start, half, depths[i]))
        panels.append(_graded_panels(stop, -half, depths[i + 1]))
    panels = np.vstack(panels)

    inner_rtol = 0.1 * settings.AREA_RTOL
    previous = None
    for order in AREA_ORDERS:
        nodes, weights = _panel_nodes(panels, order)
        ring = np.array([2.0 * circle_integrals(curve, x, s, inner_rtol).radial for s in nodes])
        total = float(ring @ weights)
        if previous is not None:
            logger.debug(f"area energy x={x} r={r} order={order} value={total:.12g}")
            if abs(total - previous) <= settings.AREA_RTOL * abs(total):
                return total
        previous = total
    raise QuadratureError(
        "area quadrature did not converge",
        x=x,
        r=r,
        last=previous,
        panels=len(panels),
    )


def energy_D(curve: AlgebraicCurve, x: complex, r: float, method: Optional[str] = None) -> float:
    """
    D(x, r) = int_{B_r(x)} |Df|^2.

    "flux" uses the first-variation identity D(x, r) = int_{dB_r} <d_r f, f>,
    valid for the Dir-minimizing maps the curves define; "area" integrates
    |Df|^2 over the disk.
    """
    r = _check_radius(r)
    method = method or settings.ENERGY_METHOD
    if method == "flux":
        return circle_integrals(curve, x, r).flux
    if method == "area":
        return _energy_area(curve, x, r)
    raise UsageError("unknown energy method", method=method)


def _height_energy(curve: AlgebraicCurve, x: complex, r: float, method: Optional[str]) -> tuple[float, float]:
    ints = circle_integrals(curve, x, r)
    method = method or settings.ENERGY_METHOD
    energy = ints.flux if method == "flux" else energy_D(curve, x, r, method)
    return ints.height, energy


def frequency_I(curve: AlgebraicCurve, x: complex, r: float, method: Optional[str] = None) -> float:
    """I(x, r) = r D(x, r) / H(x, r)"""
    r = _check_radius(r)
    height, energy = _height_energy(curve, x, r, method)
    require_positive_height(curve, x, r, height)
    return r * energy / height


def radial_profile(
    curve: AlgebraicCurve,
    x: complex,
    radii: Sequence[float],
    method: Optional[str] = None,
) -> RadialProfile:
    """D, H and I at each radius; I is left empty where H is degenerate"""
    radii = [_check_radius(r) for r in radii]
    method = method or settings.ENERGY_METHOD

    def row(r: float) -> tuple[float, float, Optional[float]]:
        height, energy = _height_energy(curve, x, r, method)
        freq = r * energy / height if height > height_floor(curve, r) else None
        return energy, height, freq

    with ThreadPoolExecutor(max_workers=settings.worker_count) as pool:
        rows = list(pool.map(row, radii))
    return RadialProfile(
        center=complex(x),
        radii=radii,
        D=[row[0] for row in rows],
        H=[row[1] for row in rows],
        I=[row[2] for row in rows],
        method=method,
    )


def log_radii(rmin: float, rmax: float, samples: int) -> list[float]:
    if not 0 < rmin < rmax or samples < 2:
        raise DomainError("need 0 < rmin < rmax and at least two samples", rmin=rmin, rmax=rmax)
    return np.geomspace(rmin, rmax, samples).tolist()


def extrapolated_frequency(curve: AlgebraicCurve, x: complex, r_min: Optional[float] = None) -> float:
    """I(x, 0+) from I at r_min, 2 r_min and 4 r_min, cancelling the O(r) and O(r^2) terms"""
    r = r_min or settings.EXTRAPOLATION_RMIN
    values = [frequency_I(curve, x, r * 2 ** k) for k in range(3)]
    return (8.0 * values[0] - 6.0 * values[1] + values[2]) / 3.0


# Monotonicity

def _remainder_density(curve: AlgebraicCurve, x: complex, r: float) -> float:
    """dI/dr = (2r / H^2) (int |d_r f|^2 int |f|^2 - (int <d_r f, f>)^2)"""
    ints = circle_integrals(curve, x, r)
    require_positive_height(curve, x, r, ints.height)
    deficit = ints.radial * ints.height - ints.flux ** 2
    return 2.0 * r * deficit / ints.height ** 2


def monotonicity_remainder(curve: AlgebraicCurve, x: complex, s: float, t: float) -> float:
    """The Cauchy-Schwarz remainder integrated over [s, t]"""
    return _quad(
        lambda r: _remainder_density(curve, x, r),
        s,
        t,
        _singular_radii(curve, x, s, t),
        epsabs=1e-12,
    )


def monotonicity_check(
    curve: AlgebraicCurve,
    x: complex,
    s: float,
    t: float,
    method: Optional[str] = None,
) -> MonotonicityReport:
    """
    I(t) - I(s) against the integrated remainder. With method "area" the two
    sides come from independent quadratures: D over the disk on the left,
    circle integrals of d_r f and f on the right.
    """
    if not 0 < s < t:
        raise DomainError("need 0 < s < t", s=s, t=t)
    lhs = frequency_I(curve, x, t, method) - frequency_I(curve, x, s, method)
    rhs = monotonicity_remainder(curve, x, s, t)
    residual = abs(lhs - rhs)
    passed = residual <= MONOTONICITY_RTOL * (1.0 + abs(lhs)) and rhs >= -1e-9
    logger.debug(f"monotonicity x={x} [{s}, {t}] lhs={lhs:.6g} rhs={rhs:.6g}")
    return MonotonicityReport(s=s, t=t, lhs=lhs, rhs=rhs, residual=residual, passed=passed)


# Growth estimates

def _sandwich(name: str, lower: float, middle: float, upper: float, slack: float = SANDWICH_SLACK) -> SlackCheck:
    scale = max(abs(middle), 1e-300)
    lower_slack = (middle - lower) / scale
    upper_slack = (upper - middle) / scale
    return SlackCheck(
        name=name,
        lower=lower,
        middle=middle,
        upper=upper,
        lower_slack=lower_slack,
        upper_slack=upper_slack,
        passed=lower_slack >= -slack and upper_slack >= -slack,
    )


def verify_growth_bounds(curve: AlgebraicCurve, x: complex, r: float, t: float) -> GrowthReport:
    """
    For r <= t checks
      d/dt log(H(t)/t) = 2 I(t) / t,
      (r/t)^{2 I(t)} H(t)/t <= H(r)/r <= (r/t)^{2 I(r)} H(t)/t,
      (I(r)/I(t)) (r/t)^{2 I(t)} D(t) <= D(r) <= (r/t)^{2 I(r)} D(t).
    """
    if not 0 < r <= t:
        raise DomainError("need 0 < r <= t", r=r, t=t)
    h = LOG_DERIVATIVE_STEP * t

    def log_ratio(tau: float) -> float:
        height = circle_integrals(curve, x, tau).height
        require_positive_height(curve, x, tau, height)
        return math.log(height / tau)

    derivative = (log_ratio(t + h) - log_ratio(t - h)) / (2.0 * h)
    H_t, D_t = _height_energy(curve, x, t, None)
    H_r, D_r = _height_energy(curve, x, r, None)
    require_positive_height(curve, x, t, H_t)
    require_positive_height(curve, x, r, H_r)
    I_t = t * D_t / H_t
    I_r = r * D_r / H_r
    expected = 2.0 * I_t / t
    error = abs(derivative - expected) / max(abs(expected), 1e-300)

    ratio = r / t
    height_check = _sandwich(
        "height",
        ratio ** (2.0 * I_t) * H_t / t,
        H_r / r,
        ratio ** (2.0 * I_r) * H_t / t,
    )
    energy_check = None
    if I_r > 0:
        energy_check = _sandwich(
            "energy",
            (I_r / I_t) * ratio ** (2.0 * I_t) * D_t,
            D_r,
            ratio ** (2.0 * I_r) * D_t,
        )
    log_passed = error <= 1e-3
    passed = log_passed and height_check.passed and (energy_check is None or energy_check.passed)
    return GrowthReport(
        r=r,
        t=t,
        log_derivative=derivative,
        log_derivative_expected=expected,
        log_derivative_error=error,
        log_derivative_passed=log_passed,
        height_sandwich=height_check,
        energy_sandwich=energy_check,
        passed=passed,
    )


def verify_poincare(curve: AlgebraicCurve, x: complex, r: float) -> PoincareReport:
    """H(r)/r <= 2 int_0^r D(s)/s ds <= Q D(r) at a point where f = Q[[0]]"""
    r = _check_radius(r)
    require_q_point(curve, x)
    H_r, D_r = _height_energy(curve, x, r, None)
    left = H_r / r
    middle = 2.0 * _quad(
        lambda s: energy_D(curve, x, s) / s,
        0.0,
        r,
        _singular_radii(curve, x, 0.0, r),
    )
    right = curve.q * D_r
    scale = max(abs(right), 1e-300)
    first = (middle - left) / scale
    second = (right - middle) / scale
    return PoincareReport(
        r=r,
        height_over_r=left,
        energy_integral=middle,
        q_energy=right,
        first_slack=first,
        second_slack=second,
        relative_gap=second,
        passed=first >= -SANDWICH_SLACK and second >= -SANDWICH_SLACK,
    )


# Blow-ups and homogeneity

def blowup_rescale(curve: AlgebraicCurve, x: complex, s: float, samples: Sequence[complex]) -> list[QPoint]:
    """
    Samples of y -> f(x + s y) / D(x, s)^(1/2). The rescaled curve is built
    exactly and its energy on B_1 is checked to be one.
    """
    s = _check_radius(s)
    samples = np.asarray(samples, dtype=complex)
    if np.any(np.abs(samples) > 1.0):
        raise DomainError("blow-up samples must lie in the unit disk")
    energy = energy_D(curve, x, s)
    floor = height_floor(curve, s)
    if not energy > floor:
        raise DegenerateRescalingError("D(x, s) vanishes: the map is Q[[0]] near x", x=complex(x), s=s, energy=energy)
    c = math.sqrt(energy)
    rescaled = rescale_curve(curve, complex(x), s, c)
    unit = energy_D(rescaled, 0j, 1.0)
    if abs(unit - 1.0) > BLOWUP_ENERGY_TOL:
        raise InvariantViolation("rescaled map does not have unit energy", x=complex(x), s=s, energy=unit)
    fibers = fiber_array(curve, complex(x) + s * samples) / c
    return [QPoint.from_complex(row) for row in fibers]


def is_homogeneous(curve: AlgebraicCurve, x: complex, radii: Sequence[float], tol: float = 1e-6) -> HomogeneityReport:
    """Constant frequency over the radii and a vanishing monotonicity remainder"""
    radii = sorted(_check_radius(r) for r in radii)
    if len(radii) < 2:
        raise DomainError("need at least two radii")
    values = [frequency_I(curve, x, r) for r in radii]
    mean = float(np.mean(values))
    spread = float(max(values) - min(values))
    remainder = monotonicity_remainder(curve, x, radii[0], radii[-1])
    homogeneous = spread <= tol * (1.0 + abs(mean)) and abs(remainder) <= tol * (1.0 + abs(mean))
    return HomogeneityReport(
        center=complex(x),
        frequencies=values,
        spread=spread,
        remainder=remainder,
        homogeneous=homogeneous,
        degree=mean,
    )
