"""
The quantitative covering counter: frequency drops on annuli, the iterative
Vitali covering of D_Q and the exponential bound it certifies.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np

from qfreq.config import settings
from qfreq.errors import CalibrationError, CoveringNonTerminationError, DomainError, InvariantViolation
from qfreq.frequency import frequency_I
from qfreq.middleware.guards import require_q_point
from qfreq.models.covering import (
    AnnulusVerdict,
    BoundReport,
    CoveringConfig,
    CoveringLevel,
    CoveringTrace,
    TelescopingReport,
    Verdict,
)
from qfreq.models.curve import AlgebraicCurve, Disk
from qfreq.singular import count_d_q, d_q_points

logger = logging.getLogger(__name__)

# D_Q is counted in the closed disk of this radius
COUNT_RADIUS = 0.5


def default_config() -> CoveringConfig:
    return CoveringConfig(lambda_=settings.LAMBDA, delta=settings.DELTA, max_depth=settings.MAX_DEPTH)


def overlap_constant(lambda_: float) -> int:
    """
    How many of the annuli (lambda^{k+1}, 3 lambda^{k-1}) can contain a
    given radius: ceil(2 + ln 3 / ln(1/lambda)).
    """
    return int(math.ceil(2.0 + math.log(3.0) / math.log(1.0 / lambda_)))


def _lexicographic_key(z: complex) -> tuple[float, float]:
    return (z.real, z.imag)


def frequency_drop(curve: AlgebraicCurve, x: complex, r: float, lambda_: float) -> float:
    """I(x, r) - I(x, lambda r) at a Q-point x"""
    if not 0 < lambda_ < 1:
        raise DomainError("lambda must lie in (0, 1)", lambda_=lambda_)
    require_q_point(curve, x)
    return frequency_I(curve, x, r) - frequency_I(curve, x, lambda_ * r)


def annulus_empty_check(
    curve: AlgebraicCurve,
    x: complex,
    r: float,
    config: Optional[CoveringConfig] = None,
) -> AnnulusVerdict:
    """
    A drop of at most delta certifies B_r(x) minus B_{lambda r}(x) free of
    Q-points; the detector is run on the annulus either way.
    """
    config = config or default_config()
    x = complex(x)
    drop = frequency_drop(curve, x, r, config.lambda_)
    verdict = Verdict.CERTIFIED_EMPTY if drop <= config.delta else Verdict.DROP_TOO_LARGE
    inner = config.lambda_ * r
    detected = [
        p for p in d_q_points(curve, Disk(center=x, radius=r))
        if inner <= abs(p - x) < r
    ]
    measured_empty = not detected
    agrees = verdict is Verdict.DROP_TOO_LARGE or measured_empty
    if not agrees:
        logger.warning(
            f"delta miscalibration: drop {drop:.6g} <= delta {config.delta} "
            f"but {len(detected)} Q-points found in the annulus around {x}"
        )
    return AnnulusVerdict(
        center=x,
        outer_radius=r,
        inner_radius=inner,
        drop=drop,
        verdict=verdict,
        detected=detected,
        measured_empty=measured_empty,
        agrees=agrees,
    )


def vitali_subcover(points: Sequence[complex], radius: float, lambda_: Optional[float] = None) -> list[complex]:
    """
    Greedy subcover in (re, im) order: a point is kept when its ball of
    radius lambda * radius misses the balls already kept. Dropped points lie
    within 2 lambda radius < radius of a kept one.
    """
    if not points:
        raise DomainError("vitali_subcover needs at least one point")
    lambda_ = lambda_ if lambda_ is not None else settings.LAMBDA
    separation = 2.0 * lambda_ * radius
    kept: list[complex] = []
    for z in sorted((complex(p) for p in points), key=_lexicographic_key):
        if all(abs(z - other) >= separation for other in kept):
            kept.append(z)
    return kept


def _count_inside(points: np.ndarray, center: complex, radius: float) -> int:
    return int(np.count_nonzero(np.abs(points - center) < radius))


def covering_count(curve: AlgebraicCurve, config: Optional[CoveringConfig] = None) -> CoveringTrace:
    """
    Level 0 covers D_Q in the closed disk of radius 1/2 by balls of radius
    lambda; level k covers the Q-points of B_{lambda^k}(x^k) by balls of
    radius lambda^{k+1} and moves to the child holding the most of them.
    Stops once a single Q-point remains.
    """
    config = config or default_config()
    lambda_ = config.lambda_
    points = d_q_points(curve, Disk(center=0j, radius=COUNT_RADIUS))
    current = np.array(points, dtype=complex)
    center = 0j
    previous: Optional[int] = None
    levels: list[CoveringLevel] = []
    k = 0
    while True:
        count = len(current)
        xi = int(previous is not None and previous > count)
        if count <= 1:
            levels.append(CoveringLevel(level=k, center=center, count=count, subcover_size=0, xi=xi))
            break
        if k >= config.max_depth:
            raise CoveringNonTerminationError(
                "covering did not isolate a single Q-point",
                depth=k,
                count=count,
                center=center,
            )
        radius = lambda_ ** (k + 1)
        children = vitali_subcover(current.tolist(), radius, lambda_)
        if len(children) > config.ball_bound:
            raise InvariantViolation("Vitali subcover exceeds 4 / lambda^2 balls", level=k, size=len(children))
        counts = [_count_inside(current, child, radius) for child in children]
        best = min(range(len(children)), key=lambda i: (-counts[i], children[i].real, children[i].imag))
        levels.append(
            CoveringLevel(level=k, center=center, count=count, subcover_size=len(children), xi=xi, children=children)
        )
        logger.debug(f"level {k}: N={count} J={len(children)} next={children[best]}")
        previous = count
        center = children[best]
        current = current[np.abs(current - center) < radius]
        k += 1

    xi_sum = sum(level.xi for level in levels)
    initial = levels[0].count
    bound = (4.0 / lambda_ ** 2) ** xi_sum
    widest = max((level.subcover_size for level in levels), default=0)
    product = max(widest, 1) ** xi_sum * levels[-1].count
    trace = CoveringTrace(
        config=config,
        points=points,
        levels=levels,
        final_depth=levels[-1].level,
        xi_sum=xi_sum,
        certified_bound=bound,
        certificate_holds=initial <= bound,
        product_bound_holds=initial <= product,
    )
    if not (trace.certificate_holds and trace.product_bound_holds):
        raise InvariantViolation("covering certificate failed", initial=initial, bound=bound, product=product)
    logger.info(f"Covering: N_0={initial} depth={trace.final_depth} xi_sum={xi_sum} bound={bound:.6g}")
    return trace


def telescoping_report(
    curve: AlgebraicCurve,
    trace: CoveringTrace,
    config: Optional[CoveringConfig] = None,
) -> TelescopingReport:
    """
    Drops I(x, 3 lambda^{k-1}) - I(x, lambda^{k+1}) around the final center
    for every level with xi = 1, against delta * sum(xi) from below and
    C(lambda) I(x, R) from above, R being the widest outer radius used.
    """
    config = config or trace.config
    lambda_ = config.lambda_
    center = trace.levels[-1].center
    marked = [level.level for level in trace.levels if level.xi == 1]
    drops = [
        frequency_I(curve, center, 3.0 * lambda_ ** (k - 1)) - frequency_I(curve, center, lambda_ ** (k + 1))
        for k in marked
    ]
    constant = overlap_constant(lambda_)
    outer = 3.0 * lambda_ ** (min(marked) - 1) if marked else 1.0
    reference = frequency_I(curve, center, outer) if trace.initial_count > 0 else 0.0
    drop_sum = float(sum(drops))
    return TelescopingReport(
        center=center,
        levels=marked,
        drops=drops,
        drop_sum=drop_sum,
        overlap_constant=constant,
        reference_frequency=reference,
        lower_claim_holds=config.delta * len(marked) <= drop_sum + 1e-9,
        upper_claim_holds=drop_sum <= constant * reference + 1e-9,
    )


def theorem_bound_report(
    curve: AlgebraicCurve,
    config: Optional[CoveringConfig] = None,
    strict: bool = False,
) -> BoundReport:
    """
    count = #D_Q in B_{1/2}, the base b with count = b^{I(0,2)}, the
    covering certificate and the claim delta sum(xi) <= C(lambda) I.
    With strict set, a failed claim raises CalibrationError.
    """
    config = config or default_config()
    count = count_d_q(curve, COUNT_RADIUS)
    reference = frequency_I(curve, 0j, 2.0) if count > 0 else None
    fitted: Optional[float] = None
    if reference is not None and reference > 0:
        fitted = count ** (1.0 / reference) if count > 1 else 1.0
    trace = covering_count(curve, config)
    telescoping = telescoping_report(curve, trace, config)
    lhs = config.delta * trace.xi_sum
    rhs = overlap_constant(config.lambda_) * telescoping.reference_frequency
    holds = lhs <= telescoping.drop_sum + 1e-9 and telescoping.upper_claim_holds
    if strict and not holds:
        raise CalibrationError(
            "delta is too large for the measured frequency drops",
            delta=config.delta,
            xi_sum=trace.xi_sum,
            drop_sum=telescoping.drop_sum,
        )
    return BoundReport(
        count=count,
        frequency=reference,
        fitted_base=fitted,
        xi_sum=trace.xi_sum,
        proof_bound=trace.certified_bound,
        claim_lhs=lhs,
        claim_rhs=rhs,
        claim_holds=holds,
    )
