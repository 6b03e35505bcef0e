"""
Detection of the singular Q-points D_Q of a barycenter-free curve
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional

import numpy as np

from qfreq.aq_space import distance_to_origin, fiber_diameter, largest_cluster
from qfreq.config import settings
from qfreq.curve_eval import discriminant_roots, eval_fiber
from qfreq.errors import InvariantViolation
from qfreq.frequency import extrapolated_frequency, frequency_I
from qfreq.middleware.guards import collapse_tolerance, require_barycenter_free
from qfreq.models.curve import AlgebraicCurve, Disk
from qfreq.models.singular import InteriorBoundReport, SingularPointRecord

logger = logging.getLogger(__name__)

DEFAULT_REGION = Disk(center=0j, radius=0.5)


def _lexicographic(points: Iterable[complex]) -> list[complex]:
    return sorted((complex(z) for z in points), key=lambda z: (z.real, z.imag))


def find_singular_candidates(curve: AlgebraicCurve, region: Disk = DEFAULT_REGION) -> list[complex]:
    """Discriminant zeros inside the closed region, deduplicated at DEDUP_TOL"""
    roots = discriminant_roots(curve)
    inside = [z for z in _lexicographic(roots) if region.contains(z, tol=settings.DEDUP_TOL)]
    kept: list[complex] = []
    for z in inside:
        if all(abs(z - other) > settings.DEDUP_TOL * (1.0 + abs(z)) for other in kept):
            kept.append(z)
    logger.debug(f"{len(kept)} candidates in {region}")
    return kept


def _classify(curve: AlgebraicCurve, z: complex, tol: float) -> SingularPointRecord:
    fiber = eval_fiber(curve, z)
    diameter = fiber_diameter(fiber)
    distance = distance_to_origin(fiber)
    full = diameter < tol and distance < tol
    frequency: Optional[float] = None
    if full:
        frequency = extrapolated_frequency(curve, z)
        floor = 1.0 / curve.q - settings.EXTRAPOLATION_TOL
        if frequency < floor:
            raise InvariantViolation(
                "Q-point with frequency below 1/Q",
                location=z,
                frequency=frequency,
                floor=floor,
            )
    return SingularPointRecord(
        location=z,
        fiber_diameter=diameter,
        distance_to_zero=distance,
        small_scale_frequency=frequency,
        is_full_multiplicity=full,
        multiplicity=largest_cluster(fiber, tol),
    )


def classify_d_q(curve: AlgebraicCurve, candidates: Iterable[complex]) -> list[SingularPointRecord]:
    """
    Collapse test for each candidate. Full multiplicity means the fiber is
    Q[[0]] within the collapse tolerance; partial collisions come back with
    is_full_multiplicity false and their largest cluster size.
    """
    ordered = _lexicographic(candidates)
    if not ordered:
        return []
    require_barycenter_free(curve)
    tol = collapse_tolerance(curve)
    with ThreadPoolExecutor(max_workers=settings.worker_count) as pool:
        records = list(pool.map(lambda z: _classify(curve, z, tol), ordered))
    logger.info(
        f"Classified {len(records)} candidates: "
        f"{sum(record.is_full_multiplicity for record in records)} of full multiplicity"
    )
    return records


def detect_singular_points(curve: AlgebraicCurve, region: Disk = DEFAULT_REGION) -> list[SingularPointRecord]:
    return classify_d_q(curve, find_singular_candidates(curve, region))


def d_q_points(curve: AlgebraicCurve, region: Disk = DEFAULT_REGION) -> list[complex]:
    """Locations of the full-multiplicity points in the region"""
    return [
        record.location
        for record in detect_singular_points(curve, region)
        if record.is_full_multiplicity and region.contains(record.location)
    ]


def count_d_q(curve: AlgebraicCurve, radius: float = 0.5) -> int:
    """Number of Q-points in the closed disk of the given radius about 0"""
    return len(d_q_points(curve, Disk(center=0j, radius=radius)))


def interior_frequency_bound(curve: AlgebraicCurve, radius: float = 0.5) -> InteriorBoundReport:
    """The empirical constant C in I(x, 1) <= C I(0, 2) over Q-points x in B_radius"""
    reference = frequency_I(curve, 0j, 2.0)
    points = d_q_points(curve, Disk(center=0j, radius=radius))
    ratios = [frequency_I(curve, x, 1.0) / reference for x in points]
    if not ratios:
        return InteriorBoundReport(reference_frequency=reference, ratios=[])
    worst = int(np.argmax(ratios))
    return InteriorBoundReport(
        reference_frequency=reference,
        ratios=ratios,
        constant=ratios[worst],
        worst_location=points[worst],
    )
