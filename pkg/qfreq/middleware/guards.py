"""
Precondition guards shared by the frequency, singular and covering engines
"""
import numpy as np

from qfreq.aq_space import distance_to_origin, fiber_diameter
from qfreq.config import settings
from qfreq.curve_eval import eval_fiber, fiber_scale, is_barycenter_free
from qfreq.errors import BarycenterError, DegenerateHeightError, PreconditionError
from qfreq.models.curve import AlgebraicCurve
from qfreq.models.qpoint import QPoint


def collapse_tolerance(curve: AlgebraicCurve) -> float:
    """COLLAPSE_TOL scaled by the largest fiber modulus on |z| = 2"""
    return settings.COLLAPSE_TOL * (1.0 + fiber_scale(curve))


def require_barycenter_free(curve: AlgebraicCurve) -> AlgebraicCurve:
    """Verify every fiber has barycenter zero"""
    if not is_barycenter_free(curve):
        raise BarycenterError(
            "curve fibers are not barycenter-free; subtract the barycenter first",
            q=curve.q,
        )
    return curve


def require_q_point(curve: AlgebraicCurve, x: complex) -> QPoint:
    """Verify f(x) = Q[[0]] and return the fiber"""
    fiber = eval_fiber(curve, x)
    tol = collapse_tolerance(curve)
    diameter = fiber_diameter(fiber)
    distance = distance_to_origin(fiber)
    if diameter >= tol or distance >= tol:
        raise PreconditionError(
            "x is not a Q-point of the curve",
            x=complex(x),
            fiber_diameter=diameter,
            distance_to_zero=distance,
            tolerance=tol,
        )
    return fiber


def height_floor(curve: AlgebraicCurve, r: float) -> float:
    return settings.DEGENERATE_HEIGHT * 2.0 * np.pi * r * (1.0 + curve.coefficient_scale()) ** 2


def require_positive_height(curve: AlgebraicCurve, x: complex, r: float, height: float) -> float:
    """Verify H(x, r) is above the degeneracy floor"""
    floor = height_floor(curve, r)
    if not height > floor:
        raise DegenerateHeightError(
            "H vanishes: the map is Q[[0]] near x",
            x=complex(x),
            r=r,
            height=height,
            floor=floor,
        )
    return height
