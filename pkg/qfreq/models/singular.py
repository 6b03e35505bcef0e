"""
Singular point models
"""
from typing import Optional

from pydantic import BaseModel, Field

from qfreq.models.types import Complex


class SingularPointRecord(BaseModel):
    """A discriminant zero with its collapse evidence"""
    location: Complex
    fiber_diameter: float = Field(..., ge=0)
    distance_to_zero: float = Field(..., ge=0)
    small_scale_frequency: Optional[float] = None
    is_full_multiplicity: bool
    multiplicity: int = Field(..., ge=1)

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class InteriorBoundReport(BaseModel):
    """max over Q-points x in B_{1/2} of I(x, 1) / I(0, 2)"""
    reference_frequency: float
    ratios: list[float]
    constant: Optional[float] = None
    worst_location: Optional[Complex] = None

    class Config:
        arbitrary_types_allowed = True
