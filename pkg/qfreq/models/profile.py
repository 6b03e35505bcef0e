"""
Frequency-side report models
"""
from typing import Optional

from pydantic import BaseModel, Field, model_validator

from qfreq.models.types import Complex


class RadialProfile(BaseModel):
    """Sampled D, H and I = r D / H around one center"""
    center: Complex = 0j
    radii: list[float]
    D: list[float]
    H: list[float]
    I: list[Optional[float]]
    method: str = "flux"

    @model_validator(mode="after")
    def check_columns(self) -> "RadialProfile":
        n = len(self.radii)
        if not (len(self.D) == len(self.H) == len(self.I) == n):
            raise ValueError("profile columns differ in length")
        if any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be strictly increasing")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")
        return self

    class Config:
        arbitrary_types_allowed = True


class MonotonicityReport(BaseModel):
    """I(t) - I(s) against the integrated Cauchy-Schwarz remainder"""
    s: float
    t: float
    lhs: float
    rhs: float
    residual: float
    passed: bool


class SlackCheck(BaseModel):
    """One inequality lower <= middle <= upper with the margins that remain"""
    name: str
    lower: float
    middle: float
    upper: float
    lower_slack: float
    upper_slack: float
    passed: bool


class GrowthReport(BaseModel):
    """Height and energy growth checks between the radii r <= t"""
    r: float
    t: float
    log_derivative: float
    log_derivative_expected: float
    log_derivative_error: float
    log_derivative_passed: bool
    height_sandwich: SlackCheck
    energy_sandwich: Optional[SlackCheck] = None
    passed: bool


class PoincareReport(BaseModel):
    """H(r)/r <= 2 int_0^r D(s)/s ds <= Q D(r) at a Q-point"""
    r: float
    height_over_r: float
    energy_integral: float
    q_energy: float
    first_slack: float
    second_slack: float
    relative_gap: float
    passed: bool


class HomogeneityReport(BaseModel):
    """Constant frequency and vanishing monotonicity remainder"""
    center: Complex = 0j
    frequencies: list[float]
    spread: float
    remainder: float
    homogeneous: bool
    degree: float = Field(..., description="mean frequency over the sampled radii")

    class Config:
        arbitrary_types_allowed = True
