"""
Covering induction models
"""
from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, validator

from qfreq.models.types import Complex


class CoveringConfig(BaseModel):
    """The constants (lambda, delta) of the frequency-drop corollary"""
    lambda_: float = Field(0.1, alias="lambda")
    delta: float = Field(0.05, gt=0)
    max_depth: int = Field(60, ge=1)

    @validator("lambda_")
    def check_lambda(cls, value: float) -> float:
        if not 0 < value < 0.2:
            raise ValueError("lambda must lie in (0, 1/5)")
        return value

    @property
    def ball_bound(self) -> int:
        """floor(4 / lambda^2), the Vitali count bound"""
        return int(4.0 / self.lambda_ ** 2 + 1e-9)

    class Config:
        populate_by_name = True
        frozen = True


class CoveringLevel(BaseModel):
    level: int
    center: Complex
    count: int
    subcover_size: int
    xi: int
    children: list[Complex] = []

    class Config:
        arbitrary_types_allowed = True


class CoveringTrace(BaseModel):
    """Every level of the induction plus the certificate it yields"""
    config: CoveringConfig
    points: list[Complex]
    levels: list[CoveringLevel]
    final_depth: int
    xi_sum: int
    certified_bound: float
    certificate_holds: bool
    product_bound_holds: bool

    @property
    def initial_count(self) -> int:
        return self.levels[0].count if self.levels else 0

    class Config:
        arbitrary_types_allowed = True


class Verdict(str, Enum):
    CERTIFIED_EMPTY = "certified-empty"
    DROP_TOO_LARGE = "drop-too-large"


class AnnulusVerdict(BaseModel):
    center: Complex
    outer_radius: float
    inner_radius: float
    drop: float
    verdict: Verdict
    detected: list[Complex]
    measured_empty: bool
    agrees: bool

    class Config:
        arbitrary_types_allowed = True


class TelescopingReport(BaseModel):
    """Frequency drops over the scales where the count dropped"""
    center: Complex
    levels: list[int]
    drops: list[float]
    drop_sum: float
    overlap_constant: int
    reference_frequency: float
    lower_claim_holds: bool
    upper_claim_holds: bool

    class Config:
        arbitrary_types_allowed = True


class BoundReport(BaseModel):
    count: int
    frequency: Optional[float] = None
    fitted_base: Optional[float] = None
    xi_sum: int
    proof_bound: float
    claim_lhs: float
    claim_rhs: Optional[float] = None
    claim_holds: Optional[bool] = None
