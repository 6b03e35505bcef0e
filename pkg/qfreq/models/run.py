"""
Command run configuration
"""
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator, validator

from qfreq.config import settings
from qfreq.models.types import Complex


class RunConfig(BaseModel):
    """Everything one command needs; validated before any computation"""
    curve_file: Optional[Path] = None
    example: Optional[Literal["f", "g"]] = None
    eps: float = Field(0.1, ge=0)
    z_list: list[Complex] = []
    center: Complex = 0j
    rmin: float = Field(0.01, gt=0)
    rmax: float = Field(2.0, gt=0)
    samples: int = Field(20, ge=2)
    collapse_tol: float = Field(default_factory=lambda: settings.COLLAPSE_TOL, gt=0)
    extrapolation_tol: float = Field(default_factory=lambda: settings.EXTRAPOLATION_TOL, gt=0)
    flux_rtol: float = Field(default_factory=lambda: settings.FLUX_RTOL, gt=0)
    lambda_: float = Field(default_factory=lambda: settings.LAMBDA, alias="lambda")
    delta: float = Field(default_factory=lambda: settings.DELTA, gt=0)
    max_depth: int = Field(default_factory=lambda: settings.MAX_DEPTH, ge=1)
    radius: float = Field(0.5, gt=0)
    resolution: int = Field(40, ge=3)
    max_iter: int = Field(default_factory=lambda: settings.MINIMIZE_MAX_ITER, ge=0)
    weighting: Literal["cotangent", "uniform"] = "cotangent"
    out: Path = Field(default_factory=lambda: Path(settings.OUTPUT_DIR))

    @validator("lambda_")
    def check_lambda(cls, value: float) -> float:
        if not 0 < value < 0.2:
            raise ValueError("lambda must lie in (0, 1/5)")
        return value

    @model_validator(mode="after")
    def check_source(self) -> "RunConfig":
        if (self.curve_file is None) == (self.example is None):
            raise ValueError("give exactly one of --curve or --example")
        if self.rmin >= self.rmax:
            raise ValueError("rmin must be below rmax")
        return self

    class Config:
        populate_by_name = True
        arbitrary_types_allowed = True
