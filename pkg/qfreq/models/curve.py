"""
Algebraic curve models
"""
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from qfreq.models.qpoint import QPoint
from qfreq.models.types import BoolArray, Complex, ComplexArray


class AlgebraicCurve(BaseModel):
    """
    P(z, w) = sum_{j<=Q, k<=K} c[j][k] w^j z^k, read as the Q-valued map
    z -> {roots w of P(z, .)}.
    """
    coeffs: ComplexArray
    degree_w: int = Field(..., ge=1)
    degree_z: int = Field(..., ge=0)

    @model_validator(mode="before")
    @classmethod
    def infer_degrees(cls, data: Any) -> Any:
        if isinstance(data, dict) and "coeffs" in data:
            shape = np.shape(np.array(data["coeffs"], dtype=complex))
            if len(shape) == 2:
                data = {"degree_w": shape[0] - 1, "degree_z": shape[1] - 1, **data}
        return data

    @model_validator(mode="after")
    def check_leading(self) -> "AlgebraicCurve":
        c = self.coeffs
        if c.ndim != 2:
            raise ValueError("coeffs must be a (degree_w + 1) x (degree_z + 1) matrix")
        if c.shape != (self.degree_w + 1, self.degree_z + 1):
            raise ValueError(
                f"coeffs shape {c.shape} does not match degrees "
                f"({self.degree_w}, {self.degree_z})"
            )
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs must be finite")
        leading = c[self.degree_w]
        if leading[0] == 0 or np.any(leading[1:] != 0):
            raise ValueError("the w^Q coefficient must be a nonzero constant")
        return self

    @property
    def q(self) -> int:
        return self.degree_w

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[self.degree_w, 0])

    def coefficient_scale(self) -> float:
        """Largest coefficient modulus after monic normalization"""
        return float(np.max(np.abs(self.coeffs)) / abs(self.leading))

    def key(self) -> tuple:
        """Hashable identity used by the evaluation caches"""
        return (self.coeffs.shape, self.coeffs.tobytes())

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class FiberJet(BaseModel):
    """Fiber at z with the derivatives of its holomorphic selections"""
    z: Complex
    fiber: QPoint
    derivatives: ComplexArray
    valid_derivative: BoolArray

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class Disk(BaseModel):
    """Closed disk in the z-plane"""
    center: Complex = 0j
    radius: float = Field(..., gt=0)

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        return abs(z - self.center) <= self.radius + tol

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class CurveDescriptor(BaseModel):
    """On-disk JSON form of a curve"""
    degree_w: int = Field(..., ge=1)
    degree_z: int = Field(..., ge=0)
    coeffs: list[list[list[float]]]
    label: Optional[str] = None
