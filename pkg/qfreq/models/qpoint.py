"""
Q-point models: unordered Q-tuples of vectors
"""
from typing import Any, Iterable, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from qfreq.models.types import FloatArray


class QPoint(BaseModel):
    """
    An element of A_Q(R^n): exactly q vectors in R^n, compared as a multiset.

    values is stored as a read-only (q, n) float array; a 1-d input is read
    as q points on the line.
    """
    values: FloatArray
    q: int = Field(..., ge=1)

    @model_validator(mode="before")
    @classmethod
    def infer_q(cls, data: Any) -> Any:
        if isinstance(data, dict) and "values" in data:
            values = np.asarray(data["values"], dtype=float)
            if values.ndim == 1:
                values = values.reshape(-1, 1)
            data = {"q": len(values), **data, "values": values}
        return data

    @model_validator(mode="after")
    def check_shape(self) -> "QPoint":
        values = self.values
        if values.ndim != 2 or values.shape[1] < 1:
            raise ValueError("values must be a list of vectors")
        if values.shape[0] != self.q:
            raise ValueError(f"expected {self.q} values, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        return self

    @property
    def n(self) -> int:
        """Ambient dimension"""
        return int(self.values.shape[1])

    @classmethod
    def from_complex(cls, roots: Iterable[complex]) -> "QPoint":
        """Identify C with R^2"""
        roots = np.asarray(list(roots), dtype=complex)
        return cls(values=np.column_stack([roots.real, roots.imag]), q=len(roots))

    @classmethod
    def collapsed(cls, point: Sequence[float], q: int) -> "QPoint":
        """Q[[p]]"""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        return cls(values=np.tile(point, (q, 1)), q=q)

    def as_complex(self) -> np.ndarray:
        """The values as complex numbers (n = 2 only)"""
        if self.n != 2:
            raise ValueError("complex view needs n = 2")
        return self.values[:, 0] + 1j * self.values[:, 1]

    def max_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.values, axis=1)))

    class Config:
        frozen = True
        arbitrary_types_allowed = True
