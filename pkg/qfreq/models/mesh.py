"""
Disk mesh and Q-labeling models
"""
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from qfreq.models.types import BoolArray, ComplexArray, FloatArray, IntArray


class DiskMesh(BaseModel):
    """
    Triangulated unit disk built from concentric rings.

    vertices is (V, 2); edges is (E, 2) of vertex indices with matching
    weights; triangle_shares[t, c] is the part of an edge weight owed to the
    side of triangle t opposite corner c; ring_index[v] is the ring a vertex
    sits on (0 is the center).
    """
    vertices: FloatArray
    edges: IntArray
    weights: FloatArray
    triangles: IntArray
    triangle_shares: FloatArray
    boundary: BoolArray
    ring_index: IntArray
    resolution: int = Field(..., ge=3)
    weighting: Literal["cotangent", "uniform"] = "cotangent"

    @model_validator(mode="after")
    def check_mesh(self) -> "DiskMesh":
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise ValueError("vertices must be (V, 2)")
        if len(self.edges) != len(self.weights):
            raise ValueError("one weight per edge")
        if self.triangle_shares.shape != self.triangles.shape:
            raise ValueError("one share per triangle side")
        if np.any(self.weights <= 0):
            raise ValueError("edge weights must be positive")
        radii = np.linalg.norm(self.vertices[self.boundary], axis=1)
        if np.any(np.abs(radii - 1.0) > 1e-9):
            raise ValueError("boundary vertices must lie on the unit circle")
        return self

    @property
    def vertex_count(self) -> int:
        return int(self.vertices.shape[0])

    def positions(self) -> np.ndarray:
        """Vertices as complex numbers"""
        return self.vertices[:, 0] + 1j * self.vertices[:, 1]

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class QLabeling(BaseModel):
    """One Q-point of C per vertex, stored as a (V, Q) complex array"""
    labels: ComplexArray
    fixed: BoolArray
    zero_mean: bool = False

    @model_validator(mode="after")
    def check_labels(self) -> "QLabeling":
        if self.labels.ndim != 2:
            raise ValueError("labels must be (V, Q)")
        if len(self.fixed) != len(self.labels):
            raise ValueError("one fixed flag per vertex")
        if not np.all(np.isfinite(self.labels)):
            raise ValueError("labels must be finite")
        return self

    @property
    def q(self) -> int:
        return int(self.labels.shape[1])

    class Config:
        frozen = True
        arbitrary_types_allowed = True


class ConvergenceStep(BaseModel):
    iteration: int
    energy: float
    matching_changes: int


class MinimizeResult(BaseModel):
    labeling: QLabeling
    energy: float
    iterations: int
    converged: bool
    log: list[ConvergenceStep]

    class Config:
        arbitrary_types_allowed = True


class BasinReport(BaseModel):
    """Energies reached from the default start and from seeded random matchings"""
    default_energy: float
    seeds: list[int]
    energies: list[float]
    spread: float
    best_energy: float
    best_seed: Optional[int] = None
