"""Finite metric space models - GH solver inputs and outputs.

Nets of metric balls are handed to the Gromov-Hausdorff machinery as
``FiniteMetricSpace`` objects: labels plus a symmetric distance matrix. When
a net was built from lifts in E^N the lift positions travel along so a
same-preimage correspondence can be seeded.
"""

from typing import List, Optional, Set, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

TRIANGLE_CHECK_MAX_POINTS = 150


class FiniteMetricSpace(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    labels: List[str]
    dist: np.ndarray
    base_index: int = 0
    positions: Optional[np.ndarray] = None

    @field_validator("dist", mode="before")
    @classmethod
    def _as_matrix(cls, v):
        return np.asarray(v, dtype=float)

    @field_validator("positions", mode="before")
    @classmethod
    def _as_positions(cls, v):
        return None if v is None else np.asarray(v, dtype=float)

    @model_validator(mode="after")
    def _metric(self):
        n = len(self.labels)
        D = self.dist
        if D.shape != (n, n):
            raise ValueError(f"distance matrix shape {D.shape} does not match {n} labels")
        if n == 0:
            raise ValueError("finite metric space needs at least one point")
        if not 0 <= self.base_index < n:
            raise ValueError(f"base_index {self.base_index} out of range")
        if not np.all(np.isfinite(D)) or np.any(D < 0):
            raise ValueError("distances must be finite and nonnegative")
        if not np.allclose(D, D.T, atol=1e-9, rtol=0) or np.any(np.abs(np.diag(D)) > 1e-12):
            raise ValueError("distance matrix must be symmetric with zero diagonal")
        if n <= TRIANGLE_CHECK_MAX_POINTS and self.triangle_violation() > 1e-9:
            raise ValueError("distance matrix violates the triangle inequality")
        return self

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def diameter(self) -> float:
        return float(self.dist.max())

    def triangle_violation(self) -> float:
        """Largest amount by which d(i,j) exceeds d(i,k) + d(k,j)."""
        D = self.dist
        worst = 0.0
        for k in range(len(D)):
            worst = max(worst, float((D - (D[:, k, None] + D[None, k, :])).max()))
        return worst

    def scaled(self, factor: float) -> "FiniteMetricSpace":
        return FiniteMetricSpace(
            labels=self.labels, dist=self.dist * factor, base_index=self.base_index, positions=self.positions
        )

    @classmethod
    def from_points(cls, points, labels: Optional[List[str]] = None, base_index: int = 0) -> "FiniteMetricSpace":
        """Euclidean metric on a list of points."""
        P = np.asarray(points, dtype=float)
        if P.ndim == 1:
            P = P[:, None]
        D = np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(-1))
        names = labels or [f"p{i}" for i in range(len(P))]
        return cls(labels=names, dist=D, base_index=base_index, positions=P)


class Correspondence(BaseModel):
    """Relation between two finite spaces given as index pairs (i in X, j in Y)."""

    model_config = ConfigDict(frozen=True)

    pairs: Set[Tuple[int, int]]

    def covers(self, n_x: int, n_y: int) -> bool:
        return {i for i, _ in self.pairs} == set(range(n_x)) and {j for _, j in self.pairs} == set(range(n_y))

    @classmethod
    def from_maps(cls, f: List[int], g: List[int]) -> "Correspondence":
        """graph(f) union transpose(graph(g)) for f: X -> Y and g: Y -> X."""
        return cls(pairs={(i, j) for i, j in enumerate(f)} | {(i, j) for j, i in enumerate(g)})

