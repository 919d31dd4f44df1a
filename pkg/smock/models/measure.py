"""Measure models - test functions and integration methods.

Test functions live on E^N. On a smocked space they are read through the
anchor map: a free point is evaluated at itself, a collapsed stitch at its
anchor (the center of its bounding box). Every function here is bounded and
continuous; ``Bump`` and ``Tent`` have compact support.
"""

import math
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from smock.models.geometry import Point, _check_point


class _TestFunction(BaseModel):
    model_config = ConfigDict(frozen=True)

    def support(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Bounding box of the support, ``None`` when unbounded."""
        return None


class Bump(_TestFunction):
    """Smooth bump of the given peak height, zero outside the open ball."""

    kind: Literal["bump"] = "bump"
    center: Point
    radius: float = Field(..., gt=0)
    height: float = 1.0

    @field_validator("center")
    @classmethod
    def _finite(cls, v):
        return _check_point(v)

    def __call__(self, points) -> np.ndarray:
        P = np.atleast_2d(np.asarray(points, dtype=float))
        t = np.linalg.norm(P - np.asarray(self.center), axis=1) / self.radius
        out = np.zeros(len(P))
        inside = t < 1.0
        out[inside] = self.height * np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
        return out

    def support(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius


class Tent(_TestFunction):
    """Cone ``max(0, height - slope * |x - center|)``."""

    kind: Literal["tent"] = "tent"
    center: Point
    slope: float = Field(..., gt=0)
    height: float = 1.0

    @field_validator("center")
    @classmethod
    def _finite(cls, v):
        return _check_point(v)

    def __call__(self, points) -> np.ndarray:
        P = np.atleast_2d(np.asarray(points, dtype=float))
        t = np.linalg.norm(P - np.asarray(self.center), axis=1)
        return np.maximum(0.0, self.height - self.slope * t)

    def support(self):
        c = np.asarray(self.center)
        reach = abs(self.height) / self.slope
        return c - reach, c + reach


class Constant(_TestFunction):
    kind: Literal["constant"] = "constant"
    value: float = 1.0

    def __call__(self, points) -> np.ndarray:
        return np.full(len(np.atleast_2d(np.asarray(points, dtype=float))), self.value)


TestFunction = Annotated[Union[Bump, Tent, Constant], Field(discriminator="kind")]


class Exact1D(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["exact1d"] = "exact1d"


class MonteCarlo(BaseModel):
    """Uniform sampling; the seed is mandatory so runs are reproducible."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["monte_carlo"] = "monte_carlo"
    seed: int = Field(..., ge=0)
    sample_count: Optional[int] = Field(default=None, gt=0)


class Grid(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["grid"] = "grid"
    step: float = Field(..., gt=0)

    @field_validator("step")
    @classmethod
    def _finite(cls, v):
        if not math.isfinite(v):
            raise ValueError("grid step must be finite")
        return v


Method = Annotated[Union[Exact1D, MonteCarlo, Grid], Field(discriminator="kind")]


class WeakConvergenceRow(BaseModel):
    k: int
    phi_index: int
    integral_k: float
    integral_limit: float
    gap: float
    error: float
    stitch_volume: float


class WeakConvergenceTable(BaseModel):
    rows: List[WeakConvergenceRow] = Field(default_factory=list)
    non_decreasing: List[int] = Field(default_factory=list, description="phi indices whose gaps never shrink")
