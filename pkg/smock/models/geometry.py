"""Geometry models - points and stitch shapes in Euclidean space.

A stitch is one compact connected set that the smocking map collapses to a
single point. Four shapes are supported:

    - Ball:    closed Euclidean ball (center, radius > 0)
    - Box:     closed axis-aligned box (min <= max coordinatewise)
    - Segment: closed straight segment [a, b]
    - Cloud:   finite point list; only a single-point cloud is connected,
               multi-point clouds are rejected when a pattern is validated

All coordinates are plain tuples of floats so the models serialize directly
into scene documents. Heavy computation lives in ``smock.services.euclid``.
"""

import math
from typing import Annotated, List, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Point = Tuple[float, ...]


def _check_point(value: Point) -> Point:
    if len(value) < 1:
        raise ValueError("point needs at least one coordinate")
    if not all(math.isfinite(c) for c in value):
        raise ValueError(f"point has non-finite coordinates: {value}")
    return tuple(float(c) for c in value)


class _Shape(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int = 0  # Label, unique within one pattern


class Ball(_Shape):
    kind: Literal["ball"] = "ball"
    center: Point
    radius: float = Field(..., gt=0, description="Strictly positive radius")

    @field_validator("center")
    @classmethod
    def _finite_center(cls, v):
        return _check_point(v)

    @field_validator("radius")
    @classmethod
    def _finite_radius(cls, v):
        if not math.isfinite(v):
            raise ValueError("radius must be finite")
        return v

    @property
    def dimension(self) -> int:
        return len(self.center)


class Box(_Shape):
    kind: Literal["box"] = "box"
    min: Point
    max: Point

    @field_validator("min", "max")
    @classmethod
    def _finite_corners(cls, v):
        return _check_point(v)

    @model_validator(mode="after")
    def _ordered(self):
        if len(self.min) != len(self.max):
            raise ValueError("box corners have different dimensions")
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise ValueError(f"box min {self.min} exceeds max {self.max}")
        return self

    @property
    def dimension(self) -> int:
        return len(self.min)


class Segment(_Shape):
    kind: Literal["segment"] = "segment"
    a: Point
    b: Point

    @field_validator("a", "b")
    @classmethod
    def _finite_ends(cls, v):
        return _check_point(v)

    @model_validator(mode="after")
    def _same_dimension(self):
        if len(self.a) != len(self.b):
            raise ValueError("segment endpoints have different dimensions")
        return self

    @property
    def dimension(self) -> int:
        return len(self.a)


class Cloud(_Shape):
    kind: Literal["cloud"] = "cloud"
    points: List[Point] = Field(..., min_length=1)

    @field_validator("points")
    @classmethod
    def _finite_points(cls, v):
        pts = [_check_point(p) for p in v]
        if len({len(p) for p in pts}) != 1:
            raise ValueError("cloud points have different dimensions")
        return pts

    @property
    def dimension(self) -> int:
        return len(self.points[0])


Stitch = Annotated[Union[Ball, Box, Segment, Cloud], Field(discriminator="kind")]


class CompactSet(BaseModel):
    """Finite union of stitch shapes, used as a Hausdorff-distance operand."""

    model_config = ConfigDict(frozen=True)

    pieces: List[Stitch] = Field(..., min_length=1)

    @model_validator(mode="after")
    def _same_dimension(self):
        if len({p.dimension for p in self.pieces}) != 1:
            raise ValueError("compact set pieces have different dimensions")
        return self

    @property
    def dimension(self) -> int:
        return self.pieces[0].dimension


class Estimate(BaseModel):
    """A number with its error bar; exact quantities carry error 0."""

    model_config = ConfigDict(frozen=True)

    value: float
    error: float = 0.0
    method: str = "exact"
