"""Pattern models - smocking patterns, their constants and points of X.

A smocked space is built from a finite listing of stitches that is declared
complete inside a window (the window-restricted representation of a possibly
countable family). Patterns are only ever created by
``smock.services.smocked.validate_pattern`` which computes the separation
factor delta; the models here just carry validated data.
"""

import math
from typing import Annotated, Any, Dict, List, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from smock.models.geometry import Point, Stitch, _check_point


class Window(BaseModel):
    """Closed axis box; infinite bounds mean the listing is complete everywhere."""

    model_config = ConfigDict(frozen=True)

    min: Tuple[float, ...]
    max: Tuple[float, ...]

    @field_validator("min", "max")
    @classmethod
    def _no_nan(cls, v):
        if len(v) < 1 or any(math.isnan(c) for c in v):
            raise ValueError(f"window bound must be a non-empty vector without NaN: {v}")
        return tuple(float(c) for c in v)

    @model_validator(mode="after")
    def _ordered(self):
        if len(self.min) != len(self.max):
            raise ValueError("window bounds have different dimensions")
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise ValueError(f"window min {self.min} exceeds max {self.max}")
        return self

    @classmethod
    def everywhere(cls, dimension: int) -> "Window":
        return cls(min=(-math.inf,) * dimension, max=(math.inf,) * dimension)

    @classmethod
    def cube(cls, dimension: int, radius: float, center: Point = None) -> "Window":
        c = center or (0.0,) * dimension
        return cls(min=tuple(x - radius for x in c), max=tuple(x + radius for x in c))

    @property
    def dimension(self) -> int:
        return len(self.min)

    @property
    def bounded(self) -> bool:
        return all(math.isfinite(c) for c in self.min + self.max)

    @property
    def diagonal(self) -> float:
        return math.dist(self.min, self.max)

    def contains(self, p: Point, tol: float = 0.0) -> bool:
        return all(lo - tol <= x <= hi + tol for x, lo, hi in zip(p, self.min, self.max))


class SmockingPattern(BaseModel):
    """Validated finite collection of pairwise separated stitches.

    ``delta`` is the minimal set distance between distinct stitches
    (``inf`` for fewer than two stitches). ``metadata`` carries generator
    facts such as ``L_k`` or ``expected_endpoint_distance``.
    """

    model_config = ConfigDict(frozen=True)

    dimension: int = Field(..., ge=1)
    stitches: List[Stitch] = Field(default_factory=list)
    window: Window
    delta: float = math.inf
    metadata: Dict[str, Any] = Field(default_factory=dict)


class SmockingConstants(BaseModel):
    """Depth, smocking lengths and separation of a pattern over a window.

    ``depth_h`` is ``inf`` when some window point is farther than the window
    diagonal from every stitch; its error bar is ``grid_step * sqrt(N)``.
    """

    model_config = ConfigDict(frozen=True)

    depth_h: float
    depth_error: float
    l_min: float
    l_max: float
    delta: float
    window: Window
    grid_step: float


class Free(BaseModel):
    """A point of X outside every stitch."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["free"] = "free"
    coords: Point

    @field_validator("coords")
    @classmethod
    def _finite(cls, v):
        return _check_point(v)


class Collapsed(BaseModel):
    """The point of X a whole stitch is collapsed to."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["collapsed"] = "collapsed"
    stitch_id: int


SpacePoint = Annotated[Union[Free, Collapsed], Field(discriminator="kind")]


def label_of(p: Union[Free, Collapsed]) -> str:
    if isinstance(p, Collapsed):
        return f"stitch:{p.stitch_id}"
    return "x(" + ",".join(f"{c:.12g}" for c in p.coords) + ")"
