"""Scene document - the single input format of ``smockctl``.

A scene is a versioned JSON document:

    {
      "version": 1,
      "dimension": 2,
      "pattern": [ {"kind": "ball", "center": [0, 0], "radius": 1}, ... ],
      "family":  {"name": "example32", "N": 2},
      "window":  {"min": [-10, -10], "max": [10, 10]},
      "basepoint": [0, 0],
      "experiment": { "ks": [2, 4, 8], "R": 2, "eps": 0.1, ... }
    }

Exactly one of ``pattern`` and ``family`` is given. ``experiment`` holds the
parameters of every command; each command reads the fields it needs. The
full schema is described in docs/scene-schema.md.
"""

from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from smock.models.family import FamilySpec
from smock.models.geometry import CompactSet, Point, Stitch
from smock.models.measure import Method, TestFunction
from smock.models.norm import NormSpec
from smock.models.pattern import Window

SCENE_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class MatrixDoc(_Strict):
    """A finite metric space written out as labels plus a distance matrix."""

    labels: List[str] = Field(..., min_length=1)
    dist: List[List[float]]
    base_index: int = 0


class NormDoc(_Strict):
    """Generators with weights; ``symmetrize`` adds -v for every listed v."""

    generators: List[Tuple[int, ...]] = Field(..., min_length=1)
    weights: List[float] = Field(..., min_length=1)
    symmetrize: bool = False

    def to_spec(self) -> NormSpec:
        if self.symmetrize:
            return NormSpec.symmetrized(list(self.generators), list(self.weights))
        return NormSpec(dimension=len(self.generators[0]), generators=list(self.generators), weights=list(self.weights))


class Experiment(_Strict):
    ks: List[int] = Field(default_factory=lambda: [1])
    limit: Optional[FamilySpec] = None
    limit_k: int = Field(default=1, ge=1)

    # metric balls, nets, constants
    R: float = Field(default=1.0, gt=0)
    r: float = Field(default=1.0, gt=0)
    eps: float = Field(default=0.1, gt=0)
    resolution: Optional[float] = Field(default=None, gt=0)
    grid_step: float = Field(default=0.1, gt=0)
    evaluation_window: Optional[Window] = None
    pairs: List[Tuple[Point, Point]] = Field(default_factory=list)
    center: Optional[Point] = None

    # hausdorff / gh
    A: Optional[CompactSet] = None
    B: Optional[CompactSet] = None
    X: Optional[MatrixDoc] = None
    Y: Optional[MatrixDoc] = None

    # tangent cone
    norm: Optional[NormDoc] = None
    x: List[str] = Field(default_factory=list, description="rational coordinates, e.g. '1/2'")
    lambdas: List[int] = Field(default_factory=lambda: [1, 2, 4, 8, 16, 32])
    sample_box: Optional[Window] = None

    # measure
    phis: List[TestFunction] = Field(default_factory=list)
    support_box: Optional[Window] = None
    radii: List[float] = Field(default_factory=list)
    method: Optional[Method] = None
    seed: Optional[int] = Field(default=None, ge=0)

    budget: Optional[int] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _positive_ks(self):
        if any(k < 1 for k in self.ks):
            raise ValueError("ks must be positive integers")
        if any(lam < 1 for lam in self.lambdas):
            raise ValueError("lambdas must be positive integers")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")
        return self


class Scene(_Strict):
    version: int = SCENE_VERSION
    dimension: int = Field(..., ge=1)
    pattern: Optional[List[Stitch]] = None
    family: Optional[FamilySpec] = None
    window: Optional[Window] = None
    basepoint: Optional[Point] = None
    experiment: Experiment = Field(default_factory=Experiment)

    @model_validator(mode="after")
    def _one_source(self):
        if self.version != SCENE_VERSION:
            raise ValueError(f"unsupported scene version {self.version} (expected {SCENE_VERSION})")
        if (self.pattern is None) == (self.family is None):
            raise ValueError("give exactly one of 'pattern' and 'family'")
        return self
