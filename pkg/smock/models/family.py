"""Family models - parameterized pattern generators named in scene files.

Each family maps a positive integer k to a smocking pattern; the patterns
themselves are produced by ``smock.services.constructions.instantiate``.
Families that do not depend on k (``euclidean``, ``custom``) are used as
constant sequences and as limit spaces.
"""

from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from smock.models.geometry import Stitch
from smock.models.norm import NormSpec
from smock.models.pattern import Window

FAMILY_NAMES = ("example31", "example32", "remark36", "lattice", "custom", "euclidean")


class _Family(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class Example31(_Family):
    """k equal-gap closed subintervals of [-1, 1] of total length 1/3 or 2/3."""

    name: Literal["example31"] = "example31"

    @property
    def dimension(self) -> int:
        return 1


class Example32(_Family):
    """A single closed ball of radius 1/k about the origin of E^N."""

    name: Literal["example32"] = "example32"
    N: int = Field(default=2, ge=1)

    @property
    def dimension(self) -> int:
        return self.N


class Remark36(_Family):
    """A single interval [k^2, k^2 + k] escaping to infinity."""

    name: Literal["remark36"] = "remark36"

    @property
    def dimension(self) -> int:
        return 1


class Lattice(_Family):
    """Node balls at the points of Z^n rescaled by 1/k inside a cube.

    ``norm`` is carried for the tangent-cone commands, which evaluate the
    generator network through its word metric.
    """

    name: Literal["lattice"] = "lattice"
    norm: NormSpec
    node_radius: float = Field(default=0.25, gt=0, lt=0.5)
    extent: float = Field(default=1.0, gt=0)

    @property
    def dimension(self) -> int:
        return self.norm.dimension


class Custom(_Family):
    """A fixed stitch listing, the same for every k."""

    name: Literal["custom"] = "custom"
    stitches: List[Stitch] = Field(..., min_length=1)
    window: Optional[Window] = None

    @property
    def dimension(self) -> int:
        return self.stitches[0].dimension


class Euclidean(_Family):
    """E^N itself: no stitches."""

    name: Literal["euclidean"] = "euclidean"
    N: int = Field(default=1, ge=1)

    @property
    def dimension(self) -> int:
        return self.N


FamilySpec = Annotated[
    Union[Example31, Example32, Remark36, Lattice, Custom, Euclidean],
    Field(discriminator="name"),
]
