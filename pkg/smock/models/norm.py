"""Norm models - weighted lattice generators and word-metric fields.

A ``NormSpec`` is a symmetric finite set V of integer vectors with positive
weights. It defines two objects on Z^n:

    - the polyhedral norm F_V(x) = inf { sum |a_i| l_i : x = sum a_i v_i }
    - the weighted word metric d_G, shortest paths along edges p -> p + v_i

The generators must span R^n and be closed under negation with matching
weights; ``symmetrized`` builds such a spec from one representative per
pair.
"""

from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class NormSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    dimension: int = Field(..., ge=1)
    generators: List[Tuple[int, ...]] = Field(..., min_length=2)
    weights: List[float] = Field(..., min_length=2)

    @model_validator(mode="after")
    def _symmetric_spanning(self):
        if len(self.generators) != len(self.weights):
            raise ValueError("generators and weights have different lengths")
        if any(len(v) != self.dimension for v in self.generators):
            raise ValueError(f"every generator needs {self.dimension} coordinates")
        if any(all(c == 0 for c in v) for v in self.generators):
            raise ValueError("the zero vector is not a generator")
        if any(not (w > 0 and np.isfinite(w)) for w in self.weights):
            raise ValueError("weights must be positive and finite")

        table: Dict[Tuple[int, ...], float] = {}
        for v, w in zip(self.generators, self.weights):
            if v in table and table[v] != w:
                raise ValueError(f"generator {v} listed twice with different weights")
            table[v] = w
        for v, w in table.items():
            neg = tuple(-c for c in v)
            if neg not in table:
                raise ValueError(f"generator set is not symmetric: {neg} missing")
            if table[neg] != w:
                raise ValueError(f"weights of {v} and {neg} differ")
        if np.linalg.matrix_rank(np.asarray(self.generators, dtype=float)) < self.dimension:
            raise ValueError("generators do not span R^n")
        return self

    @classmethod
    def symmetrized(cls, half: List[Tuple[int, ...]], weights: List[float]) -> "NormSpec":
        """Close ``half`` under negation, each -v inheriting the weight of v."""
        gens, ws = [], []
        for v, w in zip(half, weights):
            gens += [tuple(v), tuple(-c for c in v)]
            ws += [w, w]
        return cls(dimension=len(half[0]), generators=gens, weights=ws)

    @property
    def min_weight(self) -> float:
        return min(self.weights)

    @property
    def max_step(self) -> int:
        """Largest sup-norm of a generator."""
        return max(max(abs(c) for c in v) for v in self.generators)


class WordMetricField(BaseModel):
    """Word-metric distances from 0 to every lattice point of a box.

    ``distances`` is indexed by ``point - box_min``. ``search_radius`` is the
    radius of the cube the shortest-path search was allowed to explore; it
    contains every geodesic to a point of the box.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    box_min: Tuple[int, ...]
    box_max: Tuple[int, ...]
    distances: np.ndarray
    search_radius: int

    def at(self, p) -> float:
        return float(self.distances[tuple(int(c) - lo for c, lo in zip(p, self.box_min))])

    def points(self) -> np.ndarray:
        axes = [np.arange(lo, hi + 1) for lo, hi in zip(self.box_min, self.box_max)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))


class StableNormRow(BaseModel):
    lam: int
    estimate: float
    norm: float
    gap: float


class StableNormSweep(BaseModel):
    x: List[str]
    rows: List[StableNormRow]
    rate_constant: float
