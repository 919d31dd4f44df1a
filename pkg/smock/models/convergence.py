"""Convergence experiment results.

Rows produced by the sweeps in ``smock.agents.convergence``: GH brackets
between ball nets, local smocking constants with their stabilization
verdict, local Hausdorff distances of stitch unions and endpoint distances
of the alternating interval family.
"""

from typing import List, Optional

from pydantic import BaseModel, Field, model_validator


class ConvergenceRow(BaseModel):
    k: int
    R: float
    gh_upper: float
    gh_lower: float
    net_eps: float
    gh_exact: Optional[float] = None
    net_size: int = 0
    limit_net_size: int = 0

    @model_validator(mode="after")
    def _bracket(self):
        if self.gh_lower > self.gh_upper + 1e-9:
            raise ValueError(f"gh_lower {self.gh_lower} exceeds gh_upper {self.gh_upper}")
        return self


class ConvergenceCurve(BaseModel):
    comparison: str = "limit"  # or "successive": X_k against X_(k+1)
    rows: List[ConvergenceRow] = Field(default_factory=list)

    def column(self, name: str) -> List[Optional[float]]:
        return [getattr(r, name) for r in self.rows]


class LocalConstantsRow(BaseModel):
    k: int
    L_r: float
    delta_r: float
    stitch_count: int
    radius: float = Field(..., description="r + L_r, the radius of the ball the stitches meet")


class LocalConstantsReport(BaseModel):
    r: float
    rows: List[LocalConstantsRow] = Field(default_factory=list)
    stabilized: bool = False
    K_r: Optional[int] = None
    failed_bound: Optional[str] = None


class LocalHausdorffRow(BaseModel):
    k: int
    hausdorff: float
    error: float = 0.0


class LocalHausdorffReport(BaseModel):
    R: float
    rows: List[LocalHausdorffRow] = Field(default_factory=list)
    toward_zero: bool = False


class HypothesesReport(BaseModel):
    constants: LocalConstantsReport
    hausdorff: LocalHausdorffReport

    @property
    def h1(self) -> bool:
        return self.hausdorff.toward_zero

    @property
    def h2(self) -> bool:
        return self.constants.stabilized


class EndpointRow(BaseModel):
    k: int
    distance: float
    expected: float
    error: float
    L_k: float


class EndpointSweep(BaseModel):
    rows: List[EndpointRow] = Field(default_factory=list)
    accumulation_points: List[float] = Field(default_factory=list)
