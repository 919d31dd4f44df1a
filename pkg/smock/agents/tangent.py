"""Tangent Cone Agent - stable-norm sweeps and norm-defect runs.

For a weighted lattice (V, l) the rescaled word metrics lam^-1 d_G converge
to the polyhedral norm F_V. This agent runs the lam sweep, checks that the
estimates are subadditive along doubling lam, and measures the defect
|d_G(0, p - q) - F_V(p - q)| over a sample box.
"""

import logging
from typing import Dict, List, Sequence

from pydantic import BaseModel, Field

from smock.models.norm import NormSpec, StableNormSweep
from smock.models.pattern import Window
from smock.services import constructions

logger = logging.getLogger(__name__)

DEFECT_TARGET = "F(x-x')"


class TangentSweepResult(BaseModel):
    sweep: StableNormSweep
    subadditive: bool
    violations: List[int] = Field(default_factory=list, description="lam with estimate(2 lam) > estimate(lam)")


class DefectResult(BaseModel):
    K: float
    sample_size: int
    target: str = DEFECT_TARGET


class TangentConeAgent:
    """Runs the tangent-cone diagnostics for one norm spec."""

    def __init__(self, spec: NormSpec):
        self.spec = spec

    def sweep(self, x: Sequence, lambdas: Sequence[int]) -> TangentSweepResult:
        lambdas = sorted(set(lambdas))
        logger.info(f"   Stable norm of x={[str(c) for c in constructions.as_rationals(x)]} over lam={lambdas}")
        sweep = constructions.stable_norm_sweep(self.spec, x, lambdas)

        by_lam: Dict[int, float] = {r.lam: r.estimate for r in sweep.rows}
        violations = [lam for lam in lambdas if 2 * lam in by_lam and by_lam[2 * lam] > by_lam[lam] + 1e-12]
        for row in sweep.rows:
            logger.info(f"   lam={row.lam}: estimate={row.estimate:.6g} gap={row.gap:.3g}")
        logger.info(f"   ✓ Empirical rate constant C = {sweep.rate_constant:.4g}")
        return TangentSweepResult(sweep=sweep, subadditive=not violations, violations=violations)

    def defect(self, box: Window) -> DefectResult:
        points = constructions.lattice_points(box)
        K = constructions.norm_defect(self.spec, points)
        logger.info(f"   ✓ Norm defect over {len(points)} lattice points: K = {K:.6g}")
        return DefectResult(K=K, sample_size=len(points))
