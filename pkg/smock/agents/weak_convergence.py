"""Weak Convergence Agent - pushforward measures against a test-function panel.

For every k and every test function phi of a fixed panel the agent compares
int phi d mu_k with int phi d mu_limit over a shared support box. The panel
is the whole claim: convergence is never asserted beyond it. The total
stitch volume of X_k is reported alongside, since the atoms it creates are
what separates mu_k from Lebesgue measure.
"""

import hashlib
import json
import logging
import math
from typing import Sequence

from smock.models.measure import WeakConvergenceRow, WeakConvergenceTable
from smock.models.pattern import Window
from smock.services.constructions import instantiate
from smock.services.measure import PushforwardMeasure, total_stitch_volume
from smock.services.smocked import SmockedSpace

logger = logging.getLogger(__name__)


def panel_id(phis: Sequence) -> str:
    """Short stable identifier of a test-function panel."""
    canonical = json.dumps([p.model_dump(mode="json") for p in phis], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def weak_convergence_check(
    family,
    phis: Sequence,
    ks: Sequence[int],
    limit: SmockedSpace,
    support_box: Window,
    method,
) -> WeakConvergenceTable:
    """Integral gaps per (k, phi), with error bars and non-shrinking flags."""
    if not phis:
        raise ValueError("weak_convergence_check needs at least one test function")
    limit_measure = PushforwardMeasure(limit, method)
    limit_values = [limit_measure.integrate(phi, support_box) for phi in phis]

    table = WeakConvergenceTable()
    for k in sorted(ks):
        pattern = instantiate(family, k)
        measure = PushforwardMeasure(SmockedSpace(pattern), method)
        volume = total_stitch_volume(pattern)
        for i, phi in enumerate(phis):
            est = measure.integrate(phi, support_box)
            ref = limit_values[i]
            table.rows.append(
                WeakConvergenceRow(
                    k=k,
                    phi_index=i,
                    integral_k=est.value,
                    integral_limit=ref.value,
                    gap=abs(est.value - ref.value),
                    error=math.hypot(est.error, ref.error),
                    stitch_volume=volume,
                )
            )
        logger.info(f"   k={k}: stitch volume {volume:.4g}")

    for i in range(len(phis)):
        gaps = [r.gap for r in table.rows if r.phi_index == i]
        if len(gaps) > 1 and all(b >= a for a, b in zip(gaps, gaps[1:])) and gaps[-1] > 0:
            table.non_decreasing.append(i)
    return table
