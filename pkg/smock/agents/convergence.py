"""Convergence Agent - pointed GH sweeps and local hypothesis checks.

Drives the engines over a family X_k:

    1. pgh_curve: eps-nets of the closed R-ball about each basepoint, GH
       bracket against the limit net (or against X_(k+1) when no limit is
       declared, which exposes families with several accumulation points)
    2. local_constants_report: L_r and delta_r of the stitches meeting
       B_(r + L_r)(0), with a stabilization verdict
    3. local_hausdorff_check: Hausdorff distance of local stitch unions
       against the limit pattern
    4. hypotheses_report: 2 and 3 side by side
    5. endpoint_distance_sweep: d(pi(-1), pi(1)) on the alternating interval
       family, with its accumulation points

Stabilization rule:
    K_r is the first row after which no later row has a larger L_r or a
    smaller delta_r, with at least two rows in the tail. Fewer than three
    rows never stabilize. A family whose separations keep shrinking is
    reported with ``failed_bound = "delta"``.
"""

import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from smock.config import get_settings
from smock.models.convergence import (
    ConvergenceCurve,
    ConvergenceRow,
    EndpointRow,
    EndpointSweep,
    HypothesesReport,
    LocalConstantsReport,
    LocalConstantsRow,
    LocalHausdorffReport,
    LocalHausdorffRow,
)
from smock.models.metric import FiniteMetricSpace
from smock.models.pattern import SmockingPattern
from smock.services import euclid, gh
from smock.services.constructions import example31, instantiate
from smock.services.smocked import SmockedSpace, stitches_meeting_ball

logger = logging.getLogger(__name__)

FIXED_POINT_MAX_ITERATIONS = 100


def _net(pattern: SmockingPattern, R: float, eps: float, resolution: Optional[float]) -> FiniteMetricSpace:
    return SmockedSpace(pattern).ball_net(None, R, eps, resolution)


def _bracket(k: int, R: float, eps: float, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> ConvergenceRow:
    exact = None
    if max(X.size, Y.size) <= get_settings().gh_exact_max_points:
        exact = gh.gh_exact_small(X, Y)
    upper = gh.gh_upper(X, Y)
    if exact is not None:
        upper = max(upper, exact)
    return ConvergenceRow(
        k=k,
        R=R,
        gh_upper=upper,
        gh_lower=gh.gh_lower(X, Y),
        net_eps=eps,
        gh_exact=exact,
        net_size=X.size,
        limit_net_size=Y.size,
    )


def pgh_curve(
    family,
    R: float,
    eps: float,
    ks: Sequence[int],
    limit=None,
    limit_k: int = 1,
    resolution: Optional[float] = None,
) -> ConvergenceCurve:
    """GH brackets between B_R-nets of X_k and of the limit, rows in ascending k."""
    ks = sorted(ks)
    if limit is not None:
        Y = _net(instantiate(limit, limit_k), R, eps, resolution)
        curve = ConvergenceCurve(comparison="limit")
        logger.info(f"   ✓ Limit net: {Y.size} points")
    else:
        curve = ConvergenceCurve(comparison="successive")

    for k in ks:
        X = _net(instantiate(family, k), R, eps, resolution)
        target = Y if limit is not None else _net(instantiate(family, k + 1), R, eps, resolution)
        row = _bracket(k, R, eps, X, target)
        curve.rows.append(row)
        logger.info(f"   k={k}: {X.size} net points, GH in [{row.gh_lower:.4g}, {row.gh_upper:.4g}]")
    return curve


def local_constants(pattern: SmockingPattern, r: float, k: int = 0) -> LocalConstantsRow:
    """L_r as the fixed point of L = max diam of stitches meeting B_(r + L)(0), and delta_r."""
    L = 0.0
    met: List = []
    for _ in range(FIXED_POINT_MAX_ITERATIONS):
        met = stitches_meeting_ball(pattern, r + L)
        L_next = max((euclid.diam(s) for s in met), default=0.0)
        if L_next <= L:
            break
        L = L_next
    if len(met) > 1:
        D = euclid.pairwise_set_distances(met)
        delta = float(D[np.triu_indices(len(met), 1)].min())
    else:
        delta = math.inf
    return LocalConstantsRow(k=k, L_r=L, delta_r=delta, stitch_count=len(met), radius=r + L)


def _stabilization(rows: List[LocalConstantsRow], tol: float):
    """(stabilized, K_r, failed_bound) under the tail rule of the module docstring."""
    failed = None
    for i in range(len(rows) - 2):
        head, tail = rows[i], rows[i + 1 :]
        longer = any(t.L_r > head.L_r + tol for t in tail)
        closer = any(t.delta_r < head.delta_r - tol for t in tail)
        if not longer and not closer:
            return True, head.k, None
        failed = "delta" if closer else "length"
    return False, None, failed


def local_constants_report(family, r: float, ks: Sequence[int]) -> LocalConstantsReport:
    rows = [local_constants(instantiate(family, k), r, k) for k in sorted(ks)]
    stabilized, K, failed = _stabilization(rows, get_settings().tolerance)
    for row in rows:
        logger.info(f"   k={row.k}: L_r={row.L_r:.4g} delta_r={row.delta_r:.4g} stitches={row.stitch_count}")
    return LocalConstantsReport(r=r, rows=rows, stabilized=stabilized, K_r=K, failed_bound=failed)


def local_hausdorff_check(
    family,
    limit,
    R: float,
    ks: Sequence[int],
    limit_k: int = 1,
    resolution: Optional[float] = None,
) -> LocalHausdorffReport:
    """Hausdorff distance between local stitch unions of X_k and of the limit."""
    limit_pattern = instantiate(limit, limit_k)
    rows = []
    for k in sorted(ks):
        est = gh.local_hausdorff(instantiate(family, k), limit_pattern, R, resolution)
        rows.append(LocalHausdorffRow(k=k, hausdorff=est.value, error=est.error))

    values = [r.hausdorff for r in rows]
    half = (len(values) + 1) // 2
    first, second = values[:half], values[half:] or values[-1:]
    tol = get_settings().tolerance
    toward_zero = max(second) <= tol or (math.isfinite(max(first)) and max(second) < max(first))
    return LocalHausdorffReport(R=R, rows=rows, toward_zero=toward_zero)


def hypotheses_report(family, limit, R: float, ks: Sequence[int], r: Optional[float] = None, limit_k: int = 1):
    """Local constants (stabilization) and local Hausdorff trend, same ks."""
    constants = local_constants_report(family, r or R, ks)
    hausdorff = local_hausdorff_check(family, limit, R, ks, limit_k)
    return HypothesesReport(constants=constants, hausdorff=hausdorff)


def endpoint_distance_sweep(ks: Sequence[int]) -> EndpointSweep:
    """d(pi(-1), pi(1)) on the alternating interval family, expected 2 - L_k."""
    rows = []
    for k in sorted(ks):
        pattern = example31(k)
        d = SmockedSpace(pattern).pseudometric((-1.0,), (1.0,))
        expected = pattern.metadata["expected_endpoint_distance"]
        rows.append(EndpointRow(k=k, distance=d, expected=expected, error=abs(d - expected), L_k=pattern.metadata["L_k"]))

    # a parity subsequence yields a limit point only once its tail is constant
    tol = get_settings().tolerance
    points = set()
    for parity in (0, 1):
        values = [r.distance for r in rows if r.k % 2 == parity]
        tail = values[len(values) // 2 :]
        if len(tail) >= 2 and max(tail) - min(tail) <= tol:
            points.add(round(sum(tail) / len(tail), 12))
    return EndpointSweep(rows=rows, accumulation_points=sorted(points))
