"""Pattern families and the tangent-cone-at-infinity machinery.

Families:
    - example31(k): k equal-gap closed subintervals of [-1, 1] whose total
      length L_k alternates 2/3 (k odd) and 1/3 (k even). Gaps are equal and
      half a gap is left at each end, so d(pi(-1), pi(1)) = 2 - L_k and the
      stitch union is g/2 away from [-1, 1] in Hausdorff distance.
    - example32(k, N): one closed ball of radius 1/k about the origin.
    - remark36(k): the interval [k^2, k^2 + k], escaping every bounded window.
    - lattice: node balls on Z^n rescaled by 1/k.

Norms (see ``smock.models.norm``):
    - ``polyhedral_norm`` solves min sum l_i a_i subject to sum a_i v_i = x,
      a >= 0 with scipy's HiGHS LP. V is symmetric, so nonnegative
      coefficients lose nothing. Rational inputs are scaled to the lattice
      first and divided back.
    - ``lattice_word_metric`` runs Dijkstra over the implicit lattice graph
      inside a cube. A path of length D uses at most D / min(l) steps of sup
      length max|v|, so once the cube has radius D / min(l) * max|v| the value
      is certified; without an explicit box the cube is doubled until that
      holds.
"""

import heapq
import itertools
import logging
import math
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from smock.config import get_settings
from smock.errors import (
    BudgetExceeded,
    DimensionMismatch,
    InvalidNormSpec,
    NotLatticePoint,
    SearchBoxTooSmall,
    UnknownFamily,
)
from smock.models.family import Custom, Euclidean, Example31, Example32, Lattice, Remark36
from smock.models.geometry import Ball, Segment
from smock.models.norm import NormSpec, StableNormRow, StableNormSweep, WordMetricField
from smock.models.pattern import SmockingPattern, Window
from smock.services.smocked import euclidean_space, validate_pattern

logger = logging.getLogger(__name__)

EXAMPLE31_LAYOUT = "symmetric-equal-gaps"


# ---------------------------------------------------------------- families


def example31_total_length(k: int) -> float:
    return 1.0 / 3.0 if k % 2 == 0 else 2.0 / 3.0


def example31(k: int) -> SmockingPattern:
    if k < 1:
        raise ValueError("example31 needs k >= 1")
    L = example31_total_length(k)
    length = L / k
    gap = (2.0 - L) / k
    stitches = []
    for i in range(k):
        lo = -1.0 + gap / 2.0 + i * (gap + length)
        stitches.append(Segment(id=i, a=(lo,), b=(lo + length,)))
    return validate_pattern(
        stitches,
        dimension=1,
        metadata={
            "family": "example31",
            "k": k,
            "L_k": L,
            "N_k": k,
            "delta_k": gap,
            "layout": EXAMPLE31_LAYOUT,
            "expected_endpoint_distance": 2.0 - L,
        },
    )


def example32(k: int, N: int = 2) -> SmockingPattern:
    if k < 1 or N < 1:
        raise ValueError("example32 needs k >= 1 and N >= 1")
    ball = Ball(id=0, center=(0.0,) * N, radius=1.0 / k)
    return validate_pattern([ball], dimension=N, metadata={"family": "example32", "k": k, "N": N})


def remark36(k: int) -> SmockingPattern:
    if k < 1:
        raise ValueError("remark36 needs k >= 1")
    start = float(k * k)
    return validate_pattern(
        [Segment(id=0, a=(start,), b=(start + k,))],
        dimension=1,
        metadata={"family": "remark36", "k": k, "L_max": float(k)},
    )


def lattice_nodes(family: Lattice, k: int) -> SmockingPattern:
    """Balls of radius node_radius / k at p / k for lattice points p with |p / k| <= extent."""
    n = family.norm.dimension
    m = int(math.floor(family.extent * k))
    count = (2 * m + 1) ** n
    cap = get_settings().lattice_max_nodes
    if count > cap:
        raise BudgetExceeded(f"Lattice family at k={k} has {count} nodes (cap {cap})", {"nodes": count})
    radius = family.node_radius / k
    stitches = [
        Ball(id=i, center=tuple(c / k for c in p), radius=radius)
        for i, p in enumerate(itertools.product(range(-m, m + 1), repeat=n))
    ]
    window = Window.cube(n, (m + 0.5) / k)
    return validate_pattern(stitches, window=window, metadata={"family": "lattice", "k": k, "nodes": count})


def instantiate(family, k: int) -> SmockingPattern:
    """The pattern of ``family`` at parameter k."""
    if isinstance(family, Example31):
        return example31(k)
    if isinstance(family, Example32):
        return example32(k, family.N)
    if isinstance(family, Remark36):
        return remark36(k)
    if isinstance(family, Lattice):
        return lattice_nodes(family, k)
    if isinstance(family, Custom):
        return validate_pattern(family.stitches, window=family.window, metadata={"family": "custom"})
    if isinstance(family, Euclidean):
        return euclidean_space(family.N)
    raise UnknownFamily(f"Unknown pattern family: {family!r}")


# ---------------------------------------------------------------- norm specs


def l1_spec(n: int = 2) -> NormSpec:
    return NormSpec.symmetrized([tuple(int(i == j) for j in range(n)) for i in range(n)], [1.0] * n)


def mixed_spec() -> NormSpec:
    """{+-e1, +-e2, +-(1,1)} with weights (1, 1, 1.5)."""
    return NormSpec.symmetrized([(1, 0), (0, 1), (1, 1)], [1.0, 1.0, 1.5])


def as_rationals(x: Iterable) -> List[Fraction]:
    out = []
    for c in x:
        if isinstance(c, float):
            if not math.isfinite(c):
                raise ValueError(f"coordinate {c} is not finite")
            c = repr(float(c))
        out.append(Fraction(c))
    return out


def _check_dim(spec: NormSpec, x: Sequence):
    if len(x) != spec.dimension:
        raise DimensionMismatch(f"Vector of length {len(x)} for a norm on R^{spec.dimension}")


def _lattice_point(x: Sequence[Fraction]) -> Tuple[int, ...]:
    if any(c.denominator != 1 for c in x):
        raise NotLatticePoint(f"{[str(c) for c in x]} is not a lattice point")
    return tuple(int(c) for c in x)


def polyhedral_norm(spec: NormSpec, x: Sequence) -> float:
    """F_V(x) for a rational vector x."""
    xs = as_rationals(x)
    _check_dim(spec, xs)
    if all(c == 0 for c in xs):
        return 0.0
    q = math.lcm(*(c.denominator for c in xs))
    target = np.asarray([float(c * q) for c in xs])

    V = np.asarray(spec.generators, dtype=float).T
    res = linprog(c=np.asarray(spec.weights), A_eq=V, b_eq=target, bounds=(0, None), method="highs")
    if res.status != 0:
        raise InvalidNormSpec(
            f"No representation of {[str(c) for c in xs]} by the generators", {"status": res.message}
        )
    return float(res.fun) / q


# ---------------------------------------------------------------- word metric


def _dijkstra(spec: NormSpec, radius: int, targets: Optional[set] = None) -> Dict[Tuple[int, ...], float]:
    """Distances from 0 inside the cube of the given radius, stopping once ``targets`` are settled."""
    origin = (0,) * spec.dimension
    steps = list(zip(spec.generators, spec.weights))
    dist = {origin: 0.0}
    done = set()
    queue = [(0.0, origin)]
    remaining = set(targets) if targets is not None else None
    while queue:
        d, node = heapq.heappop(queue)
        if node in done:
            continue
        done.add(node)
        if remaining is not None:
            remaining.discard(node)
            if not remaining:
                break
        for v, w in steps:
            nxt = tuple(a + b for a, b in zip(node, v))
            if any(abs(c) > radius for c in nxt):
                continue
            nd = d + w
            if nd < dist.get(nxt, math.inf):
                dist[nxt] = nd
                heapq.heappush(queue, (nd, nxt))
    return {p: dist[p] for p in done}


def _certified_radius(spec: NormSpec, length: float) -> int:
    return int(math.ceil(length / spec.min_weight * spec.max_step - 1e-12))


def _grow(spec: NormSpec, start: int, targets: set):
    """Double the search cube until every target distance is certified."""
    limit = get_settings().lattice_max_radius
    radius = max(start, spec.max_step)
    while True:
        dist = _dijkstra(spec, radius, targets)
        reached = [dist.get(t, math.inf) for t in targets]
        if all(math.isfinite(d) for d in reached):
            need = _certified_radius(spec, max(reached))
            if need <= radius:
                return dist, radius
            radius = max(2 * radius, need)
        else:
            radius *= 2
        if radius > limit:
            raise BudgetExceeded(
                f"Word-metric search cube would exceed radius {limit}", {"radius": radius}
            )
        logger.debug("word metric: growing search cube to radius %d", radius)


def lattice_word_metric(spec: NormSpec, p: Sequence, search_box: Optional[Window] = None) -> float:
    """d_G(0, p) on the weighted lattice graph.

    Raises:
        NotLatticePoint: p has a non-integral coordinate.
        SearchBoxTooSmall: ``search_box`` cannot contain every path that
            could beat the distance found inside it.
    """
    target = _lattice_point(as_rationals(p))
    _check_dim(spec, target)
    if all(c == 0 for c in target):
        return 0.0
    if search_box is None:
        dist, _ = _grow(spec, max(abs(c) for c in target), {target})
        return float(dist[target])

    if search_box.dimension != spec.dimension:
        raise DimensionMismatch("Search box dimension differs from the norm dimension")
    if not search_box.contains(target):
        raise SearchBoxTooSmall(f"Search box does not contain {target}")
    inner = int(math.floor(min(min(-lo, hi) for lo, hi in zip(search_box.min, search_box.max))))
    if inner < 0:
        raise SearchBoxTooSmall("Search box does not contain the origin")
    dist = _dijkstra(spec, inner, {target})
    d = dist.get(target, math.inf)
    need = _certified_radius(spec, d) if math.isfinite(d) else math.inf
    if need > inner:
        raise SearchBoxTooSmall(
            f"Search box radius {inner} < certified radius {need} for {target}",
            {"needed": need, "available": inner},
        )
    return float(d)


def lattice_points(box: Window) -> List[Tuple[int, ...]]:
    axes = [range(int(math.ceil(lo)), int(math.floor(hi)) + 1) for lo, hi in zip(box.min, box.max)]
    return list(itertools.product(*axes))


def word_metric_field(spec: NormSpec, box: Window) -> WordMetricField:
    """d_G(0, .) on every lattice point of ``box``, each value certified."""
    if box.dimension != spec.dimension:
        raise DimensionMismatch("Box dimension differs from the norm dimension")
    points = lattice_points(box)
    if not points:
        raise ValueError("box contains no lattice point")
    lo = tuple(min(p[i] for p in points) for i in range(spec.dimension))
    hi = tuple(max(p[i] for p in points) for i in range(spec.dimension))
    start = max(max(abs(c) for c in p) for p in points)
    dist, radius = _grow(spec, start, set(points))

    D = np.empty(tuple(b - a + 1 for a, b in zip(lo, hi)))
    for p in points:
        D[tuple(c - a for c, a in zip(p, lo))] = dist[p]
    return WordMetricField(box_min=lo, box_max=hi, distances=D, search_radius=radius)


# ---------------------------------------------------------------- stable norm


def stable_norm_estimate(spec: NormSpec, x: Sequence, lam: int) -> float:
    """lam^-1 d_G(0, lam x)."""
    if lam < 1:
        raise ValueError("lambda must be a positive integer")
    xs = as_rationals(x)
    _check_dim(spec, xs)
    return lattice_word_metric(spec, _lattice_point([c * lam for c in xs])) / lam


def stable_norm_sweep(spec: NormSpec, x: Sequence, lambdas: Sequence[int]) -> StableNormSweep:
    """Estimates along ``lambdas`` with F_V(x) and the empirical rate C = max lam |gap|."""
    target = polyhedral_norm(spec, x)
    rows = []
    for lam in lambdas:
        est = stable_norm_estimate(spec, x, lam)
        rows.append(StableNormRow(lam=lam, estimate=est, norm=target, gap=est - target))
    rate = max((r.lam * abs(r.gap) for r in rows), default=0.0)
    return StableNormSweep(x=[str(c) for c in as_rationals(x)], rows=rows, rate_constant=rate)


def norm_defect(spec: NormSpec, sample_points: Sequence[Sequence[int]]) -> float:
    """max over sampled pairs of |d_G(0, p - q) - F_V(p - q)|."""
    if not sample_points:
        raise ValueError("norm_defect needs at least one sample point")
    pts = np.asarray([_lattice_point(as_rationals(p)) for p in sample_points], dtype=int)
    _check_dim(spec, pts[0])
    diffs = np.unique((pts[:, None, :] - pts[None, :, :]).reshape(-1, spec.dimension), axis=0)
    reach = int(np.abs(diffs).max())
    field = word_metric_field(spec, Window.cube(spec.dimension, float(reach)))

    worst = 0.0
    for d in diffs:
        gap = abs(field.at(d) - polyhedral_norm(spec, d.tolist()))
        worst = max(worst, gap)
    return worst
