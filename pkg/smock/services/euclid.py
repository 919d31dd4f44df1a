"""Euclidean set geometry for stitch shapes.

This module is the exact-geometry layer everything else stands on. It answers
three kinds of questions about balls, boxes, segments and point clouds:

    - size:     diameters, Lebesgue volumes, bounding boxes, anchor points
    - distance: point-to-set and set-to-set distances
    - shape:    Hausdorff distance between finite unions of stitches

Exactness:
    Closed forms are used for ball-ball, ball-box, ball-segment, box-box,
    segment-segment and any pair involving a point or a finite cloud. The
    only remaining pair, box-segment, is decided exactly for intersection
    (slab clipping) and otherwise minimized as a convex function of the
    segment parameter with a bounded scalar solver (accuracy ~1e-12).

    Hausdorff distances are exact for 1-D operands (every shape on the line is
    an interval, so endpoint arithmetic suffices). In higher dimension one
    operand is sampled with covering radius <= resolution and distances to the
    other operand stay exact; the reported error bar is that covering radius.

All functions are pure and safe to call concurrently.
"""

import math
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gamma

from smock.errors import DimensionMismatch, EmptyOperand
from smock.models.geometry import Ball, Box, Cloud, CompactSet, Estimate, Segment

_EPS = 1e-15


def _check_dims(*dims: int):
    if len(set(dims)) != 1:
        raise DimensionMismatch(f"Dimension mismatch: {dims}", {"dimensions": list(dims)})


def _pts(points) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


# ---------------------------------------------------------------- size


def diam(s) -> float:
    """Exact Euclidean diameter of a stitch shape."""
    if isinstance(s, Ball):
        return 2.0 * s.radius
    if isinstance(s, Box):
        return float(np.linalg.norm(np.subtract(s.max, s.min)))
    if isinstance(s, Segment):
        return float(np.linalg.norm(np.subtract(s.b, s.a)))
    pts = _pts(s.points)
    if len(pts) == 1:
        return 0.0
    diffs = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diffs ** 2).sum(-1)).max())


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / gamma(n / 2 + 1)


def volume(s) -> float:
    """Lebesgue measure of the shape in its ambient dimension."""
    n = s.dimension
    if isinstance(s, Ball):
        return unit_ball_volume(n) * s.radius ** n
    if isinstance(s, Box):
        return float(np.prod(np.subtract(s.max, s.min)))
    if isinstance(s, Segment) and n == 1:
        return abs(s.b[0] - s.a[0])
    return 0.0


def bounding_box(s) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(s, Ball):
        c = np.asarray(s.center)
        return c - s.radius, c + s.radius
    if isinstance(s, Box):
        return np.asarray(s.min, dtype=float), np.asarray(s.max, dtype=float)
    if isinstance(s, Segment):
        ends = _pts([s.a, s.b])
        return ends.min(0), ends.max(0)
    pts = _pts(s.points)
    return pts.min(0), pts.max(0)


def anchor(s) -> np.ndarray:
    """The point of E^N a collapsed stitch is identified with (its center)."""
    lo, hi = bounding_box(s)
    if isinstance(s, Cloud):
        return _pts(s.points).mean(0)
    return (lo + hi) / 2.0


def as_interval(s) -> Tuple[float, float]:
    """A 1-D shape as its closed interval ``(lo, hi)``."""
    _check_dims(s.dimension, 1)
    lo, hi = bounding_box(s)
    return float(lo[0]), float(hi[0])


# ---------------------------------------------------------------- projection


def closest_points(points, s) -> np.ndarray:
    """Nearest point of ``s`` for every row of ``points`` (shape (n, N))."""
    P = _pts(points)
    _check_dims(P.shape[1], s.dimension)
    if isinstance(s, Ball):
        c = np.asarray(s.center)
        v = P - c
        norms = np.linalg.norm(v, axis=1)
        scale = np.where(norms > s.radius, s.radius / np.maximum(norms, _EPS), 1.0)
        return c + v * scale[:, None]
    if isinstance(s, Box):
        return np.clip(P, np.asarray(s.min), np.asarray(s.max))
    if isinstance(s, Segment):
        a, b = np.asarray(s.a), np.asarray(s.b)
        d = b - a
        dd = float(d @ d)
        if dd <= _EPS:
            return np.repeat(a[None, :], len(P), axis=0)
        t = np.clip((P - a) @ d / dd, 0.0, 1.0)
        return a + t[:, None] * d
    cloud = _pts(s.points)
    idx = np.argmin(((P[:, None, :] - cloud[None, :, :]) ** 2).sum(-1), axis=1)
    return cloud[idx]


def dist_points_set(points, s) -> np.ndarray:
    """Vectorized ``dist_point_set`` over the rows of ``points``."""
    P = _pts(points)
    _check_dims(P.shape[1], s.dimension)
    if isinstance(s, Ball):
        d = np.linalg.norm(P - np.asarray(s.center), axis=1) - s.radius
        return np.maximum(d, 0.0)
    return np.linalg.norm(P - closest_points(P, s), axis=1)


def dist_point_set(p: Sequence[float], s) -> float:
    """Exact distance from a point to a stitch; 0 iff the point lies in it."""
    return float(dist_points_set(np.asarray(p, dtype=float), s)[0])


def contains(points, s, tol: float = 0.0) -> np.ndarray:
    """Boolean mask of rows of ``points`` lying in ``s`` (within ``tol``)."""
    P = _pts(points)
    if isinstance(s, Box):
        lo, hi = np.asarray(s.min), np.asarray(s.max)
        return np.all((P >= lo - tol) & (P <= hi + tol), axis=1)
    if isinstance(s, Ball):
        return np.linalg.norm(P - np.asarray(s.center), axis=1) <= s.radius + tol
    return dist_points_set(P, s) <= tol


# ---------------------------------------------------------------- set distances


def _segment_segment(a1, b1, a2, b2) -> float:
    d1, d2, r = b1 - a1, b2 - a2, a1 - a2
    a, e, f = d1 @ d1, d2 @ d2, d2 @ r
    if a <= _EPS and e <= _EPS:
        return float(np.linalg.norm(r))
    if a <= _EPS:
        s, t = 0.0, min(max(f / e, 0.0), 1.0)
    else:
        c = d1 @ r
        if e <= _EPS:
            t, s = 0.0, min(max(-c / a, 0.0), 1.0)
        else:
            b = d1 @ d2
            denom = a * e - b * b
            s = min(max((b * f - c * e) / denom, 0.0), 1.0) if denom > _EPS else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t, s = 0.0, min(max(-c / a, 0.0), 1.0)
            elif t > 1.0:
                t, s = 1.0, min(max((b - c) / a, 0.0), 1.0)
    return float(np.linalg.norm((a1 + d1 * s) - (a2 + d2 * t)))


def _segment_hits_box(a, b, lo, hi) -> bool:
    # Liang-Barsky slab clipping on t in [0, 1]
    d = b - a
    t0, t1 = 0.0, 1.0
    for i in range(len(a)):
        if abs(d[i]) <= _EPS:
            if a[i] < lo[i] or a[i] > hi[i]:
                return False
            continue
        u, v = (lo[i] - a[i]) / d[i], (hi[i] - a[i]) / d[i]
        t0, t1 = max(t0, min(u, v)), min(t1, max(u, v))
        if t0 > t1:
            return False
    return True


def _segment_box(seg: Segment, box: Box) -> float:
    a, b = np.asarray(seg.a, dtype=float), np.asarray(seg.b, dtype=float)
    lo, hi = np.asarray(box.min, dtype=float), np.asarray(box.max, dtype=float)
    if _segment_hits_box(a, b, lo, hi):
        return 0.0

    def f(t):
        p = a + t * (b - a)
        return float(np.linalg.norm(p - np.clip(p, lo, hi)))

    # dist(a + t(b - a), box) is convex in t
    res = minimize_scalar(f, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
    return min(f(0.0), f(1.0), float(res.fun))


def _order(s1, s2):
    rank = {"cloud": 0, "ball": 1, "box": 2, "segment": 3}
    return (s1, s2) if rank[s1.kind] <= rank[s2.kind] else (s2, s1)


def dist_set_set(s1, s2) -> float:
    """Exact minimal distance between two stitches; symmetric, 0 iff they meet."""
    _check_dims(s1.dimension, s2.dimension)
    x, y = _order(s1, s2)
    if isinstance(x, Cloud):
        return float(dist_points_set(x.points, y).min())
    if isinstance(x, Ball):
        if isinstance(y, Ball):
            gap = np.linalg.norm(np.subtract(x.center, y.center)) - x.radius - y.radius
            return max(float(gap), 0.0)
        return max(dist_point_set(x.center, y) - x.radius, 0.0)
    if isinstance(x, Box) and isinstance(y, Box):
        gaps = np.maximum(0.0, np.maximum(np.subtract(x.min, y.max), np.subtract(y.min, x.max)))
        return float(np.linalg.norm(gaps))
    if isinstance(x, Box):
        return _segment_box(y, x)
    return _segment_segment(*(np.asarray(v, dtype=float) for v in (x.a, x.b, y.a, y.b)))


def pairwise_set_distances(stitches: Sequence) -> np.ndarray:
    """Symmetric matrix of ``dist_set_set`` with zero diagonal."""
    m = len(stitches)
    out = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            out[i, j] = out[j, i] = dist_set_set(stitches[i], stitches[j])
    return out


# ---------------------------------------------------------------- sampling


def sample_shape(s, resolution: float) -> np.ndarray:
    """Points of ``s`` whose resolution-balls cover ``s``.

    Grid points of the bounding box are projected onto the (convex) shape;
    projection is 1-Lipschitz and fixes the shape, so a grid with covering
    radius ``resolution`` stays a cover after projection.
    """
    if isinstance(s, Cloud):
        return _pts(s.points)
    if isinstance(s, Segment):
        a, b = np.asarray(s.a, dtype=float), np.asarray(s.b, dtype=float)
        n = max(1, int(math.ceil(np.linalg.norm(b - a) / (2.0 * resolution))))
        t = np.linspace(0.0, 1.0, n + 1)
        return a + t[:, None] * (b - a)
    lo, hi = bounding_box(s)
    step = 2.0 * resolution / math.sqrt(len(lo))
    axes = [np.linspace(l, h, max(1, int(math.ceil((h - l) / step))) + 1) for l, h in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    return np.unique(closest_points(grid, s), axis=0)


def dist_points_compact(points, C: CompactSet) -> np.ndarray:
    return np.min([dist_points_set(points, piece) for piece in C.pieces], axis=0)


def sample_compact(C: CompactSet, resolution: float) -> np.ndarray:
    return np.concatenate([sample_shape(piece, resolution) for piece in C.pieces])


# ---------------------------------------------------------------- hausdorff


def _merge_intervals(pairs: Iterable[Tuple[float, float]]) -> List[Tuple[float, float]]:
    merged: List[List[float]] = []
    for lo, hi in sorted(pairs):
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return [(lo, hi) for lo, hi in merged]


def _dist_to_intervals(x: float, ivs: List[Tuple[float, float]]) -> float:
    return min(max(lo - x, x - hi, 0.0) for lo, hi in ivs)


def directed_hausdorff_1d(A: List[Tuple[float, float]], B: List[Tuple[float, float]]) -> float:
    """sup over a in A of dist(a, B) for unions of closed intervals.

    dist(., B) is maximized over an interval of A either at an endpoint or at
    the point closest to the midpoint of a gap of B.
    """
    candidates = [x for iv in A for x in iv]
    mids = [(B[i][1] + B[i + 1][0]) / 2.0 for i in range(len(B) - 1)]
    for m in mids:
        for lo, hi in A:
            candidates.append(min(max(m, lo), hi))
    return max(_dist_to_intervals(x, B) for x in candidates)


def hausdorff(A: CompactSet, B: CompactSet, resolution: float = None) -> Estimate:
    """Hausdorff distance between two finite unions of stitches.

    Returns an ``Estimate``: exact (error 0) in dimension 1, otherwise the
    sampled value with error bar <= resolution.
    """
    if A is None or B is None or not A.pieces or not B.pieces:
        raise EmptyOperand("Hausdorff distance needs two nonempty operands")
    _check_dims(A.dimension, B.dimension)
    if A.dimension == 1:
        ia = _merge_intervals(as_interval(p) for p in A.pieces)
        ib = _merge_intervals(as_interval(p) for p in B.pieces)
        value = max(directed_hausdorff_1d(ia, ib), directed_hausdorff_1d(ib, ia))
        return Estimate(value=value, error=0.0, method="exact-1d")

    if resolution is None or resolution <= 0:
        raise ValueError("resolution must be positive")
    sa, sb = sample_compact(A, resolution), sample_compact(B, resolution)
    value = max(float(dist_points_compact(sa, B).max()), float(dist_points_compact(sb, A).max()))
    # finite clouds are sampled exactly
    error = resolution if any(not isinstance(p, Cloud) for p in A.pieces + B.pieces) else 0.0
    return Estimate(value=value, error=error, method="sampled")
