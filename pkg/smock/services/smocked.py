"""Smocked metric engine.

Given a validated pattern of stitches, a smocked space X collapses every
stitch to a point. The distance between two points of X is the length of the
best path that may hop between stitches, a collapsed stitch contributing no
internal length:

    d(u, v) = min( d_0(u, v), d_1(u, v), d_2(u, v), ... )

Evaluation strategy:
    - single queries (``SmockedSpace.distance``) build a weighted networkx graph on
      {u, v} plus the stitches that can possibly matter and run Dijkstra.
      Stitches farther from u than the direct distance d_0(u, v) are pruned:
      any path entering one is already longer than the straight segment.
    - batch queries (nets, Monte Carlo) use a vectorized form of the same
      graph: point-to-stitch distances P, stitch-to-stitch shortest-path
      closure G, and d(u, v) = min(direct, min_ab P[u,a] + G[a,b] + P[v,b]).
    - ``SmockedSpace.d_k_exact`` enumerates stitch sequences by brute force; it is the
      oracle the two engines are tested against.

The reading of "j_1 != ... != j_k" is consecutive-distinct. Shortest paths
never gain from revisiting a stitch, so the graph engine agrees with either
reading; the oracle enumerates consecutive-distinct sequences.
"""

import itertools
import logging
import math
from typing import List, Optional, Sequence, Union

import networkx as nx
import numpy as np

from smock.config import get_settings
from smock.errors import (
    BudgetExceeded,
    DimensionMismatch,
    DisconnectedStitch,
    EmptyPattern,
    InvalidSpacePoint,
    InvalidStitch,
    LiftOutsideWindow,
    OverlappingStitches,
    StitchOutsideWindow,
    ZeroSeparation,
)
from smock.models.geometry import Box, Cloud
from smock.models.metric import FiniteMetricSpace
from smock.models.pattern import (
    Collapsed,
    Free,
    SmockingConstants,
    SmockingPattern,
    SpacePoint,
    Window,
    label_of,
)
from smock.services import euclid

logger = logging.getLogger(__name__)

D_K_READING = "consecutive-distinct"


# ---------------------------------------------------------------- validation


def _meets_window(s, window: Window) -> bool:
    lo, hi = euclid.bounding_box(s)
    wmin = np.maximum(np.asarray(window.min), lo - 1.0)
    wmax = np.minimum(np.asarray(window.max), hi + 1.0)
    if np.any(wmin > wmax):
        return False
    return euclid.dist_set_set(s, Box(min=tuple(wmin), max=tuple(wmax))) == 0.0


def validate_pattern(
    stitches: Sequence,
    window: Optional[Window] = None,
    dimension: Optional[int] = None,
    metadata: Optional[dict] = None,
) -> SmockingPattern:
    """Check a stitch listing and compute its separation factor delta.

    An empty listing is accepted only when ``dimension`` is given; it models
    plain Euclidean space. When every stitch carries the default id 0 the
    stitches are numbered by position.

    Raises:
        DimensionMismatch, DisconnectedStitch, InvalidStitch,
        StitchOutsideWindow, OverlappingStitches, ZeroSeparation, EmptyPattern
    """
    tol = get_settings().tolerance
    stitches = list(stitches)
    if not stitches and dimension is None:
        raise EmptyPattern("A pattern needs at least one stitch (or an explicit dimension)")

    dims = {s.dimension for s in stitches} | ({dimension} if dimension else set())
    if window is not None:
        dims.add(window.dimension)
    if len(dims) != 1:
        raise DimensionMismatch(f"Stitches, window and dimension disagree: {sorted(dims)}")
    n = dims.pop()
    window = window or Window.everywhere(n)

    for s in stitches:
        if isinstance(s, Cloud) and len({tuple(p) for p in s.points}) > 1:
            raise DisconnectedStitch(f"Stitch {s.id}: multi-point clouds are not connected")

    if len(stitches) > 1 and all(s.id == 0 for s in stitches):
        stitches = [s.model_copy(update={"id": i}) for i, s in enumerate(stitches)]
    ids = [s.id for s in stitches]
    if len(set(ids)) != len(ids):
        raise InvalidStitch(f"Stitch ids must be unique: {ids}")

    for s in stitches:
        if not _meets_window(s, window):
            raise StitchOutsideWindow(f"Stitch {s.id} does not meet the window", {"stitch": s.id})

    delta = math.inf
    if len(stitches) > 1:
        D = euclid.pairwise_set_distances(stitches)
        iu = np.triu_indices(len(stitches), 1)
        gaps = D[iu]
        worst = int(np.argmin(gaps))
        pair = (stitches[iu[0][worst]].id, stitches[iu[1][worst]].id)
        if gaps[worst] == 0.0:
            raise OverlappingStitches(f"Stitches {pair} intersect", {"pair": pair})
        if gaps[worst] <= tol:
            raise ZeroSeparation(f"Stitches {pair} are {gaps[worst]:.3g} apart", {"pair": pair})
        delta = float(gaps[worst])

    return SmockingPattern(dimension=n, stitches=stitches, window=window, delta=delta, metadata=metadata or {})


def euclidean_space(dimension: int, window: Optional[Window] = None) -> SmockingPattern:
    """The stitch-free pattern, i.e. E^N itself."""
    return validate_pattern([], window=window, dimension=dimension)


# ---------------------------------------------------------------- constants


def smocking_constants(pattern: SmockingPattern, window: Window, grid_step: float) -> SmockingConstants:
    """Depth, L_min/L_max and delta, with depth evaluated on a grid over ``window``."""
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    if not pattern.stitches:
        raise EmptyPattern("Smocking constants need at least one stitch")
    if not window.bounded:
        raise ValueError("depth needs a bounded evaluation window")

    diams = [euclid.diam(s) for s in pattern.stitches]
    axes = [np.arange(lo, hi + grid_step / 2, grid_step) for lo, hi in zip(window.min, window.max)]
    count = int(np.prod([len(a) for a in axes]))
    if count > get_settings().net_max_candidates:
        raise BudgetExceeded(f"Depth grid has {count} points", {"points": count})
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, window.dimension)
    nearest = np.min([euclid.dist_points_set(grid, s) for s in pattern.stitches], axis=0)
    depth = float(nearest.max())
    if depth > window.diagonal:
        depth = math.inf

    return SmockingConstants(
        depth_h=depth,
        depth_error=grid_step * math.sqrt(window.dimension),
        l_min=min(diams),
        l_max=max(diams),
        delta=pattern.delta,
        window=window,
        grid_step=grid_step,
    )


# ---------------------------------------------------------------- lifting bounds


def crossing_bound(L0: float, delta0: float) -> int:
    """At most this many distinct stitches meet a path of length <= L0."""
    if L0 <= 0 or delta0 <= 0:
        raise ValueError("crossing_bound needs positive L0 and delta0")
    if math.isinf(delta0):
        return 1
    ratio = L0 / delta0
    nearest = round(ratio)
    # quotients a few ulps below an integer count as that integer
    if abs(ratio - nearest) <= 4 * math.ulp(nearest):
        return 1 + int(nearest)
    return 1 + math.floor(ratio)


def preimage_radius(r: float, L: float, delta0: float) -> float:
    """Radius of a Euclidean ball about 0 containing every lift of B_r(pi(0))."""
    if r <= 0 or delta0 <= 0 or L < 0:
        raise ValueError("preimage_radius needs r > 0, L >= 0, delta0 > 0")
    return r + crossing_bound(r + L, delta0) * L


# ---------------------------------------------------------------- the space


class SmockedSpace:
    """A validated pattern plus its metric engine.

    Immutable after construction; every query is a pure function of the
    pattern, so instances may be shared across threads.

    Args:
        pattern: validated pattern
        basepoint: a point of X, or coordinates to project; pi(0) when omitted
    """

    def __init__(
        self,
        pattern: SmockingPattern,
        basepoint: Optional[Union[SpacePoint, Sequence[float]]] = None,
    ):
        self.pattern = pattern
        self.dimension = pattern.dimension
        self.stitches = list(pattern.stitches)
        self.m = len(self.stitches)
        self._index = {s.id: i for i, s in enumerate(self.stitches)}

        # G0: direct set distances, G: shortest-path closure through stitches
        self.G0 = euclid.pairwise_set_distances(self.stitches) if self.m else np.zeros((0, 0))
        if self.m:
            graph = nx.Graph()
            graph.add_nodes_from(range(self.m))
            for i in range(self.m):
                for j in range(i + 1, self.m):
                    graph.add_edge(i, j, weight=self.G0[i, j])
            self.G = nx.floyd_warshall_numpy(graph, nodelist=list(range(self.m)))
        else:
            self.G = np.zeros((0, 0))

        if basepoint is None:
            basepoint = (0.0,) * self.dimension
        if not isinstance(basepoint, (Free, Collapsed)):
            basepoint = self.project(basepoint)
        self.basepoint = basepoint
        self._check_lift(self.basepoint)

    # ---- points

    @property
    def l_max(self) -> float:
        return max((euclid.diam(s) for s in self.stitches), default=0.0)

    def stitch(self, stitch_id: int):
        if stitch_id not in self._index:
            raise InvalidSpacePoint(f"Unknown stitch id {stitch_id}", {"stitch": stitch_id})
        return self.stitches[self._index[stitch_id]]

    def project(self, p: Sequence[float]) -> SpacePoint:
        """The smocking map pi: the containing stitch, else the point itself."""
        p = tuple(float(c) for c in p)
        if len(p) != self.dimension:
            raise DimensionMismatch(f"Point {p} is not in dimension {self.dimension}")
        for s in self.stitches:
            if euclid.dist_point_set(p, s) == 0.0:
                return Collapsed(stitch_id=s.id)
        return Free(coords=p)

    def lift(self, u: SpacePoint) -> np.ndarray:
        """A representative point of E^N (the anchor for collapsed stitches)."""
        if isinstance(u, Collapsed):
            return euclid.anchor(self.stitch(u.stitch_id))
        return np.asarray(u.coords, dtype=float)

    def _check_lift(self, u: SpacePoint):
        if isinstance(u, Collapsed):
            self.stitch(u.stitch_id)
            return
        if len(u.coords) != self.dimension:
            raise DimensionMismatch(f"Point {u.coords} is not in dimension {self.dimension}")
        if not self.pattern.window.contains(u.coords, get_settings().tolerance):
            raise LiftOutsideWindow(
                f"Lift {u.coords} lies outside the pattern window", {"point": list(u.coords)}
            )
        for s in self.stitches:
            if euclid.dist_point_set(u.coords, s) == 0.0:
                raise InvalidSpacePoint(
                    f"Free point {u.coords} lies in stitch {s.id}; use project()", {"stitch": s.id}
                )

    # ---- vectorized profiles

    def _profile(self, points: Sequence[SpacePoint]):
        """Coordinates, stitch indices (-1 for free) and point-to-stitch distances."""
        n = len(points)
        coords = np.zeros((n, self.dimension))
        idx = np.full(n, -1)
        P = np.zeros((n, self.m))
        free = [i for i, u in enumerate(points) if isinstance(u, Free)]
        if free:
            coords[free] = np.asarray([points[i].coords for i in free], dtype=float)
            for j, s in enumerate(self.stitches):
                P[free, j] = euclid.dist_points_set(coords[free], s)
        for i, u in enumerate(points):
            if isinstance(u, Collapsed):
                idx[i] = self._index[u.stitch_id]
                coords[i] = self.lift(u)
                P[i] = self.G0[idx[i]]
        return coords, idx, P

    def _free_profile(self, coords: np.ndarray):
        """Profile of raw lifts known to miss every stitch."""
        coords = np.asarray(coords, dtype=float).reshape(-1, self.dimension)
        P = np.zeros((len(coords), self.m))
        for j, s in enumerate(self.stitches):
            P[:, j] = euclid.dist_points_set(coords, s)
        return coords, np.full(len(coords), -1), P

    def _direct(self, a, b) -> np.ndarray:
        ca, ia, Pa = a
        cb, ib, Pb = b
        D = np.sqrt(((ca[:, None, :] - cb[None, :, :]) ** 2).sum(-1))
        if self.m:
            for i in np.nonzero(ia >= 0)[0]:
                D[i] = Pb[:, ia[i]]
            for j in np.nonzero(ib >= 0)[0]:
                D[:, j] = Pa[:, ib[j]]
        return D

    @staticmethod
    def _take(profile, i: int):
        return tuple(arr[i : i + 1] for arr in profile)

    def distance_matrix(self, us: Sequence[SpacePoint], vs: Sequence[SpacePoint]) -> np.ndarray:
        """All pairwise smocked distances between two point lists."""
        return self._matrix(self._profile(us), self._profile(vs))

    def _matrix(self, a, b) -> np.ndarray:
        D = self._direct(a, b)
        if self.m:
            Pa, Pb = a[2], b[2]
            # Q[u, b] = best cost from u to stitch b through the stitch graph
            Q = np.min(Pa[:, :, None] + self.G[None, :, :], axis=1)
            for j in range(self.m):
                np.minimum(D, Q[:, j, None] + Pb[None, :, j], out=D)
        return D

    def distances_from(self, u: SpacePoint, vs: Sequence[SpacePoint]) -> np.ndarray:
        return self.distance_matrix([u], vs)[0]

    def stitch_membership(self, coords: np.ndarray) -> np.ndarray:
        """Index of the stitch containing each lift, -1 when free."""
        coords = np.asarray(coords, dtype=float).reshape(-1, self.dimension)
        idx = np.full(len(coords), -1)
        for j, s in enumerate(self.stitches):
            hit = (idx < 0) & (euclid.dist_points_set(coords, s) == 0.0)
            idx[hit] = j
        return idx

    def pullback_distances(self, u: SpacePoint, coords: np.ndarray) -> np.ndarray:
        """d(u, pi(z)) for every row z of ``coords``."""
        coords = np.asarray(coords, dtype=float).reshape(-1, self.dimension)
        prof = self._free_profile(coords)
        idx = self.stitch_membership(coords)
        inside = idx >= 0
        if np.any(inside):
            c, i, P = prof
            i[inside] = idx[inside]
            P[inside] = self.G0[idx[inside]]
        return self._matrix(self._profile([u]), prof)[0]

    # ---- single queries

    def distance(self, u: SpacePoint, v: SpacePoint) -> float:
        """Exact d(u, v) by Dijkstra on the pruned stitch graph."""
        self._check_lift(u)
        self._check_lift(v)
        if u == v:
            return 0.0
        (cu, iu, Pu), (cv, iv, Pv) = self._profile([u]), self._profile([v])
        d0 = float(self._direct((cu, iu, Pu), (cv, iv, Pv))[0, 0])

        relevant = [j for j in range(self.m) if Pu[0, j] <= d0]
        graph = nx.Graph()
        src = ("stitch", int(iu[0])) if iu[0] >= 0 else "u"
        dst = ("stitch", int(iv[0])) if iv[0] >= 0 else "v"
        graph.add_edge(src, dst, weight=d0)
        for j in relevant:
            node = ("stitch", j)
            if src == "u":
                graph.add_edge("u", node, weight=float(Pu[0, j]))
            if dst == "v":
                graph.add_edge(node, "v", weight=float(Pv[0, j]))
            for i in relevant:
                if i < j:
                    graph.add_edge(("stitch", i), node, weight=float(self.G0[i, j]))
        return float(nx.dijkstra_path_length(graph, src, dst))

    def pseudometric(self, v: Sequence[float], w: Sequence[float]) -> float:
        """d-bar(v, w) = d(pi(v), pi(w)) for points of E^N."""
        return self.distance(self.project(v), self.project(w))

    def d_k_exact(self, v: Sequence[float], w: Sequence[float], k: int) -> float:
        """Brute-force d_k over consecutive-distinct stitch sequences of length k."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        v, w = np.asarray(v, dtype=float), np.asarray(w, dtype=float)
        if len(v) != self.dimension or len(w) != self.dimension:
            raise DimensionMismatch("d_k_exact points must match the pattern dimension")
        if k == 0:
            return float(np.linalg.norm(v - w))
        if self.m == 0:
            return math.inf
        count = self.m * (self.m - 1) ** (k - 1)
        budget = get_settings().dk_enumeration_budget
        if count > budget:
            raise BudgetExceeded(f"d_{k} needs {count} sequences (budget {budget})", {"sequences": count})

        pv = np.array([euclid.dist_point_set(v, s) for s in self.stitches])
        pw = np.array([euclid.dist_point_set(w, s) for s in self.stitches])
        best = math.inf
        for seq in itertools.product(range(self.m), repeat=k):
            if any(a == b for a, b in zip(seq, seq[1:])):
                continue
            cost = pv[seq[0]] + sum(self.G0[a, b] for a, b in zip(seq, seq[1:])) + pw[seq[-1]]
            best = min(best, cost)
        return float(best)

    def oracle_distance(self, v: Sequence[float], w: Sequence[float]) -> float:
        """min over k <= M of d_k_exact, with M from the crossing bound."""
        d0 = float(np.linalg.norm(np.subtract(v, w)))
        if d0 == 0.0 or self.m == 0:
            return d0
        M = min(crossing_bound(d0, self.pattern.delta), self.m)
        return min(self.d_k_exact(v, w, k) for k in range(M + 1))

    # ---- nets

    def ball_net(
        self,
        center: Optional[SpacePoint],
        R: float,
        eps: float,
        resolution: Optional[float] = None,
    ) -> FiniteMetricSpace:
        """Greedy eps-net of the closed ball B_R(center).

        Candidates are grid lifts (spacing ``resolution``, default eps/2)
        aligned at the center's lift inside the Euclidean ball that contains
        every lift of the metric ball, plus every collapsed stitch within R.
        The center and those stitches are always in the net; the rest is
        farthest-point sampling until every candidate is within eps.
        """
        if R <= 0 or eps <= 0:
            raise ValueError("ball_net needs R > 0 and eps > 0")
        settings = get_settings()
        center = center if center is not None else self.basepoint
        self._check_lift(center)
        h = resolution or eps / 2.0

        c = self.lift(center)
        extra = euclid.diam(self.stitch(center.stitch_id)) if isinstance(center, Collapsed) else 0.0
        L = max(self.l_max, 0.0)
        reach = preimage_radius(R, L, self.pattern.delta if self.m > 1 else math.inf) + extra + h

        steps = int(math.floor(reach / h))
        count = (2 * steps + 1) ** self.dimension
        if count > settings.net_max_candidates:
            raise BudgetExceeded(
                f"Net needs {count} candidate lifts (budget {settings.net_max_candidates})",
                {"candidates": count},
            )
        offsets = np.arange(-steps, steps + 1) * h
        grid = np.stack(np.meshgrid(*([offsets] * self.dimension), indexing="ij"), axis=-1)
        grid = grid.reshape(-1, self.dimension) + c

        inside = np.zeros(len(grid), dtype=bool)
        for s in self.stitches:
            inside |= euclid.dist_points_set(grid, s) == 0.0
        free_grid = grid[~inside]
        if isinstance(center, Free):
            free_grid = free_grid[np.any(free_grid != c, axis=1)]
        stitch_points = [Collapsed(stitch_id=s.id) for s in self.stitches if Collapsed(stitch_id=s.id) != center]

        center_prof = self._profile([center])
        grid_prof = self._free_profile(free_grid)
        in_ball = self._matrix(center_prof, grid_prof)[0] <= R + settings.tolerance
        escaped = [p for p in free_grid[in_ball] if not self.pattern.window.contains(tuple(p), settings.tolerance)]
        if escaped:
            raise LiftOutsideWindow(
                f"Ball of radius {R} reaches {len(escaped)} lifts outside the window",
                {"example": [float(x) for x in escaped[0]]},
            )
        free_grid = free_grid[in_ball]
        grid_prof = tuple(arr[in_ball] for arr in grid_prof)

        forced = [center]
        if stitch_points:
            d_stitch = self.distances_from(center, stitch_points)
            forced += [p for p, d in zip(stitch_points, d_stitch) if d <= R + settings.tolerance]

        selected = list(forced)
        if len(free_grid):
            mind = self._matrix(self._profile(forced), grid_prof).min(axis=0)
            while True:
                i = int(np.argmax(mind))
                if mind[i] < eps - settings.tolerance:
                    break
                selected.append(Free(coords=tuple(free_grid[i])))
                np.minimum(mind, self._matrix(self._take(grid_prof, i), grid_prof)[0], out=mind)

        D = self.distance_matrix(selected, selected)
        D = (D + D.T) / 2.0
        np.fill_diagonal(D, 0.0)
        logger.debug("net of B_%s: %d points from %d candidates", R, len(selected), len(free_grid))
        return FiniteMetricSpace(
            labels=[label_of(p) for p in selected],
            dist=D,
            base_index=0,
            positions=np.asarray([self.lift(p) for p in selected]),
        )

    def covering_number(self, r: float, eps: float, resolution: Optional[float] = None) -> int:
        """Size of the greedy eps-net of B_r(basepoint)."""
        return self.ball_net(self.basepoint, r, eps, resolution).size


def stitches_meeting_ball(pattern: SmockingPattern, radius: float, center=None) -> List:
    """Stitches meeting the closed Euclidean ball B_radius(center)."""
    c = center if center is not None else (0.0,) * pattern.dimension
    return [s for s in pattern.stitches if euclid.dist_point_set(c, s) <= radius]
