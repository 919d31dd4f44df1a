"""Gromov-Hausdorff machinery on finite metric spaces.

GH distances are computed through correspondences:

    d_GH(X, Y) = 1/2 * min over correspondences C of dis(C)
    dis(C)     = max over (x, y), (x', y') in C of |d_X(x, x') - d_Y(y, y')|

Three evaluators share that identity:

    - ``gh_exact_small`` enumerates every pair of maps f: X -> Y, g: Y -> X
      and scores graph(f) union graph(g)^T. Every correspondence contains such
      a sub-correspondence with no larger distortion, so the minimum is exact.
      Maps are sorted by their own distortion, which lets the search stop as
      soon as no remaining pair can beat the best value.
    - ``gh_upper`` scores a handful of seeded correspondences (same-preimage
      matching of lifts, label matching, nearest-profile matching, constant
      maps) and refines the best one by moving the points of the worst pair.
    - ``gh_lower`` is the diameter bound 1/2 |diam X - diam Y|.
"""

import itertools
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from smock.config import get_settings
from smock.errors import BudgetExceeded, DimensionMismatch, InvalidCorrespondence
from smock.models.geometry import CompactSet, Estimate
from smock.models.metric import Correspondence, FiniteMetricSpace
from smock.models.pattern import SmockingPattern
from smock.services import euclid
from smock.services.smocked import stitches_meeting_ball

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------- distortion


def distortion(C: Correspondence, X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    """Worst discrepancy |d_X(x, x') - d_Y(y, y')| over pairs of related pairs."""
    if not C.pairs:
        raise InvalidCorrespondence("Empty correspondence")
    if any(not (0 <= i < X.size and 0 <= j < Y.size) for i, j in C.pairs):
        raise InvalidCorrespondence("Correspondence refers to points outside the spaces")
    if not C.covers(X.size, Y.size):
        raise InvalidCorrespondence(
            "Correspondence does not cover both spaces", {"sizes": (X.size, Y.size)}
        )
    pairs = np.asarray(sorted(C.pairs))
    I, J = pairs[:, 0], pairs[:, 1]
    return float(np.abs(X.dist[np.ix_(I, I)] - Y.dist[np.ix_(J, J)]).max())


def _maps_distortion(f: np.ndarray, g: np.ndarray, DX: np.ndarray, DY: np.ndarray) -> float:
    """dis(graph(f) union graph(g)^T) without building the relation."""
    ff = np.abs(DX - DY[np.ix_(f, f)]).max()
    gg = np.abs(DX[np.ix_(g, g)] - DY).max()
    fg = np.abs(DX[:, g] - DY[f, :]).max()
    return float(max(ff, gg, fg))


# ---------------------------------------------------------------- exact solver


def _all_maps(n_from: int, n_to: int) -> np.ndarray:
    return np.asarray(list(itertools.product(range(n_to), repeat=n_from)), dtype=int).reshape(-1, n_from)


def _map_distortions(maps: np.ndarray, D_from: np.ndarray, D_to: np.ndarray) -> np.ndarray:
    images = D_to[maps[:, :, None], maps[:, None, :]]
    return np.abs(images - D_from[None, :, :]).reshape(len(maps), -1).max(axis=1)


def gh_exact_small(X: FiniteMetricSpace, Y: FiniteMetricSpace, max_points: Optional[int] = None) -> float:
    """Exact GH distance by enumerating map pairs.

    Raises:
        BudgetExceeded: if either space has more than ``max_points`` points
            (default ``Settings.gh_exact_max_points``).
    """
    limit = max_points or get_settings().gh_exact_max_points
    if X.size > limit or Y.size > limit:
        raise BudgetExceeded(
            f"Exact GH needs at most {limit} points per side, got {X.size} and {Y.size}",
            {"sizes": (X.size, Y.size), "limit": limit},
        )
    DX, DY = X.dist, Y.dist

    F = _all_maps(X.size, Y.size)
    G = _all_maps(Y.size, X.size)
    dis_f = _map_distortions(F, DX, DY)
    dis_g = _map_distortions(G, DY, DX)
    order_f = np.argsort(dis_f, kind="stable")
    order_g = np.argsort(dis_g, kind="stable")
    G, dis_g = G[order_g], dis_g[order_g]
    # A[g, i, j] = d_X(i, g(j))
    A = np.transpose(DX[:, G], (1, 0, 2))

    best = math.inf
    for fi in order_f:
        if dis_f[fi] >= best:
            break
        usable = int(np.searchsorted(dis_g, best, side="left"))
        if usable == 0:
            break
        B = DY[F[fi], :]
        cross = np.abs(A[:usable] - B[None, :, :]).reshape(usable, -1).max(axis=1)
        total = np.maximum(np.maximum(cross, dis_g[:usable]), dis_f[fi])
        best = min(best, float(total.min()))
    return 0.5 * best


# ---------------------------------------------------------------- bounds


def gh_lower(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    return max(0.5 * abs(X.diameter - Y.diameter), 0.0)


def _nearest(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """For each row of P the index of the closest row of Q (lowest index on ties)."""
    d = np.sqrt(((P[:, None, :] - Q[None, :, :]) ** 2).sum(-1))
    return np.argmin(d, axis=1)


def same_preimage_correspondence(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> Correspondence:
    """Pair every net point with the net point of the other space whose lift is nearest."""
    if X.positions is None or Y.positions is None:
        raise InvalidCorrespondence("Both spaces need lift positions")
    if X.positions.shape[1] != Y.positions.shape[1]:
        raise DimensionMismatch("Lift positions live in different dimensions")
    f = _nearest(X.positions, Y.positions)
    g = _nearest(Y.positions, X.positions)
    return Correspondence.from_maps(f.tolist(), g.tolist())


def _profiles(S: FiniteMetricSpace) -> np.ndarray:
    return np.stack([S.dist[S.base_index], S.dist.max(axis=1)], axis=1)


def _profile_maps(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> Tuple[np.ndarray, np.ndarray]:
    PX, PY = _profiles(X), _profiles(Y)
    f = np.argmin(np.abs(PX[:, None, :] - PY[None, :, :]).max(-1), axis=1)
    g = np.argmin(np.abs(PY[:, None, :] - PX[None, :, :]).max(-1), axis=1)
    f[X.base_index] = Y.base_index
    g[Y.base_index] = X.base_index
    return f, g


def _label_maps(X: FiniteMetricSpace, Y: FiniteMetricSpace, fallback):
    where_y = {label: j for j, label in enumerate(Y.labels)}
    where_x = {label: i for i, label in enumerate(X.labels)}
    f, g = fallback[0].copy(), fallback[1].copy()
    for i, label in enumerate(X.labels):
        if label in where_y:
            f[i] = where_y[label]
    for j, label in enumerate(Y.labels):
        if label in where_x:
            g[j] = where_x[label]
    return f, g


def _seeds(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> List[Tuple[str, np.ndarray, np.ndarray]]:
    profile = _profile_maps(X, Y)
    seeds = [("profile", *profile), ("labels", *_label_maps(X, Y, profile))]
    if X.positions is not None and Y.positions is not None and X.positions.shape[1] == Y.positions.shape[1]:
        seeds.append(("same-preimage", _nearest(X.positions, Y.positions), _nearest(Y.positions, X.positions)))
    seeds.append(
        ("constant", np.full(X.size, Y.base_index), np.full(Y.size, X.base_index))
    )
    return seeds


class _MapSearch:
    """Bottleneck local search over map pairs (f, g).

    Each move takes a point involved in the current worst discrepancy and
    reassigns its image to whichever target minimizes the total distortion.
    """

    def __init__(self, DX: np.ndarray, DY: np.ndarray, f: np.ndarray, g: np.ndarray):
        self.DX, self.DY = DX, DY
        self.f, self.g = f.copy(), g.copy()

    def blocks(self):
        DX, DY, f, g = self.DX, self.DY, self.f, self.g
        return (
            np.abs(DX - DY[np.ix_(f, f)]),
            np.abs(DX[np.ix_(g, g)] - DY),
            np.abs(DX[:, g] - DY[f, :]),
        )

    def value(self) -> float:
        return float(max(b.max() for b in self.blocks()))

    def _move_x(self, i: int, ff, gg, fg) -> Tuple[float, int]:
        DX, DY, f, g = self.DX, self.DY, self.f, self.g
        rest = max(
            np.delete(np.delete(ff, i, axis=0), i, axis=1).max(initial=0.0),
            gg.max(),
            np.delete(fg, i, axis=0).max(initial=0.0),
        )
        row = np.abs(DX[i][None, :] - DY[:, f])
        row[:, i] = 0.0
        cross = np.abs(DX[i, g][None, :] - DY)
        cand = np.maximum(np.maximum(row.max(axis=1), cross.max(axis=1)), rest)
        j = int(np.argmin(cand))
        return float(cand[j]), j

    def _move_y(self, j: int, ff, gg, fg) -> Tuple[float, int]:
        DX, DY, f, g = self.DX, self.DY, self.f, self.g
        rest = max(
            ff.max(),
            np.delete(np.delete(gg, j, axis=0), j, axis=1).max(initial=0.0),
            np.delete(fg, j, axis=1).max(initial=0.0),
        )
        row = np.abs(DX[:, g] - DY[j][None, :])
        row[:, j] = 0.0
        cross = np.abs(DX - DY[f, j][None, :])
        cand = np.maximum(np.maximum(row.max(axis=1), cross.max(axis=1)), rest)
        i = int(np.argmin(cand))
        return float(cand[i]), i

    def refine(self, rounds: int) -> float:
        current = self.value()
        for _ in range(rounds * (len(self.f) + len(self.g))):
            ff, gg, fg = self.blocks()
            worst = int(np.argmax([ff.max(), gg.max(), fg.max()]))
            block = (ff, gg, fg)[worst]
            a, b = np.unravel_index(int(np.argmax(block)), block.shape)
            if worst == 0:
                moves = [("x", a), ("x", b)]
            elif worst == 1:
                moves = [("y", a), ("y", b)]
            else:
                moves = [("x", a), ("y", b)]

            best_value, best_move = current, None
            for side, p in moves:
                value, target = (self._move_x if side == "x" else self._move_y)(int(p), ff, gg, fg)
                if value < best_value - 1e-15:
                    best_value, best_move = value, (side, int(p), target)
            if best_move is None:
                break
            side, p, target = best_move
            if side == "x":
                self.f[p] = target
            else:
                self.g[p] = target
            current = best_value
        return current


def gh_upper(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    """Half the distortion of the best heuristic correspondence found."""
    settings = get_settings()
    DX, DY = X.dist, Y.dist
    scored = []
    for name, f, g in _seeds(X, Y):
        scored.append((_maps_distortion(f, g, DX, DY), name, f, g))
    scored.sort(key=lambda t: t[0])
    best, name, f, g = scored[0]

    if best > 0 and max(X.size, Y.size) <= settings.gh_refine_max_points:
        search = _MapSearch(DX, DY, f, g)
        refined = search.refine(settings.gh_swap_rounds)
        if refined < best:
            logger.debug("gh_upper: %s seed refined %.6g -> %.6g", name, best, refined)
            best = refined
    return 0.5 * best


# ---------------------------------------------------------------- local hausdorff


def local_stitch_union(pattern: SmockingPattern, R: float) -> Optional[CompactSet]:
    """Union of the stitches meeting the closed ball of radius R about 0, or None."""
    met = stitches_meeting_ball(pattern, R)
    return CompactSet(pieces=met) if met else None


def local_hausdorff(
    pattern: SmockingPattern, limit: SmockingPattern, R: float, resolution: Optional[float] = None
) -> Estimate:
    """Hausdorff distance between the stitch unions of two patterns near the origin.

    Two empty unions are at distance 0; an empty union against a nonempty
    one is reported as infinity.
    """
    A, B = local_stitch_union(pattern, R), local_stitch_union(limit, R)
    if A is None and B is None:
        return Estimate(value=0.0, method="empty")
    if A is None or B is None:
        return Estimate(value=math.inf, method="empty")
    return euclid.hausdorff(A, B, resolution or get_settings().sampling_resolution)
