"""Pushforward of Lebesgue measure onto a smocked space.

mu = pi_# L^N. Collapsing a stitch of positive volume creates an atom of
that volume at the collapsed point, so every integral splits into

    int phi d mu = int_{W minus S} phi(z) dz + sum_j phi(a_j) vol(I_j cap W)

with a_j the anchor of stitch j. Atoms whose intersection volume has a
closed form are added exactly; the rest are sampled with the free part.

Methods:
    - Exact1D: interval arithmetic for ball volumes, scipy ``quad`` on the
      free intervals for integrals. Dimension 1 only.
    - MonteCarlo(seed, sample_count): uniform samples drawn in batches, one
      child of ``SeedSequence(seed)`` per batch so results do not depend on
      the batch schedule. Standard errors are reported.
    - Grid(step): midpoint rule. Ball volumes carry the volume of the cells
      whose distance to the center is within half a cell diagonal of r;
      integrals carry the difference to the rule at twice the step.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.integrate import quad

from smock.config import get_settings
from smock.errors import BudgetExceeded, LiftOutsideWindow, MethodMismatch, SupportOutsideWindow
from smock.models.geometry import Ball, Box, Cloud, Estimate, Segment
from smock.models.measure import Bump, Exact1D, Grid, MonteCarlo, Tent
from smock.models.pattern import Collapsed, SmockingPattern, SpacePoint, Window
from smock.services import euclid
from smock.services.smocked import SmockedSpace, preimage_radius

logger = logging.getLogger(__name__)

CHUNK = 50_000


def total_stitch_volume(pattern: SmockingPattern) -> float:
    return float(sum(euclid.volume(s) for s in pattern.stitches))


def _overlap(lo_a, hi_a, lo_b, hi_b) -> float:
    return max(0.0, min(hi_a, hi_b) - max(lo_a, lo_b))


def intersection_volume(s, box: Window) -> Optional[float]:
    """vol(s cap box) when it has a closed form, else None."""
    n = s.dimension
    if isinstance(s, Cloud) or (isinstance(s, Segment) and n > 1):
        return 0.0
    lo, hi = euclid.bounding_box(s)
    if isinstance(s, Box) or n == 1:
        return float(np.prod([_overlap(a, b, c, d) for a, b, c, d in zip(lo, hi, box.min, box.max)]))
    # balls in N >= 2
    gap = euclid.dist_point_set(s.center, Box(min=box.min, max=box.max))
    if gap >= s.radius:
        return 0.0
    if np.all(lo >= np.asarray(box.min)) and np.all(hi <= np.asarray(box.max)):
        return euclid.volume(s)
    return None


class PushforwardMeasure:
    """pi_# L^N on a smocked space, evaluated by one integration method."""

    def __init__(self, space: SmockedSpace, method):
        if isinstance(method, Exact1D):
            if space.dimension != 1:
                raise MethodMismatch(f"Exact1D needs dimension 1, pattern has {space.dimension}")
        elif not isinstance(method, (MonteCarlo, Grid)):
            raise MethodMismatch(f"Unknown integration method {method!r}")
        self.space = space
        self.method = method

    # ---- helpers

    def _window_check(self, lo: np.ndarray, hi: np.ndarray, error=LiftOutsideWindow):
        w = self.space.pattern.window
        tol = get_settings().tolerance
        if not (w.contains(tuple(lo), tol) and w.contains(tuple(hi), tol)):
            raise error(
                f"Region [{lo.tolist()}, {hi.tolist()}] leaves the pattern window",
                {"min": lo.tolist(), "max": hi.tolist()},
            )

    def _ball_box(self, center: SpacePoint, r: float) -> Tuple[np.ndarray, np.ndarray]:
        """A box containing every lift of the ball of radius r about ``center``."""
        space = self.space
        c = space.lift(center)
        extra = euclid.diam(space.stitch(center.stitch_id)) if isinstance(center, Collapsed) else 0.0
        delta = space.pattern.delta if space.m > 1 else math.inf
        reach = preimage_radius(r, space.l_max, delta) + extra
        return c - reach, c + reach

    def _samples(self, lo: np.ndarray, hi: np.ndarray):
        """Uniform sample batches in the box [lo, hi]."""
        settings = get_settings()
        n = self.method.sample_count or settings.mc_samples
        batch = settings.mc_batch_size
        sizes = [batch] * (n // batch) + ([n % batch] if n % batch else [])
        children = np.random.SeedSequence(self.method.seed).spawn(len(sizes))
        for size, child in zip(sizes, children):
            rng = np.random.default_rng(child)
            yield rng.uniform(lo, hi, size=(size, len(lo)))

    def _cells(self, lo: np.ndarray, hi: np.ndarray, step: float):
        """Midpoints of a grid of cells covering [lo, hi], in chunks, plus the cell volume."""
        counts = np.maximum(np.ceil((hi - lo) / step - 1e-12).astype(int), 1)
        total = int(np.prod(counts))
        cap = get_settings().net_max_candidates
        if total > cap:
            raise BudgetExceeded(f"Grid needs {total} cells (budget {cap})", {"cells": total})
        h = (hi - lo) / counts
        axes = [a + hj * (np.arange(cnt) + 0.5) for a, hj, cnt in zip(lo, h, counts)]
        mids = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
        return [mids[i : i + CHUNK] for i in range(0, len(mids), CHUNK)], float(np.prod(h)), h

    # ---- ball volume

    def ball_volume(self, center: SpacePoint, r: float) -> Estimate:
        """Lebesgue measure of {z : d(pi(z), center) < r}."""
        if r <= 0:
            raise ValueError("ball_volume needs r > 0")
        self.space._check_lift(center)
        if isinstance(self.method, Exact1D):
            return self._ball_volume_1d(center, r)

        lo, hi = self._ball_box(center, r)
        self._window_check(lo, hi)
        if isinstance(self.method, MonteCarlo):
            n, hits = 0, 0
            for z in self._samples(lo, hi):
                hits += int(np.count_nonzero(self.space.pullback_distances(center, z) < r))
                n += len(z)
            V = float(np.prod(hi - lo))
            p = hits / n
            logger.debug("ball volume r=%s: %d of %d samples inside", r, hits, n)
            return Estimate(value=V * p, error=V * math.sqrt(p * (1 - p) / n), method="monte-carlo")

        chunks, cell, h = self._cells(lo, hi, self.method.step)
        half_diag = float(np.linalg.norm(h)) / 2.0
        inside = boundary = 0
        for z in chunks:
            d = self.space.pullback_distances(center, z)
            inside += int(np.count_nonzero(d < r))
            boundary += int(np.count_nonzero(np.abs(d - r) <= half_diag))
        return Estimate(value=inside * cell, error=boundary * cell, method="grid")

    def _ball_volume_1d(self, center: SpacePoint, r: float) -> Estimate:
        space = self.space
        ivs = sorted((euclid.as_interval(s) + (s.id,) for s in space.stitches), key=lambda t: t[0])
        if isinstance(center, Collapsed):
            a, b = euclid.as_interval(space.stitch(center.stitch_id))
            ivs = [t for t in ivs if t[2] != center.stitch_id]
            volume = b - a
        else:
            a = b = center.coords[0]
            volume = 0.0

        # walk right from b, then left from a; a stitch at distance exactly r is not in the open ball
        pos, budget = b, r
        for lo, hi, _ in ivs:
            if lo < pos:
                continue
            if lo - pos >= budget:
                break
            budget -= lo - pos
            volume += (lo - pos) + (hi - lo)
            pos = hi
        right = pos + budget
        volume += budget

        pos, budget = a, r
        for lo, hi, _ in reversed(ivs):
            if hi > pos:
                continue
            if pos - hi >= budget:
                break
            budget -= pos - hi
            volume += (pos - hi) + (hi - lo)
            pos = lo
        left = pos - budget
        volume += budget

        self._window_check(np.array([left]), np.array([right]))
        return Estimate(value=volume, method="exact-1d")

    # ---- integrals

    def integrate(self, phi, support_box: Window) -> Estimate:
        """int phi(pi(z)) dz over ``support_box``, atoms included."""
        space = self.space
        if support_box.dimension != space.dimension:
            raise MethodMismatch("Support box dimension differs from the pattern dimension")
        if not support_box.bounded:
            raise SupportOutsideWindow("Support box must be bounded")
        lo, hi = np.asarray(support_box.min), np.asarray(support_box.max)
        self._window_check(lo, hi, SupportOutsideWindow)
        supp = phi.support()
        if supp is not None:
            self._window_check(np.asarray(supp[0]), np.asarray(supp[1]), SupportOutsideWindow)

        anchors = np.asarray([euclid.anchor(s) for s in space.stitches]).reshape(-1, space.dimension)
        anchor_values = phi(anchors) if space.m else np.zeros(0)
        explicit = np.zeros(space.m, dtype=bool)
        atoms = 0.0
        for j, s in enumerate(space.stitches):
            vol = intersection_volume(s, support_box)
            if vol is not None:
                explicit[j] = True
                atoms += float(anchor_values[j]) * vol

        def integrand(z: np.ndarray) -> np.ndarray:
            values = phi(z)
            idx = space.stitch_membership(z)
            inside = idx >= 0
            values[inside] = np.where(explicit[idx[inside]], 0.0, anchor_values[idx[inside]])
            return values

        if isinstance(self.method, Exact1D):
            free, err = self._free_integral_1d(phi, float(lo[0]), float(hi[0]))
            return Estimate(value=free + atoms, error=err, method="exact-1d")

        if isinstance(self.method, MonteCarlo):
            n, s1, s2 = 0, 0.0, 0.0
            for z in self._samples(lo, hi):
                g = integrand(z)
                s1 += float(g.sum())
                s2 += float((g * g).sum())
                n += len(z)
            V = float(np.prod(hi - lo))
            mean = s1 / n
            var = max(s2 / n - mean * mean, 0.0)
            return Estimate(value=V * mean + atoms, error=V * math.sqrt(var / n), method="monte-carlo")

        fine = self._midpoint(integrand, lo, hi, self.method.step)
        coarse = self._midpoint(integrand, lo, hi, 2.0 * self.method.step)
        return Estimate(value=fine + atoms, error=abs(fine - coarse), method="grid")

    def _midpoint(self, integrand, lo, hi, step: float) -> float:
        chunks, cell, _ = self._cells(lo, hi, step)
        return cell * sum(float(integrand(z).sum()) for z in chunks)

    def _free_integral_1d(self, phi, lo: float, hi: float) -> Tuple[float, float]:
        ivs = sorted(euclid.as_interval(s) for s in self.space.stitches)
        pieces: List[Tuple[float, float]] = []
        pos = lo
        for a, b in ivs:
            if b < pos:
                continue
            if a > hi:
                break
            if a > pos:
                pieces.append((pos, a))
            pos = max(pos, b)
        if pos < hi:
            pieces.append((pos, hi))

        kinks = [phi.center[0]] if isinstance(phi, (Tent, Bump)) else []
        total, err = 0.0, 0.0
        for a, b in pieces:
            inner = [x for x in kinks if a < x < b]
            value, abserr = quad(lambda t: float(phi(np.array([[t]]))[0]), a, b, points=inner or None, limit=200)
            total += value
            err += abserr
        return total, err
