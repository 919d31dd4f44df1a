import math

import numpy as np
import pytest

from smock.errors import (
    DimensionMismatch,
    DisconnectedStitch,
    EmptyPattern,
    InvalidSpacePoint,
    LiftOutsideWindow,
    OverlappingStitches,
    StitchOutsideWindow,
)
from smock.models.geometry import Ball, Box, Cloud, Segment
from smock.models.pattern import Collapsed, Free, Window
from smock.services import euclid
from smock.services.smocked import (
    SmockedSpace,
    crossing_bound,
    euclidean_space,
    preimage_radius,
    smocking_constants,
    validate_pattern,
)


@pytest.fixture
def two_balls():
    return validate_pattern(
        [Ball(id=0, center=(0, 0), radius=1), Ball(id=1, center=(4, 0), radius=1)],
        window=Window(min=(-6, -6), max=(10, 6)),
    )


def random_pattern(rng):
    """Four balls on a grid of spacing 2, radii below 0.6, so delta >= 0.8."""
    centers = [(0, 0), (2, 0), (0, 2), (2, 2)]
    radii = rng.uniform(0.1, 0.6, size=4)
    return validate_pattern([Ball(id=i, center=c, radius=float(r)) for i, (c, r) in enumerate(zip(centers, radii))])


def random_mixed_pattern(rng):
    """Up to five stitches of every shape in dimension 1 or 2.

    One stitch per cell of a grid of spacing 3, each inside the cube of
    half-width 0.9 about its cell center, so distinct stitches are >= 1.2 apart.
    """
    n = int(rng.integers(1, 3))
    m = int(rng.integers(1, 6))
    if n == 1:
        cells = [np.array([3.0 * i]) for i in range(m)]
    else:
        grid = [np.array([3.0 * i, 3.0 * j]) for i in range(3) for j in range(3)]
        cells = [grid[i] for i in rng.choice(len(grid), size=m, replace=False)]
    stitches = []
    for i, c in enumerate(cells):
        kind = ("ball", "box", "segment", "cloud")[int(rng.integers(4))]
        if kind == "ball":
            stitches.append(Ball(id=i, center=tuple(c), radius=float(rng.uniform(0.1, 0.9))))
        elif kind == "box":
            lo = c - rng.uniform(0.05, 0.9, size=n)
            hi = c + rng.uniform(0.05, 0.9, size=n)
            stitches.append(Box(id=i, min=tuple(lo), max=tuple(hi)))
        elif kind == "segment":
            a, b = c + rng.uniform(-0.9, 0.9, size=(2, n))
            stitches.append(Segment(id=i, a=tuple(a), b=tuple(b)))
        else:
            stitches.append(Cloud(id=i, points=[tuple(c + rng.uniform(-0.9, 0.9, size=n))]))
    return validate_pattern(stitches)


def sample_around(rng, pattern, count, margin=1.5):
    """Uniform points in the bounding box of the stitches grown by ``margin``."""
    boxes = [euclid.bounding_box(s) for s in pattern.stitches]
    lo = np.min([b[0] for b in boxes], axis=0) - margin
    hi = np.max([b[1] for b in boxes], axis=0) + margin
    return rng.uniform(lo, hi, size=(count, pattern.dimension))


def test_validate_pattern_computes_delta(two_balls):
    assert two_balls.delta == pytest.approx(2.0)
    assert two_balls.dimension == 2
    assert [s.id for s in two_balls.stitches] == [0, 1]


def test_validate_pattern_numbers_default_ids():
    pattern = validate_pattern([Segment(a=(0,), b=(1,)), Segment(a=(2,), b=(3,))])
    assert [s.id for s in pattern.stitches] == [0, 1]


def test_validate_pattern_rejections():
    """Test every way a stitch listing can be rejected"""
    with pytest.raises(OverlappingStitches):
        validate_pattern([Ball(id=0, center=(0, 0), radius=1), Ball(id=1, center=(1.5, 0), radius=1)])
    with pytest.raises(DisconnectedStitch):
        validate_pattern([Cloud(points=[(0, 0), (1, 1)])])
    with pytest.raises(DimensionMismatch):
        validate_pattern([Ball(id=0, center=(0,), radius=1), Ball(id=1, center=(5, 0), radius=1)])
    with pytest.raises(EmptyPattern):
        validate_pattern([])
    with pytest.raises(StitchOutsideWindow):
        validate_pattern([Ball(center=(10, 10), radius=1)], window=Window(min=(0, 0), max=(1, 1)))


def test_empty_listing_is_euclidean_space():
    space = SmockedSpace(euclidean_space(2))
    assert space.m == 0
    assert space.pseudometric((0, 0), (3, 4)) == pytest.approx(5.0)


def test_two_ball_distances(two_balls):
    """Test hopping through both stitches beats the straight segment"""
    space = SmockedSpace(two_balls)
    assert space.pseudometric((-2, 0), (6, 0)) == pytest.approx(4.0)
    assert space.d_k_exact((-2, 0), (6, 0), 0) == pytest.approx(8.0)
    assert space.d_k_exact((-2, 0), (6, 0), 1) == pytest.approx(6.0)
    assert space.d_k_exact((-2, 0), (6, 0), 2) == pytest.approx(4.0)
    assert space.oracle_distance((-2, 0), (6, 0)) == pytest.approx(4.0)
    assert space.distance(Collapsed(stitch_id=0), Collapsed(stitch_id=1)) == pytest.approx(2.0)


def test_points_of_one_stitch_are_identified(two_balls):
    space = SmockedSpace(two_balls)
    assert space.project((0.5, 0)) == Collapsed(stitch_id=0)
    assert space.pseudometric((0.5, 0), (-0.5, 0)) == 0.0
    assert isinstance(space.project((2, 0)), Free)


def test_lift_outside_window(two_balls):
    space = SmockedSpace(two_balls)
    with pytest.raises(LiftOutsideWindow):
        space.pseudometric((20, 0), (0, 0))


def test_graph_engine_matches_oracle():
    """Test the Dijkstra engine against brute-force d_k enumeration"""
    rng = np.random.default_rng(11)
    for _ in range(5):
        space = SmockedSpace(random_pattern(rng))
        for _ in range(10):
            v, w = rng.uniform(-1, 3, size=(2, 2))
            assert space.pseudometric(v, w) == pytest.approx(space.oracle_distance(v, w), abs=1e-9)


def test_batch_engine_matches_single_queries():
    rng = np.random.default_rng(5)
    space = SmockedSpace(random_pattern(rng))
    points = [space.project(p) for p in rng.uniform(-1, 3, size=(12, 2))]
    D = space.distance_matrix(points, points)
    for i in range(0, 12, 3):
        for j in range(12):
            assert D[i, j] == pytest.approx(space.distance(points[i], points[j]), abs=1e-9)


def test_triangle_inequality_and_contraction():
    """Test d is a pseudometric dominated by the Euclidean distance"""
    rng = np.random.default_rng(2)
    space = SmockedSpace(random_pattern(rng))
    raw = rng.uniform(-1, 3, size=(30, 2))
    points = [space.project(p) for p in raw]
    D = space.distance_matrix(points, points)
    E = np.sqrt(((raw[:, None, :] - raw[None, :, :]) ** 2).sum(-1))
    assert np.all(D <= E + 1e-9)
    for k in range(len(points)):
        assert np.all(D <= D[:, k, None] + D[None, k, :] + 1e-9)


def test_euclidean_net_one_dimension():
    """Test the greedy net of B_1(0) in E^1 at eps = 1/2"""
    space = SmockedSpace(euclidean_space(1))
    net = space.ball_net(None, 1.0, 0.5)
    assert net.size == 5
    assert sorted(net.positions[:, 0].tolist()) == pytest.approx([-1.0, -0.5, 0.0, 0.5, 1.0])
    assert net.diameter == pytest.approx(2.0)


def test_net_separation_and_radius():
    space = SmockedSpace(euclidean_space(2))
    net = space.ball_net(None, 1.0, 0.25)
    off = net.dist[~np.eye(net.size, dtype=bool)]
    assert off.min() >= 0.25 - 1e-9
    assert net.dist[0].max() <= 1.0 + 1e-9


def test_net_contains_stitches_within_radius(two_balls):
    space = SmockedSpace(two_balls)
    net = space.ball_net(Free(coords=(2.0, 0.0)), 1.5, 0.5)
    assert "stitch:0" in net.labels
    assert "stitch:1" in net.labels
    assert net.labels[0] == "x(2,0)"


def test_covering_number_grows_with_radius():
    space = SmockedSpace(euclidean_space(1))
    assert space.covering_number(1.0, 0.5) < space.covering_number(2.0, 0.5)


def test_smocking_constants(two_balls):
    """Test depth, lengths and separation of the two-ball pattern"""
    window = Window(min=(-2, -2), max=(6, 2))
    c = smocking_constants(two_balls, window, 0.25)
    assert c.l_min == pytest.approx(2.0)
    assert c.l_max == pytest.approx(2.0)
    assert c.delta == pytest.approx(2.0)
    assert c.depth_h == pytest.approx(math.sqrt(8) - 1, abs=1e-9)
    assert c.depth_error == pytest.approx(0.25 * math.sqrt(2))


def test_crossing_bound_and_preimage_radius():
    assert crossing_bound(4.0, 2.0) == 3
    assert crossing_bound(1.0, math.inf) == 1
    assert preimage_radius(1.0, 2.0, 2.0) == pytest.approx(1.0 + crossing_bound(3.0, 2.0) * 2.0)
    with pytest.raises(ValueError):
        crossing_bound(0.0, 1.0)


def test_crossing_bound_at_exact_quotients():
    """Test quotients landing on an integer in floating point count as that integer"""
    assert crossing_bound(0.3, 0.1) == 4
    assert crossing_bound(2.0, 0.5) == 5
    assert crossing_bound(2.9999999999999, 1.0) == 3
    assert crossing_bound(3.0000000001, 1.0) == 4


def test_basepoint_off_the_origin():
    """Test a window that excludes the origin with an explicit basepoint"""
    pattern = validate_pattern([Segment(id=0, a=(2,), b=(3,))], window=Window(min=(1,), max=(5,)))
    with pytest.raises(LiftOutsideWindow):
        SmockedSpace(pattern)

    space = SmockedSpace(pattern, (1.5,))
    assert space.basepoint == Free(coords=(1.5,))
    assert space.pseudometric((1.5,), (4.5,)) == pytest.approx(2.0)
    assert space.covering_number(0.4, 0.1) == 9
    assert SmockedSpace(pattern, (2.5,)).basepoint == Collapsed(stitch_id=0)
    assert SmockedSpace(pattern, Collapsed(stitch_id=0)).basepoint == Collapsed(stitch_id=0)


def test_invalid_space_points(two_balls):
    """Test unknown stitch ids and free points inside a stitch are rejected"""
    space = SmockedSpace(two_balls)
    with pytest.raises(InvalidSpacePoint):
        space.distance(Collapsed(stitch_id=99), Collapsed(stitch_id=0))
    with pytest.raises(InvalidSpacePoint):
        space.distance(Free(coords=(0.5, 0.0)), Free(coords=(2.0, 0.0)))
    with pytest.raises(InvalidSpacePoint):
        SmockedSpace(two_balls, Collapsed(stitch_id=7))


def assert_engine_matches_oracle(seed, patterns, pairs=10):
    rng = np.random.default_rng(seed)
    for _ in range(patterns):
        pattern = random_mixed_pattern(rng)
        space = SmockedSpace(pattern)
        points = sample_around(rng, pattern, 2 * pairs)
        for v, w in zip(points[::2], points[1::2]):
            assert space.pseudometric(v, w) == pytest.approx(space.oracle_distance(v, w), abs=1e-9)


def test_mixed_shape_engine_matches_oracle():
    """Test the engine against d_k enumeration on balls, boxes, segments and points"""
    assert_engine_matches_oracle(41, 20)


@pytest.mark.slow
def test_mixed_shape_engine_matches_oracle_full():
    assert_engine_matches_oracle(43, 200)


def test_one_dimensional_distance_subtracts_covered_length():
    """Test d(v, w) = |v - w| minus the length of stitches between v and w"""
    rng = np.random.default_rng(17)
    for _ in range(20):
        pattern = random_mixed_pattern(rng)
        if pattern.dimension != 1:
            continue
        space = SmockedSpace(pattern)
        intervals = [euclid.as_interval(s) for s in pattern.stitches]
        for v, w in sample_around(rng, pattern, 20).reshape(-1, 2):
            lo, hi = min(v, w), max(v, w)
            covered = sum(max(0.0, min(hi, b) - max(lo, a)) for a, b in intervals)
            assert space.pseudometric((v,), (w,)) == pytest.approx(hi - lo - covered, abs=1e-9)


def polyline_stitches(pattern, vertices):
    """Ids of the stitches a polyline meets."""
    pieces = [Segment(a=tuple(a), b=tuple(b)) for a, b in zip(vertices, vertices[1:])]
    return {s.id for s in pattern.stitches for piece in pieces if euclid.dist_set_set(piece, s) <= 1e-12}


def assert_polylines_meet_few_stitches(seed, count):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        pattern = random_mixed_pattern(rng)
        vertices = sample_around(rng, pattern, int(rng.integers(2, 6)))
        length = float(np.linalg.norm(np.diff(vertices, axis=0), axis=1).sum())
        assert len(polyline_stitches(pattern, vertices)) <= crossing_bound(length, pattern.delta)


def test_polyline_meets_at_most_crossing_bound_stitches():
    """Test a path of length L meets at most 1 + floor(L / delta) stitches"""
    assert_polylines_meet_few_stitches(53, 50)


@pytest.mark.slow
def test_polyline_crossings_full():
    assert_polylines_meet_few_stitches(59, 500)


def test_metric_balls_lift_into_preimage_radius():
    """Test every lift of B_r(pi(0)) lies in the Euclidean ball of preimage_radius"""
    rng = np.random.default_rng(23)
    r = 2.5
    for _ in range(10):
        pattern = random_mixed_pattern(rng)
        space = SmockedSpace(pattern)
        bound = preimage_radius(r, space.l_max, pattern.delta)
        z = rng.uniform(-1.5 * bound, 1.5 * bound, size=(2000, pattern.dimension))
        near = z[space.pullback_distances(space.basepoint, z) <= r]
        assert len(near) > 0
        assert np.linalg.norm(near, axis=1).max() <= bound + 1e-9


def test_adding_stitches_never_increases_distance():
    """Test a pattern refining another gives pointwise smaller distances"""
    rng = np.random.default_rng(31)
    for _ in range(20):
        fine = random_mixed_pattern(rng)
        keep = [s for s in fine.stitches if rng.random() < 0.5]
        coarse = validate_pattern(keep, dimension=fine.dimension)
        fine_space, coarse_space = SmockedSpace(fine), SmockedSpace(coarse)
        points = sample_around(rng, fine, 16)
        for v, w in zip(points[::2], points[1::2]):
            assert fine_space.pseudometric(v, w) <= coarse_space.pseudometric(v, w) + 1e-9


@pytest.mark.slow
def test_triangle_inequality_and_contraction_on_mixed_patterns():
    """Test 1000 random triples across mixed-shape patterns"""
    rng = np.random.default_rng(61)
    for _ in range(50):
        pattern = random_mixed_pattern(rng)
        space = SmockedSpace(pattern)
        raw = sample_around(rng, pattern, 60)
        points = [space.project(p) for p in raw]
        D = space.distance_matrix(points, points)
        for i, j, k in rng.integers(0, len(points), size=(20, 3)):
            assert D[i, k] <= D[i, j] + D[j, k] + 1e-9
            assert D[i, k] <= np.linalg.norm(raw[i] - raw[k]) + 1e-9
