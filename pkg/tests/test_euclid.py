import math

import numpy as np
import pytest

from smock.errors import DimensionMismatch, EmptyOperand
from smock.models.geometry import Ball, Box, Cloud, CompactSet, Segment
from smock.services import euclid


def test_diameters():
    """Test closed-form diameters of every shape"""
    assert euclid.diam(Ball(center=(0, 0), radius=1.5)) == 3.0
    assert euclid.diam(Box(min=(0, 0), max=(3, 4))) == pytest.approx(5.0)
    assert euclid.diam(Segment(a=(0, 0, 0), b=(1, 2, 2))) == pytest.approx(3.0)
    assert euclid.diam(Cloud(points=[(1, 1)])) == 0.0


def test_volumes():
    assert euclid.volume(Ball(center=(0, 0), radius=1)) == pytest.approx(math.pi)
    assert euclid.volume(Ball(center=(0, 0, 0), radius=2)) == pytest.approx(4 / 3 * math.pi * 8)
    assert euclid.volume(Box(min=(0, 0), max=(2, 3))) == pytest.approx(6.0)
    assert euclid.volume(Segment(a=(1,), b=(3.5,))) == pytest.approx(2.5)
    assert euclid.volume(Segment(a=(0, 0), b=(1, 1))) == 0.0


def test_set_distances_closed_forms():
    """Test exact set distances for the closed-form pairs"""
    b0 = Ball(center=(0, 0), radius=1)
    b1 = Ball(center=(4, 0), radius=1)
    assert euclid.dist_set_set(b0, b1) == pytest.approx(2.0)

    box_a = Box(min=(0, 0), max=(1, 1))
    box_b = Box(min=(2, 0), max=(3, 1))
    assert euclid.dist_set_set(box_a, box_b) == pytest.approx(1.0)

    seg = Segment(a=(2, -1), b=(2, 1))
    assert euclid.dist_set_set(b0, seg) == pytest.approx(1.0)

    crossing = Segment(a=(-1, -1), b=(1, 1))
    other = Segment(a=(-1, 1), b=(1, -1))
    assert euclid.dist_set_set(crossing, other) == pytest.approx(0.0, abs=1e-12)

    parallel = Segment(a=(0, 1), b=(1, 1))
    base = Segment(a=(0, 0), b=(1, 0))
    assert euclid.dist_set_set(parallel, base) == pytest.approx(1.0)


def test_box_segment_distance():
    """Test the box-segment pair solved by scalar minimization"""
    box = Box(min=(0, 0), max=(1, 1))
    seg = Segment(a=(2, 2), b=(3, 2))
    assert euclid.dist_set_set(box, seg) == pytest.approx(math.sqrt(2), abs=1e-9)

    through = Segment(a=(-1, 0.5), b=(2, 0.5))
    assert euclid.dist_set_set(box, through) == 0.0


def test_set_distance_is_symmetric():
    rng = np.random.default_rng(3)
    shapes = [
        Ball(center=(0, 0), radius=0.5),
        Box(min=(2, 2), max=(3, 4)),
        Segment(a=(-3, 1), b=(-1, 3)),
        Cloud(points=[(5, -1)]),
    ]
    for _ in range(10):
        i, j = rng.choice(len(shapes), 2, replace=False)
        assert euclid.dist_set_set(shapes[i], shapes[j]) == pytest.approx(
            euclid.dist_set_set(shapes[j], shapes[i]), abs=1e-9
        )


def test_point_distance_zero_inside():
    ball = Ball(center=(1, 1), radius=1)
    assert euclid.dist_point_set((1.5, 1), ball) == 0.0
    assert euclid.dist_point_set((4, 1), ball) == pytest.approx(2.0)
    assert euclid.contains(np.array([[1, 1], [3, 3]]), ball).tolist() == [True, False]


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        euclid.dist_set_set(Ball(center=(0,), radius=1), Ball(center=(0, 0), radius=1))


def test_hausdorff_exact_in_one_dimension():
    """Test the endpoint arithmetic used for 1-D Hausdorff distances"""
    A = CompactSet(pieces=[Segment(a=(0,), b=(1,))])
    B = CompactSet(pieces=[Segment(a=(0,), b=(3,))])
    est = euclid.hausdorff(A, B)
    assert est.value == pytest.approx(2.0)
    assert est.error == 0.0
    assert est.method == "exact-1d"

    holes = CompactSet(pieces=[Segment(a=(0,), b=(1,)), Segment(a=(2,), b=(3,))])
    assert euclid.hausdorff(holes, B).value == pytest.approx(0.5)


def test_hausdorff_sampled_error_bar():
    """Test that sampled Hausdorff distances stay within their error bar"""
    small = CompactSet(pieces=[Ball(center=(0, 0), radius=1)])
    large = CompactSet(pieces=[Ball(center=(0, 0), radius=2)])
    est = euclid.hausdorff(small, large, resolution=0.05)
    assert est.method == "sampled"
    assert est.error == 0.05
    assert abs(est.value - 1.0) <= est.error + 1e-9


def test_hausdorff_empty_operand():
    B = CompactSet(pieces=[Ball(center=(0, 0), radius=1)])
    with pytest.raises(EmptyOperand):
        euclid.hausdorff(None, B)
