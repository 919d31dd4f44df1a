import math

import numpy as np
import pytest

from smock.errors import BudgetExceeded, InvalidCorrespondence
from smock.models.geometry import Segment
from smock.models.metric import Correspondence, FiniteMetricSpace
from smock.services import gh
from smock.services.smocked import euclidean_space, validate_pattern


def simplex(n: int, side: float = 1.0) -> FiniteMetricSpace:
    D = np.full((n, n), side)
    np.fill_diagonal(D, 0.0)
    return FiniteMetricSpace(labels=[f"p{i}" for i in range(n)], dist=D)


def test_finite_metric_space_validation():
    """Test that non-metric matrices are rejected"""
    with pytest.raises(ValueError):
        FiniteMetricSpace(labels=["a", "b"], dist=[[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        FiniteMetricSpace(labels=["a", "b", "c"], dist=[[0, 1, 5], [1, 0, 1], [5, 1, 0]])


def test_distortion_of_identity_is_zero():
    X = simplex(3)
    C = Correspondence(pairs={(0, 0), (1, 1), (2, 2)})
    assert gh.distortion(C, X, X) == 0.0


def test_distortion_rejects_bad_correspondences():
    X, Y = simplex(3), simplex(2)
    with pytest.raises(InvalidCorrespondence):
        gh.distortion(Correspondence(pairs=set()), X, Y)
    with pytest.raises(InvalidCorrespondence):
        gh.distortion(Correspondence(pairs={(0, 0), (1, 1)}), X, Y)
    with pytest.raises(InvalidCorrespondence):
        gh.distortion(Correspondence(pairs={(0, 0), (1, 1), (2, 5)}), X, Y)


def test_gh_exact_small_known_values():
    """Test exact GH distances between small simplices"""
    assert gh.gh_exact_small(simplex(3), simplex(2)) == pytest.approx(0.5)
    assert gh.gh_exact_small(simplex(3), simplex(1)) == pytest.approx(0.5)
    assert gh.gh_exact_small(simplex(3), simplex(3)) == 0.0
    assert gh.gh_exact_small(simplex(2, 1.0), simplex(2, 3.0)) == pytest.approx(1.0)


def test_gh_exact_small_budget():
    with pytest.raises(BudgetExceeded):
        gh.gh_exact_small(simplex(6), simplex(2))


def test_bounds_bracket_exact_value():
    """Test gh_lower <= exact <= gh_upper on random planar point sets"""
    rng = np.random.default_rng(17)
    for _ in range(8):
        X = FiniteMetricSpace.from_points(rng.uniform(0, 1, size=(rng.integers(2, 5), 2)))
        Y = FiniteMetricSpace.from_points(rng.uniform(0, 1, size=(rng.integers(2, 5), 2)))
        exact = gh.gh_exact_small(X, Y)
        assert gh.gh_lower(X, Y) <= exact + 1e-12
        assert gh.gh_upper(X, Y) >= exact - 1e-12


def test_gh_upper_of_a_space_with_itself():
    rng = np.random.default_rng(1)
    X = FiniteMetricSpace.from_points(rng.uniform(0, 1, size=(20, 2)))
    assert gh.gh_upper(X, X) == 0.0


def test_same_preimage_correspondence():
    X = FiniteMetricSpace.from_points([[0.0], [1.0], [2.0]])
    Y = FiniteMetricSpace.from_points([[0.2], [1.9]])
    C = gh.same_preimage_correspondence(X, Y)
    assert C.pairs == {(0, 0), (1, 0), (2, 1)}
    assert C.covers(3, 2)

    bare = simplex(2)
    with pytest.raises(InvalidCorrespondence):
        gh.same_preimage_correspondence(bare, Y)


def test_local_hausdorff_empty_cases():
    """Test the conventions for empty local stitch unions"""
    flat = euclidean_space(1)
    stitched = validate_pattern([Segment(a=(0.5,), b=(1.0,))])
    assert gh.local_hausdorff(flat, flat, 2.0).value == 0.0
    assert math.isinf(gh.local_hausdorff(stitched, flat, 2.0).value)
    assert gh.local_stitch_union(stitched, 0.1) is None


def test_local_hausdorff_between_patterns():
    A = validate_pattern([Segment(a=(0.0,), b=(1.0,))])
    B = validate_pattern([Segment(a=(0.0,), b=(1.5,))])
    assert gh.local_hausdorff(A, B, 2.0).value == pytest.approx(0.5)


def random_space(rng, low=1, high=5) -> FiniteMetricSpace:
    return FiniteMetricSpace.from_points(rng.uniform(0, 1, size=(rng.integers(low, high), 2)))


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 3.0])
@pytest.mark.parametrize("b", [0.5, 1.0, 2.0, 3.0])
def test_two_point_spaces(a, b):
    """Test GH between two-point spaces is half the gap of their diameters"""
    assert gh.gh_exact_small(simplex(2, a), simplex(2, b)) == pytest.approx(abs(a - b) / 2)


def test_gh_exact_is_a_metric_on_small_spaces():
    """Test symmetry, triangle inequality and scaling of the exact solver"""
    rng = np.random.default_rng(29)
    for _ in range(15):
        X, Y, Z = random_space(rng), random_space(rng), random_space(rng)
        xy = gh.gh_exact_small(X, Y)
        assert gh.gh_exact_small(Y, X) == pytest.approx(xy, abs=1e-12)
        assert xy <= gh.gh_exact_small(X, Z) + gh.gh_exact_small(Z, Y) + 1e-12
        lam = float(rng.uniform(0.25, 4.0))
        assert gh.gh_exact_small(X.scaled(lam), Y.scaled(lam)) == pytest.approx(lam * xy, abs=1e-12)


def test_every_correspondence_bounds_gh_exact():
    """Test dis(C) >= 2 gh_exact for random correspondences"""
    rng = np.random.default_rng(37)
    for _ in range(20):
        X, Y = random_space(rng), random_space(rng)
        exact = gh.gh_exact_small(X, Y)
        f = rng.integers(0, Y.size, size=X.size).tolist()
        g = rng.integers(0, X.size, size=Y.size).tolist()
        extra = {(int(i), int(j)) for i, j in zip(rng.integers(0, X.size, 3), rng.integers(0, Y.size, 3))}
        C = Correspondence(pairs=Correspondence.from_maps(f, g).pairs | extra)
        assert gh.distortion(C, X, Y) >= 2 * exact - 1e-12


@pytest.mark.slow
def test_bounds_bracket_exact_value_full():
    rng = np.random.default_rng(71)
    for _ in range(100):
        X, Y = random_space(rng, 2, 6), random_space(rng, 2, 6)
        exact = gh.gh_exact_small(X, Y)
        assert gh.gh_lower(X, Y) <= exact + 1e-12
        assert gh.gh_upper(X, Y) >= exact - 1e-12
