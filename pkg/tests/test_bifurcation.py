import numpy as np
import pytest

from iso3bp.bifurcation import discrete_minimum, find_bifurcation, z_norm, z_profile, z_x_angle
from iso3bp.boundary import BranchKind, residual
from iso3bp.continuation import Branch
from iso3bp.errors import NoInteriorMinimum
from iso3bp.fixtures import named_point

B = named_point("B")


@pytest.fixture(scope="module")
def report(s1_toward_p2):
    return find_bifurcation(s1_toward_p2)


def test_location(report):
    assert np.max(np.abs(np.array(report.full_period_coords) - B)) < 1e-2


def test_lies_on_both_curves(report):
    tau, a, b = report.point.coords
    assert np.max(np.abs(residual((tau, a, b), BranchKind.ODD_EVEN))) < 1e-4
    assert np.max(np.abs(residual((2 * tau, a, b), BranchKind.ODD))) < 1e-4


def test_refinement_is_monotone_and_beats_brackets(report):
    h = np.array(report.history)
    assert np.all(np.diff(h) <= 0)
    assert report.z_norm <= h[0]
    for pt in report.bracket:
        assert report.z_norm <= z_norm(pt.coords)


def test_profile_shape(s1_toward_p2, report):
    br = s1_toward_p2
    idx = [i for i, p in enumerate(br.points) if p.is_pillar]
    prof = z_profile(br, indices=idx)
    assert np.all(prof[:, 1] > 0) and np.all(np.diff(prof[:, 0]) > 0)
    i = discrete_minimum(prof[:, 1])
    assert 0 < i < len(idx) - 1
    assert min(prof[0, 1], prof[-1, 1]) >= 10 * prof[i, 1]
    assert report.z_norm <= prof[i, 1]


def test_z_parallel_to_x(s1_toward_p2):
    rng = np.random.default_rng(7)
    pts = s1_toward_p2.points
    for i in rng.choice(len(pts), 10, replace=False):
        angle, zn = z_x_angle(pts[i].coords)
        assert angle < 1e-3 or zn < 1e-6


def test_monotone_profile_has_no_interior_minimum():
    with pytest.raises(NoInteriorMinimum):
        discrete_minimum(np.linspace(5.0, 1.0, 20))
    with pytest.raises(NoInteriorMinimum):
        discrete_minimum([1.0, 2.0])


def test_truncated_branch_misses_the_crossing(s1_toward_p2):
    br = s1_toward_p2
    s = br.arc_length()
    cut = int(np.searchsorted(s, 1.0))
    short = Branch(br.kind, br.config, br.points[:cut], "truncated")
    with pytest.raises(NoInteriorMinimum):
        find_bifurcation(short)


def test_needs_odd_even_branch(s2_through_b):
    with pytest.raises(ValueError):
        z_profile(s2_through_b)
