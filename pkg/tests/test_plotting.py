import math
import re

import numpy as np
import pytest

from iso3bp.boundary import BranchKind
from iso3bp.dynamics import A_CIRCULAR
from iso3bp.periodic import full_trajectory, make_record
from iso3bp.plotting import branch_figure, fr_figure, xy_figure


@pytest.fixture(scope="module")
def circle():
    one_turn = 20 * math.pi / A_CIRCULAR
    return full_trajectory(make_record((one_turn / 4, A_CIRCULAR, 0.0), BranchKind.ODD_EVEN), 1, 400)


def test_output_is_deterministic(circle):
    assert fr_figure(circle.t, circle.states) == fr_figure(circle.t, circle.states)
    assert xy_figure(circle.positions) == xy_figure(circle.positions)


def test_svg_is_standalone(circle):
    svg = xy_figure(circle.positions, title="equilibrium")
    assert svg.lstrip().startswith("<?xml") and svg.rstrip().endswith("</svg>")
    assert 'id="track-body2"' in svg and "<dc:date>" not in svg


def test_equilibrium_track_is_a_radius_ten_circle(circle):
    xy = circle.positions[:, 1, :2]
    assert np.ptp(xy[:, 0]) == pytest.approx(20, abs=1e-6)
    assert np.ptp(xy[:, 1]) == pytest.approx(20, abs=1e-3)
    assert np.allclose(np.linalg.norm(xy, axis=1), 10, atol=1e-9)


def test_branch_projections(s1_toward_p3):
    for proj in ("ab", "Tab"):
        svg = branch_figure([s1_toward_p3], proj)
        assert 'id="branch-0"' in svg
        assert svg == branch_figure([s1_toward_p3], proj)
    with pytest.raises(ValueError):
        branch_figure([s1_toward_p3], "xyz")


def test_fr_figure_has_both_curves(circle):
    svg = fr_figure(circle.t, circle.states)
    assert len(re.findall(r'id="curve-[FR]"', svg)) == 2
