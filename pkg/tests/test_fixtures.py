from collections import Counter
from fractions import Fraction

from iso3bp.boundary import BranchKind
from iso3bp.fixtures import NAMED_POINTS, P0, TABLE_ROWS, named_point, p0


def test_p0_is_exact():
    assert P0[0] == Fraction(13366894627923, 5000000000000)
    assert p0() == (2.6733789255846, 4.3170475352787, 1.490359743)


def test_tables_shape():
    assert len(TABLE_ROWS) == 45
    assert Counter(r.table for r in TABLE_ROWS) == {"fig1": 9, "f9": 9, "fs9": 9, "t9": 9, "fth9": 9}
    assert all(r.kind is BranchKind.ODD for r in TABLE_ROWS if r.table == "fig1")
    assert {r.location for r in TABLE_ROWS} == {(i, j) for i in (1, 2, 3) for j in (1, 2, 3)}
    assert TABLE_ROWS[13].label == "f9[2,2]" and TABLE_ROWS[13].theta_over_pi == Fraction(9, 4)


def test_named_points():
    assert set(NAMED_POINTS) == {"P1", "P2", "P3", "B"}
    assert named_point("B")[0] == 14.607249047056753
