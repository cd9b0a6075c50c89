import pytest
from hypothesis import given, settings, strategies as st

from oracles import polygon_area_green
from ym2 import build_loop, direction_sign, enclosed_area
from ym2.curve_geometry import HorizontalCurve
from ym2.errors import LoopError, NotSimpleLoopError


def test_rectangle_build(rectangle):
    assert rectangle.m == 2
    assert rectangle.strip_length == pytest.approx(1.0)
    assert rectangle.piece(1).right_moving
    assert not rectangle.piece(2).right_moving


def test_matching_violation_raises():
    with pytest.raises(LoopError, match="not closed"):
        build_loop([[(0.0, 1.0), (1.0, 1.0)], [(0.5, 2.0), (0.0, 2.0)]])


def test_two_lap_build(two_lap):
    assert two_lap.m == 4
    assert two_lap.strip_length == pytest.approx(1.0)
    assert two_lap.piece(1).right_moving and two_lap.piece(3).right_moving
    assert not (two_lap.piece(2).right_moving or two_lap.piece(4).right_moving)


def test_x_support_translated_to_zero():
    loop = build_loop([[(3.0, 1.0), (4.0, 1.0)], [(4.0, 2.0), (3.0, 2.0)]])
    assert loop.piece(1).x_minus == pytest.approx(0.0)
    assert loop.strip_length == pytest.approx(1.0)
    # y is untouched
    assert loop.piece(1).height(0.5) == pytest.approx(1.0)


def test_monotonicity_enforced():
    with pytest.raises(LoopError):
        HorizontalCurve(((0.0, 0.0), (1.0, 1.0), (0.5, 2.0)))


def test_direction_signs(rectangle, two_lap):
    assert direction_sign(rectangle, 1, 2) == -1
    assert direction_sign(rectangle, 1, 1) == 1
    assert direction_sign(two_lap, 1, 3) == 1
    assert direction_sign(two_lap, 2, 3) == -1
    with pytest.raises(IndexError):
        direction_sign(rectangle, 1, 3)


def test_rectangle_area(rectangle):
    assert enclosed_area(rectangle) == pytest.approx(1.0, abs=1e-12)


def test_triangle_area(triangle):
    assert enclosed_area(triangle) == pytest.approx(0.5, abs=1e-12)


def test_two_lap_not_simple(two_lap):
    with pytest.raises(NotSimpleLoopError, match="not simple"):
        enclosed_area(two_lap)


def test_crossing_bowtie_not_simple():
    bowtie = build_loop(
        [[(0.0, 0.0), (1.0, 1.0)], [(1.0, 0.0), (0.0, 1.0)]]
    )
    with pytest.raises(NotSimpleLoopError):
        enclosed_area(bowtie)


def test_area_matches_green_oracle(rectangle, triangle):
    for loop in (rectangle, triangle):
        assert enclosed_area(loop) == pytest.approx(
            polygon_area_green(loop), abs=1e-12
        )


@settings(max_examples=40, deadline=None)
@given(
    dy=st.floats(min_value=-50, max_value=50, allow_nan=False),
    h=st.floats(min_value=0.1, max_value=5, allow_nan=False),
    w=st.floats(min_value=0.1, max_value=5, allow_nan=False),
)
def test_area_invariant_under_y_translation(dy, h, w):
    loop = build_loop([[(0.0, 0.0), (w, 0.0)], [(w, h), (0.0, h)]])
    shifted = loop.translated(dy)
    assert enclosed_area(shifted) == pytest.approx(enclosed_area(loop), abs=1e-9)
    assert enclosed_area(loop) == pytest.approx(w * h, rel=1e-12)


def test_polyline_pieces_and_height():
    curve = HorizontalCurve(((0.0, 0.0), (0.5, 1.0), (1.0, 0.5)))
    assert curve.height(0.25) == pytest.approx(0.5)
    assert curve.height(0.75) == pytest.approx(0.75)
    pieces = list(curve.linear_pieces())
    assert len(pieces) == 2
    x0, x1, a, b = pieces[0]
    assert (x0, x1) == (0.0, 0.5)
    assert a + b * 0.5 == pytest.approx(1.0)


def test_left_moving_orientation_endpoints():
    curve = HorizontalCurve(((1.0, 2.0), (0.0, 2.0)))
    assert not curve.right_moving
    assert curve.x_minus == 1.0 and curve.x_plus == 0.0
    assert curve.x_lo == 0.0 and curve.x_hi == 1.0


def test_above_axis_flags(rectangle):
    assert rectangle.above_axis and not rectangle.crosses_axis
    dipped = rectangle.translated(-1.5)
    assert not dipped.above_axis and dipped.crosses_axis
