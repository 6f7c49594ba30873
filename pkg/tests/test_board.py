import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from matchstick import numerics as nm
from matchstick import trace as tr
from matchstick.board import Board, replay
from matchstick.config import Config
from matchstick.errors import (
    DegenerateDirection,
    NoCrossing,
    NoIntersection,
    OffsetOutOfRange,
    ParseError,
    PickOutOfRange,
    UnitLengthViolation,
    UnknownId,
)
from matchstick.numerics import Cmp

from conftest import EPS_EQ, accepted, point_close


@pytest.fixture
def board():
    return Board()


def test_given_and_free_stick(board):
    a = board.given(0, 0)
    stick, b = board.lay_free(a, "90")
    assert (a, b, stick) == (0, 1, 0)
    assert point_close(board.point(b), 0, 1, EPS_EQ)
    assert board.cmp_unit(a, b) is Cmp.EQUAL


def test_lay_both_ends_needs_unit_distance(board):
    a = board.given(0, 0)
    b = board.given("0.6", "0.8")
    c = board.given("0.5", 0)
    board.lay_both_ends(a, b)
    with pytest.raises(UnitLengthViolation):
        board.lay_both_ends(a, c)


def test_lay_from_through(board):
    a = board.given(0, 0)
    b = board.given("0.3", "0.4")
    _, far = board.lay_from_through(a, b)
    assert point_close(board.point(far), "0.6", "0.8", EPS_EQ)
    with pytest.raises(UnitLengthViolation):
        board.lay_from_through(a, board.given(2, 0))
    with pytest.raises(DegenerateDirection):
        board.lay_from_through(a, a)


def test_lay_through_both_offsets(board):
    a = board.given(0, 0)
    b = board.given("0.5", 0)
    _, end_a, end_b = board.lay_through_both(a, b, "0.25")
    assert point_close(board.point(end_a), "-0.25", 0, EPS_EQ)
    assert point_close(board.point(end_b), "0.75", 0, EPS_EQ)
    with pytest.raises(OffsetOutOfRange):
        board.lay_through_both(a, b, "0.5")


def test_choose_point(board):
    a = board.given(0, 0)
    stick, _ = board.lay_free(a, "0")
    p = board.choose_point(stick)
    assert point_close(board.point(p), "0.5", 0, EPS_EQ)
    with pytest.raises(OffsetOutOfRange):
        board.choose_point(stick, 1)
    assert board.choose_point(stick, 1, interior_only=False) == 1


def test_random_choice_strategy_is_seeded():
    def chosen(seed):
        b = Board(Config(choice_strategy="random", seed=seed))
        stick, _ = b.lay_free(b.given(0, 0), "0")
        return b.point(b.choose_point(stick)).x

    assert chosen(3) == chosen(3)
    assert chosen(3) != chosen(4) or chosen(3) != chosen(5)


def test_compass_on_one_stick(board):
    o = board.given(0, 0)
    a = board.given("-1.5", "0.5")
    stick, _ = board.lay_free(a, "0")
    assert len(board.compass_candidates(o, stick)) == 1
    hit = board.compass(o, stick)
    p = board.point(hit)
    assert abs(nm.dist(p, board.point(o)) - 1) <= EPS_EQ
    with pytest.raises(PickOutOfRange):
        board.compass(o, stick, pick=1)
    far, _ = board.lay_free(board.given(5, 5), "0")
    with pytest.raises(NoIntersection):
        board.compass(o, far)


def test_crossing(board):
    s1, _ = board.lay_free(board.given(0, 0), "0")
    s2, _ = board.lay_free(board.given("0.5", "-0.5"), "90")
    x = board.crossing(s1, s2)
    assert point_close(board.point(x), "0.5", 0, EPS_EQ)
    s3, _ = board.lay_free(board.given(3, 3), "0")
    with pytest.raises(NoCrossing):
        board.crossing(s1, s3)


def test_unknown_ids(board):
    with pytest.raises(UnknownId):
        board.point(7)
    with pytest.raises(UnknownId):
        board.stick(0)


def test_coincident_points_share_an_id(board):
    a = board.given(0, 0)
    assert board.given("0.0", "-0") == a
    _, b = board.lay_free(a, "0")
    assert board.given(1, 0) == b


def test_no_primitive_takes_two_circles():
    # the board offers no way to intersect two unit circles in one step
    public = {name for name in dir(Board) if not name.startswith("_")}
    assert not any("circle" in name for name in public)
    assert all("circle" not in op for op in tr.PRIMITIVE_OPS)


def _sample_board(config=None):
    b = Board(config)
    a = b.given(0, 0)
    s0, p1 = b.lay_free(a, "30")
    m = b.choose_point(s0)
    s1, _ = b.lay_free(m, "-60")
    q = b.given("0.1", "0.9")
    b.lay_from_through(a, q)
    b.cmp_unit(a, q)
    b.crossing(s0, s1)
    b.compass(a, s1) if b.compass_candidates(a, s1) else None
    return b


def test_every_stick_is_unit_on_creation_and_replay():
    b = _sample_board()
    again = replay(b.trace)
    for board in (b, again):
        for s in board.sticks.values():
            assert nm.cmp_unit_distance(board.point(s.a), board.point(s.b)) is Cmp.EQUAL


def test_replay_is_bitwise_identical():
    b = _sample_board()
    assert replay(b.trace).trace.dumps() == b.trace.dumps()
    assert accepted(b)


def test_trace_round_trip_is_byte_identical(tmp_path):
    b = _sample_board()
    path = tmp_path / "t.trace"
    b.trace.write(path)
    text = path.read_text()
    assert tr.read(path).dumps() == text


def test_trace_header_fields():
    b = _sample_board(Config(seed=9, choice_strategy="random"))
    header = json.loads(b.trace.dumps().splitlines()[0])
    assert header["version"] == 1
    assert header["seed"] == 9 and header["choice_strategy"] == "random"
    assert header["epsilon_eq"] == "2^-128" and header["precision_bits"] == 256


@pytest.mark.parametrize(
    "text",
    ["", "not json\n", '{"version": 2}\n', '{"version": 1, "precision_bits": 256}\n', '{"version": 1, "precision_bits": 256, "epsilon_eq": "2^-128", "seed": 1, "choice_strategy": "half"}\n{"op": "given"}\n'],
)
def test_trace_parse_errors(text):
    with pytest.raises(ParseError):
        tr.loads(text)


def test_truncated_trace_is_a_parse_error():
    text = _sample_board().trace.dumps()
    with pytest.raises(ParseError):
        tr.loads(text[:-1])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=3599), min_size=1, max_size=12))
def test_ids_follow_creation_order(angles):
    b = Board()
    current = b.given(0, 0)
    for n, tenths in enumerate(angles):
        stick, far = b.lay_free(current, f"{tenths // 10}.{tenths % 10}")
        assert stick == n
        assert far <= len(b.points) - 1
        current = far
    points = [r["point"] for r in b.records if "point" in r]
    fresh_ids = [tr.parse_id(p, "P") for p in points]
    first_seen = []
    for i in fresh_ids:
        if i not in first_seen:
            first_seen.append(i)
    assert first_seen == sorted(first_seen) == list(range(len(first_seen)))
    assert [r["stick"] for r in b.records if r["op"] == "lay_free"] == [tr.sid(i) for i in range(len(angles))]
