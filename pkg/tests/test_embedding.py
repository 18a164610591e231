import numpy as np
import pytest
from hypothesis import given, strategies as st

from kowcpi.embedding import ResidualHistory, build_segments, push_residual, segment_array


@pytest.mark.parametrize(
    ("cap", "start", "new", "expected"),
    [(3, (1, 2, 3), 4, (2, 3, 4)), (3, (1, 2), 4, (1, 2, 4)), (1, (5,), 6, (6,))],
)
def test_push(cap, start, new, expected):
    h = push_residual(ResidualHistory(cap, start), new)
    assert tuple(h.values) == expected
    assert h.count == len(expected)


def test_segments_by_hand():
    seg = build_segments(ResidualHistory(4, (1, 2, 3, 4)), 2)
    np.testing.assert_array_equal(seg.predictors, [[2, 1], [3, 2]])
    np.testing.assert_array_equal(seg.responses, [3, 4])
    np.testing.assert_array_equal(seg.query, [4, 3])
    assert seg.n == 2


def test_segments_window_one():
    seg = build_segments(ResidualHistory(3, (1, 2, 3)), 1)
    np.testing.assert_array_equal(seg.predictors, [[1], [2]])
    np.testing.assert_array_equal(seg.responses, [2, 3])
    np.testing.assert_array_equal(seg.query, [3])


@pytest.mark.parametrize("w", [0, 3, 4])
def test_window_out_of_range(w):
    with pytest.raises(ValueError, match=r"1 <= w <= T-2 = 2"):
        build_segments(ResidualHistory(4, (1, 2, 3, 4)), w)


def test_partial_history_rejected():
    with pytest.raises(ValueError, match="full buffer"):
        build_segments(ResidualHistory(5, (1, 2, 3)), 1)


histories = st.integers(3, 60).flatmap(
    lambda T: st.tuples(
        st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=T, max_size=T),
        st.integers(1, T - 2),
    )
)


@given(histories)
def test_segment_invariants(data):
    values, w = data
    e = np.asarray(values)
    seg = segment_array(e, w)
    assert seg.n == e.size - w >= 2
    # response i is the first coordinate of the next predictor row
    np.testing.assert_array_equal(seg.responses[:-1], seg.predictors[1:, 0])
    np.testing.assert_array_equal(seg.query, e[::-1][:w])
    # round trip: first window (oldest first) followed by responses
    np.testing.assert_array_equal(np.concatenate([seg.predictors[0][::-1], seg.responses]), e)


@given(st.integers(1, 20), st.lists(st.floats(-10, 10, allow_nan=False), max_size=80))
def test_history_keeps_last_T(cap, pushes):
    h = ResidualHistory(cap)
    for v in pushes:
        h.push(v)
    assert h.count == min(cap, len(pushes))
    np.testing.assert_array_equal(h.values, np.asarray(pushes[-cap:] if pushes else [], dtype=float))
