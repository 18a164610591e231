"""Residual history buffer and sliding-window segmentation."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np


class ResidualHistory:
    """Fixed-capacity FIFO of the most recent non-conformity scores (newest last)."""

    def __init__(self, capacity: int, values: Iterable[float] = ()):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self._buf: deque[float] = deque(maxlen=self.capacity)
        for v in values:
            self.push(v)

    def push(self, value: float) -> "ResidualHistory":
        self._buf.append(float(value))
        return self

    @property
    def count(self) -> int:
        return len(self._buf)

    @property
    def full(self) -> bool:
        return len(self._buf) == self.capacity

    @property
    def values(self) -> np.ndarray:
        return np.fromiter(self._buf, dtype=float, count=len(self._buf))

    def copy(self) -> "ResidualHistory":
        return ResidualHistory(self.capacity, self._buf)

    def __len__(self) -> int:
        return len(self._buf)

    def __repr__(self) -> str:
        return f"ResidualHistory(capacity={self.capacity}, count={self.count})"


def push_residual(history: ResidualHistory, value: float) -> ResidualHistory:
    return history.push(value)


@dataclass(frozen=True)
class SegmentSet:
    """Overlapping (predictor, response) pairs cut from a residual history.

    Row ``i`` of ``predictors`` is (e[i+w-1], ..., e[i]) with its most recent
    residual first, ``responses[i]`` is e[i+w], and ``query`` is the ``w``
    newest residuals, newest first.
    """

    w: int
    predictors: np.ndarray
    responses: np.ndarray
    query: np.ndarray

    @property
    def n(self) -> int:
        return self.responses.shape[0]


def segment_array(values, w: int) -> SegmentSet:
    """Segment a raw residual array (oldest first)."""
    e = np.asarray(values, dtype=float)
    T = e.shape[0]
    if not (1 <= w <= T - 2):
        raise ValueError(f"window length w={w} out of range; need 1 <= w <= T-2 = {T - 2}")
    n = T - w
    # windows[i] = e[i : i+w]; reversed so the most recent residual comes first
    windows = np.lib.stride_tricks.sliding_window_view(e, w)[:, ::-1]
    return SegmentSet(
        w=w,
        predictors=np.ascontiguousarray(windows[:n]),
        responses=e[w:].copy(),
        query=np.ascontiguousarray(windows[n]),
    )


def build_segments(history: ResidualHistory, w: int) -> SegmentSet:
    if not history.full:
        raise ValueError(
            f"history holds {history.count} of {history.capacity} residuals; segmentation needs a full buffer"
        )
    return segment_array(history.values, w)
