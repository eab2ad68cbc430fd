"""Lazy filtering: partial-match cache, batch utility score, and
dual-bound resource-aware frame dropping with simulated meters."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Deque, Dict, Optional, Sequence, Tuple

from .core import ClassScore, MicroBatch, Query
from .errors import ZeroRemaining


# -- utility score --------------------------------------------------------


def mb_accuracy(scores: Sequence[ClassScore], q: Query) -> float:
    """Sum of query-object scores inside the top-k, each divided by its rank."""
    return sum(s.score / s.rank for s in scores if s.label in q.objects and s.rank <= q.top_k)


def mb_rpi(frames_processed: int, window_size: int) -> float:
    """Relative position importance: 1 at window start, 0 at its end."""
    if window_size <= 0:
        raise ValueError("window_size must be positive")
    if not 0 <= frames_processed <= window_size:
        raise ValueError(f"frames_processed {frames_processed} outside [0, {window_size}]")
    return 1.0 - frames_processed / window_size


def mb_win_remain(mb_size: int, window_remaining: int) -> float:
    """Batch size relative to what the window can still consume."""
    if window_remaining <= 0:
        raise ZeroRemaining("no window frames remaining")
    if not 0 < mb_size <= window_remaining:
        raise ValueError(f"mb_size {mb_size} outside (0, {window_remaining}]")
    return 1.0 - mb_size / window_remaining


def entropy_combine(a: float, b: float, literal: bool = False) -> float:
    """Combine two [0, 1] signals into one via pair entropy.

    Default: Shannon entropy of the pair normalized to a distribution,
    so equal inputs give 1 and a zero input gives 0. The ``literal``
    variant keeps the raw weighted-log ratio form instead (it is not
    maximized at equal inputs; kept for comparison).
    """
    a = max(0.0, a)
    b = max(0.0, b)
    if a == 0.0 or b == 0.0:
        return 0.0
    if literal:
        la = -math.log2(a) if a < 1.0 else 0.0
        lb = -math.log2(b) if b < 1.0 else 0.0
        denom = la + lb
        if denom == 0.0:
            return 1.0
        return (a * la + b * lb) / denom
    p = a / (a + b)
    qq = b / (a + b)
    return -(p * math.log2(p) + qq * math.log2(qq))


@dataclass(frozen=True)
class UtilityBreakdown:
    mb_accuracy: float
    omega_t: float
    mb_rpi: float
    mb_win_remain: float
    mb_position_size: float
    mb_utility: float


def mb_utility(
    scores: Sequence[ClassScore],
    q: Query,
    mb_size: int,
    frames_processed: int,
    window_size: int,
    literal: bool = False,
) -> UtilityBreakdown:
    """Compose accuracy and position-size into the batch utility score.

    frames_processed is the batch's start offset within its window unit;
    window_size is the unit frame budget.
    """
    accuracy = min(1.0, mb_accuracy(scores, q))
    omega = frames_processed / window_size
    rpi = mb_rpi(frames_processed, window_size)
    remaining = window_size - frames_processed
    win_remain = mb_win_remain(mb_size, remaining)
    position_size = entropy_combine(rpi, win_remain, literal=literal)
    utility = entropy_combine(accuracy, position_size, literal=literal)
    return UtilityBreakdown(
        mb_accuracy=accuracy,
        omega_t=omega,
        mb_rpi=rpi,
        mb_win_remain=win_remain,
        mb_position_size=position_size,
        mb_utility=utility,
    )


# -- partial-match cache ---------------------------------------------------


class PartialMatchCache:
    """Best accuracy seen per query object in the current window unit."""

    def __init__(self):
        self._best: Dict[str, float] = {}

    def reset(self) -> None:
        self._best.clear()

    def get(self, label: str) -> Optional[float]:
        return self._best.get(label)

    def update(self, improved: Dict[str, float]) -> None:
        self._best.update(improved)

    def snapshot(self) -> Dict[str, float]:
        return dict(self._best)


def cache_filter(
    mb: MicroBatch,
    scores: Sequence[ClassScore],
    cache: PartialMatchCache,
    q: Query,
) -> bool:
    """Forward (True) or drop (False) a batch based on partial-match quality.

    Batches with no query object at all drop. Otherwise the batch forwards
    when it fills an empty cache slot or strictly raises a cached maximum;
    only the improved slots update.
    """
    present = {s.label: s.score for s in scores if s.label in q.objects}
    if not present:
        return False
    improved = {}
    for label, score in present.items():
        best = cache.get(label)
        if best is None or score > best:
            improved[label] = score
    if not improved:
        return False
    cache.update(improved)
    return True


# -- simulated resource meters ----------------------------------------------


@dataclass
class ResourceMeters:
    """Deterministic stand-in for container memory/CPU sampling.

    Memory tracks live buffered frame bytes against a capacity; CPU
    accumulates simulated per-stage costs over a rolling window.
    """

    mem_capacity_bytes: int
    cpu_capacity_ms: float  # budget per rolling window (1000 * cores)
    cpu_window_ms: int = 1000
    mem_bytes_live: int = 0
    _cpu_events: Deque[Tuple[int, float]] = field(default_factory=deque)

    def enqueue(self, nbytes: int) -> None:
        if nbytes < 0:
            raise ValueError("nbytes must be non-negative")
        self.mem_bytes_live += nbytes

    def dequeue(self, nbytes: int) -> None:
        if nbytes < 0:
            raise ValueError("nbytes must be non-negative")
        self.mem_bytes_live = max(0, self.mem_bytes_live - nbytes)

    def add_cpu(self, now_ms: int, cost_ms: float) -> None:
        if cost_ms < 0:
            raise ValueError("cost_ms must be non-negative")
        self._cpu_events.append((now_ms, cost_ms))
        self._expire(now_ms)

    def remove_cpu(self, cost_ms: float) -> None:
        # Used when frames are dropped before their simulated work happens.
        remaining = cost_ms
        while remaining > 0 and self._cpu_events:
            ts, c = self._cpu_events[-1]
            if c <= remaining:
                self._cpu_events.pop()
                remaining -= c
            else:
                self._cpu_events[-1] = (ts, c - remaining)
                remaining = 0.0

    def _expire(self, now_ms: int) -> None:
        while self._cpu_events and self._cpu_events[0][0] <= now_ms - self.cpu_window_ms:
            self._cpu_events.popleft()

    def mem_util(self) -> float:
        return min(1.0, self.mem_bytes_live / self.mem_capacity_bytes)

    def cpu_util(self, now_ms: int) -> float:
        self._expire(now_ms)
        busy = sum(c for _, c in self._cpu_events)
        return min(1.0, busy / self.cpu_capacity_ms)


def update_meters(
    meters: ResourceMeters,
    now_ms: int,
    enqueue_bytes: int = 0,
    dequeue_bytes: int = 0,
    stage_cost_ms: float = 0.0,
) -> ResourceMeters:
    """Apply one meter event in place and return the meters."""
    if enqueue_bytes:
        meters.enqueue(enqueue_bytes)
    if dequeue_bytes:
        meters.dequeue(dequeue_bytes)
    if stage_cost_ms:
        meters.add_cpu(now_ms, stage_cost_ms)
    return meters


# -- dual-bound resource filter ----------------------------------------------


def resource_filter(
    mb: MicroBatch,
    utility: UtilityBreakdown,
    q: Query,
    meters: ResourceMeters,
    now_ms: int,
    frame_bytes: int,
    frame_cpu_cost_ms: float = 0.0,
) -> MicroBatch:
    """Drop tail frames while both resource bounds are violated.

    The batch passes untouched when either resource is under its bound
    (or the query sets no bounds). At least ceil(utility * size) frames
    survive and the keyframe is never dropped. frame_bytes is the live
    memory footprint charged per buffered frame.
    """
    if not q.has_bounds:
        return mb

    def under_mem() -> bool:
        return q.mem_bound_pct is not None and meters.mem_util() <= q.mem_bound_pct / 100.0

    def under_cpu() -> bool:
        return q.cpu_bound_pct is not None and meters.cpu_util(now_ms) <= q.cpu_bound_pct / 100.0

    def mem_ok() -> bool:
        return q.mem_bound_pct is None or meters.mem_util() <= q.mem_bound_pct / 100.0

    def cpu_ok() -> bool:
        return q.cpu_bound_pct is None or meters.cpu_util(now_ms) <= q.cpu_bound_pct / 100.0

    if under_mem() or under_cpu():
        return mb

    floor = max(1, math.ceil(utility.mb_utility * mb.size))
    kept = list(mb.frames)
    while len(kept) > floor and not (mem_ok() and cpu_ok()):
        kept.pop()
        meters.dequeue(frame_bytes)
        if frame_cpu_cost_ms:
            meters.remove_cpu(frame_cpu_cost_ms)
    if len(kept) == mb.size:
        return mb
    return replace(mb, frames=tuple(kept))
