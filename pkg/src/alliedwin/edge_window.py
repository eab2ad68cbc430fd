"""Edge-side window state machine: RANGE accumulation, then SLIDE units,
adaptive micro-batching and the eager no-activity filter."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

from .core import (
    DEFAULT_MB_MAX,
    DEFAULT_SIMILARITY_THRESHOLD,
    Frame,
    Histogram,
    MicroBatch,
    Resolution,
    SplitReason,
    WindowSpec,
)
from .errors import OutOfOrderFrame
from .similarity import correlation, hsv_histogram


@dataclass(frozen=True)
class EmittedBatch:
    """A micro-batch plus its window-unit bookkeeping."""

    batch: MicroBatch
    unit_id: int
    unit_size_frames: int  # frame budget of the unit (slide or initial range)


class EdgeWindow:
    """Splits an incoming frame stream into micro-batches per window unit.

    A batch closes when an I-frame arrives, when similarity to the batch
    reference frame drops to the threshold or below, when the batch reaches
    mb_max frames, or when the unit (initial RANGE, then SLIDE) boundary
    passes. Every ingested frame lands in exactly one batch of its unit.
    """

    def __init__(
        self,
        spec: WindowSpec,
        fps: int,
        threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
        mb_max: int = DEFAULT_MB_MAX,
        similarity: Optional[Callable[[Frame, Frame], float]] = None,
    ):
        if fps <= 0:
            raise ValueError("fps must be positive")
        if mb_max < 1:
            raise ValueError("mb_max must be >= 1")
        self.spec = spec
        self.fps = fps
        self.threshold = threshold
        self.mb_max = mb_max
        self._similarity = similarity or self._histogram_similarity
        self._unit_id = 0
        self._unit_start_ms: Optional[int] = None
        self._last_ts: Optional[int] = None
        self._open: List[Frame] = []
        self._open_start_offset = 0
        self._frames_in_unit = 0
        self._batch_counter = 0

    # -- public state -----------------------------------------------------

    @property
    def initializing(self) -> bool:
        return self._unit_id == 0

    @property
    def unit_id(self) -> int:
        return self._unit_id

    @property
    def frames_processed_in_unit(self) -> int:
        return self._frames_in_unit

    @property
    def unit_size_frames(self) -> int:
        seconds = self.spec.range_s if self.initializing else self.spec.slide_s
        return seconds * self.fps

    def _unit_len_ms(self) -> int:
        return self.spec.range_ms if self.initializing else self.spec.slide_ms

    def _unit_end_ms(self) -> int:
        assert self._unit_start_ms is not None
        return self._unit_start_ms + self._unit_len_ms()

    # -- operations --------------------------------------------------------

    def advance(self, frame: Frame) -> List[EmittedBatch]:
        """Ingest one frame; returns any batches closed by it."""
        if self._last_ts is not None and frame.ts_ms <= self._last_ts:
            raise OutOfOrderFrame(f"ts {frame.ts_ms} after {self._last_ts}")
        self._last_ts = frame.ts_ms
        if self._unit_start_ms is None:
            self._unit_start_ms = frame.ts_ms

        emitted: List[EmittedBatch] = []
        while frame.ts_ms >= self._unit_end_ms():
            flushed = self._close_unit()
            if flushed is not None:
                emitted.append(flushed)

        if not self._open:
            self._start_batch(frame)
        elif (
            frame.iframe
            or self._similarity(self._open[0], frame) <= self.threshold
            or len(self._open) >= self.mb_max
        ):
            if len(self._open) >= self.mb_max:
                reason = SplitReason.MAX_SIZE
            elif frame.iframe:
                reason = SplitReason.IFRAME
            else:
                reason = SplitReason.SIMILARITY_BREAK
            emitted.append(self._emit(reason))
            self._start_batch(frame)
        else:
            self._open.append(frame)
        self._frames_in_unit += 1
        return emitted

    def slide_boundary(self, now_ms: int) -> List[EmittedBatch]:
        """Flush every unit boundary at or before now_ms."""
        if self._unit_start_ms is None:
            return []
        emitted: List[EmittedBatch] = []
        while now_ms >= self._unit_end_ms():
            flushed = self._close_unit()
            if flushed is not None:
                emitted.append(flushed)
        return emitted

    def finish(self) -> List[EmittedBatch]:
        """Flush the open batch at end of stream."""
        if not self._open:
            return []
        return [self._emit(SplitReason.SLIDE_END)]

    # -- internals ----------------------------------------------------------

    def _histogram_similarity(self, a: Frame, b: Frame) -> float:
        return correlation(hsv_histogram(a), hsv_histogram(b))

    def _start_batch(self, frame: Frame) -> None:
        self._open = [frame]
        self._open_start_offset = self._frames_in_unit

    def _emit(self, reason: SplitReason) -> EmittedBatch:
        batch = MicroBatch(
            batch_id=self._batch_counter,
            frames=tuple(self._open),
            resolution=Resolution(self._open[0].width, self._open[0].height),
            split_reason=reason,
            created_at=self._open_start_offset,
        )
        self._batch_counter += 1
        emitted = EmittedBatch(
            batch=batch, unit_id=self._unit_id, unit_size_frames=self.unit_size_frames
        )
        self._open = []
        return emitted

    def _close_unit(self) -> Optional[EmittedBatch]:
        flushed = self._emit(SplitReason.SLIDE_END) if self._open else None
        self._unit_start_ms = self._unit_end_ms()
        self._unit_id += 1
        self._frames_in_unit = 0
        self._open_start_offset = 0
        return flushed


class EagerFilter:
    """Drops every max-size batch in a no-activity run except the first."""

    def __init__(self, mb_max: int = DEFAULT_MB_MAX):
        self.mb_max = mb_max
        self._run = 0

    def forward(self, batch: MicroBatch) -> bool:
        if batch.split_reason is SplitReason.MAX_SIZE and batch.size == self.mb_max:
            self._run += 1
            return self._run == 1
        self._run = 0
        return True
