"""Domain types shared by every pipeline stage.

All types are immutable after construction so they can be handed between
stages without copying.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .errors import InvalidWindow

#: Similarity threshold below which a new micro-batch starts.
DEFAULT_SIMILARITY_THRESHOLD = 0.98

#: Circuit-breaker cap on micro-batch size for static scenes.
DEFAULT_MB_MAX = 70

#: HSV histogram layout: H bins then S bins, V ignored.
DEFAULT_H_BINS = 50
DEFAULT_S_BINS = 50
DEFAULT_BIN_COUNT = DEFAULT_H_BINS + DEFAULT_S_BINS


@dataclass(frozen=True)
class Histogram:
    """Fixed-length vector of non-negative HSV bin counts."""

    bins: Tuple[float, ...]

    def __post_init__(self):
        if any(b < 0 for b in self.bins):
            raise ValueError("histogram bins must be non-negative")

    @property
    def bin_count(self) -> int:
        return len(self.bins)


@dataclass(frozen=True)
class Annotation:
    """Ground-truth object occurrence driving the synthetic classifier."""

    label: str
    base_score: float
    bbox: Optional[Tuple[float, float, float, float]] = None  # x, y, w, h in pixels

    def __post_init__(self):
        if not 0.0 <= self.base_score <= 1.0:
            raise ValueError(f"base_score {self.base_score} outside [0, 1]")


@dataclass(frozen=True)
class Frame:
    """One timestamped video frame: pixel payload or histogram surrogate."""

    stream_id: int
    ts_ms: int
    width: int
    height: int
    pixels: Optional[bytes] = None  # row-major RGB8, width*height*3 bytes
    histogram: Optional[Histogram] = None
    iframe: bool = False
    annotations: Tuple[Annotation, ...] = ()

    def __post_init__(self):
        if self.pixels is None and self.histogram is None:
            raise ValueError("frame needs pixels or a surrogate histogram")
        if self.pixels is not None:
            expected = self.width * self.height * 3
            if len(self.pixels) != expected:
                raise ValueError(
                    f"pixel buffer is {len(self.pixels)} bytes, expected {expected}"
                )
        for ann in self.annotations:
            if ann.bbox is not None:
                x, y, w, h = ann.bbox
                if x < 0 or y < 0 or x + w > self.width or y + h > self.height:
                    raise ValueError(f"bbox {ann.bbox} outside {self.width}x{self.height}")

    @property
    def raw_bytes(self) -> int:
        """Nominal uncompressed RGB8 footprint of this frame."""
        return self.width * self.height * 3


@dataclass(frozen=True)
class Resolution:
    width: int
    height: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("resolution dimensions must be positive")

    @property
    def pixel_count(self) -> int:
        return self.width * self.height

    def is_16_9(self) -> bool:
        return self.width * 9 == self.height * 16


class SplitReason(enum.Enum):
    SLIDE_END = "slide_end"
    IFRAME = "iframe"
    SIMILARITY_BREAK = "similarity_break"
    MAX_SIZE = "max_size"


@dataclass(frozen=True)
class MicroBatch:
    """A contiguous run of similar frames keyed by its first frame."""

    batch_id: int
    frames: Tuple[Frame, ...]
    resolution: Resolution
    split_reason: SplitReason
    created_at: int  # frame offset of the batch start within its window unit

    def __post_init__(self):
        if not self.frames:
            raise ValueError("micro-batch needs at least one frame")
        ts = [f.ts_ms for f in self.frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("micro-batch timestamps must strictly increase")

    @property
    def keyframe(self) -> Frame:
        return self.frames[0]

    @property
    def size(self) -> int:
        return len(self.frames)


class WindowKind(enum.Enum):
    SLIDING = "sliding"
    TUMBLING = "tumbling"


@dataclass(frozen=True)
class WindowSpec:
    """Time-based window: RANGE extent advancing by SLIDE."""

    range_s: int
    slide_s: int

    def __post_init__(self):
        if self.slide_s <= 0:
            raise InvalidWindow(f"slide must be positive, got {self.slide_s}")
        if self.range_s < self.slide_s:
            raise InvalidWindow(
                f"range {self.range_s}s < slide {self.slide_s}s (sampling windows rejected)"
            )

    @property
    def kind(self) -> WindowKind:
        return WindowKind.TUMBLING if self.range_s == self.slide_s else WindowKind.SLIDING

    @property
    def range_ms(self) -> int:
        return self.range_s * 1000

    @property
    def slide_ms(self) -> int:
        return self.slide_s * 1000


@dataclass(frozen=True)
class Query:
    """Parsed pattern query: single object or two-object conjunction."""

    labels: Tuple[str, ...]
    top_k: int
    window: WindowSpec
    cpu_bound_pct: Optional[float] = None
    mem_bound_pct: Optional[float] = None

    def __post_init__(self):
        if not self.labels:
            raise ValueError("query needs at least one object label")
        if len(self.labels) > 2:
            raise ValueError("only single-object and two-object conjunction patterns")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")

    @property
    def is_conj(self) -> bool:
        return len(self.labels) == 2

    @property
    def objects(self) -> frozenset:
        return frozenset(self.labels)

    @property
    def has_bounds(self) -> bool:
        return self.cpu_bound_pct is not None or self.mem_bound_pct is not None


@dataclass(frozen=True)
class ClassScore:
    label: str
    score: float
    rank: int  # 1-based position in descending-score order

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.rank < 1:
            raise ValueError("rank is 1-based")


@dataclass(frozen=True)
class Detection:
    label: str
    score: float
    bbox: Optional[Tuple[float, float, float, float]]
    ts_ms: int

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
