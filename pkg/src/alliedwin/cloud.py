"""Cloud-side window state, pattern matching and event accuracy."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .core import Detection, Query, WindowSpec


@dataclass(frozen=True)
class EventMatch:
    query_labels: Tuple[str, ...]
    contributors: Tuple[Detection, ...]  # in timestamp order
    match_ts: int  # timestamp of the completing detection
    window_unit: int

    @property
    def identity(self) -> Tuple[Tuple[str, int], ...]:
        return tuple((d.label, d.ts_ms) for d in self.contributors)


class CloudWindow:
    """Time-ordered detection buffer advancing by SLIDE after the initial RANGE.

    New detections push onto the back; every slide pops expired entries off
    the front. Detections older than the current start are counted, not
    raised, so late edge deliveries cannot wedge the pipeline.
    """

    def __init__(self, spec: WindowSpec, start_ms: int = 0):
        self.spec = spec
        self.start_ms = start_ms
        self.end_ms = start_ms + spec.range_ms
        self._buffer: List[Detection] = []
        self.stale_dropped = 0
        self.unit_id = 0
        self._initializing = True

    @property
    def initializing(self) -> bool:
        return self._initializing

    def ingest(self, detections: Iterable[Detection]) -> None:
        for det in detections:
            if det.ts_ms < self.start_ms:
                self.stale_dropped += 1
                continue
            self._buffer.append(det)
        self._buffer.sort(key=lambda d: (d.ts_ms, d.label, -d.score))

    def state(self) -> Tuple[Detection, ...]:
        """Detections inside the current window bounds."""
        return tuple(d for d in self._buffer if self.start_ms <= d.ts_ms < self.end_ms)

    def slide(self) -> None:
        """Advance bounds by SLIDE and evict expired detections."""
        self.start_ms += self.spec.slide_ms
        self.end_ms += self.spec.slide_ms
        self._buffer = [d for d in self._buffer if d.ts_ms >= self.start_ms]
        self.unit_id += 1
        self._initializing = False


def _qualifying(state: Sequence[Detection], q: Query) -> List[Detection]:
    """Query-label detections whose score ranks within top-k at their timestamp."""
    by_ts: Dict[int, List[Detection]] = {}
    for det in state:
        by_ts.setdefault(det.ts_ms, []).append(det)
    keep = []
    for ts, dets in by_ts.items():
        ranked = sorted(dets, key=lambda d: (-d.score, d.label))
        for rank, det in enumerate(ranked, start=1):
            if rank <= q.top_k and det.label in q.objects:
                keep.append(det)
    keep.sort(key=lambda d: (d.ts_ms, d.label))
    return keep


def match(state: Sequence[Detection], q: Query, window_unit: int = 0) -> List[EventMatch]:
    """First-selection, consumed-consumption matching over one window state.

    Single-object queries yield one match on the earliest qualifying
    detection. Conjunctions scan in timestamp order and greedily pair the
    earliest unconsumed detections of the two labels, either order.
    """
    qualifying = _qualifying(state, q)
    if not q.is_conj:
        label = q.labels[0]
        for det in qualifying:
            if det.label == label:
                return [
                    EventMatch(
                        query_labels=q.labels,
                        contributors=(det,),
                        match_ts=det.ts_ms,
                        window_unit=window_unit,
                    )
                ]
        return []

    a_label, b_label = q.labels
    pending: Dict[str, List[Detection]] = {a_label: [], b_label: []}
    matches: List[EventMatch] = []
    for det in qualifying:
        if det.label not in pending:
            continue
        other = b_label if det.label == a_label else a_label
        if det.label == other:
            # CONJ(x, x): pair consecutive occurrences of the same label.
            pending[det.label].append(det)
            if len(pending[det.label]) >= 2:
                first, second = pending[det.label][:2]
                pending[det.label] = pending[det.label][2:]
                matches.append(_pair_match(q, first, second, window_unit))
            continue
        if pending[other]:
            first = pending[other].pop(0)
            matches.append(_pair_match(q, first, det, window_unit))
        else:
            pending[det.label].append(det)
    return matches


def _pair_match(q: Query, first: Detection, second: Detection, window_unit: int) -> EventMatch:
    contributors = tuple(sorted((first, second), key=lambda d: (d.ts_ms, d.label)))
    return EventMatch(
        query_labels=q.labels,
        contributors=contributors,
        match_ts=max(first.ts_ms, second.ts_ms),
        window_unit=window_unit,
    )


# -- spatial mapper -----------------------------------------------------------


@dataclass
class RoiState:
    """Per-label expanding bounding rectangle in normalized [0, 1]^2 coords."""

    rects: Dict[str, Tuple[float, float, float, float]] = field(default_factory=dict)
    observations: Dict[str, int] = field(default_factory=dict)

    def rect(self, label: str) -> Optional[Tuple[float, float, float, float]]:
        return self.rects.get(label)

    def area(self, label: str) -> float:
        r = self.rects.get(label)
        if r is None:
            return 0.0
        return (r[2] - r[0]) * (r[3] - r[1])


def spatial_map_update(
    roi: RoiState,
    detections: Sequence[Detection],
    q: Query,
    frame_width: int,
    frame_height: int,
) -> RoiState:
    """Union each query-object bbox into the per-label ROI rectangle."""
    for det in detections:
        if det.label not in q.objects or det.bbox is None:
            continue
        x, y, w, h = det.bbox
        x0 = max(0.0, min(1.0, x / frame_width))
        y0 = max(0.0, min(1.0, y / frame_height))
        x1 = max(0.0, min(1.0, (x + w) / frame_width))
        y1 = max(0.0, min(1.0, (y + h) / frame_height))
        cur = roi.rects.get(det.label)
        if cur is None:
            roi.rects[det.label] = (x0, y0, x1, y1)
        else:
            roi.rects[det.label] = (
                min(cur[0], x0),
                min(cur[1], y0),
                max(cur[2], x1),
                max(cur[3], y1),
            )
        roi.observations[det.label] = roi.observations.get(det.label, 0) + 1
    return roi


# -- event accuracy ------------------------------------------------------------


def event_accuracy(
    detected_count: int,
    ground_truth_count: int,
    alpha: float = 0.9,
    beta: float = 0.1,
) -> float:
    """Occurrence-weighted accuracy of detected events in one window.

    Occurrence contributes alpha when anything was detected. The extra-event
    recall term (detected-1)/(G-1) contributes up to beta.
    """
    if detected_count < 0 or ground_truth_count < 0:
        raise ValueError("counts must be non-negative")
    if detected_count == 0:
        return 0.0
    eo = 1.0
    if ground_truth_count <= 1:
        ex = 1.0
    else:
        ex = min(1.0, max(0.0, (detected_count - 1) / (ground_truth_count - 1)))
    return alpha * eo + beta * ex
