"""Query-aware keyframe resolution selection and whole-batch resizing."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

from .core import Annotation, ClassScore, Frame, MicroBatch, Query, Resolution

DEFAULT_CANDIDATES: Tuple[Resolution, ...] = (
    Resolution(288, 162),
    Resolution(320, 180),
    Resolution(480, 270),
    Resolution(640, 360),
    Resolution(960, 540),
)

GUARD_THRESHOLD = 0.45

# Callable taking (keyframe, resolution) and returning ranked scores.
ScoreSource = Callable[[Frame, Resolution], Tuple[ClassScore, ...]]


def validate_candidates(candidates: Sequence[Resolution]) -> Tuple[Resolution, ...]:
    if not candidates:
        raise ValueError("candidate resolution set is empty")
    pixels = [r.pixel_count for r in candidates]
    if any(b <= a for a, b in zip(pixels, pixels[1:])):
        raise ValueError("candidates must be strictly ascending by pixel count")
    for r in candidates:
        if not r.is_16_9():
            raise ValueError(f"candidate {r.width}x{r.height} is not 16:9")
    return tuple(candidates)


def multi_object_guard(scores: Sequence[ClassScore], q: Query) -> bool:
    """Skew check for multi-object queries over the top-k query objects.

    The query-object scores inside the top-k must sum to at least 0.45 and
    each consecutive ratio (next rank over previous) must stay >= 0.45.
    """
    in_topk = sorted(
        (s for s in scores if s.label in q.objects and s.rank <= q.top_k),
        key=lambda s: s.rank,
    )
    if not in_topk:
        return False
    if sum(s.score for s in in_topk) < GUARD_THRESHOLD:
        return False
    for prev, nxt in zip(in_topk, in_topk[1:]):
        if prev.score <= 0.0:
            return False
        if nxt.score / prev.score < GUARD_THRESHOLD:
            return False
    return True


class ResolutionSelector:
    """Chooses the minimal candidate resolution that keeps all detectable
    query objects within the query's top-k (with the skew guard for
    multi-object queries).

    Probing is seeded from the previous keyframe's resolution when that
    resolution sits in the lower half of the candidate set; otherwise the
    binary search restarts. Under a score source that is monotone in pixel
    count, the result always equals the linear-scan minimum.
    """

    def __init__(
        self,
        score_source: ScoreSource,
        candidates: Sequence[Resolution] = DEFAULT_CANDIDATES,
    ):
        self.score_source = score_source
        self.candidates = validate_candidates(candidates)
        self._prev_index: Optional[int] = None
        self.probe_count = 0

    def select_resolution(self, keyframe: Frame, q: Query) -> Resolution:
        n = len(self.candidates)
        satisfies = self._satisfier(keyframe, q)

        if not satisfies(n - 1):
            # No query object detectable even at the largest candidate:
            # ship the smallest, the batch is unlikely to matter.
            self._prev_index = 0
            return self.candidates[0]

        if self._prev_index is None or self._prev_index >= (n + 1) // 2:
            idx = self._binary_search_min(satisfies, n)
        else:
            idx = self._prev_index
            if satisfies(idx):
                while idx > 0 and satisfies(idx - 1):
                    idx -= 1
            else:
                while not satisfies(idx):
                    idx += 1
        self._prev_index = idx
        return self.candidates[idx]

    # -- internals ----------------------------------------------------------

    def _satisfier(self, keyframe: Frame, q: Query):
        cache = {}

        def satisfies(i: int) -> bool:
            if i not in cache:
                cache[i] = self._satisfies_at(keyframe, q, i)
            return cache[i]

        return satisfies

    def _satisfies_at(self, keyframe: Frame, q: Query, i: int) -> bool:
        self.probe_count += 1
        scores = self.score_source(keyframe, self.candidates[i])
        by_label = {s.label: s for s in scores}
        present = [label for label in q.objects if label in by_label]
        if not present:
            return False
        for label in present:
            if by_label[label].rank > q.top_k:
                return False
        if len(present) >= 2 and not multi_object_guard(scores, q):
            return False
        return True

    @staticmethod
    def _binary_search_min(satisfies, n: int) -> int:
        lo, hi = 0, n - 1  # hi is known-satisfying
        while lo < hi:
            mid = (lo + hi) // 2
            if satisfies(mid):
                hi = mid
            else:
                lo = mid + 1
        return lo


def resize_frame(frame: Frame, res: Resolution) -> Frame:
    """Aspect-preserving bilinear resize of one frame; bboxes scale along."""
    if frame.width == res.width and frame.height == res.height:
        return frame
    sx = res.width / frame.width
    sy = res.height / frame.height
    pixels = frame.pixels
    if pixels is not None:
        import cv2
        import numpy as np

        img = np.frombuffer(pixels, dtype=np.uint8).reshape(frame.height, frame.width, 3)
        resized = cv2.resize(img, (res.width, res.height), interpolation=cv2.INTER_LINEAR)
        pixels = resized.tobytes()
    annotations = tuple(
        replace(
            ann,
            bbox=None
            if ann.bbox is None
            else (ann.bbox[0] * sx, ann.bbox[1] * sy, ann.bbox[2] * sx, ann.bbox[3] * sy),
        )
        for ann in frame.annotations
    )
    return replace(
        frame,
        width=res.width,
        height=res.height,
        pixels=pixels,
        annotations=annotations,
    )


def crop_frame(frame: Frame, rect: Tuple[float, float, float, float]) -> Frame:
    """Crop a pixel frame to a normalized (x0, y0, x1, y1) rectangle.

    Annotations fully outside the crop are dropped; the rest are clipped.
    Surrogate frames pass through unchanged (nothing to crop).
    """
    if frame.pixels is None:
        return frame
    import numpy as np

    x0 = max(0, int(rect[0] * frame.width))
    y0 = max(0, int(rect[1] * frame.height))
    x1 = min(frame.width, max(x0 + 1, int(round(rect[2] * frame.width))))
    y1 = min(frame.height, max(y0 + 1, int(round(rect[3] * frame.height))))
    img = np.frombuffer(frame.pixels, dtype=np.uint8).reshape(frame.height, frame.width, 3)
    cropped = img[y0:y1, x0:x1].copy()

    annotations: List[Annotation] = []
    for ann in frame.annotations:
        if ann.bbox is None:
            annotations.append(ann)
            continue
        bx0, by0 = ann.bbox[0], ann.bbox[1]
        bx1, by1 = bx0 + ann.bbox[2], by0 + ann.bbox[3]
        cx0, cy0 = max(bx0, x0), max(by0, y0)
        cx1, cy1 = min(bx1, x1), min(by1, y1)
        if cx0 >= cx1 or cy0 >= cy1:
            continue
        annotations.append(
            replace(ann, bbox=(cx0 - x0, cy0 - y0, cx1 - cx0, cy1 - cy0))
        )
    return replace(
        frame,
        width=x1 - x0,
        height=y1 - y0,
        pixels=cropped.tobytes(),
        annotations=tuple(annotations),
    )


def crop_batch(mb: MicroBatch, rect: Tuple[float, float, float, float]) -> MicroBatch:
    """Crop every pixel frame of a batch to the same normalized rectangle."""
    frames = tuple(crop_frame(f, rect) for f in mb.frames)
    if frames == mb.frames:
        return mb
    return replace(
        mb,
        frames=frames,
        resolution=Resolution(frames[0].width, frames[0].height),
    )


def resize_batch(mb: MicroBatch, res: Resolution) -> MicroBatch:
    """Resize every frame of a batch; identity when already at res."""
    if mb.resolution == res:
        return mb
    return replace(
        mb,
        frames=tuple(resize_frame(f, res) for f in mb.frames),
        resolution=res,
    )
