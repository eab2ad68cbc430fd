import pytest

from alliedwin.core import (
    Annotation,
    ClassScore,
    Detection,
    Frame,
    Histogram,
    MicroBatch,
    Query,
    Resolution,
    SplitReason,
    WindowKind,
    WindowSpec,
)
from alliedwin.errors import InvalidWindow


def make_frame(ts=0, width=4, height=4, **kw):
    kw.setdefault("histogram", Histogram(bins=(1.0, 2.0)))
    return Frame(stream_id=0, ts_ms=ts, width=width, height=height, **kw)


class TestFrame:
    def test_requires_payload(self):
        with pytest.raises(ValueError):
            Frame(stream_id=0, ts_ms=0, width=4, height=4)

    def test_pixel_length_checked(self):
        with pytest.raises(ValueError):
            Frame(stream_id=0, ts_ms=0, width=4, height=4, pixels=b"\x00" * 10)
        frame = Frame(stream_id=0, ts_ms=0, width=4, height=4, pixels=b"\x00" * 48)
        assert frame.raw_bytes == 48

    def test_bbox_must_fit(self):
        with pytest.raises(ValueError):
            make_frame(annotations=(Annotation("car", 0.5, bbox=(2, 2, 5, 5)),))
        make_frame(annotations=(Annotation("car", 0.5, bbox=(0, 0, 4, 4)),))


class TestAnnotation:
    def test_score_range(self):
        with pytest.raises(ValueError):
            Annotation("car", 1.2)
        with pytest.raises(ValueError):
            Annotation("car", -0.1)


class TestHistogram:
    def test_rejects_negative_bins(self):
        with pytest.raises(ValueError):
            Histogram(bins=(1.0, -0.5))

    def test_bin_count(self):
        assert Histogram(bins=(0.0,) * 7).bin_count == 7


class TestWindowSpec:
    def test_sampling_window_rejected(self):
        with pytest.raises(InvalidWindow):
            WindowSpec(range_s=2, slide_s=5)

    def test_zero_slide_rejected(self):
        with pytest.raises(InvalidWindow):
            WindowSpec(range_s=5, slide_s=0)

    def test_kind(self):
        assert WindowSpec(5, 5).kind is WindowKind.TUMBLING
        assert WindowSpec(5, 2).kind is WindowKind.SLIDING


class TestMicroBatch:
    def test_needs_frames(self):
        with pytest.raises(ValueError):
            MicroBatch(0, (), Resolution(4, 4), SplitReason.SLIDE_END, 0)

    def test_timestamps_strictly_increase(self):
        frames = (make_frame(ts=0), make_frame(ts=0))
        with pytest.raises(ValueError):
            MicroBatch(0, frames, Resolution(4, 4), SplitReason.SLIDE_END, 0)

    def test_keyframe_is_first(self):
        frames = (make_frame(ts=0), make_frame(ts=33))
        mb = MicroBatch(0, frames, Resolution(4, 4), SplitReason.SLIDE_END, 0)
        assert mb.keyframe is frames[0]
        assert mb.size == 2


class TestQuery:
    def test_objects(self):
        q = Query(labels=("car", "person"), top_k=2, window=WindowSpec(5, 5))
        assert q.is_conj
        assert q.objects == {"car", "person"}

    def test_bounds_flag(self):
        q = Query(labels=("car",), top_k=1, window=WindowSpec(5, 5))
        assert not q.has_bounds
        q = Query(labels=("car",), top_k=1, window=WindowSpec(5, 5), cpu_bound_pct=50)
        assert q.has_bounds

    def test_validation(self):
        with pytest.raises(ValueError):
            Query(labels=(), top_k=1, window=WindowSpec(5, 5))
        with pytest.raises(ValueError):
            Query(labels=("car",), top_k=0, window=WindowSpec(5, 5))


class TestScores:
    def test_class_score_bounds(self):
        with pytest.raises(ValueError):
            ClassScore("car", 1.5, 1)
        with pytest.raises(ValueError):
            ClassScore("car", 0.5, 0)

    def test_detection_bounds(self):
        with pytest.raises(ValueError):
            Detection("car", -0.1, None, 0)


class TestResolution:
    def test_positive(self):
        with pytest.raises(ValueError):
            Resolution(0, 9)

    def test_aspect(self):
        assert Resolution(288, 162).is_16_9()
        assert not Resolution(100, 100).is_16_9()
