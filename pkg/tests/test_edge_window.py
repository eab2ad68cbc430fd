import random

import pytest

from alliedwin.core import MicroBatch, Resolution, SplitReason, WindowSpec
from alliedwin.edge_window import EagerFilter, EdgeWindow
from alliedwin.errors import OutOfOrderFrame

from conftest import surrogate_frame


def constant_similarity(value):
    return lambda a, b: value


def feed(window, frames):
    emitted = []
    for frame in frames:
        emitted.extend(window.advance(frame))
    emitted.extend(window.finish())
    return emitted


def make_frames(n, fps, iframes=(), start_ms=0):
    return [
        surrogate_frame(start_ms + i * 1000 // fps, (1.0, 2.0), iframe=(i in iframes))
        for i in range(n)
    ]


class TestSplitting:
    def test_max_size_trace_70_70_60(self):
        # 200 static frames in one unit split as 70 + 70 + 60.
        win = EdgeWindow(WindowSpec(10, 10), fps=30, similarity=constant_similarity(1.0))
        emitted = feed(win, make_frames(200, fps=30))
        sizes = [e.batch.size for e in emitted]
        reasons = [e.batch.split_reason for e in emitted]
        assert sizes == [70, 70, 60]
        assert reasons == [SplitReason.MAX_SIZE, SplitReason.MAX_SIZE, SplitReason.SLIDE_END]

    def test_iframe_closes_batch(self):
        win = EdgeWindow(WindowSpec(10, 10), fps=10, similarity=constant_similarity(1.0))
        emitted = feed(win, make_frames(10, fps=10, iframes={4}))
        assert [e.batch.size for e in emitted] == [4, 6]
        assert emitted[0].batch.split_reason is SplitReason.IFRAME

    def test_similarity_at_threshold_splits(self):
        # The break fires at <= threshold, so exactly 0.98 splits.
        win = EdgeWindow(WindowSpec(10, 10), fps=10, similarity=constant_similarity(0.98))
        emitted = feed(win, make_frames(4, fps=10))
        assert [e.batch.size for e in emitted] == [1, 1, 1, 1]
        assert emitted[0].batch.split_reason is SplitReason.SIMILARITY_BREAK

    def test_similarity_above_threshold_keeps_batching(self):
        win = EdgeWindow(WindowSpec(10, 10), fps=10, similarity=constant_similarity(0.981))
        emitted = feed(win, make_frames(4, fps=10))
        assert [e.batch.size for e in emitted] == [4]

    def test_max_size_precedence_over_iframe(self):
        win = EdgeWindow(
            WindowSpec(10, 10), fps=10, mb_max=3, similarity=constant_similarity(1.0)
        )
        emitted = feed(win, make_frames(4, fps=10, iframes={3}))
        assert emitted[0].batch.split_reason is SplitReason.MAX_SIZE

    def test_similarity_compared_against_batch_reference(self):
        seen = []

        def spy(reference, frame):
            seen.append((reference.ts_ms, frame.ts_ms))
            return 1.0

        win = EdgeWindow(WindowSpec(10, 10), fps=10, similarity=spy)
        feed(win, make_frames(3, fps=10))
        assert seen == [(0, 100), (0, 200)]  # always against the first frame


class TestUnits:
    def test_initial_range_then_slide(self):
        # win(5, 2) at 1 fps: unit 0 covers 5 frames, later units 2 each.
        win = EdgeWindow(WindowSpec(5, 2), fps=1, similarity=constant_similarity(1.0))
        emitted = feed(win, make_frames(9, fps=1))
        assert [(e.unit_id, e.batch.size) for e in emitted] == [(0, 5), (1, 2), (2, 2)]
        assert [e.unit_size_frames for e in emitted] == [5, 2, 2]

    def test_boundary_flushes_even_without_split(self):
        win = EdgeWindow(WindowSpec(3, 3), fps=1, similarity=constant_similarity(1.0))
        frames = make_frames(4, fps=1)
        for f in frames[:3]:
            assert win.advance(f) == []
        emitted = win.advance(frames[3])
        assert len(emitted) == 1
        assert emitted[0].batch.split_reason is SplitReason.SLIDE_END
        assert emitted[0].batch.size == 3

    def test_gap_spanning_multiple_boundaries(self):
        win = EdgeWindow(WindowSpec(2, 2), fps=1, similarity=constant_similarity(1.0))
        win.advance(surrogate_frame(0, (1.0,)))
        emitted = win.advance(surrogate_frame(9000, (1.0,)))
        assert len(emitted) == 1  # empty intermediate units emit nothing
        assert win.unit_id == 4

    def test_slide_boundary_flushes_on_time(self):
        win = EdgeWindow(WindowSpec(2, 2), fps=1, similarity=constant_similarity(1.0))
        win.advance(surrogate_frame(0, (1.0,)))
        assert win.slide_boundary(1999) == []
        emitted = win.slide_boundary(2000)
        assert [e.batch.size for e in emitted] == [1]
        assert win.finish() == []

    def test_created_at_offsets(self):
        win = EdgeWindow(
            WindowSpec(10, 10), fps=10, mb_max=3, similarity=constant_similarity(1.0)
        )
        emitted = feed(win, make_frames(8, fps=10))
        assert [e.batch.created_at for e in emitted] == [0, 3, 6]

    def test_out_of_order_frame(self):
        win = EdgeWindow(WindowSpec(5, 5), fps=10)
        win.advance(surrogate_frame(100, (1.0,)))
        with pytest.raises(OutOfOrderFrame):
            win.advance(surrogate_frame(100, (1.0,)))


class TestCoverageProperty:
    def test_every_frame_lands_in_exactly_one_batch(self):
        # Randomized streams: concatenating emitted batches per unit must
        # reproduce the ingested frames in order, with no duplicates.
        rnd = random.Random(4231)
        for _ in range(120):
            fps = rnd.choice([5, 10, 30])
            spec = WindowSpec(*rnd.choice([(4, 4), (5, 2), (6, 3)]))
            mb_max = rnd.choice([3, 7, 70])
            n = rnd.randrange(1, 90)
            frames = [
                surrogate_frame(
                    i * 1000 // fps + rnd.randrange(0, 3),
                    (1.0,),
                    iframe=rnd.random() < 0.1,
                )
                for i in range(n)
            ]
            frames = [f for i, f in enumerate(frames) if i == 0 or f.ts_ms > frames[i - 1].ts_ms]
            sim = lambda a, b: rnd.choice([1.0, 0.99, 0.5])
            win = EdgeWindow(spec, fps=fps, mb_max=mb_max, similarity=sim)
            emitted = feed(win, frames)
            covered = [f for e in emitted for f in e.batch.frames]
            assert covered == frames
            for e in emitted:
                assert 1 <= e.batch.size <= mb_max
            units = [e.unit_id for e in emitted]
            assert units == sorted(units)


class TestEagerFilter:
    def make_batch(self, size, reason, mb_max=70):
        frames = tuple(surrogate_frame(i * 10, (1.0,)) for i in range(size))
        return MicroBatch(0, frames, Resolution(1920, 1080), reason, 0)

    def test_first_of_run_forwards_rest_drop(self):
        filt = EagerFilter(mb_max=3)
        batches = [self.make_batch(3, SplitReason.MAX_SIZE) for _ in range(5)]
        assert [filt.forward(b) for b in batches] == [True, False, False, False, False]

    def test_non_max_batch_resets_run(self):
        filt = EagerFilter(mb_max=3)
        assert filt.forward(self.make_batch(3, SplitReason.MAX_SIZE))
        assert not filt.forward(self.make_batch(3, SplitReason.MAX_SIZE))
        assert filt.forward(self.make_batch(2, SplitReason.SLIDE_END))
        assert filt.forward(self.make_batch(3, SplitReason.MAX_SIZE))

    def test_everything_else_forwards(self):
        filt = EagerFilter(mb_max=3)
        for reason in (SplitReason.IFRAME, SplitReason.SIMILARITY_BREAK, SplitReason.SLIDE_END):
            assert filt.forward(self.make_batch(2, reason))
