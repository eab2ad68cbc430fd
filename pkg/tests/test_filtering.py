import math
import random

import pytest

from alliedwin.core import ClassScore, MicroBatch, Query, Resolution, SplitReason, WindowSpec
from alliedwin.errors import ZeroRemaining
from alliedwin.filtering import (
    PartialMatchCache,
    ResourceMeters,
    cache_filter,
    entropy_combine,
    mb_accuracy,
    mb_rpi,
    mb_utility,
    mb_win_remain,
    resource_filter,
    update_meters,
)

from conftest import surrogate_frame


def make_query(labels=("car",), top_k=2, cpu=None, mem=None):
    return Query(
        labels=tuple(labels),
        top_k=top_k,
        window=WindowSpec(10, 10),
        cpu_bound_pct=cpu,
        mem_bound_pct=mem,
    )


def make_batch(size, start_ms=0):
    frames = tuple(surrogate_frame(start_ms + i * 33, (1.0,)) for i in range(size))
    return MicroBatch(0, frames, Resolution(288, 162), SplitReason.MAX_SIZE, 0)


class TestAccuracy:
    def test_rank_weighted_sum(self):
        scores = (ClassScore("car", 0.4, 1), ClassScore("person", 0.3, 2))
        q = make_query(["car", "person"], top_k=2)
        assert mb_accuracy(scores, q) == pytest.approx(0.55)

    def test_only_query_objects_count(self):
        scores = (ClassScore("dog", 0.9, 1), ClassScore("car", 0.4, 2))
        assert mb_accuracy(scores, make_query(["car"])) == pytest.approx(0.2)

    def test_outside_topk_ignored(self):
        scores = (ClassScore("dog", 0.9, 1), ClassScore("car", 0.4, 2))
        assert mb_accuracy(scores, make_query(["car"], top_k=1)) == 0.0

    def test_no_query_object(self):
        assert mb_accuracy((), make_query(["car"])) == 0.0


class TestPositionSignals:
    def test_rpi_reference_values(self):
        assert mb_rpi(100, 900) == pytest.approx(0.888888888888, abs=1e-9)
        assert mb_rpi(500, 900) == pytest.approx(0.444444444444, abs=1e-9)

    def test_rpi_bounds(self):
        assert mb_rpi(0, 100) == 1.0
        assert mb_rpi(100, 100) == 0.0
        with pytest.raises(ValueError):
            mb_rpi(101, 100)
        with pytest.raises(ValueError):
            mb_rpi(1, 0)

    def test_win_remain(self):
        assert mb_win_remain(10, 200) == pytest.approx(0.95)
        assert mb_win_remain(200, 200) == 0.0
        with pytest.raises(ZeroRemaining):
            mb_win_remain(1, 0)
        with pytest.raises(ValueError):
            mb_win_remain(201, 200)


class TestEntropyCombine:
    def test_adopted_interpretation_value(self):
        # Pair-normalized Shannon entropy of (0.5, 0.20).
        assert entropy_combine(0.5, 0.20) == pytest.approx(0.8631, abs=0.0005)

    def test_equal_inputs_max_out(self):
        for v in (0.1, 0.5, 0.9):
            assert entropy_combine(v, v) == pytest.approx(1.0)

    def test_zero_input_kills_it(self):
        assert entropy_combine(0.0, 0.7) == 0.0
        assert entropy_combine(0.7, 0.0) == 0.0

    def test_symmetry(self):
        assert entropy_combine(0.3, 0.8) == entropy_combine(0.8, 0.3)

    def test_literal_variant(self):
        # Raw weighted-log form kept for comparison; same inputs give 0.290.
        assert entropy_combine(0.5, 0.20, literal=True) == pytest.approx(0.290, abs=0.001)

    def test_range(self):
        rnd = random.Random(5)
        for _ in range(200):
            v = entropy_combine(rnd.random(), rnd.random())
            assert 0.0 <= v <= 1.0


class TestUtility:
    def test_breakdown_fields_in_unit_interval(self):
        rnd = random.Random(31)
        q = make_query(["car"], top_k=3)
        for _ in range(200):
            window = rnd.randrange(10, 400)
            processed = rnd.randrange(0, window)
            size = rnd.randrange(1, window - processed + 1)
            scores = (ClassScore("car", rnd.random(), rnd.randrange(1, 4)),)
            b = mb_utility(scores, q, size, processed, window)
            for value in (b.mb_accuracy, b.omega_t, b.mb_rpi, b.mb_win_remain,
                          b.mb_position_size, b.mb_utility):
                assert 0.0 <= value <= 1.0

    def test_composition_matches_manual(self):
        q = make_query(["car"], top_k=1)
        scores = (ClassScore("car", 0.5, 1),)
        b = mb_utility(scores, q, mb_size=10, frames_processed=100, window_size=900)
        assert b.mb_accuracy == 0.5
        assert b.mb_rpi == pytest.approx(1 - 100 / 900)
        assert b.mb_win_remain == pytest.approx(1 - 10 / 800)
        assert b.mb_position_size == pytest.approx(
            entropy_combine(b.mb_rpi, b.mb_win_remain)
        )
        assert b.mb_utility == pytest.approx(
            entropy_combine(0.5, b.mb_position_size)
        )

    def test_accuracy_clamped_to_one(self):
        q = make_query(["car", "person"], top_k=2)
        scores = (ClassScore("car", 0.9, 1), ClassScore("person", 0.8, 2))
        b = mb_utility(scores, q, 5, 0, 100)
        assert b.mb_accuracy == 1.0


class TestCacheFilter:
    def test_forward_drop_forward_sequence(self):
        q = make_query(["car"], top_k=2)
        cache = PartialMatchCache()
        mb = make_batch(3)
        assert cache_filter(mb, (ClassScore("car", 0.4, 1),), cache, q)
        assert not cache_filter(mb, (ClassScore("car", 0.35, 1),), cache, q)
        assert cache_filter(mb, (ClassScore("car", 0.5, 1),), cache, q)
        assert cache.snapshot() == {"car": 0.5}

    def test_equal_score_drops(self):
        q = make_query(["car"])
        cache = PartialMatchCache()
        mb = make_batch(2)
        assert cache_filter(mb, (ClassScore("car", 0.4, 1),), cache, q)
        assert not cache_filter(mb, (ClassScore("car", 0.4, 1),), cache, q)

    def test_no_query_object_drops(self):
        q = make_query(["car"])
        cache = PartialMatchCache()
        assert not cache_filter(make_batch(2), (ClassScore("dog", 0.9, 1),), cache, q)
        assert cache.snapshot() == {}

    def test_partial_improvement_updates_only_improved_slot(self):
        q = make_query(["car", "person"], top_k=3)
        cache = PartialMatchCache()
        mb = make_batch(2)
        cache_filter(mb, (ClassScore("car", 0.6, 1), ClassScore("person", 0.3, 2)), cache, q)
        assert cache_filter(
            mb, (ClassScore("car", 0.5, 1), ClassScore("person", 0.4, 2)), cache, q
        )
        assert cache.snapshot() == {"car": 0.6, "person": 0.4}

    def test_reset_clears_window_state(self):
        q = make_query(["car"])
        cache = PartialMatchCache()
        cache_filter(make_batch(1), (ClassScore("car", 0.9, 1),), cache, q)
        cache.reset()
        assert cache_filter(make_batch(1), (ClassScore("car", 0.1, 1),), cache, q)

    def test_matches_replay_oracle(self):
        # Oracle: forward iff some query label beats the running max over
        # scores of previously forwarded batches (absent counts as improvable).
        rnd = random.Random(77)
        q = make_query(["car", "person"], top_k=4)
        for _ in range(300):
            cache = PartialMatchCache()
            best = {}
            for _ in range(rnd.randrange(1, 12)):
                labels = rnd.sample(["car", "person", "dog", "cat"], rnd.randrange(0, 4))
                scores = tuple(
                    ClassScore(l, round(rnd.random(), 2), i + 1)
                    for i, l in enumerate(labels)
                )
                got = cache_filter(make_batch(1), scores, cache, q)
                present = {s.label: s.score for s in scores if s.label in q.objects}
                want = any(
                    label not in best or score > best[label]
                    for label, score in present.items()
                )
                if want:
                    for label, score in present.items():
                        if label not in best or score > best[label]:
                            best[label] = score
                assert got == want


class TestMeters:
    def test_memory_utilization(self):
        meters = ResourceMeters(mem_capacity_bytes=2_000_000_000, cpu_capacity_ms=1000)
        meters.enqueue(47_000_000)
        assert meters.mem_util() == pytest.approx(0.0235)
        meters.dequeue(47_000_000)
        assert meters.mem_util() == 0.0

    def test_memory_capped_at_one(self):
        meters = ResourceMeters(mem_capacity_bytes=100, cpu_capacity_ms=1000)
        meters.enqueue(500)
        assert meters.mem_util() == 1.0

    def test_cpu_rolling_window(self):
        meters = ResourceMeters(mem_capacity_bytes=100, cpu_capacity_ms=1000)
        meters.add_cpu(0, 500)
        assert meters.cpu_util(0) == 0.5
        assert meters.cpu_util(999) == 0.5
        assert meters.cpu_util(1000) == 0.0  # expired out of the window

    def test_remove_cpu_undoes_latest_work(self):
        meters = ResourceMeters(mem_capacity_bytes=100, cpu_capacity_ms=1000)
        meters.add_cpu(0, 300)
        meters.add_cpu(10, 200)
        meters.remove_cpu(250)
        assert meters.cpu_util(10) == pytest.approx(0.25)

    def test_update_meters_helper(self):
        meters = ResourceMeters(mem_capacity_bytes=1000, cpu_capacity_ms=1000)
        update_meters(meters, 0, enqueue_bytes=500, stage_cost_ms=100)
        assert meters.mem_util() == 0.5
        assert meters.cpu_util(0) == pytest.approx(0.1)


def over_budget_meters():
    meters = ResourceMeters(mem_capacity_bytes=1000, cpu_capacity_ms=1000)
    meters.enqueue(900)
    meters.add_cpu(0, 900)
    return meters


class TestResourceFilter:
    def breakdown(self, utility):
        from alliedwin.filtering import UtilityBreakdown

        return UtilityBreakdown(
            mb_accuracy=utility,
            omega_t=0.0,
            mb_rpi=1.0,
            mb_win_remain=1.0,
            mb_position_size=1.0,
            mb_utility=utility,
        )

    def test_no_bounds_passes_through(self):
        mb = make_batch(10)
        q = make_query(["car"])
        out = resource_filter(mb, self.breakdown(0.1), q, over_budget_meters(), 0, 10)
        assert out is mb

    def test_either_resource_under_bound_passes(self):
        mb = make_batch(10)
        meters = ResourceMeters(mem_capacity_bytes=1000, cpu_capacity_ms=1000)
        meters.enqueue(400)  # mem 0.4, under
        meters.add_cpu(0, 900)  # cpu 0.9, over
        q = make_query(["car"], cpu=50, mem=50)
        out = resource_filter(mb, self.breakdown(0.1), q, meters, 0, 10)
        assert out is mb

    def test_drops_tail_until_under_bounds(self):
        mb = make_batch(10)
        meters = ResourceMeters(mem_capacity_bytes=1000, cpu_capacity_ms=1000)
        meters.enqueue(900)
        meters.add_cpu(0, 900)
        q = make_query(["car"], cpu=85, mem=85)
        out = resource_filter(mb, self.breakdown(0.2), q, meters, 0, 50, 50)
        # Each popped frame releases 50 bytes and 50 ms; one pop suffices.
        assert out.size == 9
        assert out.frames == mb.frames[:9]
        assert meters.mem_util() <= 0.85
        assert meters.cpu_util(0) <= 0.85

    def test_keeps_at_least_utility_fraction(self):
        mb = make_batch(50)
        q = make_query(["car"], cpu=10, mem=10)
        out = resource_filter(mb, self.breakdown(0.86), q, over_budget_meters(), 0, 0, 0.0)
        assert out.size == math.ceil(0.86 * 50)  # 43: floor reached, stop

    def test_utility_one_keeps_everything(self):
        mb = make_batch(10)
        q = make_query(["car"], cpu=10, mem=10)
        out = resource_filter(mb, self.breakdown(1.0), q, over_budget_meters(), 0, 0)
        assert out is mb

    def test_keyframe_never_dropped(self):
        mb = make_batch(5)
        q = make_query(["car"], cpu=1, mem=1)
        out = resource_filter(mb, self.breakdown(0.0), q, over_budget_meters(), 0, 0)
        assert out.size >= 1
        assert out.frames[0] is mb.frames[0]

    def test_floor_property_randomized(self):
        rnd = random.Random(2718)
        for _ in range(300):
            size = rnd.randrange(1, 80)
            utility = rnd.random()
            mb = make_batch(size)
            q = make_query(["car"], cpu=rnd.uniform(1, 60), mem=rnd.uniform(1, 60))
            meters = ResourceMeters(mem_capacity_bytes=1000, cpu_capacity_ms=1000)
            meters.enqueue(rnd.randrange(0, 1200))
            meters.add_cpu(0, rnd.uniform(0, 1200))
            out = resource_filter(
                mb, self.breakdown(utility), q, meters, 0,
                rnd.randrange(0, 30), rnd.uniform(0, 30),
            )
            assert out.size >= max(1, math.ceil(utility * size))
            assert out.frames == mb.frames[: out.size]
