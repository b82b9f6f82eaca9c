import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gazeinspect import (
    DispersionConfig,
    DispersionSegmenter,
    FixationEvent,
    GazeSample,
    NonMonotonicTimestamp,
    SaccadeEvent,
    dispersion_diameter,
)

from conftest import PERIOD_US, cluster, make_sample


class TestDispersionDiameter:
    def test_zero_distance(self):
        assert dispersion_diameter(0.0, 2.86) == 0.0

    def test_one_meter(self):
        # oracle: 2 * d * tan(angle/2), evaluated independently
        expected = 2.0 * 1.0 * math.tan(math.radians(2.86) / 2.0)
        assert expected == pytest.approx(0.0499268, abs=1e-6)
        assert dispersion_diameter(1.0, 2.86) == pytest.approx(expected, abs=1e-12)

    def test_five_and_a_half_meters(self):
        expected = 2.0 * 5.5 * math.tan(math.radians(2.86) / 2.0)
        assert expected == pytest.approx(0.2745973, abs=1e-6)
        assert dispersion_diameter(5.5, 2.86) == pytest.approx(expected, abs=1e-12)

    def test_monotone_in_both_arguments(self):
        assert dispersion_diameter(2.0, 2.86) > dispersion_diameter(1.0, 2.86)
        assert dispersion_diameter(1.0, 3.0) > dispersion_diameter(1.0, 2.86)

    @pytest.mark.parametrize("angle", [0.0, -1.0, 180.0, 270.0])
    def test_angle_domain(self, angle):
        with pytest.raises(ValueError):
            dispersion_diameter(1.0, angle)

    def test_negative_distance(self):
        with pytest.raises(ValueError):
            dispersion_diameter(-0.1, 2.86)


class TestGazeSample:
    def test_non_unit_normal_rejected(self):
        with pytest.raises(ValueError):
            make_sample(0, (0, 0, 2), normal=(0, 0, 2))

    def test_hit_equal_origin_rejected(self):
        with pytest.raises(ValueError):
            GazeSample(t_us=0, origin=(1, 2, 3), hit=(1, 2, 3), normal=(0, 0, 1))


class TestIngest:
    def test_first_sample_emits_nothing(self):
        seg = DispersionSegmenter()
        assert seg.ingest(make_sample(0, (0, 0, 2))) == []

    def test_eight_samples_then_break_gives_fixation(self):
        seg = DispersionSegmenter()
        events = []
        for s in cluster((0.0, 0.0, 2.0), 8):
            events += seg.ingest(s)
        assert events == []
        events = seg.ingest(make_sample(8 * PERIOD_US, (1.0, 1.0, 2.0)))
        assert len(events) == 1
        (fix,) = events
        assert isinstance(fix, FixationEvent)
        assert fix.sample_count == 8
        assert fix.centroid == (0.0, 0.0, 2.0)
        # event spans up to the breaking sample: 8 periods at 60 Hz ~ 133 ms
        assert fix.duration_ms == pytest.approx(133.3, abs=0.5)

    def test_seven_samples_then_break_gives_saccade(self):
        seg = DispersionSegmenter()
        events = []
        for s in cluster((0.0, 0.0, 2.0), 7):
            events += seg.ingest(s)
        events += seg.ingest(make_sample(7 * PERIOD_US, (1.0, 1.0, 2.0)))
        assert len(events) == 1
        (sac,) = events
        assert isinstance(sac, SaccadeEvent)
        assert sac.sample_count == 7

    def test_at_most_one_event_per_call(self):
        seg = DispersionSegmenter()
        stream = cluster((0, 0, 2), 10) + cluster((1, 1, 2), 10, t0_us=10 * PERIOD_US)
        per_call = [len(seg.ingest(s)) for s in stream]
        assert max(per_call) <= 1

    def test_non_monotonic_rejected_and_state_intact(self):
        seg = DispersionSegmenter()
        for s in cluster((0, 0, 2), 5):
            seg.ingest(s)
        with pytest.raises(NonMonotonicTimestamp):
            seg.ingest(make_sample(2 * PERIOD_US, (0, 0, 2)))
        # stream continues as if the bad sample never arrived
        for s in cluster((0, 0, 2), 3, t0_us=5 * PERIOD_US):
            seg.ingest(s)
        events = seg.flush()
        assert len(events) == 1
        assert events[0].sample_count == 8

    def test_threshold_membership_flip(self):
        # hits on a sphere of radius 2 around the origin keep the mean gaze
        # distance fixed, so the dispersion radius is stable at ~0.05 m
        radius = dispersion_diameter(2.0, 2.86) / 2.0

        def second_point(offset):
            # stay on the |hit| = 2 sphere while moving `offset` sideways
            x = offset
            z = math.sqrt(4.0 - x * x)
            return (x, 0.0, z)

        inside = DispersionSegmenter()
        inside.ingest(make_sample(0, (0, 0, 2)))
        assert inside.ingest(make_sample(PERIOD_US, second_point(0.99 * radius))) == []

        outside = DispersionSegmenter()
        outside.ingest(make_sample(0, (0, 0, 2)))
        events = outside.ingest(make_sample(PERIOD_US, second_point(1.01 * radius)))
        assert len(events) == 1
        assert isinstance(events[0], SaccadeEvent)
        assert events[0].sample_count == 1


class TestFlush:
    def test_pending_ten_gives_fixation(self):
        seg = DispersionSegmenter()
        for s in cluster((0, 0, 2), 10):
            seg.ingest(s)
        events = seg.flush()
        assert len(events) == 1
        assert isinstance(events[0], FixationEvent)
        assert events[0].sample_count == 10
        # flush closes at the last member timestamp
        assert events[0].end_t_us == 9 * PERIOD_US

    def test_pending_three_gives_saccade(self):
        seg = DispersionSegmenter()
        for s in cluster((0, 0, 2), 3):
            seg.ingest(s)
        events = seg.flush()
        assert len(events) == 1
        assert isinstance(events[0], SaccadeEvent)

    def test_empty_flush(self):
        assert DispersionSegmenter().flush() == []

    def test_flush_resets(self):
        seg = DispersionSegmenter()
        for s in cluster((0, 0, 2), 10):
            seg.ingest(s)
        seg.flush()
        assert seg.flush() == []


def _run_stream(stream):
    seg = DispersionSegmenter()
    events = []
    for s in stream:
        events += seg.ingest(s)
    events += seg.flush()
    return events


class TestInvariants:
    def test_sample_partition(self, rng):
        # random walk of clusters with occasional strays
        stream = []
        t = 0
        total = 0
        for _ in range(30):
            n = int(rng.integers(1, 15))
            center = rng.uniform(-3, 3, 3) + np.array([0, 0, 5.0])
            stream += cluster(tuple(center), n, t0_us=t, jitter_m=0.002, rng=rng)
            t += n * PERIOD_US
            total += n
        events = _run_stream(stream)
        assert sum(e.sample_count for e in events) == total

    def test_dispersion_soundness(self, rng):
        # members of a fixation stay within 1.25x the sphere radius of its centroid
        stream = []
        t = 0
        member_map = []
        for _ in range(15):
            n = int(rng.integers(8, 25))
            center = np.array([rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(1.5, 4)])
            block = cluster(tuple(center), n, t0_us=t, jitter_m=0.004, rng=rng)
            stream += block
            member_map.append(block)
            t += n * PERIOD_US

        seg = DispersionSegmenter()
        events = []
        current: list[GazeSample] = []
        groups: list[list[GazeSample]] = []
        for s in stream:
            out = seg.ingest(s)
            if out:
                groups.append(current)
                current = []
                events += out
            current.append(s)
        events += seg.flush()
        groups.append(current)

        for event, members in zip(events, groups):
            if not isinstance(event, FixationEvent):
                continue
            dist = np.mean([m.gaze_distance for m in members])
            radius = dispersion_diameter(dist, 2.86) / 2.0
            worst = max(math.dist(m.hit, event.centroid) for m in members)
            assert worst <= 1.25 * radius

    def test_determinism(self, rng):
        stream = []
        t = 0
        for _ in range(20):
            n = int(rng.integers(1, 20))
            stream += cluster(
                tuple(rng.uniform(-2, 2, 3) + [0, 0, 4]), n, t0_us=t, jitter_m=0.003, rng=rng
            )
            t += n * PERIOD_US
        assert _run_stream(stream) == _run_stream(stream)

    def test_time_ordering(self, rng):
        stream = []
        t = 0
        for _ in range(25):
            n = int(rng.integers(1, 16))
            stream += cluster(tuple(rng.uniform(-2, 2, 3) + [0, 0, 4]), n, t0_us=t)
            t += n * PERIOD_US
        events = _run_stream(stream)
        for a, b in zip(events, events[1:]):
            assert a.start_t_us < b.start_t_us
            assert a.end_t_us <= b.start_t_us  # no overlap

    @settings(max_examples=60, deadline=None)
    @given(
        counts=st.lists(st.integers(min_value=1, max_value=20), min_size=1, max_size=12),
        seed=st.integers(min_value=0, max_value=2**31),
    )
    def test_partition_property(self, counts, seed):
        # clusters far apart (5 m steps) always break the sphere
        gen = np.random.default_rng(seed)
        stream = []
        t = 0
        x = 0.0
        for n in counts:
            center = (x, float(gen.uniform(-1, 1)), 10.0)
            stream += cluster(center, n, t0_us=t)
            t += n * PERIOD_US
            x += 5.0
        events = _run_stream(stream)
        assert sum(e.sample_count for e in events) == sum(counts)
        assert [e.sample_count for e in events] == counts
        min_fix = DispersionConfig().min_fixation_samples
        for e, n in zip(events, counts):
            assert isinstance(e, FixationEvent if n >= min_fix else SaccadeEvent)


class TestMeanNormal:
    def test_mean_normal_renormalized(self):
        seg = DispersionSegmenter()
        t = 0
        normals = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0)]
        for i in range(8):
            seg.ingest(make_sample(t, (0, 0, 2), normal=normals[i % 2]))
            t += PERIOD_US
        (fix,) = seg.flush()
        expected = 1.0 / math.sqrt(2.0)
        assert fix.mean_normal == pytest.approx((expected, expected, 0.0), abs=1e-12)

    def test_antipodal_normals_fall_back_to_last(self):
        seg = DispersionSegmenter()
        t = 0
        normals = [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
        for i in range(8):
            seg.ingest(make_sample(t, (0, 0, 2), normal=normals[i % 2]))
            t += PERIOD_US
        (fix,) = seg.flush()
        assert fix.mean_normal == (0.0, 0.0, -1.0)
