import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from models.generators import equally_spaced, uniform_points
from models.highway import GapSequence, assign_ranges, broadcast_intervals, from_gaps, mirror, transform
from models.interference import (
    InterferenceProfile,
    compute_profile,
    interference_fast,
    interference_naive,
    left_interference,
    max_interference,
    max_short_range_left_interference,
    right_interference,
    short_range_left_interference,
    short_range_left_interference_at,
)
from tests.conftest import dyadic_point_sets, points

FRAME_GAPS = GapSequence([1.5, 0.6, 0.2])


class TestProfiles:
    @pytest.mark.parametrize("engine", [interference_naive, interference_fast])
    def test_three_points(self, engine, three_points):
        profile = engine(three_points)
        assert profile.counts.tolist() == [1, 2, 1]
        assert profile.max == 2
        assert profile.argmax == 1

    @pytest.mark.parametrize("engine", [interference_naive, interference_fast])
    def test_two_points(self, engine):
        assert engine(points(0.0, 1.0)).counts.tolist() == [1, 1]

    @pytest.mark.parametrize("engine", [interference_naive, interference_fast])
    def test_chain(self, engine, chain_four):
        profile = engine(chain_four)
        assert profile.counts.tolist() == [2, 2, 2, 1]
        assert profile.argmax == 0

    @pytest.mark.parametrize("engine", [interference_naive, interference_fast])
    def test_needs_two_points(self, engine):
        with pytest.raises(ValueError, match="at least 2"):
            engine(points(0.5))

    def test_max_interference(self, three_points):
        assert max_interference(three_points) == 2
        assert max_interference(points(0.0, 1.0)) == 1
        assert max_interference(equally_spaced(10)) == 2

    def test_compute_profile_dispatch(self, three_points):
        assert compute_profile(three_points, "naive").counts.tolist() == [1, 2, 1]
        with pytest.raises(ValueError, match="Unknown algorithm"):
            compute_profile(three_points, "quantum")

    def test_to_dict(self, three_points):
        data = interference_fast(three_points).to_dict()
        assert data == {"positions": [0.0, 0.5, 1.0], "counts": [1, 2, 1], "max": 2, "argmax": 1}

    def test_profile_is_read_only(self, three_points):
        profile = interference_fast(three_points)
        assert isinstance(profile, InterferenceProfile)
        with pytest.raises(ValueError):
            profile.counts[0] = 5


class TestOracleEquivalence:
    @given(dyadic_point_sets(max_size=300))
    @settings(max_examples=200)
    def test_fast_matches_naive_on_dyadic(self, p):
        assert interference_fast(p).counts.tolist() == interference_naive(p).counts.tolist()

    @given(n=st.integers(min_value=2, max_value=2048), trial=st.integers(min_value=0, max_value=10 ** 6))
    @settings(max_examples=40, deadline=None)
    def test_fast_matches_naive_on_uniform(self, n, trial):
        p = uniform_points(n, trial)
        fast = interference_fast(p)
        naive = interference_naive(p)
        assert np.array_equal(fast.counts, naive.counts)
        assert (fast.max, fast.argmax) == (naive.max, naive.argmax)


class TestInvariants:
    @given(dyadic_point_sets())
    def test_counts_within_floor_and_ceiling(self, p):
        counts = interference_fast(p).counts
        assert counts.min() >= 1
        assert counts.max() <= p.n - 1

    @given(dyadic_point_sets())
    def test_mirror_reverses_profile(self, p):
        assert interference_fast(mirror(p)).counts.tolist() == interference_fast(p).counts[::-1].tolist()

    @given(dyadic_point_sets(), st.integers(min_value=-6, max_value=6), st.integers(-4096, 4096))
    def test_scale_and_translate_invariance(self, p, exponent, ticks):
        image = transform(p, scale=2.0 ** exponent, shift=ticks / 64)
        assert interference_fast(image).counts.tolist() == interference_fast(p).counts.tolist()

    @given(dyadic_point_sets())
    def test_left_plus_right_is_total(self, p):
        left = left_interference(p).counts
        right = right_interference(p).counts
        assert (left + right).tolist() == interference_fast(p).counts.tolist()

    @given(dyadic_point_sets())
    def test_sum_identity(self, p):
        intervals = broadcast_intervals(p, assign_ranges(p))
        inside = [
            int(np.count_nonzero((intervals.lo[j] <= p.positions) & (p.positions <= intervals.hi[j])))
            for j in range(p.n)
        ]
        assert int(interference_fast(p).counts.sum()) == sum(c - 1 for c in inside)

    @given(dyadic_point_sets(min_size=3), st.floats(min_value=1e-3, max_value=10.0))
    def test_short_range_dominated_by_left(self, p, threshold):
        g = GapSequence(np.diff(p.positions), anchor=p.positions[0])
        rebuilt_left = left_interference(from_gaps(g)).counts
        short = short_range_left_interference(g, threshold).counts
        assert np.all(short <= rebuilt_left)
        wide = short_range_left_interference(g, float(g.gaps.max())).counts
        assert wide.tolist() == rebuilt_left.tolist()


class TestSidedProfiles:
    def test_left_counts(self, three_points, chain_four):
        assert left_interference(three_points).counts.tolist() == [0, 1, 1]
        assert left_interference(chain_four).counts.tolist() == [0, 1, 1, 1]
        assert left_interference(points(0.0, 1.0)).counts.tolist() == [0, 1]

    def test_right_counts(self, three_points):
        profile = right_interference(three_points)
        assert profile.side == "right"
        assert profile.counts.tolist() == [1, 1, 0]

    def test_short_range_excludes_far_contributor(self):
        # x_1 = 1.5 has left gap 1.5 > 1 and is the only left contributor of x_2
        assert short_range_left_interference(FRAME_GAPS, 1.0).counts.tolist() == [0, 0, 1]

    def test_short_range_with_large_threshold(self):
        profile = short_range_left_interference(FRAME_GAPS, 2.0)
        assert profile.counts.tolist() == [0, 1, 1]
        assert profile.threshold == 2.0

    def test_short_range_with_tiny_threshold(self):
        assert short_range_left_interference(FRAME_GAPS, 0.1).counts.tolist() == [0, 0, 0]

    def test_short_range_preconditions(self):
        with pytest.raises(ValueError, match="at least 2 gaps"):
            short_range_left_interference(GapSequence([1.0]), 1.0)
        with pytest.raises(ValueError, match="threshold"):
            short_range_left_interference(FRAME_GAPS, 0.0)

    def test_short_range_at_arbitrary_point(self):
        gaps = GapSequence([0.5, 0.25, 0.125])
        # sensors 0.5, 0.75, 0.875 with intervals reaching 0.75, 1.0, 1.0
        assert short_range_left_interference_at(gaps, 0.8, 1.0) == 1
        assert short_range_left_interference_at(gaps, 0.75, 1.0) == 1
        assert short_range_left_interference_at(gaps, 0.9, 1.0) == 2
        assert short_range_left_interference_at(gaps, 1.5, 1.0) == 0

    def test_max_over_line_dominates_sensor_counts(self):
        gaps = GapSequence([0.5, 0.25, 0.125])
        assert max_short_range_left_interference(gaps, 1.0) == 2
        assert max_short_range_left_interference(gaps, 0.1) == 0

    @given(dyadic_point_sets(min_size=3), st.sampled_from([0.25, 1.0, 4.0]))
    @settings(max_examples=100)
    def test_max_over_line_equals_brute_force(self, p, threshold):
        g = GapSequence(np.diff(p.positions), anchor=p.positions[0] - 1.0)
        sensors = from_gaps(g)
        intervals = broadcast_intervals(sensors, assign_ranges(sensors))
        # the count only changes at sensors and at right interval ends
        candidates = np.concatenate([sensors.positions, intervals.hi])
        brute = max(short_range_left_interference_at(g, float(x), threshold) for x in candidates)
        assert max_short_range_left_interference(g, threshold) == brute
        per_sensor = short_range_left_interference(g, threshold).counts
        assert brute >= int(per_sensor.max())
