from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from models.highway import (
    DuplicatePointError,
    GapSequence,
    PointSet,
    assign_ranges,
    broadcast_intervals,
    closure_points,
    from_gaps,
    gaps,
    mirror,
    sort_and_validate,
    transform,
)
from tests.conftest import dyadic_point_sets, points


class TestSortAndValidate:
    def test_sorts_input(self):
        assert sort_and_validate([0.5, 0.0, 1.0]).tolist() == [0.0, 0.5, 1.0]

    def test_empty_input(self):
        p = sort_and_validate([])
        assert p.n == 0

    def test_duplicate_reports_index(self):
        with pytest.raises(DuplicatePointError) as err:
            sort_and_validate([0.3, 0.3])
        assert err.value.index == 1

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError, match="Non-finite"):
            sort_and_validate([0.1, float("nan")])
        with pytest.raises(ValueError):
            sort_and_validate([float("inf")])

    def test_point_set_rejects_unsorted(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            PointSet(np.array([0.0, 1.0, 0.5]))

    def test_point_set_is_read_only(self, three_points):
        with pytest.raises(ValueError):
            three_points.positions[0] = 7.0


class TestGaps:
    def test_gaps_of_three_points(self, three_points):
        g = gaps(three_points)
        assert g.anchor == 0.0
        assert g.gaps.tolist() == [0.5, 0.5]

    def test_gaps_of_chain(self, chain_four):
        g = gaps(chain_four)
        assert g.anchor == 0.125
        assert g.gaps.tolist() == [0.125, 0.25, 0.5]

    def test_single_point(self):
        g = gaps(points(0.2))
        assert g.anchor == 0.2
        assert len(g) == 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            gaps(PointSet(np.empty(0)))

    def test_from_gaps_prefix_sums(self):
        assert from_gaps(GapSequence([0.5, 0.5, 0.5])).tolist() == [0.5, 1.0, 1.5]
        assert from_gaps(GapSequence([1.5, 0.6, 0.2])).tolist() == pytest.approx([1.5, 2.1, 2.3])
        assert from_gaps(GapSequence([1.0], anchor=1.0)).tolist() == [2.0]

    def test_nonpositive_gap_rejected(self):
        with pytest.raises(ValueError, match="Gap 1"):
            GapSequence([0.5, 0.0])

    def test_closure_includes_anchor(self):
        assert closure_points(GapSequence([1.0, 0.5])).tolist() == [0.0, 1.0, 1.5]

    def test_window_reanchors(self):
        g = GapSequence([1.0, 2.0, 0.5], anchor=1.0)
        window = g.window(1, 2)
        assert window.anchor == 2.0
        assert window.gaps.tolist() == [2.0, 0.5]

    @given(dyadic_point_sets(min_size=1))
    def test_gap_round_trip(self, p):
        g = gaps(p)
        assert closure_points(g).tolist() == p.tolist()
        # the anchor is not a sensor, so from_gaps starts at the second point
        assert from_gaps(g).tolist() == p.tolist()[1:]


class TestRanges:
    def test_three_points(self, three_points):
        assert assign_ranges(three_points).ranges.tolist() == [0.5, 0.5, 0.5]

    def test_chain(self, chain_four):
        assert assign_ranges(chain_four).ranges.tolist() == [0.125, 0.25, 0.5, 0.5]

    def test_two_points(self):
        assert assign_ranges(points(-1.25, 3.0)).ranges.tolist() == [4.25, 4.25]

    def test_needs_two_points(self):
        with pytest.raises(ValueError, match="at least 2"):
            assign_ranges(points(0.2))

    def test_exact_coordinates(self):
        p = PointSet(np.array([Fraction(1, 8), Fraction(1, 4), Fraction(1, 2)], dtype=object))
        assert assign_ranges(p).ranges.tolist() == [Fraction(1, 8), Fraction(1, 4), Fraction(1, 4)]

    @given(dyadic_point_sets())
    def test_interior_range_is_larger_gap(self, p):
        ranges = assign_ranges(p).ranges
        steps = np.diff(p.positions)
        assert np.all(ranges[1:-1] == np.maximum(steps[:-1], steps[1:]))
        assert ranges[0] == steps[0] and ranges[-1] == steps[-1]

    @given(dyadic_point_sets())
    @settings(max_examples=50)
    def test_translation_invariant(self, p):
        shifted = transform(p, shift=3.75)
        assert assign_ranges(shifted).ranges.tolist() == assign_ranges(p).ranges.tolist()


class TestIntervals:
    def test_three_points(self, three_points):
        intervals = broadcast_intervals(three_points, assign_ranges(three_points))
        assert intervals.as_pairs() == [(-0.5, 0.5), (0.0, 1.0), (0.5, 1.5)]

    def test_two_points(self):
        p = points(0.0, 1.0)
        assert broadcast_intervals(p, assign_ranges(p)).as_pairs() == [(-1.0, 1.0), (0.0, 2.0)]

    def test_chain(self, chain_four):
        intervals = broadcast_intervals(chain_four, assign_ranges(chain_four))
        assert intervals.as_pairs() == [(0.0, 0.25), (0.0, 0.5), (0.0, 1.0), (0.5, 1.5)]

    def test_length_mismatch(self, three_points):
        with pytest.raises(ValueError, match="Length mismatch"):
            broadcast_intervals(three_points, assign_ranges(points(0.0, 1.0)))

    @given(dyadic_point_sets())
    def test_neighbors_inside_and_farther_on_boundary(self, p):
        intervals = broadcast_intervals(p, assign_ranges(p))
        x = p.positions
        for i in range(p.n):
            neighbors = [j for j in (i - 1, i + 1) if 0 <= j < p.n]
            for j in neighbors:
                assert intervals.contains(i, x[j])
            farther = max(neighbors, key=lambda j: abs(x[j] - x[i]))
            assert x[farther] in (intervals.lo[i], intervals.hi[i])


def test_mirror_reverses_order(chain_four):
    assert mirror(chain_four).tolist() == [-1.0, -0.5, -0.25, -0.125]


def test_transform_rejects_nonpositive_scale(three_points):
    with pytest.raises(ValueError):
        transform(three_points, scale=0.0)
