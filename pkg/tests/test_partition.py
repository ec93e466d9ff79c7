"""
Tests for the periodic partition of the time axis.
"""

import numpy as np
import pytest

from pcls.errors import DomainError
from pcls.partition import Interval, Partition, block_of, within_block_coord


@pytest.fixture
def partition():
    """Lengths [1, 2]: blocks (0,1], (1,3], (3,4], (4,6], ..."""
    return Partition([1.0, 2.0])


# === Tests for block lookup ===

class TestBlockOf:
    """Tests for block_of / within_block_coord."""

    def test_interior_points(self, partition):
        """Should place interior points in their block."""
        assert block_of(partition, 0.5) == 1
        assert block_of(partition, 1.5) == 2
        assert block_of(partition, 3.5) == 3
        assert block_of(partition, 5.0) == 4

    def test_right_endpoint_belongs_to_block(self, partition):
        """Blocks are (s_{j-1}, s_j], so s_j belongs to block j."""
        assert within_block_coord(partition, 1.0) == (1, 1.0)
        assert within_block_coord(partition, 3.0) == (2, 2.0)
        assert within_block_coord(partition, 6.0) == (4, 2.0)

    def test_just_after_endpoint_starts_next_block(self, partition):
        """A point just past s_j should start block j+1."""
        j, a_t = within_block_coord(partition, 3.0 + 1e-6)
        assert j == 3
        assert a_t == pytest.approx(1e-6, abs=1e-12)

    def test_within_block_coordinate(self, partition):
        """a_t should be t - s_{j-1}."""
        j, a_t = within_block_coord(partition, 4.25)
        assert j == 3
        assert a_t == pytest.approx(1.25)

    def test_one_period_later(self, partition):
        """t = 2.5 and t = 5.5 share a coordinate, blocks T apart."""
        assert within_block_coord(partition, 2.5) == (2, pytest.approx(1.5))
        assert within_block_coord(partition, 5.5) == (4, pytest.approx(1.5))
        assert block_of(partition, 4.0) == 3

    def test_rejects_nonpositive_time(self, partition):
        """t <= 0 is outside the domain."""
        with pytest.raises(DomainError):
            block_of(partition, 0.0)
        with pytest.raises(DomainError):
            block_of(partition, -1.0)

    def test_rejects_nan(self, partition):
        """Non-finite times are rejected."""
        with pytest.raises(DomainError):
            block_of(partition, float("nan"))

    def test_domain_error_is_value_error(self, partition):
        """Callers catching ValueError should see domain errors."""
        with pytest.raises(ValueError):
            block_of(partition, 0.0)

    def test_vectorized_locate(self, partition):
        """locate should handle arrays."""
        j, a_t = partition.locate(np.array([0.5, 1.0, 2.0, 3.0, 3.5]))
        assert j.tolist() == [1, 1, 2, 2, 3]
        np.testing.assert_allclose(a_t, [0.5, 1.0, 1.0, 2.0, 0.5])

    def test_random_points_inside_their_block(self):
        """s_{j-1} < t <= s_j for random partitions and times."""
        rng = np.random.default_rng(1)
        for _ in range(200):
            lengths = rng.uniform(0.1, 3.0, size=rng.integers(1, 6))
            p = Partition(lengths)
            t = rng.uniform(1e-3, 5 * p.span)
            j, a_t = within_block_coord(p, t)
            start, end = float(p.block_start(j)), float(p.block_end(j))
            assert start - p.tolerance < t <= end + p.tolerance
            assert 0 < a_t <= float(p.block_length(j)) + p.tolerance
            assert a_t == pytest.approx(t - start, abs=1e-9)

    def test_shift_by_period(self):
        """t + S lies in block j + T with the same coordinate."""
        rng = np.random.default_rng(2)
        for _ in range(200):
            lengths = rng.uniform(0.1, 3.0, size=rng.integers(1, 5))
            p = Partition(lengths)
            t = rng.uniform(1e-3, 3 * p.span)
            j, a_t = within_block_coord(p, t)
            j2, a_t2 = within_block_coord(p, t + p.span)
            assert j2 == j + p.period
            assert a_t2 == pytest.approx(a_t, abs=1e-9)


# === Tests for Partition ===

class TestPartition:
    """Tests for the Partition type."""

    def test_period_and_span(self, partition):
        """T counts blocks per period, S sums their lengths."""
        assert partition.period == 2
        assert partition.span == 3.0

    def test_block_endpoints(self, partition):
        """Endpoints follow the periodic lengths."""
        assert partition.block_start(3) == 3.0
        assert partition.block_end(3) == 4.0
        assert partition.block_length(4) == 2.0

    def test_rejects_bad_lengths(self):
        """Lengths must be positive and finite."""
        with pytest.raises(DomainError):
            Partition([])
        with pytest.raises(DomainError):
            Partition([1.0, 0.0])
        with pytest.raises(DomainError):
            Partition([1.0, float("inf")])

    def test_does_not_freeze_caller_array(self):
        """The partition keeps its own copy of the lengths."""
        lengths = np.array([1.0, 2.0])
        Partition(lengths)
        lengths[0] = 5.0

    def test_blocks_touching(self, partition):
        """Blocks 1..n cover (0, t_max]."""
        assert partition.blocks_touching(6.0) == 4
        assert partition.blocks_touching(3.5) == 3

    def test_uniform_grid_hits_endpoints(self, partition):
        """A step dividing the lengths lands exactly on block endpoints."""
        grid = partition.uniform_grid(0.0, 6.0, 0.125)
        assert grid.size == 48
        assert grid[-1] == 6.0
        assert 1.0 in grid and 3.0 in grid and 4.0 in grid

    def test_uniform_grid_rejects_bad_step(self, partition):
        """Non-positive steps are rejected."""
        with pytest.raises(DomainError):
            partition.uniform_grid(0.0, 1.0, 0.0)

    def test_dict_round_trip(self, partition):
        """from_dict(to_dict()) gives an equal partition."""
        assert Partition.from_dict(partition.to_dict()) == partition

    def test_from_dict_checks_period(self):
        """A declared period must match the number of lengths."""
        with pytest.raises(DomainError):
            Partition.from_dict({"period": 3, "lengths": [1.0, 2.0]})


# === Tests for Interval ===

class TestInterval:
    """Tests for half-open intervals."""

    def test_rejects_empty(self):
        """(a, a] is empty."""
        with pytest.raises(DomainError):
            Interval(1.0, 1.0)

    def test_intersection(self):
        """Overlapping intervals intersect, disjoint ones give None."""
        assert Interval(0.0, 0.5).intersect(Interval(0.25, 1.0)) == Interval(0.25, 0.5)
        assert Interval(0.0, 0.5).intersect(Interval(0.5, 1.0)) is None

    def test_contains(self):
        """Containment with tolerance."""
        assert Interval(0.0, 1.0).contains(Interval(0.25, 1.0))
        assert not Interval(0.0, 1.0).contains(Interval(0.25, 1.5))
