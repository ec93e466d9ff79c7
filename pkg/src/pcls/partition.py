"""
Partition of the positive time axis into half-open blocks B_j = (s_{j-1}, s_j].

Block lengths repeat with period T, so the endpoints are generated on demand
from one period of lengths instead of being materialized.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from pcls.config import get_config
from pcls.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Interval:
    """Half-open interval (lo, hi] of the time axis."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise DomainError(f"Empty interval ({self.lo}, {self.hi}]")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def intersect(self, other: "Interval"):
        """Return the intersection, or None when it is empty."""
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if hi > lo else None

    def contains(self, other: "Interval", atol: float = 0.0) -> bool:
        return other.lo >= self.lo - atol and other.hi <= self.hi + atol


class Partition:
    """
    Period-T partition of (0, inf) into blocks with lengths a_1..a_T repeated.

    Blocks are indexed from 1. The right endpoint s_j belongs to block j.
    """

    def __init__(self, lengths: Sequence[float]):
        lengths = np.array(lengths, dtype=float)
        if lengths.ndim != 1 or lengths.size < 1:
            raise DomainError("A partition needs at least one block length")
        if not np.all(np.isfinite(lengths)) or np.any(lengths <= 0):
            raise DomainError(f"Block lengths must be positive and finite, got {lengths.tolist()}")

        self._lengths = lengths
        self._lengths.setflags(write=False)
        # _ends[i] = s_i within the first period, _ends[0] = 0
        self._ends = np.concatenate(([0.0], np.cumsum(lengths)))
        self._ends.setflags(write=False)

    @property
    def period(self) -> int:
        """Number of blocks per period (T)."""
        return int(self._lengths.size)

    @property
    def lengths(self) -> np.ndarray:
        return self._lengths

    @property
    def span(self) -> float:
        """Total length S of one period."""
        return float(self._ends[-1])

    @property
    def tolerance(self) -> float:
        """Absolute tolerance for endpoint ties."""
        return get_config()["endpoint_rtol"] * self.span

    def block_length(self, j):
        """|B_j| for block index (or array of indices) j >= 1."""
        j = np.asarray(j)
        return self._lengths[(j - 1) % self.period]

    def block_start(self, j):
        """s_{j-1}, the open left endpoint of block j."""
        j = np.asarray(j)
        k, i = np.divmod(j - 1, self.period)
        return k * self.span + self._ends[i]

    def block_end(self, j):
        """s_j, the closed right endpoint of block j."""
        return self.block_start(j) + self.block_length(j)

    def locate(self, times):
        """
        Vectorized block lookup.

        Args:
            times: scalar or array of times, all > 0

        Returns:
            tuple: (block indices j, within-block coordinates a_t = t - s_{j-1})

        Raises:
            DomainError: if any time is <= 0 or not finite
        """
        t = np.asarray(times, dtype=float)
        if t.size and (not np.all(np.isfinite(t)) or np.any(t <= 0)):
            bad = t[~(np.isfinite(t) & (t > 0))].ravel()[0]
            raise DomainError(f"Time index must be > 0, got {bad}")

        tol = self.tolerance
        k = np.floor(t / self.span)
        r = t - k * self.span

        # A remainder within tolerance of 0 is the right endpoint of the previous period
        wrap = (r <= tol) & (k >= 1)
        k = np.where(wrap, k - 1, k)
        r = np.where(wrap, r + self.span, r)

        i = np.searchsorted(self._ends[1:] + tol, r, side="left")
        i = np.minimum(i, self.period - 1)

        j = (k.astype(np.int64) * self.period + i + 1).astype(np.int64)
        a_t = np.minimum(r - self._ends[i], self._lengths[i])
        return j, a_t

    def blocks_touching(self, t_max: float) -> int:
        """Index of the block containing t_max (so blocks 1..result cover (0, t_max])."""
        return int(self.locate(t_max)[0])

    def uniform_grid(self, start: float, stop: float, step: float) -> np.ndarray:
        """
        Uniform grid start+step, start+2*step, ... <= stop.

        Points are computed as start + n*step (no accumulation), so grids whose
        step divides the block lengths land exactly on block endpoints.
        """
        if step <= 0:
            raise DomainError(f"Grid step must be positive, got {step}")
        n = int(np.floor((stop - start) / step + 1e-9))
        grid = start + step * np.arange(1, n + 1)
        if grid.size and grid[0] <= 0:
            raise DomainError(f"Grid must lie in (0, inf), got first point {grid[0]}")
        return grid

    def to_dict(self) -> dict:
        return {"period": self.period, "lengths": self._lengths.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "Partition":
        partition = cls(data["lengths"])
        if "period" in data and int(data["period"]) != partition.period:
            raise DomainError(
                f"Partition period {data['period']} does not match {partition.period} lengths"
            )
        return partition

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self._lengths, other._lengths)

    def __hash__(self):
        return hash(tuple(self._lengths.tolist()))

    def __repr__(self):
        return f"Partition(lengths={self._lengths.tolist()})"


def block_of(p: Partition, t: float) -> int:
    """Return the block index j with t in B_j = (s_{j-1}, s_j]."""
    return int(p.locate(t)[0])


def within_block_coord(p: Partition, t: float) -> tuple[int, float]:
    """Return (j, a_t) with t in B_j and a_t = t - s_{j-1} in (0, a_j]."""
    j, a_t = p.locate(t)
    return int(j), float(a_t)
