"""
The periodically correlated component X^p.

A discrete PC sequence X^p_j with period-T covariance gamma^p_{jk} is spread
over each block B_j by an interval measure M_j with

    <M_j(A), M_j(B)> = 2|A||B| / (a_j (|A| + |B|)) * gamma^p_jj      (same block)
    <M_j(A), M_k(B)> = |A||B| / (a_j a_k) * gamma^p_jk                (j != k)

and X^p(t) = M_j(s_{j-1}, t] for t in B_j.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from pcls.config import get_config
from pcls.errors import AlignmentError, DomainError, NonPSDModel
from pcls.linalg import psd_factor, psd_report
from pcls.partition import Interval, Partition

logger = logging.getLogger(__name__)

# Relative tolerance of the construction-time PSD check on the first 4T indices
SEQUENCE_PSD_TOL = 1e-10

IntervalLike = Union[Interval, tuple]


def _as_interval(value: IntervalLike) -> Interval:
    return value if isinstance(value, Interval) else Interval(float(value[0]), float(value[1]))


class PCSequenceSpec:
    """
    Period-T covariance array gamma^p_{jk} of the discrete PC sequence (indices from 1).

    Build with PCSequenceSpec.parametric(sigma, rho) or
    PCSequenceSpec.explicit(base_matrix, periods).
    """

    def __init__(self, period: int, sigma: Optional[Sequence[float]] = None,
                 rho: Optional[float] = None, base_matrix=None, periods: Optional[int] = None):
        self.period = int(period)
        self.sigma = None if sigma is None else np.array(sigma, dtype=float)
        self.rho = None if rho is None else float(rho)
        self.base_matrix = None if base_matrix is None else np.array(base_matrix, dtype=float)
        self.periods = None if periods is None else int(periods)

        if self.base_matrix is None:
            self._validate_parametric()
        else:
            self._validate_explicit()
        self._check_psd()

    @classmethod
    def parametric(cls, sigma: Sequence[float], rho: float) -> "PCSequenceSpec":
        """gamma^p_{jk} = sigma_(j mod T) sigma_(k mod T) rho^|j-k|."""
        return cls(period=len(sigma), sigma=sigma, rho=rho)

    @classmethod
    def explicit(cls, base_matrix, periods: int) -> "PCSequenceSpec":
        """Block-Toeplitz base matrix covering K periods; lags of K or more periods are 0."""
        size = np.shape(base_matrix)[0]
        if periods < 1 or size % periods:
            raise DomainError(f"Base matrix of size {size} does not split into {periods} periods")
        return cls(period=size // periods, base_matrix=base_matrix, periods=periods)

    def _validate_parametric(self):
        if self.sigma is None or self.rho is None:
            raise DomainError("A parametric PC sequence needs sigma and rho")
        if self.sigma.ndim != 1 or self.sigma.size != self.period:
            raise DomainError(f"sigma must list {self.period} values")
        if not np.all(np.isfinite(self.sigma)) or np.any(self.sigma <= 0):
            raise DomainError(f"sigma values must be positive, got {self.sigma.tolist()}")
        if not -1.0 < self.rho < 1.0:
            raise DomainError(f"rho must lie in (-1, 1), got {self.rho}")

    def _validate_explicit(self):
        base = self.base_matrix
        T, K = self.period, self.periods
        if base.ndim != 2 or base.shape != (K * T, K * T):
            raise DomainError(f"Base matrix must be {K * T}x{K * T}, got {base.shape}")
        if not np.all(np.isfinite(base)):
            raise DomainError("Base matrix entries must be finite")
        scale = max(float(np.max(np.abs(base))), 1e-300)
        if np.max(np.abs(base - base.T)) > 1e-12 * scale:
            raise DomainError("Base matrix must be symmetric")
        if K > 1 and np.max(np.abs(base[T:, T:] - base[:-T, :-T])) > 1e-12 * scale:
            raise DomainError("Base matrix must repeat with the period (gamma_{j+T,k+T} = gamma_{jk})")

    def _check_psd(self):
        head = self.matrix(4 * self.period)
        report = psd_report(head, SEQUENCE_PSD_TOL)
        if not report["pass"]:
            raise NonPSDModel(
                f"PC sequence covariance is not PSD on its first {4 * self.period} indices "
                f"(min eigenvalue {report['min_eigenvalue']:.3e})",
                min_eigenvalue=report["min_eigenvalue"],
            )

    @property
    def max_lag(self) -> Optional[int]:
        """Largest period lag with nonzero covariance, or None when unbounded."""
        return None if self.base_matrix is None else self.periods - 1

    def lag_cov(self, p, q, h):
        """
        Covariance of the T-variate stationary lift: E[X_{hT+p+1} X_{q+1}].

        Args:
            p, q: residues in 0..T-1
            h: lag in whole periods
        """
        p, q, h = np.broadcast_arrays(np.asarray(p), np.asarray(q), np.asarray(h))
        if self.base_matrix is None:
            return self.sigma[p] * self.sigma[q] * self.rho ** np.abs(h * self.period + p - q)

        T, K = self.period, self.periods
        inside = np.abs(h) < K
        hc = np.clip(h, -(K - 1), K - 1)
        rows = np.where(hc >= 0, hc * T + p, p)
        cols = np.where(hc >= 0, q, -hc * T + q)
        return np.where(inside, self.base_matrix[rows, cols], 0.0)

    def gamma(self, j, k):
        """gamma^p_{jk} for block indices j, k >= 1 (vectorized)."""
        j = np.asarray(j) - 1
        k = np.asarray(k) - 1
        T = self.period
        return self.lag_cov(j % T, k % T, j // T - k // T)

    def matrix(self, n: int) -> np.ndarray:
        """[gamma^p_{jk}] for j, k = 1..n."""
        idx = np.arange(1, n + 1)
        return self.gamma(idx[:, None], idx[None, :])

    def to_dict(self) -> dict:
        if self.base_matrix is None:
            return {"sigma": self.sigma.tolist(), "rho": self.rho}
        return {"base_matrix": self.base_matrix.tolist(), "periods": self.periods}

    def __repr__(self):
        if self.base_matrix is None:
            return f"PCSequenceSpec.parametric(sigma={self.sigma.tolist()}, rho={self.rho})"
        return f"PCSequenceSpec.explicit(T={self.period}, periods={self.periods})"


def pcseq_from_dict(data: dict) -> PCSequenceSpec:
    if "base_matrix" in data:
        return PCSequenceSpec.explicit(data["base_matrix"], int(data.get("periods", 1)))
    return PCSequenceSpec.parametric(data["sigma"], data["rho"])


def interval_correlation(len_a, len_b):
    """corr(M_j(A), M_j(B)) = 2 sqrt(|A||B|) / (|A| + |B|) for subintervals of one block."""
    len_a = np.asarray(len_a, dtype=float)
    len_b = np.asarray(len_b, dtype=float)
    return 2.0 * np.sqrt(len_a * len_b) / (len_a + len_b)


def harmonic_mean_gram(lengths: Sequence[float]) -> np.ndarray:
    """Gram matrix [2 a_i a_k / (a_i + a_k)] of the within-block kernel."""
    a = np.asarray(lengths, dtype=float)
    return 2.0 * np.multiply.outer(a, a) / np.add.outer(a, a)


@dataclass(frozen=True)
class IntervalMeasureCov:
    """Covariance of the interval measures M_j over a partition."""

    partition: Partition
    pcseq: PCSequenceSpec

    def __post_init__(self):
        if self.partition.period != self.pcseq.period:
            raise DomainError(
                f"PC sequence period {self.pcseq.period} does not match "
                f"partition period {self.partition.period}"
            )

    def _check_inside(self, j: int, interval: Interval):
        if j < 1:
            raise DomainError(f"Block index must be >= 1, got {j}")
        block = Interval(float(self.partition.block_start(j)), float(self.partition.block_end(j)))
        if not block.contains(interval, atol=self.partition.tolerance):
            raise DomainError(f"Interval ({interval.lo}, {interval.hi}] is not inside block {j}")

    def measure_cov(self, j: int, A: IntervalLike, k: int, B: IntervalLike) -> float:
        """<M_j(A), M_k(B)> for A inside B_j and B inside B_k."""
        A, B = _as_interval(A), _as_interval(B)
        self._check_inside(j, A)
        self._check_inside(k, B)
        a_j = float(self.partition.block_length(j))
        a_k = float(self.partition.block_length(k))
        g = float(self.pcseq.gamma(j, k))
        if j == k:
            return 2.0 * A.length * B.length / (a_j * (A.length + B.length)) * g
        return A.length * B.length / (a_j * a_k) * g

    def xp_cov(self, t, u):
        """cov(X^p(t), X^p(u)), vectorized over broadcastable t and u."""
        m, a_t = self.partition.locate(t)
        n, a_u = self.partition.locate(u)
        a_m = self.partition.block_length(m)
        a_n = self.partition.block_length(n)
        g = self.pcseq.gamma(m, n)
        same = 2.0 * a_t * a_u / (a_m * (a_t + a_u)) * g
        cross = a_t * a_u / (a_m * a_n) * g
        return np.where(m == n, same, cross)

    def matrix(self, grid) -> np.ndarray:
        grid = np.asarray(grid, dtype=float)
        return self.xp_cov(grid[:, None], grid[None, :])


def measure_cov(c: IntervalMeasureCov, j: int, A: IntervalLike, k: int, B: IntervalLike) -> float:
    return c.measure_cov(j, A, k, B)


def xp_cov(c: IntervalMeasureCov, t: float, u: float) -> float:
    return float(c.xp_cov(t, u))


def global_psd_check(c: IntervalMeasureCov, grid, tol: float) -> dict:
    """Assemble [xp_cov(t_i, t_k)] on the grid and report its minimum eigenvalue."""
    grid = np.asarray(grid, dtype=float)
    report = psd_report(c.matrix(grid), tol)
    logger.info(
        f"X^p covariance on {grid.size} points: min eigenvalue {report['min_eigenvalue']:.3e}, "
        f"pass={report['pass']}"
    )
    return report


@dataclass(frozen=True, eq=False)
class IntervalMeasureGrid:
    """
    Grid representation of M_j: increments over cells (e_i, e_{i+1}] of block j.

    edges[0] is the block start s_{j-1}; M_j(A) for a union of cells A is the
    sum of the increments of those cells.
    """

    block: int
    edges: np.ndarray
    increments: np.ndarray

    def value(self) -> float:
        """M_j over the whole represented range."""
        return float(np.sum(self.increments))

    def cumulative(self) -> np.ndarray:
        """M_j(s_{j-1}, e_i] for i = 1..n."""
        return np.cumsum(self.increments)

    def _cell_mask(self, interval: Interval) -> np.ndarray:
        tol = 1e-12 * max(float(self.edges[-1]), 1.0)
        if interval.lo < self.edges[0] - tol or interval.hi > self.edges[-1] + tol:
            raise DomainError(
                f"Interval ({interval.lo}, {interval.hi}] is outside "
                f"({self.edges[0]}, {self.edges[-1]}] of block {self.block}"
            )
        for endpoint in (interval.lo, interval.hi):
            if np.min(np.abs(self.edges - endpoint)) > tol:
                raise AlignmentError(f"Endpoint {endpoint} is not a cell edge of block {self.block}")
        return (self.edges[:-1] >= interval.lo - tol) & (self.edges[1:] <= interval.hi + tol)

    def project(self, A: IntervalLike, B: Optional[IntervalLike] = None) -> "IntervalMeasureGrid":
        """Zero the increments outside A (then outside B, if given)."""
        mask = self._cell_mask(_as_interval(A))
        projected = IntervalMeasureGrid(self.block, self.edges, np.where(mask, self.increments, 0.0))
        return projected if B is None else projected.project(B)


def project(representation: IntervalMeasureGrid, A: IntervalLike,
            B: Optional[IntervalLike] = None) -> IntervalMeasureGrid:
    """P_A (or P_B P_A) applied to a grid representation of M_j."""
    return representation.project(A, B)


class IntervalMeasureSampler:
    """
    Gaussian increment representation of X^p on a time grid.

    Nodes are the grid points plus the right endpoints of every block they
    touch. Cumulative values at the nodes are drawn from the covariance
    xp_cov restricted to the nodes, then differenced into per-block increments.
    """

    def __init__(self, cov: IntervalMeasureCov, grid):
        self.cov = cov
        partition = cov.partition
        grid = np.asarray(grid, dtype=float)
        blocks, _ = partition.locate(grid)
        ends = np.asarray(partition.block_end(np.unique(blocks)), dtype=float)
        tol = partition.tolerance
        extra = [e for e in ends if grid.size == 0 or np.min(np.abs(grid - e)) > tol]

        self.grid = grid
        self.nodes = np.sort(np.concatenate([grid, extra]))
        self.node_blocks, _ = partition.locate(self.nodes)
        self.grid_index = np.searchsorted(self.nodes, grid)

        matrix = cov.matrix(self.nodes)
        report = psd_report(matrix, get_config()["tol_psd"])
        if not report["pass"]:
            raise NonPSDModel(
                f"X^p covariance on {self.nodes.size} nodes is not PSD "
                f"(min eigenvalue {report['min_eigenvalue']:.3e})",
                min_eigenvalue=report["min_eigenvalue"],
            )
        self.factor = psd_factor(matrix)
        self._continues = np.concatenate(([False], self.node_blocks[1:] == self.node_blocks[:-1]))

    @property
    def dim(self) -> int:
        """Number of standard normals consumed per path."""
        return self.factor.shape[1]

    def increments(self, z: np.ndarray) -> np.ndarray:
        """Map standard normals of shape (N, dim) to cell increments of shape (N, nodes)."""
        cumulative = z @ self.factor.T
        increments = cumulative.copy()
        increments[:, self._continues] -= cumulative[:, np.flatnonzero(self._continues) - 1]
        return increments

    def values(self, increments: np.ndarray) -> np.ndarray:
        """Sum increments from each block start up to every grid point: X^p on the grid."""
        cumulative = np.empty_like(increments)
        starts = np.flatnonzero(~self._continues)
        stops = np.append(starts[1:], self.nodes.size)
        for lo, hi in zip(starts, stops):
            cumulative[:, lo:hi] = np.cumsum(increments[:, lo:hi], axis=1)
        return cumulative[:, self.grid_index]

    def measure(self, increments_row: np.ndarray, block: int) -> IntervalMeasureGrid:
        """Grid representation of M_block from one path's increments."""
        sel = self.node_blocks == block
        if not np.any(sel):
            raise DomainError(f"Block {block} is not covered by the sampling grid")
        start = float(self.cov.partition.block_start(block))
        edges = np.concatenate(([start], self.nodes[sel]))
        return IntervalMeasureGrid(block, edges, np.asarray(increments_row)[sel])
