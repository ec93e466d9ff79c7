"""
The full PC-LS model X = X^ls + X^p and its covariance.

The LS mixture part on block j is X^ls_j(t) = U^{j-1}(t) Y_{j-1}(t) + U^j(t) Y_j(t)
with independent weights U^j (covariance psi_j) and stationary Y_j (covariance
gamma_j), and Y_0 = 0. Each U^j is shared by blocks j and j+1, which gives the
banded covariance

    i = j      psi_{i-1}(t+u) gamma_{i-1}(t-u) + psi_i(t+u) gamma_i(t-u)
    |i-j| = 1  psi_k(t+u) gamma_k(t-u),  k = min(i, j)
    |i-j| >= 2 0

for t in B_i and u in B_j. X^p is the interval-measure component of
pcls.kernels.pc_component and is independent of X^ls.
"""

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from pcls.config import get_config
from pcls.errors import DomainError, GridCapExceeded, NonPSDModel
from pcls.kernels.excov import ExpConvexCov
from pcls.kernels.pc_component import IntervalMeasureCov, PCSequenceSpec
from pcls.kernels.stationary import StationaryCov
from pcls.linalg import clip_eigenvalues, psd_report
from pcls.partition import Partition

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

# Rows per assembly tile handed to a worker thread
TILE_ROWS = 256


@dataclass(frozen=True, eq=False)
class PCLSModel:
    """
    A PC-LS model over a partition.

    psi and gamma hold one entry per block of a period when periodic is True
    (psi_{j+T} = psi_j); otherwise entry j-1 serves block j and blocks past the
    end of the lists are undefined. By default every U^k runs on the global clock, so
    cov(U^k(t), U^k(u)) = psi_k(t+u). With local_weight_time each U^k instead runs
    on the clock t - s_{k-1}; only then does the LS part repeat with the period.
    """

    partition: Partition
    psi: Sequence[ExpConvexCov] = ()
    gamma: Sequence[StationaryCov] = ()
    pcseq: Optional[PCSequenceSpec] = None
    include_ls: bool = True
    include_pc: bool = True
    periodic: bool = True
    local_weight_time: bool = False
    xp: Optional[IntervalMeasureCov] = field(init=False, repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "psi", tuple(self.psi))
        object.__setattr__(self, "gamma", tuple(self.gamma))
        T = self.partition.period

        if not (self.include_ls or self.include_pc):
            raise DomainError("A model needs at least one of include_ls / include_pc")
        if len(self.psi) != len(self.gamma):
            raise DomainError(f"Got {len(self.psi)} psi but {len(self.gamma)} gamma entries")
        if self.include_ls:
            if not self.psi:
                raise DomainError("include_ls needs psi and gamma lists")
            if self.periodic and len(self.psi) != T:
                raise DomainError(f"Periodic models need exactly T={T} psi/gamma entries, got {len(self.psi)}")

        if self.pcseq is not None:
            object.__setattr__(self, "xp", IntervalMeasureCov(self.partition, self.pcseq))
        elif self.include_pc:
            raise DomainError("include_pc needs a PC sequence")

    # -- parameter lookup -------------------------------------------------

    def _param_index(self, k):
        """Position in psi/gamma of the parameters of U^k, Y_k (k >= 1)."""
        k = np.asarray(k)
        if self.periodic:
            return (k - 1) % self.partition.period
        if k.size and np.max(k) > len(self.psi):
            raise DomainError(
                f"Aperiodic model defines psi/gamma for blocks 1..{len(self.psi)}, "
                f"block {int(np.max(k))} requested"
            )
        return k - 1

    def weight_origin(self, k):
        if self.local_weight_time:
            return self.partition.block_start(k)
        return np.zeros(np.shape(k))

    def psi_at(self, k: int) -> ExpConvexCov:
        return self.psi[int(self._param_index(k))]

    def gamma_at(self, k: int) -> StationaryCov:
        return self.gamma[int(self._param_index(k))]

    # -- covariance ---------------------------------------------------------

    def weight_cov(self, k, t, u):
        """cov(U^k(t), U^k(u)) = psi_k(t+u) on the weight clock of U^k (vectorized, k >= 1)."""
        k, t, u = np.broadcast_arrays(np.asarray(k), np.asarray(t, dtype=float),
                                      np.asarray(u, dtype=float))
        out = np.zeros(t.shape)
        params = self._param_index(k)
        v = t + u - 2.0 * self.weight_origin(k)
        for q in np.unique(params):
            sel = params == q
            out[sel] = self.psi[q](v[sel])
        return out

    def ls_term(self, k, t, u):
        """psi_k(t+u) gamma_k(t-u), the covariance carried by U^k Y_k (vectorized, k >= 1)."""
        k, t, u = np.broadcast_arrays(np.asarray(k), np.asarray(t, dtype=float),
                                      np.asarray(u, dtype=float))
        out = self.weight_cov(k, t, u)
        params = self._param_index(k)
        tau = t - u
        for q in np.unique(params):
            sel = params == q
            out[sel] *= self.gamma[q](tau[sel])
        return out

    def ls_cov(self, t, u):
        """cov(X^ls(t), X^ls(u)), vectorized over broadcastable t and u."""
        t, u = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(u, dtype=float))
        shape = t.shape
        t, u = t.ravel(), u.ravel()
        i, _ = self.partition.locate(t)
        j, _ = self.partition.locate(u)

        out = np.zeros(t.shape)
        # U^k enters blocks k and k+1, so k ranges over {i-1, i} and {j-1, j}
        for k in (i - 1, i):
            active = np.flatnonzero((k >= 1) & ((k == j) | (k == j - 1)))
            if active.size:
                out[active] += self.ls_term(k[active], t[active], u[active])
        return out.reshape(shape)

    def xp_cov(self, t, u):
        return self.xp.xp_cov(t, u)

    def total_cov(self, t, u):
        """gamma(t, u) = gamma^ls(t, u) + gamma^p(t, u) for the enabled components."""
        t, u = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(u, dtype=float))
        out = np.zeros(t.shape)
        if self.include_ls:
            out = out + self.ls_cov(t, u)
        if self.include_pc:
            out = out + self.xp.xp_cov(t, u)
        return out

    def variance(self, t):
        """Instantaneous power Var X(t)."""
        return self.total_cov(t, t)

    def local_power(self, block: int, s):
        """Power envelope psi_k(2s) gamma_k(0) carried by U^k at time s."""
        k = np.full(np.shape(s), int(block))
        return self.ls_term(k, s, s)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        data = {
            "schema": SCHEMA_VERSION,
            "partition": self.partition.to_dict(),
            "flags": {"include_ls": self.include_ls, "include_pc": self.include_pc},
        }
        if self.psi:
            data["ls"] = {
                "psi": [p.to_dict() for p in self.psi],
                "gamma": [g.to_dict() for g in self.gamma],
                "periodic": self.periodic,
                "weight_time": "local" if self.local_weight_time else "global",
            }
        if self.pcseq is not None:
            data["pc"] = self.pcseq.to_dict()
        return data

    def fingerprint(self) -> str:
        """sha256 of the canonical JSON form of the model."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def ls_cov(m: PCLSModel, t: float, u: float) -> float:
    return float(m.ls_cov(t, u))


def total_cov(m: PCLSModel, t: float, u: float) -> float:
    return float(m.total_cov(t, u))


@dataclass(eq=False)
class CovMatrix:
    """Covariance materialized on a time grid."""

    grid: np.ndarray
    values: np.ndarray
    min_eigenvalue: float
    repaired: bool = False

    @property
    def size(self) -> int:
        return int(self.grid.size)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.values)))

    def metadata(self) -> dict:
        return {
            "size": self.size,
            "min_eigenvalue": self.min_eigenvalue,
            "trace": self.trace,
            "repaired": self.repaired,
        }

    def to_csv(self, path) -> None:
        """Row-major CSV whose header row is the grid."""
        header = ",".join(repr(float(t)) for t in self.grid)
        np.savetxt(path, np.real(self.values), delimiter=",", header=header,
                   comments="", fmt="%.17g")

    def to_json(self, path=None) -> dict:
        data = {
            "grid": self.grid.tolist(),
            "values": np.real(self.values).tolist(),
            **self.metadata(),
        }
        if path is not None:
            with open(path, 'w') as f:
                json.dump(data, f, indent=2)
        return data


def check_grid(grid) -> np.ndarray:
    """Validate a time grid: strictly increasing, positive, within the grid cap."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("A time grid needs at least one point")
    cap = int(get_config()["grid_cap"])
    if grid.size > cap:
        raise GridCapExceeded(f"Grid has {grid.size} points, the cap is {cap}")
    if not np.all(np.isfinite(grid)) or np.any(grid <= 0):
        raise DomainError(f"Grid points must be > 0, got minimum {float(np.min(grid))}")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("Grid must be strictly increasing")
    return grid


def cov_matrix(m: PCLSModel, grid, repair: bool = False, tol: Optional[float] = None) -> CovMatrix:
    """
    Assemble C_ik = total_cov(t_i, t_k) on a grid.

    Args:
        m: the model
        grid: strictly increasing positive time points
        repair: clip slightly negative eigenvalues (within tol * trace) to zero
        tol: relative PSD tolerance, defaults to config tol_psd

    Returns:
        CovMatrix

    Raises:
        NonPSDModel: if the min eigenvalue is below -tol * trace
        GridCapExceeded: if the grid is longer than the configured cap
    """
    grid = check_grid(grid)
    if tol is None:
        tol = get_config()["tol_psd"]

    n = grid.size
    values = np.empty((n, n))

    def fill(lo: int):
        hi = min(lo + TILE_ROWS, n)
        values[lo:hi] = m.total_cov(grid[lo:hi, None], grid[None, :])

    threads = max(1, int(get_config()["threads"]))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(fill, range(0, n, TILE_ROWS)))
    values = (values + values.T) / 2

    report = psd_report(values, tol)
    logger.info(f"Assembled {n}x{n} covariance, min eigenvalue {report['min_eigenvalue']:.3e}")
    if not report["pass"]:
        raise NonPSDModel(
            f"Covariance on {n} points is not PSD: min eigenvalue {report['min_eigenvalue']:.3e} "
            f"< -{tol:g} * trace",
            min_eigenvalue=report["min_eigenvalue"],
        )

    repaired = False
    if repair and report["min_eigenvalue"] < 0:
        logger.warning(f"Clipping eigenvalues down to {report['min_eigenvalue']:.3e}")
        values = clip_eigenvalues(values)
        repaired = True
    return CovMatrix(grid=grid, values=values, min_eigenvalue=report["min_eigenvalue"],
                     repaired=repaired)


def silverman_check(m: PCLSModel, block: int, pairs) -> dict:
    """
    Check the local-stationarity factorization q((t+u)/2) c(t-u) inside a block.

    For pairs ((t, u), (t2, u2)) with t+u = t2+u2 the ratio
    ls_cov(t, u) / ls_cov(t2, u2) must equal gamma_k(t-u) / gamma_k(t2-u2).

    Returns:
        dict: {"max_relative_deviation": float, "checked": int, "skipped": int}
    """
    if not m.include_ls:
        raise DomainError("The factorization check needs the LS component")
    if block != 1:
        raise DomainError(f"Block {block} carries two mixture terms; only block 1 has one")

    floor = get_config()["silverman_floor"]
    gamma = m.gamma_at(block)
    partition = m.partition
    max_dev, checked, skipped = 0.0, 0, 0

    for (t, u), (t2, u2) in pairs:
        points = np.array([t, u, t2, u2], dtype=float)
        if np.any(partition.locate(points)[0] != block):
            raise DomainError(f"Pair points {points.tolist()} are not all inside block {block}")
        if abs((t + u) - (t2 + u2)) > 1e-12 * max(abs(t + u), 1.0):
            raise DomainError(f"Pairs ({t}, {u}) and ({t2}, {u2}) have different sums")

        denominator = float(m.ls_cov(t2, u2))
        reference = float(gamma(t2 - u2))
        if abs(denominator) < floor or abs(reference) < floor:
            skipped += 1
            continue
        observed = float(m.ls_cov(t, u)) / denominator
        expected = float(gamma(t - u)) / reference
        scale = abs(expected) if abs(expected) >= floor else 1.0
        max_dev = max(max_dev, abs(observed - expected) / scale)
        checked += 1

    if skipped:
        logger.warning(f"Skipped {skipped} pairs with degenerate denominators")
    return {"max_relative_deviation": max_dev, "checked": checked, "skipped": skipped}
