"""
Gaussian sample paths of a PC-LS model and empirical second moments.

Two simulation methods are offered:
    joint_factorization  factor the full covariance on the grid and multiply
                         standard normals by the factor
    component_wise       build X^ls from shared weight processes U^k times
                         stationary paths Y_k, add X^p from the interval
                         measure increments

Path p always draws its normals from the stream SeedSequence(seed, spawn_key=(p,)),
so ensembles do not depend on the number of worker threads.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from pcls.config import get_config
from pcls.core import PCLSModel, check_grid, cov_matrix
from pcls.errors import DomainError, UnsupportedMethod
from pcls.kernels.excov import LaplaceMixture
from pcls.kernels.pc_component import IntervalMeasureSampler
from pcls.linalg import psd_factor

logger = logging.getLogger(__name__)

METHODS = ("joint_factorization", "component_wise")


@dataclass(eq=False)
class Ensemble:
    """N sample paths on a time grid, reproducible from (model, seed, method)."""

    grid: np.ndarray
    paths: np.ndarray
    seed: int
    fingerprint: str
    method: str = "joint_factorization"

    @property
    def n_paths(self) -> int:
        return int(self.paths.shape[0])

    def to_csv(self, path) -> None:
        """One row per path; the header row is the grid."""
        header = ",".join(repr(float(t)) for t in self.grid)
        np.savetxt(path, self.paths, delimiter=",", header=header, comments="", fmt="%.17g")

    def to_npz(self, path) -> None:
        np.savez(path, grid=self.grid, paths=self.paths, seed=np.int64(self.seed),
                 fingerprint=np.str_(self.fingerprint), method=np.str_(self.method))

    @classmethod
    def from_npz(cls, path) -> "Ensemble":
        with np.load(path) as data:
            return cls(grid=data["grid"], paths=data["paths"], seed=int(data["seed"]),
                       fingerprint=str(data["fingerprint"]), method=str(data["method"]))


def path_normals(seed: int, n_paths: int, dim: int) -> np.ndarray:
    """Standard normals of shape (n_paths, dim), row p from stream (seed, p)."""
    normals = np.empty((n_paths, dim))

    def fill(rows: range):
        for p in rows:
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(p,)))
            normals[p] = rng.standard_normal(dim)

    threads = max(1, int(get_config()["threads"]))
    chunk = max(1, -(-n_paths // threads))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(fill, [range(lo, min(lo + chunk, n_paths)) for lo in range(0, n_paths, chunk)]))
    return normals


def _simulate_joint(m: PCLSModel, grid: np.ndarray, n_paths: int, seed: int) -> np.ndarray:
    cm = cov_matrix(m, grid, repair=True)
    factor = psd_factor(cm.values)
    return path_normals(seed, n_paths, factor.shape[1]) @ factor.T


class _ComponentLayout:
    """Where each building block of one component-wise path reads its normals."""

    def __init__(self, m: PCLSModel, grid: np.ndarray):
        self.m = m
        self.grid = grid
        self.blocks, _ = m.partition.locate(grid)
        self.weights = []
        offset = 0

        if m.include_ls:
            for k in range(1, int(self.blocks.max()) + 1):
                # U^k and Y_k live on blocks k and k+1
                idx = np.flatnonzero((self.blocks == k) | (self.blocks == k + 1))
                if idx.size == 0:
                    continue
                psi = m.psi_at(k)
                if not isinstance(psi, LaplaceMixture):
                    raise UnsupportedMethod(
                        f"component_wise needs Laplace-mixture weights; block {k} uses {psi!r}"
                    )
                t = grid[idx]
                origin = float(m.weight_origin(k))
                basis = psi.basis(t - origin)
                gamma = m.gamma_at(k)
                y_factor = psd_factor(gamma(np.subtract.outer(t, t)))
                self.weights.append((idx, offset, basis, y_factor))
                offset += basis.shape[1] + y_factor.shape[1]

        self.sampler = None
        self.pc_offset = offset
        if m.include_pc:
            self.sampler = IntervalMeasureSampler(m.xp, grid)
            offset += self.sampler.dim
        self.dim = offset

    def paths(self, normals: np.ndarray) -> np.ndarray:
        out = np.zeros((normals.shape[0], self.grid.size))
        for idx, offset, basis, y_factor in self.weights:
            n_weights = basis.shape[1]
            xi = normals[:, offset:offset + n_weights]
            z = normals[:, offset + n_weights:offset + n_weights + y_factor.shape[1]]
            out[:, idx] += (xi @ basis.T) * (z @ y_factor.T)
        if self.sampler is not None:
            z = normals[:, self.pc_offset:self.pc_offset + self.sampler.dim]
            out += self.sampler.values(self.sampler.increments(z))
        return out


def simulate(m: PCLSModel, grid, n_paths: int, seed: int,
             method: str = "joint_factorization") -> Ensemble:
    """
    Draw n_paths Gaussian sample paths of the model on a grid.

    Raises:
        NonPSDModel: if the covariance on the grid is not PSD within tolerance
        UnsupportedMethod: for component_wise with a closed-form psi
    """
    if n_paths < 1:
        raise DomainError(f"n_paths must be >= 1, got {n_paths}")
    if method not in METHODS:
        raise DomainError(f"Unknown simulation method '{method}'. Known: {', '.join(METHODS)}")
    grid = check_grid(grid)

    if method == "joint_factorization":
        paths = _simulate_joint(m, grid, n_paths, seed)
    else:
        layout = _ComponentLayout(m, grid)
        paths = layout.paths(path_normals(seed, n_paths, layout.dim))

    logger.info(f"Simulated {n_paths} paths on {grid.size} points ({method}, seed {seed})")
    return Ensemble(grid=grid, paths=paths, seed=int(seed), fingerprint=m.fingerprint(), method=method)


def empirical_cov(e: Ensemble, i: int, k: int) -> dict:
    """
    Sample second moment of paths i and k (no mean subtraction).

    Returns:
        dict: {"estimate": float, "standard_error": float}
    """
    if e.n_paths < 2:
        raise DomainError("An empirical covariance needs at least 2 paths")
    products = e.paths[:, i] * e.paths[:, k]
    return {
        "estimate": float(np.mean(products)),
        "standard_error": float(np.std(products, ddof=1) / np.sqrt(e.n_paths)),
    }


def empirical_correlation(e: Ensemble, i: int, k: int) -> float:
    cov = empirical_cov(e, i, k)["estimate"]
    return float(cov / np.sqrt(empirical_cov(e, i, i)["estimate"] * empirical_cov(e, k, k)["estimate"]))


def _z_score(difference: float, se: float) -> float:
    if se > 0:
        return difference / se
    return 0.0 if difference == 0 else float("inf")


def _pairs(n: int, seed: int) -> np.ndarray:
    """Grid index pairs i <= k, subsampled to mc_max_pairs."""
    i, k = np.triu_indices(n)
    pairs = np.column_stack([i, k])
    cap = int(get_config()["mc_max_pairs"])
    if len(pairs) > cap:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2 ** 31,)))
        pairs = pairs[np.sort(rng.choice(len(pairs), size=cap, replace=False))]
    return pairs


def mc_check(m: PCLSModel, grid, n_paths: int, seed: int, z: float = None,
             method: str = "joint_factorization") -> dict:
    """
    Compare empirical covariances with total_cov on grid pairs.

    A pair fails when |estimate - total_cov| exceeds z standard errors.

    Returns:
        dict: report with "pairs", "failures", "max_abs_z", "worst_pair"
    """
    if z is None:
        z = get_config()["z"]
    ensemble = simulate(m, grid, n_paths, seed, method)
    grid = ensemble.grid

    failures, max_z, worst = 0, 0.0, None
    pairs = _pairs(grid.size, seed)
    for i, k in pairs:
        estimate = empirical_cov(ensemble, i, k)
        reference = float(m.total_cov(grid[i], grid[k]))
        score = abs(_z_score(estimate["estimate"] - reference, estimate["standard_error"]))
        if score > z:
            failures += 1
        if score >= max_z:
            max_z, worst = score, [float(grid[i]), float(grid[k])]

    report = {
        "pass": failures == 0,
        "pairs": int(len(pairs)),
        "failures": failures,
        "max_abs_z": max_z,
        "worst_pair": worst,
        "z": z,
        "n_paths": n_paths,
        "method": method,
        "seed": seed,
        "fingerprint": ensemble.fingerprint,
    }
    logger.info(f"MC check: {failures} failures over {len(pairs)} pairs, max |z| {max_z:.2f}")
    return report


def compare_methods(m: PCLSModel, grid, n_paths: int, seed: int, z: float = 3.0) -> dict:
    """
    Cross-check the two simulation methods on independent seeds.

    A pair fails when the estimates differ by more than z * (SE_1 + SE_2).
    """
    seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(2)]
    joint = simulate(m, grid, n_paths, seeds[0], "joint_factorization")
    component = simulate(m, grid, n_paths, seeds[1], "component_wise")

    failures, max_ratio = 0, 0.0
    pairs = _pairs(joint.grid.size, seed)
    for i, k in pairs:
        a = empirical_cov(joint, i, k)
        b = empirical_cov(component, i, k)
        ratio = abs(_z_score(a["estimate"] - b["estimate"], a["standard_error"] + b["standard_error"]))
        failures += ratio > z
        max_ratio = max(max_ratio, ratio)

    return {
        "pass": failures == 0,
        "pairs": int(len(pairs)),
        "failures": int(failures),
        "max_ratio": max_ratio,
        "z": z,
        "seeds": seeds,
    }


def periodicity_check(m: PCLSModel, grid, n_paths: int, seed: int, z: float = 3.0) -> dict:
    """
    Empirical second-order shift check: cov at (t, u) against (t+S, u+S).

    A pair fails when the estimates differ by more than z * (SE_1 + SE_2).
    """
    grid = check_grid(grid)
    span = m.partition.span
    combined = np.unique(np.concatenate([grid, grid + span]))
    ensemble = simulate(m, combined, n_paths, seed)
    base = np.searchsorted(combined, grid)
    shifted = np.searchsorted(combined, grid + span)

    failures, max_ratio = 0, 0.0
    pairs = _pairs(grid.size, seed)
    for i, k in pairs:
        a = empirical_cov(ensemble, base[i], base[k])
        b = empirical_cov(ensemble, shifted[i], shifted[k])
        ratio = abs(_z_score(a["estimate"] - b["estimate"], a["standard_error"] + b["standard_error"]))
        failures += ratio > z
        max_ratio = max(max_ratio, ratio)

    return {
        "pass": failures == 0,
        "pairs": int(len(pairs)),
        "failures": int(failures),
        "max_ratio": max_ratio,
        "z": z,
        "span": span,
    }


def write_report(report: dict, path) -> None:
    with open(path, 'w') as f:
        json.dump(report, f, indent=2, default=str)
