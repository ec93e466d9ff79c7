"""
Discretized time-varying spectral measures of the PC-LS model.

The LS part contributes masses F_{j,k}(lambda, t, u) built from the stationary
spectral measures G_j, the PC part contributes Theta_{j,k}(lambda, t, u) built
from the lifted masses theta~_{j,k} of the PC sequence. Both live on the
frequency diagonal lambda = omega, so only diagonal masses are stored.

Inner products conjugate their second argument. The reconstruction of
cov(X(t), X(u)) is

    sum_lambda e^{i lambda (t-u)} F_{m,n}(lambda, t, u)
  + sum_lambda e^{i lambda t} e^{i lambda (m/T - t)} conj(e^{i lambda u} e^{i lambda (n/T - u)}) Theta_{m,n}(lambda, t, u)

for t in B_m and u in B_n.
"""

import csv
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from pcls.config import get_config
from pcls.core import PCLSModel
from pcls.errors import DomainError, LiftError, ReconstructionError
from pcls.kernels.pc_component import PCSequenceSpec
from pcls.kernels.stationary import trapezoid_weights

logger = logging.getLogger(__name__)

# Decay level at which the lag sum of a parametric PC sequence is truncated
LAG_TRUNCATION = 1e-17

# Allowed imaginary residue of a reconstruction, relative to 1 + |value|
IMAG_TOL = 1e-10

CONVENTION = {
    "conjugation": "second argument",
    "pc_phase": "exp(i lambda (m - n) / T) for t in B_m, u in B_n",
    "omega_sign": "-",
}


@dataclass(frozen=True, eq=False)
class DiscreteSpectralGrid:
    """
    Frequency grids for the reconstruction.

    Attributes:
        ls_frequencies: symmetric grid on the real line for density families,
            None to use each family's default grid
        ls_weights: quadrature weights for ls_frequencies (trapezoid when None)
        pc_size: number R of points 2 pi r / R on [0, 2 pi), None to size it
            from the PC sequence and widen it for pairs many periods apart
    """

    ls_frequencies: Optional[np.ndarray] = None
    ls_weights: Optional[np.ndarray] = None
    pc_size: Optional[int] = None

    def __post_init__(self):
        if self.ls_frequencies is not None:
            freqs = np.asarray(self.ls_frequencies, dtype=float)
            object.__setattr__(self, "ls_frequencies", freqs)
            weights = trapezoid_weights(freqs) if self.ls_weights is None else \
                np.asarray(self.ls_weights, dtype=float)
            if weights.shape != freqs.shape or np.any(weights <= 0):
                raise DomainError("ls_weights must be positive, one per frequency")
            object.__setattr__(self, "ls_weights", weights)
        elif self.ls_weights is not None:
            raise DomainError("ls_weights given without ls_frequencies")
        if self.pc_size is not None and int(self.pc_size) < 1:
            raise DomainError(f"pc_size must be >= 1, got {self.pc_size}")

    @staticmethod
    def pc_frequencies_for(size: int) -> np.ndarray:
        return 2.0 * np.pi * np.arange(size) / size


@dataclass(frozen=True, eq=False)
class PCSpectralLift:
    """
    Masses theta~_{j,k}(lambda_r) of a PC sequence on [0, 2 pi).

    masses[p, q, r] serves every (j, k) with j-1 = p and k-1 = q modulo T.
    The R-point grid wraps period lags modulo R, so the lift reproduces
    gamma^p_{jk} only while j and k are at most capacity periods apart.
    """

    period: int
    frequencies: np.ndarray
    masses: np.ndarray
    residual: float
    lags: int = 0
    capacity: int = 0

    def period_lag(self, j: int, k: int) -> int:
        """Number of whole periods between blocks j and k."""
        T = self.period
        return abs((j - 1) // T - (k - 1) // T)

    def covers(self, j: int, k: int) -> bool:
        return self.period_lag(j, k) <= self.capacity

    def theta(self, j: int, k: int) -> np.ndarray:
        T = self.period
        return self.masses[(j - 1) % T, (k - 1) % T]

    def reconstruct(self, j: int, k: int) -> complex:
        """
        sum_r e^{i lambda_r (j-k)/T} theta~_{j,k}(lambda_r).

        Raises:
            LiftError: if j and k are more than capacity periods apart
        """
        if not self.covers(j, k):
            raise LiftError(
                f"Blocks {j} and {k} are {self.period_lag(j, k)} periods apart; "
                f"a lift on {self.frequencies.size} frequencies reaches {self.capacity}"
            )
        phase = np.exp(1j * self.frequencies * (j - k) / self.period)
        return complex(phase @ self.theta(j, k))


def _lag_support(pcseq: PCSequenceSpec) -> Optional[int]:
    """Largest period lag H with non-negligible lag covariance."""
    if pcseq.max_lag is not None:
        return pcseq.max_lag
    r = abs(pcseq.rho)
    if r == 0.0:
        return 0
    # |rho|^{hT - (T-1)} <= LAG_TRUNCATION
    return int(np.ceil((np.log(LAG_TRUNCATION) / np.log(r) + pcseq.period - 1) / pcseq.period))


def pc_spectral_lift(pcseq: PCSequenceSpec, grid: Optional[DiscreteSpectralGrid] = None,
                     n_periods: int = 2) -> PCSpectralLift:
    """
    Lift a PC sequence to discrete spectral masses on [0, 2 pi).

    The T-variate stationary sequence with lag covariances
    C_pq(h) = E[X_{hT+p+1} X_{q+1}] has the discrete spectral matrix
    f_pq(lambda_r) = (1/R) sum_{|h| <= H} C_pq(h) e^{-i lambda_r h}, and
    theta~_{pq}(lambda) = e^{-i lambda (p-q)/T} f_pq(lambda). Lag d is
    rebuilt as sum_{h = d mod R} C_pq(h), which is exact for |d| <= R - H - 1.
    By default R = H + n_periods + 1, so pairs up to n_periods periods apart
    are exact. The round trip is verified on every lag the lift claims.

    Args:
        pcseq: the PC sequence
        grid: spectral grid; its pc_size fixes R
        n_periods: K, the lift must reproduce gamma^p_{jk} for j and k
            within the first K periods

    Raises:
        LiftError: if the grid is too small for K periods, or the round-trip
            residual exceeds 1e-8 * max |gamma^p|
    """
    if n_periods < 1:
        raise DomainError(f"n_periods must be >= 1, got {n_periods}")
    T = pcseq.period
    support = _lag_support(pcseq)
    size = grid.pc_size if grid is not None and grid.pc_size is not None else None
    if size is None:
        size = support + n_periods + 1
    lags = max(min(support, size - n_periods), 0)
    capacity = size - lags - 1
    if lags < support:
        # Lags past the truncation are dropped, not wrapped
        capacity = min(capacity, lags)
    if capacity < n_periods - 1:
        raise LiftError(f"pc grid of {size} points cannot carry {n_periods} periods of lags")
    if lags < support:
        logger.warning(f"Truncating PC lag covariance at {lags} of {support} periods")

    frequencies = DiscreteSpectralGrid.pc_frequencies_for(size)
    h = np.arange(-lags, lags + 1)
    p = np.arange(T)
    # cov[p, q, h]
    cov = pcseq.lag_cov(p[:, None, None], p[None, :, None], h[None, None, :])
    fourier = np.exp(-1j * np.multiply.outer(h, frequencies)) / size
    spectral = cov @ fourier
    offset = np.exp(-1j * np.subtract.outer(p, p)[:, :, None] * frequencies / T)
    masses = offset * spectral

    d = np.arange(-capacity, capacity + 1)
    rebuilt = spectral @ np.exp(1j * np.multiply.outer(frequencies, d))
    target = pcseq.lag_cov(p[:, None, None], p[None, :, None], d[None, None, :])
    residual = float(np.max(np.abs(rebuilt - target)))
    scale = float(np.max(np.abs(target)))
    if residual > 1e-8 * scale:
        raise LiftError(f"PC spectral lift round-trip residual {residual:.3e} exceeds {1e-8 * scale:.3e}")

    diagonal = np.real(np.einsum("ppr->pr", masses))
    if np.min(diagonal) < -1e-12 * scale:
        logger.warning(f"Lift has negative diagonal mass {float(np.min(diagonal)):.3e}")
    logger.info(f"Lifted PC sequence onto {size} frequencies, exact up to {capacity} periods, "
                f"residual {residual:.3e}")
    return PCSpectralLift(T, frequencies, masses, residual=residual, lags=lags, capacity=capacity)


class SpectralKernel:
    """
    F and Theta masses of a model on a DiscreteSpectralGrid.

    The LS axis is the union of the nodes of every G_j, and g_masses[q] holds
    G_q on that axis (zero where G_q has no node).
    """

    def __init__(self, model: PCLSModel, grid: Optional[DiscreteSpectralGrid] = None):
        self.model = model
        self.grid = grid if grid is not None else DiscreteSpectralGrid()
        self.atomic = all(g.atomic for g in model.gamma) if model.include_ls else True

        self.ls_axis = np.zeros(0)
        self.g_masses = np.zeros((0, 0))
        if model.include_ls:
            measures = [g.spectral_measure(self.grid.ls_frequencies, self.grid.ls_weights)
                        for g in model.gamma]
            self.ls_axis = np.unique(np.concatenate([mu.frequencies for mu in measures]))
            self.g_masses = np.zeros((len(measures), self.ls_axis.size))
            for q, mu in enumerate(measures):
                self.g_masses[q, np.searchsorted(self.ls_axis, mu.frequencies)] += mu.masses

        self.lift = None
        self._wide_lifts: dict[int, PCSpectralLift] = {}
        if model.include_pc:
            self.lift = pc_spectral_lift(model.pcseq, self.grid)

    @property
    def pc_frequencies(self) -> np.ndarray:
        return self.lift.frequencies if self.lift is not None else np.zeros(0)

    def lift_for(self, j: int, k: int) -> PCSpectralLift:
        """
        A lift that is exact for blocks j and k.

        Pairs further apart than the base lift reaches get a wider lift, sized
        to the next power of two periods and cached. A grid with a fixed
        pc_size cannot be widened.

        Raises:
            LiftError: if pc_size is fixed and j, k are too far apart
        """
        lag = self.lift.period_lag(j, k)
        if lag <= self.lift.capacity:
            return self.lift
        if self.grid.pc_size is not None:
            raise LiftError(
                f"Blocks {j} and {k} are {lag} periods apart; pc_size={self.grid.pc_size} "
                f"reaches {self.lift.capacity}. Raise pc_size or leave it unset"
            )
        periods = 1 << int(np.ceil(np.log2(lag + 1)))
        if periods not in self._wide_lifts:
            self._wide_lifts[periods] = pc_spectral_lift(self.model.pcseq, self.grid, n_periods=periods)
        return self._wide_lifts[periods]

    def _check_block(self, j: int, t: float):
        if self.model.partition.locate(t)[0] != j:
            raise DomainError(f"Time {t} is not inside block {j}")

    def f_masses(self, j: int, k: int, t: float, u: float) -> np.ndarray:
        """F_{j,k}(lambda, t, u) on the LS axis for t in B_j, u in B_k."""
        self._check_block(j, t)
        self._check_block(k, u)
        out = np.zeros(self.ls_axis.size, dtype=complex)
        if not self.model.include_ls or abs(j - k) > 1:
            return out
        # U^w is shared by blocks w and w+1
        shared = [w for w in (min(j, k) - 1, min(j, k)) if w >= 1 and w >= max(j, k) - 1]
        for w in shared:
            q = int(self.model._param_index(w))
            out += float(self.model.weight_cov(w, t, u)) * self.g_masses[q]
        return out

    def theta_masses(self, j: int, k: int, t: float, u: float) -> np.ndarray:
        """Theta_{j,k}(lambda, t, u) on the pc grid for t in B_j, u in B_k."""
        partition = self.model.partition
        m, a_t = partition.locate(t)
        n, a_u = partition.locate(u)
        if m != j or n != k:
            raise DomainError(f"Times ({t}, {u}) are not inside blocks ({j}, {k})")
        if not self.model.include_pc:
            return np.zeros(0, dtype=complex)
        a_j = float(partition.block_length(j))
        a_k = float(partition.block_length(k))
        if j == k:
            factor = 2.0 * a_t * a_u / (a_j * (a_t + a_u))
        else:
            factor = a_t * a_u / (a_j * a_k)
        return float(factor) * self.lift_for(j, k).theta(j, k)

    def reconstruct(self, t: float, u: float) -> complex:
        """Frequency-domain value of cov(X(t), X(u)), imaginary part included."""
        m = int(self.model.partition.locate(t)[0])
        n = int(self.model.partition.locate(u)[0])
        value = 0j
        if self.model.include_ls:
            value += np.exp(1j * self.ls_axis * (t - u)) @ self.f_masses(m, n, t, u)
        if self.model.include_pc:
            lam = self.lift_for(m, n).frequencies
            T = self.model.partition.period
            left = np.exp(1j * lam * t) * np.exp(1j * lam * (m / T - t))
            right = np.exp(1j * lam * u) * np.exp(1j * lam * (n / T - u))
            value += (left * np.conj(right)) @ self.theta_masses(m, n, t, u)
        return complex(value)

    def metadata(self) -> dict:
        return {
            **CONVENTION,
            "ls_nodes": int(self.ls_axis.size),
            "pc_nodes": int(self.pc_frequencies.size),
            "atomic": self.atomic,
            "lift_residual": None if self.lift is None else self.lift.residual,
        }


@lru_cache(maxsize=8)
def spectral_kernel(m: PCLSModel, g: Optional[DiscreteSpectralGrid] = None) -> SpectralKernel:
    """Build (and cache per model and grid object) the spectral kernel."""
    return SpectralKernel(m, g)


def F_kernel(m: PCLSModel, g: Optional[DiscreteSpectralGrid], j: int, k: int,
             lam_index: int, t: float, u: float) -> complex:
    """F_{j,k} mass at the lam_index-th node of the LS axis."""
    return complex(spectral_kernel(m, g).f_masses(j, k, t, u)[lam_index])


def theta_kernel(m: PCLSModel, g: Optional[DiscreteSpectralGrid], j: int, k: int,
                 lam_index: int, t: float, u: float) -> complex:
    """Theta_{j,k} mass at the lam_index-th pc frequency."""
    return complex(spectral_kernel(m, g).theta_masses(j, k, t, u)[lam_index])


def reconstruct_cov(m: PCLSModel, g: Optional[DiscreteSpectralGrid], t: float, u: float) -> float:
    """
    Rebuild cov(X(t), X(u)) from the F + K Theta spectral kernel.

    Raises:
        ReconstructionError: if the imaginary residue exceeds 1e-10 * (1 + |value|)
    """
    value = spectral_kernel(m, g).reconstruct(t, u)
    if abs(value.imag) > IMAG_TOL * (1.0 + abs(value.real)):
        raise ReconstructionError(
            f"Reconstruction at ({t}, {u}) has imaginary part {value.imag:.3e}"
        )
    return float(value.real)


def spectral_check(m: PCLSModel, n_pairs: int = 50, seed: int = 0, tol: Optional[float] = None,
                   g: Optional[DiscreteSpectralGrid] = None, periods: int = 2) -> dict:
    """
    Compare reconstruct_cov with total_cov on random pairs in (0, periods * S].

    Deviations are scaled by 1 + |total_cov|. The default tolerance is
    tol_spec_atomic for models without density spectra, tol_spec_density
    otherwise.

    Returns:
        dict: report with "pass", "max_deviation", "worst_pair", "tol" and
        the reconstruction convention
    """
    if n_pairs < 1:
        raise DomainError(f"n_pairs must be >= 1, got {n_pairs}")
    if periods < 1:
        raise DomainError(f"periods must be >= 1, got {periods}")
    kernel = spectral_kernel(m, g)
    if tol is None:
        config = get_config()
        tol = config["tol_spec_atomic"] if kernel.atomic else config["tol_spec_density"]

    rng = np.random.default_rng(seed)
    span = periods * m.partition.span
    # (0, span] keeps every draw strictly positive
    pairs = span - rng.uniform(0.0, span, size=(n_pairs, 2))

    worst, worst_pair = 0.0, None
    for t, u in pairs:
        reference = float(m.total_cov(t, u))
        deviation = abs(reconstruct_cov(m, g, t, u) - reference) / (1.0 + abs(reference))
        if deviation >= worst:
            worst, worst_pair = deviation, [float(t), float(u)]

    report = {
        "pass": bool(worst <= tol),
        "pairs": int(n_pairs),
        "max_deviation": worst,
        "worst_pair": worst_pair,
        "tol": tol,
        "periods": int(periods),
        "convention": kernel.metadata(),
    }
    logger.info(f"Spectral check over {n_pairs} pairs: max deviation {worst:.3e} (tol {tol:g})")
    return report


def spectral_dump(m: PCLSModel, g: Optional[DiscreteSpectralGrid], t: float, u: float, out) -> int:
    """
    Write the nonzero F and Theta masses at (t, u) as CSV.

    Columns: j, k, lambda, mass_re, mass_im, kind (F or Theta).

    Returns:
        int: number of rows written
    """
    kernel = spectral_kernel(m, g)
    j = int(m.partition.locate(t)[0])
    k = int(m.partition.locate(u)[0])
    blocks = [
        ("F", kernel.ls_axis, kernel.f_masses(j, k, t, u)),
        ("Theta", kernel.lift_for(j, k).frequencies if m.include_pc else kernel.pc_frequencies,
         kernel.theta_masses(j, k, t, u)),
    ]

    rows = 0
    writer = csv.writer(out)
    writer.writerow(["j", "k", "lambda", "mass_re", "mass_im", "kind"])
    for kind, frequencies, masses in blocks:
        for lam, mass in zip(frequencies, masses):
            if mass != 0:
                writer.writerow([j, k, repr(float(lam)), repr(float(mass.real)),
                                 repr(float(mass.imag)), kind])
                rows += 1
    return rows
