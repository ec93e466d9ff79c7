"""
Stationary covariance families gamma(tau) paired with their spectral measures.

Only families with closed-form spectral pairs are offered, so the frequency
domain reconstruction has a trustworthy reference:

    exponential     sigma2 exp(-theta |tau|)      Cauchy density
    squared_exp     sigma2 exp(-tau^2 / (2 l^2))  Gaussian density
    cosine_mixture  sum_r p_r cos(omega_r tau)    atoms p_r/2 at +-omega_r
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from pcls.config import get_config
from pcls.errors import CoverageError, DomainError

logger = logging.getLogger(__name__)

# Tail mass left outside the uniform core of the exponential default grid.
# Past the core the grid grows geometrically by TAIL_RATIO until the remaining
# Cauchy tail, which decays like 1/L, is below the configured tolerance.
CORE_TAIL_MASS = 4e-5
TAIL_RATIO = 1.05


def resolve_tail_tol(tail_tol: Optional[float] = None) -> float:
    """Allowed spectral mass outside a grid relative to gamma(0); config spectral_tail_tol when None."""
    return float(get_config()["spectral_tail_tol"] if tail_tol is None else tail_tol)


@dataclass(frozen=True, eq=False)
class DiscreteSpectralMeasure:
    """Nonnegative masses G(lambda_k) on frequencies lambda_k (radians per time unit)."""

    frequencies: np.ndarray
    masses: np.ndarray
    atomic: bool = False

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))

    def transform(self, tau):
        """Bochner inverse: sum_k G(lambda_k) exp(i lambda_k tau)."""
        tau = np.asarray(tau, dtype=float)
        return np.exp(1j * np.multiply.outer(tau, self.frequencies)) @ self.masses

    def scaled(self, factor) -> "DiscreteSpectralMeasure":
        return DiscreteSpectralMeasure(self.frequencies, self.masses * factor, self.atomic)


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    """Composite trapezoid weights for strictly increasing nodes."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.size < 2:
        raise DomainError("A quadrature grid needs at least two nodes")
    gaps = np.diff(nodes)
    if np.any(gaps <= 0):
        raise DomainError("Frequency grid must be strictly increasing")
    weights = np.zeros_like(nodes)
    weights[:-1] += gaps / 2
    weights[1:] += gaps / 2
    return weights


class StationaryCov:
    """A real, even stationary covariance with a closed-form spectral measure."""

    family = ""
    atomic = False

    @property
    def variance(self) -> float:
        return float(self(0.0))

    def __call__(self, tau):
        raise NotImplementedError

    def eval_cov(self, tau: float) -> float:
        return float(self(tau))

    def correlation(self, tau):
        """Normalized stationary factor c(tau) = gamma(tau) / gamma(0)."""
        return self(tau) / self.variance

    def density(self, lam):
        raise NotImplementedError(f"{self.family} has an atomic spectrum")

    def cdf(self, lam):
        raise NotImplementedError(f"{self.family} has an atomic spectrum")

    def tail_mass(self, lo: float, hi: float) -> float:
        """Spectral mass outside [lo, hi]."""
        return float(self.variance * (self.cdf(lo) + 1.0 - self.cdf(hi)))

    def default_grid(self, tail_tol: Optional[float] = None) -> Optional[np.ndarray]:
        """Symmetric frequency grid leaving out less than tail_tol * gamma(0), or None for atoms."""
        return None

    def spectral_measure(self, frequencies=None, weights=None,
                         tail_tol: Optional[float] = None) -> DiscreteSpectralMeasure:
        """
        Discretize the spectral measure.

        Density families use masses = density x quadrature weight on the given
        (or default) grid; atomic families return their exact atoms.

        Raises:
            CoverageError: if the grid leaves more than tail_tol * gamma(0) outside it
        """
        tail_tol = resolve_tail_tol(tail_tol)
        if frequencies is None:
            frequencies = self.default_grid(tail_tol)
        frequencies = np.asarray(frequencies, dtype=float)
        if weights is None:
            weights = trapezoid_weights(frequencies)

        tail = self.tail_mass(frequencies[0], frequencies[-1])
        if tail > tail_tol * self.variance:
            raise CoverageError(
                f"{self.family} grid [{frequencies[0]:g}, {frequencies[-1]:g}] leaves "
                f"spectral mass {tail:.3e} outside (allowed {tail_tol * self.variance:.3e})",
                tail_mass=tail,
            )
        masses = self.density(frequencies) * np.asarray(weights, dtype=float)
        return DiscreteSpectralMeasure(frequencies, masses)

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(StationaryCov):
    """sigma2 exp(-theta |tau|); spectral density sigma2 (theta/pi) / (theta^2 + lambda^2)."""

    theta: float
    sigma2: float = 1.0
    family = "exponential"

    def __post_init__(self):
        if not self.theta > 0 or not self.sigma2 > 0:
            raise DomainError(f"exponential needs theta > 0 and sigma2 > 0, got {self}")

    def __call__(self, tau):
        return self.sigma2 * np.exp(-self.theta * np.abs(tau))

    def density(self, lam):
        lam = np.asarray(lam, dtype=float)
        return self.sigma2 * (self.theta / np.pi) / (self.theta ** 2 + lam ** 2)

    def cdf(self, lam):
        return 0.5 + np.arctan(np.asarray(lam, dtype=float) / self.theta) / np.pi

    def default_grid(self, tail_tol: Optional[float] = None) -> np.ndarray:
        # The Cauchy tail outside [-L, L] is (2/pi) arctan(theta/L) of gamma(0).
        # The grid keeps it at 0.8 * tail_tol. With step theta/4 in the core the
        # aliased copies of gamma sit at lags 8*pi/theta apart.
        tail_tol = resolve_tail_tol(tail_tol)
        half_width = self.theta / np.tan(0.4 * np.pi * tail_tol)
        core_width = self.theta / np.tan(0.4 * np.pi * max(tail_tol, CORE_TAIL_MASS))
        step = self.theta / 4.0
        n = int(np.ceil(core_width / step))
        core = step * np.arange(-n, n + 1)
        edge = float(core[-1])
        if edge >= half_width:
            return core
        m = int(np.ceil(np.log(half_width / edge) / np.log(TAIL_RATIO)))
        tail = edge * TAIL_RATIO ** np.arange(1, m + 1)
        return np.concatenate((-tail[::-1], core, tail))

    def to_dict(self) -> dict:
        return {"family": self.family, "theta": self.theta, "sigma2": self.sigma2}


@dataclass(frozen=True)
class SquaredExp(StationaryCov):
    """sigma2 exp(-tau^2/(2 l^2)); spectral density sigma2 l/sqrt(2 pi) exp(-l^2 lambda^2/2)."""

    length: float
    sigma2: float = 1.0
    family = "squared_exp"

    def __post_init__(self):
        if not self.length > 0 or not self.sigma2 > 0:
            raise DomainError(f"squared_exp needs length > 0 and sigma2 > 0, got {self}")

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        return self.sigma2 * np.exp(-tau * tau / (2.0 * self.length ** 2))

    def density(self, lam):
        lam = np.asarray(lam, dtype=float)
        ell = self.length
        return self.sigma2 * ell / np.sqrt(2.0 * np.pi) * np.exp(-(ell * lam) ** 2 / 2.0)

    def cdf(self, lam):
        return special.ndtr(self.length * np.asarray(lam, dtype=float))

    def default_grid(self, tail_tol: Optional[float] = None) -> np.ndarray:
        # Out to 9 standard deviations: the tail is 2e-19 of gamma(0)
        step = 0.25 / self.length
        n = int(np.ceil(9.0 / self.length / step))
        return step * np.arange(-n, n + 1)

    def to_dict(self) -> dict:
        return {"family": self.family, "length": self.length, "sigma2": self.sigma2}


@dataclass(frozen=True)
class CosineMixture(StationaryCov):
    """sum_r p_r cos(omega_r tau); spectral atoms p_r/2 at +-omega_r."""

    masses: tuple = field(default=())
    frequencies: tuple = field(default=())
    family = "cosine_mixture"
    atomic = True

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(p) for p in self.masses))
        object.__setattr__(self, "frequencies", tuple(float(w) for w in self.frequencies))
        if not self.masses or len(self.masses) != len(self.frequencies):
            raise DomainError("cosine_mixture needs equally long, non-empty masses and frequencies")
        if any(p <= 0 for p in self.masses) or any(w < 0 for w in self.frequencies):
            raise DomainError("cosine_mixture needs masses > 0 and frequencies >= 0")

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        return np.cos(np.multiply.outer(tau, self.frequencies)) @ np.asarray(self.masses)

    def tail_mass(self, lo: float, hi: float) -> float:
        return 0.0

    def spectral_measure(self, frequencies=None, weights=None,
                         tail_tol: Optional[float] = None) -> DiscreteSpectralMeasure:
        atoms: dict[float, float] = {}
        for p, w in zip(self.masses, self.frequencies):
            if w == 0.0:
                atoms[0.0] = atoms.get(0.0, 0.0) + p
            else:
                atoms[-w] = atoms.get(-w, 0.0) + p / 2.0
                atoms[w] = atoms.get(w, 0.0) + p / 2.0
        freqs = np.array(sorted(atoms))
        return DiscreteSpectralMeasure(freqs, np.array([atoms[f] for f in freqs]), atomic=True)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "masses": list(self.masses),
            "frequencies": list(self.frequencies),
        }


def stationary_from_dict(data: dict) -> StationaryCov:
    family = data.get("family")
    if family == "exponential":
        return Exponential(theta=float(data["theta"]), sigma2=float(data.get("sigma2", 1.0)))
    if family == "squared_exp":
        return SquaredExp(length=float(data["length"]), sigma2=float(data.get("sigma2", 1.0)))
    if family == "cosine_mixture":
        return CosineMixture(masses=tuple(data["masses"]), frequencies=tuple(data["frequencies"]))
    raise DomainError(f"Unknown stationary covariance family '{family}'")


def eval_cov(g: StationaryCov, tau: float) -> float:
    """Evaluate gamma(tau)."""
    return g.eval_cov(tau)


def spectral_measure(g: StationaryCov, grid=None,
                     tail_tol: Optional[float] = None) -> DiscreteSpectralMeasure:
    """
    Spectral measure of g on a grid.

    Args:
        g: stationary covariance
        grid: object with ls_frequencies / ls_weights (e.g. a DiscreteSpectralGrid),
            or None for the family's default grid
        tail_tol: allowed spectral mass outside the grid, relative to gamma(0)
            (config spectral_tail_tol when None)
    """
    frequencies = getattr(grid, "ls_frequencies", None)
    weights = getattr(grid, "ls_weights", None)
    return g.spectral_measure(frequencies, weights, tail_tol=tail_tol)
