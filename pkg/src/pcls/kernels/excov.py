"""
Exponentially convex covariances psi(t + u) for the random weights U^j.

Two variants exist. A LaplaceMixture psi(v) = sum_m w_m exp(lambda_m v) is the
Laplace transform of a finite atomic measure and can be simulated exactly. A
ClosedForm psi is a named function that supports evaluation and PSD checks only.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from pcls.errors import DomainError, NumericError, RangeError, UnsupportedMethod

logger = logging.getLogger(__name__)

# Largest argument of exp() that stays finite in float64
LOG_FLOAT_MAX = float(np.log(np.finfo(float).max))

Seed = Union[int, np.random.SeedSequence]


class ExpConvexCov:
    """Base class: an exponentially convex function psi evaluated at v = t + u."""

    simulatable = False

    def __call__(self, v):
        raise NotImplementedError

    def eval(self, v: float) -> float:
        return float(self(v))

    def correlation(self, t, u):
        """Normalized weight correlation psi(t+u) / sqrt(psi(2t) psi(2u))."""
        return self(np.add(t, u)) / np.sqrt(self(np.multiply(2, t)) * self(np.multiply(2, u)))

    def to_dict(self) -> dict:
        raise NotImplementedError


class LaplaceMixture(ExpConvexCov):
    """psi(v) = sum_m w_m exp(lambda_m v) with w_m > 0 and distinct rates."""

    simulatable = True

    def __init__(self, weights: Sequence[float], rates: Sequence[float]):
        weights = np.array(weights, dtype=float)
        rates = np.array(rates, dtype=float)
        if weights.ndim != 1 or weights.size == 0 or weights.shape != rates.shape:
            raise DomainError("Laplace mixture needs equally long, non-empty weights and rates")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise DomainError(f"Mixture weights must be positive, got {weights.tolist()}")
        if not np.all(np.isfinite(rates)):
            raise DomainError(f"Mixture rates must be finite, got {rates.tolist()}")
        if np.unique(rates).size != rates.size:
            raise DomainError(f"Mixture rates must be distinct, got {rates.tolist()}")

        self.weights = weights
        self.rates = rates
        self.weights.setflags(write=False)
        self.rates.setflags(write=False)

    def _log_terms(self, v, log_scale):
        """log_scale_m + lambda_m v with shape v.shape + (M,), refusing terms past the float range."""
        v = np.asarray(v, dtype=float)
        log_terms = np.multiply.outer(v, self.rates) + log_scale
        if log_terms.size and np.max(log_terms) > LOG_FLOAT_MAX:
            flat = log_terms.reshape(-1, self.rates.size)
            atom = int(np.argmax(np.max(flat, axis=0)))
            raise RangeError(
                f"w * exp({self.rates[atom]} * v) overflows for atom {atom} "
                f"(max log term {float(np.max(flat[:, atom])):.1f})",
                atom=atom,
            )
        return log_terms

    def __call__(self, v):
        log_terms = self._log_terms(v, np.log(self.weights))
        with np.errstate(over="ignore"):
            value = np.sum(np.exp(log_terms), axis=-1)
        if not np.all(np.isfinite(value)):
            atom = int(np.argmax(np.max(log_terms.reshape(-1, self.rates.size), axis=0)))
            raise RangeError(f"Sum over {self.rates.size} atoms overflows (largest atom {atom})",
                             atom=atom)
        return value

    def atoms(self) -> list[tuple[float, float]]:
        """The representing measure as (rate, weight) atoms."""
        return list(zip(self.rates.tolist(), self.weights.tolist()))

    def basis(self, t):
        """Matrix sqrt(w_m) exp(lambda_m t) with shape t.shape + (M,)."""
        return np.exp(self._log_terms(t, 0.5 * np.log(self.weights)))

    def to_dict(self) -> dict:
        return {
            "type": "laplace_mixture",
            "weights": self.weights.tolist(),
            "rates": self.rates.tolist(),
        }

    def __repr__(self):
        return f"LaplaceMixture(weights={self.weights.tolist()}, rates={self.rates.tolist()})"


def _example_2_1(v):
    """psi(v) = (1 + v^2) exp(v^2 / 2)."""
    v = np.asarray(v, dtype=float)
    exponent = v * v / 2.0
    if exponent.size and np.max(exponent) > LOG_FLOAT_MAX:
        raise RangeError(f"(1+v^2) exp(v^2/2) overflows at |v|={float(np.max(np.abs(v)))}")
    return (1.0 + v * v) * np.exp(exponent)


CLOSED_FORMS: dict[str, Callable] = {
    "example_2_1": _example_2_1,
    "quadratic_gaussian": _example_2_1,
}


def register_closed_form(name: str, func: Callable) -> None:
    """Register a named closed-form psi (vectorized over numpy arrays)."""
    if name in CLOSED_FORMS:
        logger.warning(f"Replacing closed-form covariance '{name}'")
    CLOSED_FORMS[name] = func


class ClosedForm(ExpConvexCov):
    """A named closed-form psi; evaluation and PSD checks only."""

    def __init__(self, name: str):
        if name not in CLOSED_FORMS:
            raise DomainError(
                f"Unknown closed-form covariance '{name}'. Known: {', '.join(sorted(CLOSED_FORMS))}"
            )
        self.name = name

    def __call__(self, v):
        with np.errstate(over="ignore", invalid="ignore"):
            value = np.asarray(CLOSED_FORMS[self.name](v), dtype=float)
        if not np.all(np.isfinite(value)):
            raise RangeError(f"Closed form '{self.name}' is not finite on the requested arguments")
        return value

    def to_dict(self) -> dict:
        return {"type": "closed_form", "name": self.name}

    def __repr__(self):
        return f"ClosedForm({self.name!r})"


def excov_from_dict(data: dict) -> ExpConvexCov:
    kind = data.get("type")
    if kind == "laplace_mixture":
        return LaplaceMixture(data["weights"], data["rates"])
    if kind == "closed_form":
        return ClosedForm(data["name"])
    raise DomainError(f"Unknown exponentially convex covariance type '{kind}'")


@dataclass(frozen=True, eq=False)
class WeightProcessRealization:
    """
    One draw of U(t) = sum_m xi_m sqrt(w_m) exp(lambda_m t).

    coefficients holds xi_m * sqrt(w_m) for each mixture atom.
    """

    coefficients: np.ndarray
    rates: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(np.multiply.outer(t, self.rates)) @ self.coefficients


def eval_psi(psi: ExpConvexCov, v: float) -> float:
    """Evaluate psi at v."""
    return psi.eval(v)


def gram_psd_check(psi: ExpConvexCov, points: Sequence[float], tol: float) -> dict:
    """
    Check that the Gram matrix [psi(t_i + t_j)] is positive semidefinite.

    Args:
        psi: covariance to test
        points: distinct finite points t_i
        tol: relative tolerance; pass when min eigenvalue >= -tol * trace

    Returns:
        dict: {"pass": bool, "min_eigenvalue": float, "trace": float, "size": int}
    """
    points = np.asarray(points, dtype=float)
    if not np.all(np.isfinite(points)):
        raise DomainError("Gram points must be finite")
    if np.unique(points).size != points.size:
        raise DomainError("Gram points must be distinct")
    if tol < 0:
        raise DomainError(f"Tolerance must be >= 0, got {tol}")

    gram = psi(np.add.outer(points, points))
    try:
        eigenvalues = np.linalg.eigvalsh(gram)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"Eigen-solver failed on psi Gram matrix: {e}") from e

    min_eig = float(eigenvalues[0])
    trace = float(np.trace(gram))
    return {
        "pass": bool(min_eig >= -tol * trace),
        "min_eigenvalue": min_eig,
        "trace": trace,
        "size": int(points.size),
    }


def sample_weight_process(psi: ExpConvexCov, rng_seed: Seed) -> WeightProcessRealization:
    """
    Draw a Gaussian weight process with covariance psi(t + u).

    Deterministic given the seed.

    Raises:
        UnsupportedMethod: if psi is not a LaplaceMixture
    """
    if not isinstance(psi, LaplaceMixture):
        raise UnsupportedMethod(f"{psi!r} has no finite Laplace representation to sample from")
    rng = np.random.default_rng(rng_seed)
    xi = rng.standard_normal(psi.rates.size)
    return WeightProcessRealization(coefficients=xi * np.sqrt(psi.weights), rates=psi.rates)
