"""
Symmetric eigen helpers shared by the PSD checks, repair and samplers.
"""

import logging

import numpy as np

from pcls.errors import NumericError

logger = logging.getLogger(__name__)


def min_eigenvalue(matrix: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric (Hermitian) matrix."""
    try:
        return float(np.linalg.eigvalsh(matrix)[0])
    except np.linalg.LinAlgError as e:
        raise NumericError(f"Eigen-solver failed: {e}") from e


def psd_report(matrix: np.ndarray, tol: float) -> dict:
    """
    PSD verdict for a symmetric matrix against a trace-normalized tolerance.

    Returns:
        dict: {"pass": bool, "min_eigenvalue": float, "trace": float, "size": int}
    """
    min_eig = min_eigenvalue(matrix) if matrix.size else 0.0
    trace = float(np.real(np.trace(matrix)))
    return {
        "pass": bool(min_eig >= -tol * trace),
        "min_eigenvalue": min_eig,
        "trace": trace,
        "size": int(matrix.shape[0]),
    }


def clip_eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Replace negative eigenvalues with zero and re-symmetrize."""
    try:
        eigenvalues, vectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"Eigen-decomposition failed: {e}") from e
    repaired = (vectors * np.maximum(eigenvalues, 0.0)) @ vectors.conj().T
    return (repaired + repaired.conj().T) / 2


def psd_factor(matrix: np.ndarray) -> np.ndarray:
    """
    Factor L with L @ L.T equal to the matrix, negatives clipped.

    Uses a symmetric eigendecomposition, so semidefinite matrices factor too.
    """
    try:
        eigenvalues, vectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as e:
        raise NumericError(f"Eigen-decomposition failed: {e}") from e
    if eigenvalues.size and eigenvalues[0] < 0:
        logger.debug(f"Clipping eigenvalues down to {eigenvalues[0]:.3e} before factorization")
    return vectors * np.sqrt(np.maximum(eigenvalues, 0.0))
