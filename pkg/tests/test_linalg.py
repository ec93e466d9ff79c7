"""
Tests for the symmetric eigen helpers.
"""

from unittest.mock import patch

import numpy as np
import pytest

from pcls.errors import NumericError
from pcls.linalg import clip_eigenvalues, min_eigenvalue, psd_factor, psd_report


@pytest.fixture
def indefinite():
    """Eigenvalues -1 and 3."""
    return np.array([[1.0, 2.0], [2.0, 1.0]])


# === Tests for PSD reports ===

class TestPsdReport:
    """Tests for min_eigenvalue and psd_report."""

    def test_min_eigenvalue(self, indefinite):
        """Smallest eigenvalue of a symmetric matrix."""
        assert min_eigenvalue(np.array([[2.0, 1.0], [1.0, 2.0]])) == pytest.approx(1.0)
        assert min_eigenvalue(indefinite) == pytest.approx(-1.0)

    def test_indefinite_fails(self, indefinite):
        """-1 is far below -tol * trace."""
        report = psd_report(indefinite, 1e-8)
        assert not report["pass"]
        assert report["trace"] == 2.0
        assert report["size"] == 2

    def test_tolerance_is_relative_to_trace(self):
        """A tiny negative eigenvalue passes when it is within tol * trace."""
        matrix = np.diag([100.0, -1e-7])
        assert psd_report(matrix, 1e-8)["pass"]
        assert not psd_report(matrix, 1e-10)["pass"]

    def test_empty_matrix(self):
        """An empty matrix passes trivially."""
        report = psd_report(np.zeros((0, 0)), 1e-8)
        assert report["pass"]
        assert report["size"] == 0

    def test_solver_failure(self):
        """Eigen-solver errors surface as NumericError."""
        with patch('numpy.linalg.eigvalsh', side_effect=np.linalg.LinAlgError("no convergence")):
            with pytest.raises(NumericError):
                min_eigenvalue(np.eye(2))


# === Tests for repair and factors ===

class TestRepairAndFactor:
    """Tests for clip_eigenvalues and psd_factor."""

    def test_clip(self, indefinite):
        """Dropping the -1 eigenvalue leaves 3/2 times the all-ones matrix."""
        np.testing.assert_allclose(clip_eigenvalues(indefinite), np.full((2, 2), 1.5), atol=1e-12)

    def test_clip_keeps_psd_matrices(self):
        """A PSD matrix is unchanged."""
        rng = np.random.default_rng(0)
        a = rng.standard_normal((5, 5))
        matrix = a @ a.T
        np.testing.assert_allclose(clip_eigenvalues(matrix), matrix, atol=1e-10)

    def test_factor_reproduces_matrix(self):
        """L @ L.T gives back a PSD matrix."""
        rng = np.random.default_rng(1)
        a = rng.standard_normal((6, 4))
        matrix = a @ a.T
        factor = psd_factor(matrix)
        np.testing.assert_allclose(factor @ factor.T, matrix, atol=1e-10)

    def test_factor_singular(self):
        """Rank-one matrices factor without error."""
        matrix = np.ones((3, 3))
        factor = psd_factor(matrix)
        np.testing.assert_allclose(factor @ factor.T, matrix, atol=1e-12)

    def test_factor_clips_negatives(self, indefinite):
        """The factor of an indefinite matrix reproduces its clipped version."""
        factor = psd_factor(indefinite)
        np.testing.assert_allclose(factor @ factor.T, clip_eigenvalues(indefinite), atol=1e-12)
