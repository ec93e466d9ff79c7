"""
Tests for the discretized spectral kernel and the frequency-domain
reconstruction of the covariance.
"""

import csv
import io
from unittest.mock import patch

import numpy as np
import pytest

from tests.conftest import make_default_model
from pcls.errors import CoverageError, DomainError, LiftError, ReconstructionError
from pcls.kernels.pc_component import PCSequenceSpec
from pcls.kernels.stationary import CosineMixture
from pcls.spectral import (
    DiscreteSpectralGrid,
    F_kernel,
    SpectralKernel,
    pc_spectral_lift,
    reconstruct_cov,
    spectral_check,
    spectral_dump,
    spectral_kernel,
    theta_kernel,
)


@pytest.fixture
def cosine_model():
    """Both stationary parts are cos(tau)."""
    unit = CosineMixture(masses=(1.0,), frequencies=(1.0,))
    return make_default_model(gamma=[unit, unit])


# === Tests for DiscreteSpectralGrid ===

class TestDiscreteSpectralGrid:
    """Tests for grid validation."""

    def test_default_weights_are_trapezoid(self):
        """Weights default to the trapezoid rule."""
        g = DiscreteSpectralGrid(ls_frequencies=[-1.0, 0.0, 1.0])
        np.testing.assert_allclose(g.ls_weights, [0.5, 1.0, 0.5])

    def test_weights_without_frequencies(self):
        """Weights need frequencies."""
        with pytest.raises(DomainError):
            DiscreteSpectralGrid(ls_weights=[1.0])

    def test_bad_pc_size(self):
        """pc_size must be >= 1."""
        with pytest.raises(DomainError):
            DiscreteSpectralGrid(pc_size=0)

    def test_pc_frequencies(self):
        """2 pi r / R on [0, 2 pi)."""
        np.testing.assert_allclose(DiscreteSpectralGrid.pc_frequencies_for(4),
                                   [0.0, np.pi / 2, np.pi, 3 * np.pi / 2])


# === Tests for pc_spectral_lift ===

class TestPCSpectralLift:
    """Tests for the discrete lift of a PC sequence."""

    def test_default_round_trip(self):
        """sigma = [1, 2], rho = 0.5 reproduces gamma^p on two periods."""
        seq = PCSequenceSpec.parametric([1.0, 2.0], 0.5)
        lift = pc_spectral_lift(seq)
        assert lift.residual <= 1e-8
        for j in range(1, 5):
            for k in range(1, 5):
                assert lift.reconstruct(j, k) == pytest.approx(float(seq.gamma(j, k)), abs=1e-10)

    def test_stationary_ar1(self):
        """T = 1 gives the sampled AR(1) spectral density."""
        rho = 0.5
        lift = pc_spectral_lift(PCSequenceSpec.parametric([1.0], rho))
        lam = lift.frequencies
        R = lam.size
        density = (1 - rho ** 2) / np.abs(1 - rho * np.exp(-1j * lam)) ** 2 / R
        np.testing.assert_allclose(lift.theta(1, 1).real, density, atol=1e-14)
        np.testing.assert_allclose(lift.theta(1, 1), lift.theta(3, 3))

    def test_white_sequence_is_flat(self):
        """rho = 0 gives flat masses sigma_j^2 / R."""
        lift = pc_spectral_lift(PCSequenceSpec.parametric([1.0, 2.0], 0.0))
        R = lift.frequencies.size
        np.testing.assert_allclose(lift.theta(1, 1), np.full(R, 1.0 / R))
        np.testing.assert_allclose(lift.theta(2, 2), np.full(R, 4.0 / R))
        np.testing.assert_allclose(lift.theta(1, 2), 0.0, atol=1e-15)

    def test_explicit_sequence(self):
        """A compactly supported explicit sequence lifts exactly."""
        c0 = np.array([[1.0, 0.3], [0.3, 4.0]])
        c1 = np.array([[0.2, 0.1], [0.1, 0.2]])
        seq = PCSequenceSpec.explicit(np.block([[c0, c1.T], [c1, c0]]), periods=2)
        lift = pc_spectral_lift(seq, n_periods=3)
        assert lift.residual <= 1e-12

    def test_hermitian(self):
        """theta~_{k,j} = conj(theta~_{j,k})."""
        lift = pc_spectral_lift(PCSequenceSpec.parametric([1.0, 2.0, 0.5], -0.4))
        for j in range(1, 4):
            for k in range(1, 4):
                np.testing.assert_allclose(lift.theta(k, j), np.conj(lift.theta(j, k)), atol=1e-15)

    def test_capacity_of_default_lift(self):
        """R = H + 3 for two periods: H = 29 lags, exact up to 2 periods apart."""
        lift = pc_spectral_lift(PCSequenceSpec.parametric([1.0, 2.0], 0.5))
        assert lift.lags == 29
        assert lift.frequencies.size == 32
        assert lift.capacity == 2

    def test_round_trip_over_the_whole_capacity(self):
        """Every pair up to capacity periods apart is reproduced."""
        seq = PCSequenceSpec.parametric([1.0, 2.0, 0.5], -0.7)
        lift = pc_spectral_lift(seq, n_periods=5)
        T = seq.period
        for j in range(1, T + 1):
            for k in range(1, (lift.capacity + 1) * T + 1):
                assert lift.reconstruct(j, k) == pytest.approx(float(seq.gamma(j, k)), abs=1e-12)

    def test_beyond_capacity_raises(self):
        """A pair further apart than the lift reaches is refused, not aliased."""
        lift = pc_spectral_lift(PCSequenceSpec.parametric([1.0, 2.0], 0.5))
        with pytest.raises(LiftError):
            lift.reconstruct(1, 1 + 2 * (lift.capacity + 1))

    def test_truncated_grid_limits_capacity(self):
        """pc_size = 10 keeps 8 lags and stays exact for neighbouring periods only."""
        seq = PCSequenceSpec.parametric([1.0, 2.0], 0.5)
        lift = pc_spectral_lift(seq, DiscreteSpectralGrid(pc_size=10))
        assert lift.lags == 8
        assert lift.capacity == 1
        assert lift.reconstruct(1, 4) == pytest.approx(float(seq.gamma(1, 4)), abs=1e-12)

    def test_grid_too_small(self):
        """Too few frequencies for the requested periods is a lift error."""
        with pytest.raises(LiftError):
            pc_spectral_lift(PCSequenceSpec.parametric([1.0, 2.0], 0.5), DiscreteSpectralGrid(pc_size=2))

    def test_rejects_bad_periods(self):
        """n_periods must be >= 1."""
        with pytest.raises(DomainError):
            pc_spectral_lift(PCSequenceSpec.parametric([1.0], 0.5), n_periods=0)


# === Tests for F_kernel / theta_kernel ===

class TestKernels:
    """Tests for F and Theta masses."""

    def test_f_cross_block_example(self, cosine_model):
        """j=1, k=2, t=0.9, u=1.1: the mass at lambda=1 is e^{0.2} / 2."""
        kernel = spectral_kernel(cosine_model)
        index = int(np.flatnonzero(kernel.ls_axis == 1.0)[0])
        assert F_kernel(cosine_model, None, 1, 2, index, 0.9, 1.1) == pytest.approx(0.610701, abs=1e-6)

    def test_f_first_block_single_term(self, default_model):
        """In B_1 only U^1 contributes."""
        kernel = spectral_kernel(default_model)
        expected = np.exp(0.1) * kernel.g_masses[0]
        np.testing.assert_allclose(kernel.f_masses(1, 1, 0.5, 0.5), expected)

    def test_f_two_blocks_apart(self, default_model):
        """|j - k| = 2 carries no mass."""
        kernel = spectral_kernel(default_model)
        assert not np.any(kernel.f_masses(1, 3, 0.5, 3.5))

    def test_f_diagonal_nonnegative(self, default_model):
        """F_{j,j}(lambda, t, t) >= 0."""
        kernel = spectral_kernel(default_model)
        for t in (0.5, 2.0, 3.5, 5.0):
            j = int(default_model.partition.locate(t)[0])
            assert np.all(kernel.f_masses(j, j, t, t).real >= 0)

    def test_f_rejects_wrong_block(self, default_model):
        """Times must lie in the declared blocks."""
        with pytest.raises(DomainError):
            spectral_kernel(default_model).f_masses(1, 1, 1.5, 0.5)

    def test_theta_at_endpoints_is_unscaled(self, default_model):
        """t = u = s_j gives theta~_{j,j}."""
        kernel = spectral_kernel(default_model)
        np.testing.assert_allclose(kernel.theta_masses(2, 2, 3.0, 3.0), kernel.lift.theta(2, 2))

    def test_theta_sums_to_xp_cov(self, default_model):
        """sum_lambda Theta_{j,j}(lambda, t, u) = xp_cov(t, u) within a block."""
        R = spectral_kernel(default_model).pc_frequencies.size
        for t, u in [(1.5, 2.5), (3.25, 3.75), (0.2, 0.9)]:
            j = int(default_model.partition.locate(t)[0])
            total = sum(theta_kernel(default_model, None, j, j, r, t, u) for r in range(R))
            assert total.real == pytest.approx(float(default_model.xp_cov(t, u)), abs=1e-10)
            assert abs(total.imag) < 1e-12

    def test_theta_cross_block_factor(self, default_model):
        """j != k scales by a_t a_u / (a_j a_k)."""
        kernel = spectral_kernel(default_model)
        np.testing.assert_allclose(kernel.theta_masses(1, 2, 0.5, 2.0),
                                   0.25 * kernel.lift.theta(1, 2))

    def test_theta_diagonal_nonnegative(self, default_model):
        """Theta_{j,j}(lambda, t, t) >= 0."""
        kernel = spectral_kernel(default_model)
        assert np.all(kernel.theta_masses(2, 2, 2.0, 2.0).real >= -1e-14)

    def test_metadata(self, default_model):
        """The convention is reported."""
        meta = spectral_kernel(default_model).metadata()
        assert meta["omega_sign"] == "-"
        assert meta["conjugation"] == "second argument"
        assert not meta["atomic"]


# === Tests for reconstruct_cov ===

class TestReconstructCov:
    """Tests for the frequency-domain reconstruction."""

    def test_ls_only_atomic(self, ls_only_model):
        """Cosine spectra reconstruct ls_cov to 1e-10."""
        rng = np.random.default_rng(20)
        for t, u in rng.uniform(0.01, 6.0, (30, 2)):
            assert reconstruct_cov(ls_only_model, None, t, u) == \
                pytest.approx(float(ls_only_model.ls_cov(t, u)), abs=1e-10)

    def test_pc_only(self, pc_only_model):
        """PC-only models reconstruct xp_cov to 1e-8."""
        rng = np.random.default_rng(21)
        for t, u in rng.uniform(0.01, 6.0, (30, 2)):
            assert reconstruct_cov(pc_only_model, None, t, u) == \
                pytest.approx(float(pc_only_model.xp_cov(t, u)), abs=1e-8)

    def test_default_anchor(self, default_model):
        """(1.0, 1.5) reconstructs 1.028801."""
        assert reconstruct_cov(default_model, None, 1.0, 1.5) == pytest.approx(1.028801, abs=1e-6)

    def test_hermitian_pairs(self, default_model):
        """kernel(t, u) = conj(kernel(u, t))."""
        kernel = spectral_kernel(default_model)
        for t, u in [(0.3, 1.7), (2.2, 3.9), (4.5, 5.5)]:
            assert kernel.reconstruct(t, u) == pytest.approx(np.conj(kernel.reconstruct(u, t)))

    def test_imaginary_residue(self, default_model):
        """A complex reconstruction is a reconstruction error."""
        with patch.object(SpectralKernel, "reconstruct", return_value=1.0 + 1e-3j):
            with pytest.raises(ReconstructionError):
                reconstruct_cov(default_model, None, 1.0, 1.5)

    def test_far_apart_pairs(self, pc_only_model):
        """Pairs 20 and 29 periods apart match xp_cov."""
        S = pc_only_model.partition.span
        for periods in (20, 29):
            t, u = 1.0, 1.0 + periods * S
            assert reconstruct_cov(pc_only_model, None, t, u) == \
                pytest.approx(float(pc_only_model.xp_cov(t, u)), abs=1e-12)

    def test_random_far_pairs(self, pc_only_model):
        """Random pairs over sixty periods match xp_cov to 1e-10."""
        rng = np.random.default_rng(22)
        S = pc_only_model.partition.span
        for t, u in rng.uniform(0.01, 60.0 * S, (40, 2)):
            assert reconstruct_cov(pc_only_model, None, t, u) == \
                pytest.approx(float(pc_only_model.xp_cov(t, u)), abs=1e-10)

    def test_wide_lifts_are_cached(self, pc_only_model):
        """Far pairs share one widened lift per power of two periods."""
        kernel = spectral_kernel(pc_only_model)
        wide = kernel.lift_for(1, 1 + 2 * 29)
        assert wide is not kernel.lift
        assert wide.capacity >= 29
        assert kernel.lift_for(2, 2 + 2 * 31) is wide
        assert kernel.lift_for(1, 3) is kernel.lift

    def test_fixed_pc_size_cannot_reach_far_pairs(self, pc_only_model):
        """A user-fixed pc grid refuses pairs beyond its reach."""
        S = pc_only_model.partition.span
        g = DiscreteSpectralGrid(pc_size=32)
        assert reconstruct_cov(pc_only_model, g, 1.0, 1.0 + 2 * S) == \
            pytest.approx(float(pc_only_model.xp_cov(1.0, 1.0 + 2 * S)), abs=1e-12)
        with pytest.raises(LiftError):
            reconstruct_cov(pc_only_model, g, 1.0, 1.0 + 29 * S)

    def test_narrow_grid(self, default_model):
        """A grid that cuts off the Cauchy tail raises CoverageError."""
        g = DiscreteSpectralGrid(ls_frequencies=np.linspace(-10.0, 10.0, 81))
        with pytest.raises(CoverageError):
            reconstruct_cov(default_model, g, 1.0, 1.5)


# === Tests for spectral_check ===

class TestSpectralCheck:
    """Tests for the reconstruction report."""

    def test_atomic_model_passes(self, ls_only_model):
        """Atomic spectra pass at 1e-8."""
        report = spectral_check(ls_only_model, n_pairs=50, seed=0)
        assert report["pass"]
        assert report["tol"] == 1e-8
        assert report["pairs"] == 50

    def test_density_model_passes(self, default_model):
        """Density spectra pass at 1e-4 on default grids."""
        report = spectral_check(default_model, n_pairs=50, seed=1)
        assert report["pass"]
        assert report["tol"] == 1e-4
        assert len(report["worst_pair"]) == 2

    def test_reports_failure(self, default_model):
        """A tolerance below the quadrature error fails."""
        report = spectral_check(default_model, n_pairs=20, seed=2, tol=1e-300)
        assert not report["pass"]
        assert report["max_deviation"] > 1e-300

    def test_pairs_over_many_periods(self, pc_only_model):
        """Pairs drawn from (0, 40 S] pass at the atomic tolerance."""
        report = spectral_check(pc_only_model, n_pairs=60, seed=3, periods=40)
        assert report["pass"]
        assert report["periods"] == 40

    def test_rejects_zero_periods(self, pc_only_model):
        """periods must be >= 1."""
        with pytest.raises(DomainError):
            spectral_check(pc_only_model, periods=0)

    def test_rejects_zero_pairs(self, default_model):
        """n_pairs must be >= 1."""
        with pytest.raises(DomainError):
            spectral_check(default_model, n_pairs=0)


# === Tests for spectral_dump ===

class TestSpectralDump:
    """Tests for the CSV mass dump."""

    def test_rows_and_header(self, cosine_model):
        """Rows list the nonzero F and Theta masses."""
        out = io.StringIO()
        rows = spectral_dump(cosine_model, None, 0.9, 1.1, out)
        lines = list(csv.reader(io.StringIO(out.getvalue())))
        assert lines[0] == ["j", "k", "lambda", "mass_re", "mass_im", "kind"]
        assert len(lines) == rows + 1
        kinds = {line[5] for line in lines[1:]}
        assert kinds == {"F", "Theta"}
        f_rows = [line for line in lines[1:] if line[5] == "F"]
        assert len(f_rows) == 2
        assert float(f_rows[1][3]) == pytest.approx(0.610701, abs=1e-6)
