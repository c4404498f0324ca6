import math

import numpy as np

import pytest

from decolab.basis import (
    DensityMatrix,
    EigenBasis,
    LadderScenario,
    basis_distance,
    build_rho_P,
    build_rho_R,
    convergence_profile,
    dephased_linear_entropy,
    frobenius_distance,
    hermitian_eigendecomposition,
    ladder_catalogue,
    linear_entropy,
    offdiag_norm,
    reconstruction_residual,
)
from decolab.exceptions import (
    DepletedState,
    DimensionMismatch,
    EigensolverError,
    InvalidParameter,
    NonHermitian,
)
from decolab.modes import decoherence_time, effective_rate
from decolab.poles import fit_decay_rate


@pytest.fixture
def model2():
    """Equilibrium level plus poles with gamma1 = 50 gamma0."""
    return LadderScenario.model2(complex(1.0, -0.01), complex(3.0, -0.5))


def random_hermitian(dim, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


class TestDensityMatrix:
    def test_from_state_ok(self):
        rho = DensityMatrix.from_state([1.0, 1j])

        assert rho.trace == pytest.approx(1.0)
        assert rho.purity == pytest.approx(1.0)
        assert rho.entries[0, 1] == pytest.approx(-0.5j)

    def test_normalized_ok(self):
        rho = DensityMatrix(np.diag([2.0, 2.0])).normalized()

        np.testing.assert_allclose(rho.entries, np.eye(2) / 2)

    def test_non_hermitian_error(self):
        with pytest.raises(NonHermitian):
            DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))

    def test_not_square_error(self):
        with pytest.raises(DimensionMismatch):
            DensityMatrix(np.ones((2, 3)))

    def test_depleted_error(self):
        with pytest.raises(DepletedState):
            DensityMatrix(np.zeros((2, 2))).normalized()
        with pytest.raises(DepletedState):
            DensityMatrix.from_state([0.0, 0.0])


class TestEigendecomposition:
    def test_maximally_mixed_ok(self):
        basis = hermitian_eigendecomposition(np.eye(4) / 4)

        np.testing.assert_allclose(basis.eigenvalues, 0.25)

    @pytest.mark.parametrize(
        "diagonal, expected_vectors",
        [([0.7, 0.3], np.eye(2)), ([0.3, 0.7], np.eye(2)[:, ::-1])],
    )
    def test_diagonal_ok(self, diagonal, expected_vectors):
        basis = hermitian_eigendecomposition(np.diag(diagonal))

        np.testing.assert_allclose(basis.eigenvalues, [0.7, 0.3])
        np.testing.assert_allclose(basis.eigenvectors, expected_vectors)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_random_hermitian_ok(self, seed):
        a = random_hermitian(6, seed)
        basis = hermitian_eigendecomposition(a)

        assert reconstruction_residual(a, basis) <= 1e-10
        assert basis.orthonormality_error() <= 1e-10
        np.testing.assert_allclose(
            basis.eigenvalues, np.linalg.eigvalsh(a)[::-1], atol=1e-10
        )
        residual = a @ basis.eigenvectors - basis.eigenvectors * basis.eigenvalues
        assert np.linalg.norm(residual, axis=0).max() <= 1e-9 * np.linalg.norm(a)

    def test_phase_convention_ok(self):
        basis = hermitian_eigendecomposition(random_hermitian(5, 7))

        for k in range(basis.dim):
            column = basis.eigenvectors[:, k]
            pivot = column[np.argmax(np.abs(column))]
            assert pivot.imag == pytest.approx(0.0, abs=1e-15)
            assert pivot.real > 0

    def test_deterministic_ok(self):
        a = random_hermitian(5, 11)

        first = hermitian_eigendecomposition(a)
        second = hermitian_eigendecomposition(a)
        np.testing.assert_array_equal(first.eigenvectors, second.eigenvectors)

    def test_non_hermitian_error(self):
        with pytest.raises(NonHermitian):
            hermitian_eigendecomposition(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_no_convergence_error(self):
        with pytest.raises(EigensolverError):
            hermitian_eigendecomposition(random_hermitian(4, 5), max_sweeps=0)

    def test_settings_sweeps_error(self, override_settings):
        override_settings(JACOBI_MAX_SWEEPS=0)

        with pytest.raises(EigensolverError):
            hermitian_eigendecomposition(random_hermitian(3, 5))


class TestBasisDistance:
    def test_identical_ok(self):
        basis = hermitian_eigendecomposition(random_hermitian(4, 3))

        assert basis_distance(basis, basis) == pytest.approx(0.0, abs=1e-14)

    def test_swapped_ok(self):
        b1 = hermitian_eigendecomposition(np.diag([0.7, 0.3]))
        b2 = hermitian_eigendecomposition(np.diag([0.3, 0.7]))

        assert basis_distance(b1, b2) == pytest.approx(1.0)

    @pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-5])
    def test_perturbation_ok(self, eps):
        b1 = hermitian_eigendecomposition(np.diag([0.7, 0.3]))
        b2 = hermitian_eigendecomposition(np.array([[0.7, eps], [eps, 0.3]]))

        expected = math.sin(0.5 * math.atan2(2 * eps, 0.4))
        assert basis_distance(b1, b2) == pytest.approx(expected, rel=1e-6)

    def test_degenerate_cluster_ok(self):
        b1 = hermitian_eigendecomposition(np.diag([0.5, 0.5, 0.0]))
        c, s = math.cos(0.4), math.sin(0.4)
        rotated = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        b2 = EigenBasis(np.array([0.5, 0.5, 0.0]), rotated.astype(complex))

        assert basis_distance(b1, b2) == pytest.approx(0.0, abs=1e-14)
        assert b1.clusters() == [0, 2]

    def test_metric_ok(self):
        b1, b2, b3 = (
            hermitian_eigendecomposition(random_hermitian(4, seed))
            for seed in (21, 22, 23)
        )

        assert basis_distance(b1, b2) == pytest.approx(basis_distance(b2, b1))
        assert basis_distance(b1, b3) <= (
            basis_distance(b1, b2) + basis_distance(b2, b3) + 1e-12
        )

    def test_dimension_error(self):
        with pytest.raises(DimensionMismatch):
            basis_distance(
                hermitian_eigendecomposition(np.eye(2)),
                hermitian_eigendecomposition(np.eye(3)),
            )


class TestEntropy:
    def test_linear_entropy_ok(self):
        pure = DensityMatrix.from_state([1.0, 0.0])

        assert linear_entropy(pure) == pytest.approx(0.0)
        assert linear_entropy(np.eye(2) / 2) == pytest.approx(0.5)

    def test_dephased_linear_entropy_ok(self):
        plus = DensityMatrix.from_state([1.0, 1.0])
        standard = EigenBasis(np.ones(2), np.eye(2, dtype=complex))

        assert dephased_linear_entropy(plus, standard) == pytest.approx(0.5)
        own = hermitian_eigendecomposition(plus)
        assert dephased_linear_entropy(plus, own) == pytest.approx(0.0, abs=1e-12)


class TestLadderScenario:
    def test_catalogue_ok(self, model2):
        cat = ladder_catalogue(model2)

        assert cat.equilibrium_value == pytest.approx(1 / 3)
        assert list(cat.rates) == pytest.approx([0.01, 0.5])
        assert effective_rate(cat) == pytest.approx(25.5 * 0.01)

    def test_from_omnes_ok(self, omnes_config):
        scenario = LadderScenario.from_omnes(omnes_config)

        assert scenario.dim == omnes_config.cutoff_n + 1
        assert scenario.energies[2] == 2 * omnes_config.pole.z0
        assert build_rho_R(scenario, 1.0).trace == pytest.approx(1.0)

    def test_growing_level_error(self):
        with pytest.raises(InvalidParameter):
            LadderScenario([0.0, complex(1.0, 0.1)], [1.0, 1.0])

    def test_shape_error(self):
        with pytest.raises(DimensionMismatch):
            LadderScenario([0.0, 1.0], [1.0])

    def test_zero_state_error(self):
        with pytest.raises(DepletedState):
            LadderScenario([0.0, 1.0], [0.0, 0.0])


class TestRho:
    def test_initial_projector_ok(self, model2):
        rho = build_rho_R(model2, 0.0)

        np.testing.assert_allclose(rho.entries, np.full((3, 3), 1 / 3), atol=1e-15)

    def test_pure_state_ok(self, model2):
        for t in (0.0, 1.0, 10.0, 100.0):
            rho = build_rho_R(model2, t)

            assert rho.trace == pytest.approx(1.0)
            assert rho.purity == pytest.approx(1.0)

    def test_unitary_ladder_ok(self):
        scenario = LadderScenario([0.0, 1.0, 2.0], [0.6, 0.0, 0.8])

        for t in (0.0, 2.5, 40.0):
            amplitudes = scenario.amplitudes(t)
            assert np.vdot(amplitudes, amplitudes).real == pytest.approx(1.0)

    def test_nothing_filtered_ok(self, model2):
        rho_r = build_rho_R(model2, 3.0)
        rho_p = build_rho_P(model2, 3.0, gamma_eff=1.0)

        np.testing.assert_array_equal(rho_p.entries, rho_r.entries)

    def test_everything_filtered_ok(self, model2):
        for t in (0.0, 5.0):
            rho_p = build_rho_P(model2, t, gamma_eff=0.005)

            np.testing.assert_allclose(rho_p.entries, np.diag([1.0, 0.0, 0.0]))

    def test_fast_pole_removed_ok(self, model2):
        rho_p = build_rho_P(model2, 2.0, effective_rate(ladder_catalogue(model2)))

        np.testing.assert_array_equal(rho_p.entries[2, :], 0.0)
        assert rho_p.trace == pytest.approx(1.0)

    def test_shared_normalization_ok(self, model2):
        rho_p = build_rho_P(model2, 2.0, 0.255, renormalize=False)

        assert rho_p.trace < 1.0
        expected = 1 - build_rho_R(model2, 2.0).entries[2, 2].real
        assert rho_p.trace == pytest.approx(expected)

    def test_depleted_error(self, model2):
        scenario = LadderScenario([0.0, complex(1.0, -50.0)], [0.0, 1.0])

        with pytest.raises(DepletedState):
            build_rho_R(scenario, 100.0)
        with pytest.raises(DepletedState):
            build_rho_P(model2, 1.0, gamma_eff=0.0)

    def test_negative_time_error(self, model2):
        with pytest.raises(InvalidParameter):
            build_rho_R(model2, -1.0)


class TestConvergence:
    def test_initial_row_ok(self, model2):
        gamma_eff = 0.255
        row = convergence_profile(model2, [0.0], gamma_eff)[0]

        rho_r = build_rho_R(model2, 0.0)
        basis_p = hermitian_eigendecomposition(build_rho_P(model2, 0.0, gamma_eff))
        expected = basis_distance(hermitian_eigendecomposition(rho_r), basis_p)
        assert row[0] == 0.0
        assert row[1] == pytest.approx(expected)
        assert row[2] == pytest.approx(offdiag_norm(rho_r, basis_p))

    def test_distance_at_three_t_D_ok(self, model2):
        t_D = decoherence_time(ladder_catalogue(model2))
        profile = convergence_profile(model2, [0.0, t_D, 3 * t_D])

        assert profile[-1, 1] < 0.05
        assert profile[-1, 1] < profile[0, 1]

    def test_full_relaxation_ok(self, model2):
        profile = convergence_profile(model2, [500.0, 1000.0])

        np.testing.assert_allclose(profile[:, 1:], 0.0, atol=1e-8)

    def test_frobenius_rate_ok(self, model2):
        gamma_eff = effective_rate(ladder_catalogue(model2))
        t_D = 1 / gamma_eff
        t = np.linspace(t_D, 5 * t_D, 41)

        distances = [
            frobenius_distance(
                build_rho_R(model2, s), build_rho_P(model2, s, gamma_eff)
            )
            for s in t
        ]
        assert fit_decay_rate(zip(t, distances)).rate >= 0.8 * gamma_eff

    def test_preferred_frame_diagonalizes_ok(self, model2):
        gamma_eff = effective_rate(ladder_catalogue(model2))
        levels = EigenBasis(np.ones(3), np.eye(3, dtype=complex))

        for t in np.linspace(1 / gamma_eff, 20.0, 9):
            rho_r = build_rho_R(model2, t)
            basis_p = hermitian_eigendecomposition(build_rho_P(model2, t, gamma_eff))
            assert offdiag_norm(rho_r, basis_p) <= offdiag_norm(rho_r, levels)

    def test_spectra_nonnegative_ok(self, model2):
        for t in (0.0, 2.0, 8.0):
            basis = hermitian_eigendecomposition(build_rho_R(model2, t))

            assert basis.eigenvalues.min() >= -1e-10
            assert basis.orthonormality_error() <= 1e-10

    def test_grid_error(self, model2):
        with pytest.raises(InvalidParameter):
            convergence_profile(model2, [1.0, 1.0, 2.0])
