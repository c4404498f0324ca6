import math

import numpy as np

import pytest

from decolab.exceptions import (
    InsufficientSamples,
    InvalidParameter,
    InvalidSamples,
    QuadratureError,
)
from decolab.poles import (
    DensityOfStates,
    DiscretizedFriedrichs,
    FormFactor,
    PoleResult,
    QuadratureSpec,
    decay_rate,
    discretized_oracle,
    effective_hamiltonian_diag,
    fit_decay_rate,
    level_shift,
    second_order_pole,
    sector_spectrum,
)
from test_app.factories import FormFactorFactory


class TestFormFactor:
    @pytest.mark.parametrize("kind", ["flat_band", "gaussian", "lorentzian"])
    def test_vanishes_outside_support_ok(self, kind):
        ff = FormFactor(kind, 0.3, (1.0, 4.0))

        assert ff(0.5) == 0.0
        assert ff(4.5) == 0.0
        assert ff(2.5) == pytest.approx(0.3)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"strength": -0.1, "support": (0.0, 1.0)},
            {"strength": 0.1, "support": (1.0, 1.0)},
            {"strength": 0.1, "support": (-1.0, 1.0)},
        ],
    )
    def test_form_factor_error(self, kwargs):
        with pytest.raises(InvalidParameter):
            FormFactor("flat_band", **kwargs)

    def test_unknown_kind_error(self):
        with pytest.raises(ValueError):
            FormFactor("triangle", 0.1, (0.0, 1.0))


class TestPole:
    @pytest.mark.parametrize(
        "strength, omega0, expected",
        [(0.1, 5.0, math.pi * 0.01), (0.0, 5.0, 0.0), (0.1, 12.0, 0.0)],
    )
    def test_decay_rate_ok(self, strength, omega0, expected, unit_density):
        ff = FormFactor("flat_band", strength, (0.0, 10.0))

        assert decay_rate(ff, unit_density, omega0) == pytest.approx(expected)

    def test_decay_rate_density_ok(self, flat_band):
        dos = DensityOfStates(scale=2.0, exponent=1.0)

        assert decay_rate(flat_band, dos, 5.0) == pytest.approx(math.pi * 0.1)

    @pytest.mark.parametrize("method", ["subtraction", "cauchy"])
    def test_level_shift_ok(self, flat_band, unit_density, method):
        shift = level_shift(flat_band, unit_density, 2.0, method=method)

        assert shift == pytest.approx(0.01 * math.log(2.0 / 8.0), rel=1e-2)
        midpoint = level_shift(flat_band, unit_density, 5.0, method=method)
        assert midpoint == pytest.approx(0.0, abs=1e-10)

    def test_level_shift_outside_band_ok(self, flat_band, unit_density):
        shift = level_shift(flat_band, unit_density, 12.0)

        assert shift == pytest.approx(0.01 * math.log(12.0 / 2.0), rel=1e-8)

    def test_level_shift_zero_coupling_ok(self, unit_density):
        ff = FormFactor("gaussian", 0.0, (0.0, 10.0))

        assert level_shift(ff, unit_density, 3.0) == 0.0

    def test_level_shift_methods_agree_ok(self, unit_density):
        ff = FormFactorFactory()
        omega0 = 3.7

        subtraction = level_shift(ff, unit_density, omega0)
        cauchy = level_shift(ff, unit_density, omega0, method="cauchy")
        assert subtraction == pytest.approx(cauchy, rel=1e-6, abs=1e-12)

    def test_level_shift_resolution_ok(self, unit_density):
        ff = FormFactor("lorentzian", 0.2, (0.0, 10.0), center=4.0, width=1.5)
        coarse = QuadratureSpec(tolerance=1e-10, window_fraction=0.01)
        fine = QuadratureSpec(tolerance=1e-10, window_fraction=0.005)

        assert level_shift(ff, unit_density, 3.0, coarse) == pytest.approx(
            level_shift(ff, unit_density, 3.0, fine), abs=1e-9
        )

    @pytest.mark.parametrize("omega0", [10.0, 10.0 * (1 + 1e-12), 0.0])
    def test_level_shift_endpoint_error(self, omega0, flat_band, unit_density):
        with pytest.raises(InvalidParameter):
            level_shift(flat_band, unit_density, omega0)

    def test_level_shift_unknown_method_error(self, flat_band, unit_density):
        with pytest.raises(InvalidParameter):
            level_shift(flat_band, unit_density, 2.0, method="trapezoid")

    def test_quadrature_error(self, flat_band, unit_density, mocker):
        mocker.patch(
            "decolab.poles.integrate.quad",
            return_value=(0.0, 1.0, {}, "The maximum number of subdivisions."),
        )

        with pytest.raises(QuadratureError):
            level_shift(flat_band, unit_density, 2.0)

    def test_coupling_scaling_ok(self, unit_density):
        ff = FormFactor("gaussian", 0.1, (0.0, 10.0))
        scaled = FormFactor("gaussian", 0.3, (0.0, 10.0))

        pole = second_order_pole(ff, unit_density, 3.0)
        scaled_pole = second_order_pole(scaled, unit_density, 3.0)
        assert scaled_pole.gamma0 == pytest.approx(9 * pole.gamma0, rel=1e-12)
        shift = scaled_pole.delta_omega
        assert shift == pytest.approx(9 * pole.delta_omega, rel=1e-6)

    def test_reflection_antisymmetry_ok(self, unit_density):
        ff = FormFactor("gaussian", 0.1, (0.0, 10.0))

        left = level_shift(ff, unit_density, 3.0)
        right = level_shift(ff, unit_density, 7.0)
        assert left == pytest.approx(-right, rel=1e-6)

    @pytest.mark.parametrize(
        "strength, omega0, expected",
        [
            (0.0, 5.0, complex(5.0, 0.0)),
            (0.1, 5.0, complex(5.0, -0.0314159)),
            (0.1, 2.0, complex(1.986137, -0.0314159)),
        ],
    )
    def test_second_order_pole_ok(self, strength, omega0, expected, unit_density):
        ff = FormFactor("flat_band", strength, (0.0, 10.0))
        pole = second_order_pole(ff, unit_density, omega0)

        assert pole.z0.real == pytest.approx(expected.real, abs=1e-6)
        assert pole.z0.imag == pytest.approx(expected.imag, abs=1e-6)
        assert pole.z0.imag == -pole.gamma0
        assert pole.z0.real == pole.omega0 + pole.delta_omega


class TestSpectrum:
    def test_sector_spectrum_ok(self):
        pole = PoleResult.from_z0(complex(1.0, -0.1))

        assert sector_spectrum(pole, 0) == [0]
        np.testing.assert_allclose(
            sector_spectrum(pole, 2), [0, complex(1, -0.1), complex(2, -0.2)]
        )

    def test_sector_spectrum_error(self):
        with pytest.raises(InvalidParameter):
            sector_spectrum(PoleResult(1.0, 0.0, 0.1), -1)

    def test_effective_hamiltonian_ok(self, flat_band, unit_density):
        pole = second_order_pole(flat_band, unit_density, 5.0)
        h = effective_hamiltonian_diag(pole, 4)

        assert effective_hamiltonian_diag(pole, 1).tolist() == [[0]]
        np.testing.assert_allclose(np.diag(h).imag, -np.arange(4) * pole.gamma0)
        assert sector_spectrum(pole, 3)[-1] == 3 * pole.z0

    def test_effective_hamiltonian_hermitian_ok(self):
        h = effective_hamiltonian_diag(PoleResult(2.0, 0.0, 0.0), 3)

        np.testing.assert_array_equal(h, h.conj().T)


class TestOracle:
    def test_oracle_initial_amplitude_ok(self, flat_band, unit_density):
        amplitude = discretized_oracle(flat_band, unit_density, 5.0, 50, [0.0])

        assert amplitude[0] == pytest.approx(1.0, abs=1e-12)

    def test_oracle_free_level_ok(self, unit_density):
        ff = FormFactor("flat_band", 0.0, (0.0, 10.0))
        amplitude = discretized_oracle(ff, unit_density, 5.0, 50, [0.0, 1.0, 7.5])

        np.testing.assert_allclose(np.abs(amplitude), 1.0, atol=1e-12)

    def test_oracle_unitarity_ok(self, flat_band, unit_density):
        oracle = DiscretizedFriedrichs(flat_band, unit_density, 5.0, 200)
        states = oracle.evolve(np.linspace(0.0, 50.0, 11))

        np.testing.assert_allclose(
            np.sum(np.abs(states) ** 2, axis=1), 1.0, atol=1e-12
        )

    def test_oracle_matches_pole_ok(self, flat_band, unit_density):
        pole = second_order_pole(flat_band, unit_density, 5.0)
        oracle = DiscretizedFriedrichs(flat_band, unit_density, 5.0, 2000)
        t = np.linspace(0.0, 80.0, 321)

        assert 2.0 / pole.gamma0 < oracle.recurrence_time
        amplitude = oracle.survival_amplitude(t)
        window = (0.5 / pole.gamma0, 2.0 / pole.gamma0)
        fit = fit_decay_rate(zip(t, np.abs(amplitude)), window)
        assert fit.rate == pytest.approx(pole.gamma0, rel=0.1)

    @pytest.mark.parametrize(
        "n_modes, t_grid",
        [(5, [0.0, 1.0]), (50, [-1.0, 1.0]), (50, [2.0, 1.0])],
    )
    def test_oracle_error(self, flat_band, unit_density, n_modes, t_grid):
        with pytest.raises(InvalidParameter):
            discretized_oracle(flat_band, unit_density, 5.0, n_modes, t_grid)


class TestFit:
    def test_exact_exponential_ok(self):
        t = np.linspace(0.0, 5.0, 20)
        fit = fit_decay_rate(zip(t, np.exp(-0.4 * t)))

        assert fit.rate == pytest.approx(0.4, rel=1e-12)
        assert fit.residual_rms == pytest.approx(0.0, abs=1e-12)
        assert fit.n_samples == 20

    def test_constant_samples_ok(self):
        fit = fit_decay_rate((t, 0.7) for t in range(10))

        assert fit.rate == pytest.approx(0.0, abs=1e-14)

    def test_window_ok(self):
        t = np.linspace(0.0, 10.0, 101)
        magnitudes = np.where(t < 5.0, 1.0, np.exp(-(t - 5.0)))

        fit = fit_decay_rate(zip(t, magnitudes), (5.0, 10.0))
        assert fit.rate == pytest.approx(1.0, rel=1e-10)

    def test_insufficient_samples_error(self):
        t = np.linspace(0.0, 1.0, 20)

        with pytest.raises(InsufficientSamples):
            fit_decay_rate(zip(t, np.ones(20)), (0.0, 0.2))

    def test_invalid_samples_error(self):
        samples = [(t, 1.0 if t else 0.0) for t in range(10)]

        with pytest.raises(InvalidSamples):
            fit_decay_rate(samples)
