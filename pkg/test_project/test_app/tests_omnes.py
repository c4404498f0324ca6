import math
from dataclasses import replace

import numpy as np

import pytest

from decolab.coherent import evolved_overlap
from decolab.exceptions import (
    InsufficientSamples,
    InvalidParameter,
    InvalidRegime,
    NonRelaxingCatalogue,
    UndefinedEffectiveRate,
)
from decolab.omnes import (
    OmnesConfig,
    alpha_from_length,
    closed_form_nd_modulus,
    decay_curve,
    decoherence_factor,
    decoherence_time_omnes,
    gamma_eff_omnes,
    initial_states,
    nd_components,
    relaxation_time_omnes,
    short_time_rate_fit,
)
from decolab.poles import PoleResult


class TestOmnesConfig:
    @pytest.mark.parametrize(
        "m, omega, hbar, L0, expected",
        [
            (1.0, 1.0, 1.0, 2.0, 1.414214),
            (1.0, 1.0, 1.0, 0.0, 0.0),
            (1.0, 2.0, 1.0, 10.0, 10.0),
        ],
    )
    def test_alpha_from_length_ok(self, m, omega, hbar, L0, expected):
        assert alpha_from_length(m, omega, hbar, L0) == pytest.approx(
            expected, rel=1e-6
        )

    @pytest.mark.parametrize(
        "m, omega, hbar, L0",
        [(0.0, 1.0, 1.0, 1.0), (1.0, -1.0, 1.0, 1.0), (1.0, 1.0, 1.0, -2.0)],
    )
    def test_alpha_from_length_error(self, m, omega, hbar, L0):
        with pytest.raises(InvalidParameter):
            alpha_from_length(m, omega, hbar, L0)

    def test_weights_normalized_ok(self, omnes_config):
        cfg = replace(omnes_config, amp_a=3.0, amp_b=4j)

        assert cfg.amp_a == pytest.approx(0.6)
        assert cfg.amp_b == pytest.approx(0.8j)
        assert abs(cfg.amp_a) ** 2 + abs(cfg.amp_b) ** 2 == pytest.approx(
            1.0, abs=1e-12
        )

    def test_weights_error(self, omnes_config):
        with pytest.raises(InvalidParameter):
            replace(omnes_config, amp_a=0.0, amp_b=0.0)

    def test_hbar_from_settings_ok(self, omnes_config, override_settings):
        override_settings(HBAR=0.5)

        cfg = replace(omnes_config, hbar=None)
        assert cfg.hbar == 0.5
        assert cfg.alpha2 == pytest.approx(math.sqrt(2.0) * 10.0)

    def test_state_norm_ok(self, omnes_config):
        # <alpha_1|alpha_2> is e^-50 here
        assert omnes_config.state_norm == pytest.approx(1.0, abs=1e-15)
        assert omnes_config.exponent_scale == pytest.approx(omnes_config.alpha2**2)

    def test_exact_weights_ok(self, omnes_config):
        cfg = replace(omnes_config, L0=1.0)
        a, b = cfg.exact_weights
        s1, s2 = initial_states(cfg)
        psi = a * s1.coeffs + b * s2.coeffs

        assert abs(cfg.amp_a) ** 2 + abs(cfg.amp_b) ** 2 == pytest.approx(1.0)
        assert cfg.state_norm > 1.5
        assert np.vdot(psi, psi).real == pytest.approx(1.0, abs=1e-12)

    def test_from_dict_ok(self, omnes_config):
        cfg = OmnesConfig.from_dict(omnes_config.to_dict())

        assert cfg.alpha2 == pytest.approx(omnes_config.alpha2)
        assert cfg.pole.z0 == omnes_config.pole.z0
        assert cfg.amp_b == pytest.approx(omnes_config.amp_b)


class TestNdComponents:
    def test_initial_coherence_ok(self, omnes_config):
        rho = nd_components(omnes_config, 0.0)

        expected = omnes_config.amp_a * np.conj(omnes_config.amp_b)
        assert rho[0, 1] == pytest.approx(expected, abs=1e-12)

    def test_diagonal_suppressed_ok(self, omnes_config):
        rho = nd_components(omnes_config, np.linspace(0.0, 5.0, 11))

        bound = math.exp(-(omnes_config.alpha2**2) / 2) * (1 + 1e-9)
        assert np.all(np.abs(rho[:, 0, 0]) <= bound)
        assert np.all(np.abs(rho[:, 1, 1]) <= bound)

    def test_hermitian_ok(self, omnes_config):
        cfg = replace(omnes_config, amp_b=complex(0.3, 0.9))
        rho = nd_components(cfg, np.linspace(0.0, 5.0, 6))

        np.testing.assert_allclose(rho[:, 1, 0], np.conj(rho[:, 0, 1]), rtol=1e-14)

    def test_matches_closed_form_ok(self, omnes_config):
        t = np.linspace(0.0, 5.0, 11)
        rho = nd_components(omnes_config, t)

        weight = abs(omnes_config.amp_a * omnes_config.amp_b)
        np.testing.assert_allclose(
            np.abs(rho[:, 0, 1]) / weight,
            closed_form_nd_modulus(omnes_config, t),
            rtol=1e-8,
        )

    @pytest.mark.parametrize("changes", [{"L0": 2.0}, {"cutoff_n": 10}])
    def test_invalid_regime_error(self, omnes_config, changes):
        with pytest.raises(InvalidRegime):
            nd_components(replace(omnes_config, **changes), 1.0)

    def test_negative_time_error(self, omnes_config):
        with pytest.raises(InvalidParameter):
            nd_components(omnes_config, -1.0)


class TestClosedForm:
    @pytest.mark.parametrize("envelope", [True, False])
    def test_closed_form_limits_ok(self, omnes_config, envelope):
        assert closed_form_nd_modulus(omnes_config, 0.0, envelope) == 1.0
        assert closed_form_nd_modulus(omnes_config, 1e5, envelope) == pytest.approx(
            math.exp(-100.0)
        )

    def test_closed_form_value_ok(self, omnes_config):
        assert closed_form_nd_modulus(omnes_config, 1.0) == pytest.approx(
            0.3697, abs=1e-4
        )

    def test_envelope_decreasing_ok(self, omnes_config):
        modulus = closed_form_nd_modulus(omnes_config, np.linspace(0.0, 50.0, 101))

        assert np.all(np.diff(modulus) < 0)

    def test_factorization_ok(self, omnes_config):
        t = np.linspace(0.0, 20.0, 21)
        alpha = omnes_config.alpha2

        evolved = evolved_overlap(alpha, alpha, omnes_config.pole.z0, t, 200)
        np.testing.assert_allclose(
            np.abs(evolved), closed_form_nd_modulus(omnes_config, t), rtol=1e-8
        )

    @pytest.mark.parametrize(
        "L0, cutoff_n, omega0p",
        [(6.0, 120, 0.0), (3.0, 60, 1.5)],
    )
    def test_decoherence_factor_ok(self, omnes_config, L0, cutoff_n, omega0p):
        cfg = replace(
            omnes_config,
            L0=L0,
            cutoff_n=cutoff_n,
            pole=PoleResult(omega0p, 0.0, 0.05),
        )
        t = np.linspace(0.0, 40.0, 81)

        np.testing.assert_allclose(
            np.abs(decoherence_factor(cfg, t)),
            closed_form_nd_modulus(cfg, t, envelope=False),
            rtol=1e-6,
        )

    def test_decay_curve_ok(self, omnes_config):
        rows = decay_curve(omnes_config, [0.0, 1.0, 2.0])

        assert rows.shape == (3, 4)
        np.testing.assert_allclose(rows[:, 1], rows[:, 2], rtol=1e-8)
        assert rows[0, 1:].tolist() == pytest.approx([1.0, 1.0, 1.0])


class TestRates:
    def test_rates_ok(self, omnes_config):
        assert gamma_eff_omnes(omnes_config) == pytest.approx(1.0)
        assert decoherence_time_omnes(omnes_config) == pytest.approx(1.0)
        assert relaxation_time_omnes(omnes_config) == pytest.approx(100.0)

    def test_time_ratio_ok(self, omnes_config):
        cfg = replace(omnes_config, L0=37.0)
        ratio = 2 * cfg.hbar / (cfg.m * cfg.omega) / cfg.L0**2

        t_D = decoherence_time_omnes(cfg)
        assert t_D == pytest.approx(ratio * relaxation_time_omnes(cfg), rel=1e-14)
        assert t_D <= relaxation_time_omnes(cfg)

    def test_quadratic_in_length_ok(self, omnes_config):
        doubled = replace(omnes_config, L0=20.0)

        assert gamma_eff_omnes(doubled) == pytest.approx(
            4 * gamma_eff_omnes(omnes_config)
        )

    def test_no_relaxation_ok(self, omnes_config):
        cfg = replace(omnes_config, pole=PoleResult(0.0, 0.0, 0.0))

        assert gamma_eff_omnes(cfg) == 0.0
        assert short_time_rate_fit(cfg, 0.05) == 0.0
        with pytest.raises(UndefinedEffectiveRate):
            decoherence_time_omnes(cfg)
        with pytest.raises(NonRelaxingCatalogue):
            relaxation_time_omnes(cfg)


class TestShortTimeFit:
    def test_short_time_rate_fit_ok(self, omnes_config):
        assert short_time_rate_fit(omnes_config, 0.05) == pytest.approx(1.0, rel=0.02)

    def test_converges_to_gamma_eff_ok(self, omnes_config):
        coarse = short_time_rate_fit(omnes_config, 0.1)
        fine = short_time_rate_fit(omnes_config, 0.001)

        assert abs(fine - 1.0) < abs(coarse - 1.0)
        assert fine == pytest.approx(1.0, rel=1e-3)

    @pytest.mark.parametrize("fraction", [0.0, 0.2, -0.05])
    def test_fraction_error(self, omnes_config, fraction):
        with pytest.raises(InvalidParameter):
            short_time_rate_fit(omnes_config, fraction)

    def test_degenerate_window_error(self, omnes_config):
        with pytest.raises(InsufficientSamples):
            short_time_rate_fit(omnes_config, 0.05, n_points=3)
