import math

import numpy as np

import pytest

from decolab.exceptions import (
    EmptyCatalogue,
    InvalidParameter,
    NonRelaxingCatalogue,
    UndefinedEffectiveRate,
)
from decolab.modes import (
    DecayMode,
    ModeCatalogue,
    catalogue_from_dict,
    catalogue_to_dict,
    characteristic_times,
    decoherence_time,
    effective_rate,
    equilibrium_bound,
    evaluate_mode_sum,
    linearized_envelope,
    random_distribution_decoherence_time,
    relaxation_time,
    sample_curve,
    split_modes,
)
from test_app.factories import DecayModeFactory, ModeCatalogueFactory


class TestModeCatalogue:
    def test_modes_sorted_by_rate_then_frequency_ok(self):
        modes = (
            DecayMode(1.0, 2.0, 1.0),
            DecayMode(2.0, 1.0),
            DecayMode(3.0, 2.0, 0.0),
            DecayMode(4.0, 2.0, 1.0),
        )
        cat = ModeCatalogue(modes)

        assert [m.amplitude_0 for m in cat.modes] == [2.0, 3.0, 1.0, 4.0]

    def test_hbar_from_settings_ok(self, override_settings):
        override_settings(HBAR=2.0)

        assert ModeCatalogue((DecayMode(1.0, 1.0),)).hbar == 2.0

    def test_negative_rate_error(self):
        with pytest.raises(InvalidParameter):
            DecayMode(1.0, -0.5)

    def test_amplitude_at_zero_ok(self):
        mode = DecayModeFactory(frequency=1.3)

        assert mode.amplitude(0.0) == pytest.approx(mode.amplitude_0)

    def test_json_round_trip_ok(self):
        cat = ModeCatalogue.from_arrays(
            [1.0, -0.5], [0.2, 1.5], [0.0, 2.0], [0.0, 0.3], 0.25, 2.0
        )
        data = catalogue_to_dict(cat)

        expected = {"a0": -0.5, "gamma": 1.5, "omega": 2.0, "phase": 0.3}
        assert data["modes"][1] == expected
        assert catalogue_from_dict(data) == cat


class TestModeSum:
    @pytest.mark.parametrize(
        "amplitudes, rates, t, expected",
        [
            ([1.0], [1.0], 0.0, 1.0),
            ([1.0], [1.0], 1.0, math.exp(-1)),
            ([1.0, 1.0], [1.0, 3.0], 1.0, 0.417666),
        ],
    )
    def test_evaluate_mode_sum_ok(self, amplitudes, rates, t, expected):
        cat = ModeCatalogue.from_arrays(amplitudes, rates)

        assert evaluate_mode_sum(cat, t) == pytest.approx(expected, rel=1e-6)

    def test_oscillating_mode_ok(self):
        cat = ModeCatalogue((DecayMode(2.0, 0.5, 3.0, 0.25),), equilibrium_value=0.1)
        t = 0.7

        expected = 0.1 + 2.0 * math.cos(3.0 * t + 0.25) * math.exp(-0.5 * t)
        assert evaluate_mode_sum(cat, t) == pytest.approx(expected, rel=1e-14)

    def test_negative_time_error(self, two_mode_catalogue):
        with pytest.raises(InvalidParameter):
            evaluate_mode_sum(two_mode_catalogue, -1.0)

    def test_sample_curve_ok(self, two_mode_catalogue):
        rows = sample_curve(two_mode_catalogue, [0.0, 1.0])

        assert rows.shape == (2, 2)
        assert rows[0, 1] == pytest.approx(2.0)

    def test_equilibrium_approach_ok(self):
        cat = ModeCatalogue.from_arrays(
            [1.0, -0.4], [0.3, 1.1], equilibrium_value=0.5
        )

        for t in (0.0, 1.0, 10.0, 50.0):
            gap = abs(evaluate_mode_sum(cat, t) - 0.5)
            assert gap <= equilibrium_bound(cat, t) * (1 + 1e-12)


class TestRates:
    @pytest.mark.parametrize(
        "rates, hbar, expected",
        [([0.01, 2.0], 1.0, 100.0), ([5.0], 2.0, 0.4)],
    )
    def test_relaxation_time_ok(self, rates, hbar, expected):
        cat = ModeCatalogue.from_arrays([1.0] * len(rates), rates, hbar=hbar)

        assert relaxation_time(cat) == pytest.approx(expected)

    def test_relaxation_time_error(self):
        with pytest.raises(NonRelaxingCatalogue):
            relaxation_time(ModeCatalogue.from_arrays([1.0, 1.0], [0.0, 1.0]))

        with pytest.raises(EmptyCatalogue):
            relaxation_time(ModeCatalogue())

    @pytest.mark.parametrize(
        "amplitudes, rates, expected_rate, expected_time",
        [
            ([1.0, 1.0], [1.0, 3.0], 2.0, 0.5),
            ([1.0], [0.7], 0.7, 1 / 0.7),
            ([1.0, 1.0], [0.01, 2.0], 1.005, 0.99502),
        ],
    )
    def test_effective_rate_ok(self, amplitudes, rates, expected_rate, expected_time):
        cat = ModeCatalogue.from_arrays(amplitudes, rates)

        assert effective_rate(cat) == pytest.approx(expected_rate)
        assert decoherence_time(cat) == pytest.approx(expected_time, rel=1e-5)

    def test_single_mode_times_agree_ok(self):
        cat = ModeCatalogue((DecayModeFactory(),))

        assert decoherence_time(cat) == pytest.approx(relaxation_time(cat))

    def test_effective_rate_error(self):
        cat = ModeCatalogue.from_arrays([1.0, -1.0], [1.0, 3.0])

        with pytest.raises(UndefinedEffectiveRate):
            effective_rate(cat)

    def test_randomized_catalogues_ok(self):
        for cat in ModeCatalogueFactory.build_batch(1000):
            gamma_eff = effective_rate(cat)

            assert cat.rates.min() * (1 - 1e-12) <= gamma_eff
            assert gamma_eff <= cat.rates.max() * (1 + 1e-12)
            assert decoherence_time(cat) <= relaxation_time(cat) * (1 + 1e-12)

    def test_log_derivative_at_zero_ok(self):
        for cat in ModeCatalogueFactory.build_batch(20):
            h = 1e-5 / cat.rates.max()
            f0 = evaluate_mode_sum(cat, 0.0)
            # one-sided, second order in h
            slope = (evaluate_mode_sum(cat, 2 * h) - f0) / (2 * h)
            curvature = (
                evaluate_mode_sum(cat, 2 * h) - 2 * evaluate_mode_sum(cat, h) + f0
            ) / h**2
            derivative = slope - curvature * h

            assert derivative / f0 == pytest.approx(-effective_rate(cat), rel=1e-6)

    def test_random_distribution_time_ok(self):
        cat = ModeCatalogue.from_arrays([1.0, 1.0, 1.0], [0.5, 2.0, 4.0])

        assert random_distribution_decoherence_time(cat) == pytest.approx(0.5)
        with pytest.raises(InvalidParameter):
            single = ModeCatalogue.from_arrays([1.0], [1.0])
            random_distribution_decoherence_time(single)

    def test_characteristic_times_ok(self):
        cat = ModeCatalogue.from_arrays([1.0, 1.0], [0.0, 4.0], hbar=2.0)

        assert characteristic_times(cat) == [math.inf, 0.5]


class TestSplit:
    @pytest.mark.parametrize(
        "gamma_eff, expected_slow, expected_fast",
        [(2.0, [1.0], [3.0]), (0.5, [], [1.0, 3.0]), (3.0, [1.0], [3.0])],
    )
    def test_split_modes_ok(
        self, two_mode_catalogue, gamma_eff, expected_slow, expected_fast
    ):
        slow, fast = split_modes(two_mode_catalogue, gamma_eff)

        assert list(slow.rates) == expected_slow
        assert list(fast.rates) == expected_fast

    def test_split_partitions_catalogue_ok(self):
        cat = ModeCatalogueFactory(equilibrium_value=0.3)
        slow, fast = split_modes(cat, effective_rate(cat))

        assert ModeCatalogue(slow.modes + fast.modes, 0.3) == cat
        t = np.linspace(0.0, 2.0, 7)
        total = evaluate_mode_sum(slow, t) + evaluate_mode_sum(fast, t)
        np.testing.assert_allclose(total, evaluate_mode_sum(cat, t), rtol=1e-12)

    def test_split_modes_error(self, two_mode_catalogue):
        with pytest.raises(InvalidParameter):
            split_modes(two_mode_catalogue, 0.0)


class TestLinearizedEnvelope:
    def test_linearized_envelope_ok(self, two_mode_catalogue):
        assert linearized_envelope(two_mode_catalogue, 0.0) == pytest.approx(2.0)
        assert linearized_envelope(two_mode_catalogue, 0.1) == pytest.approx(
            1.637462, rel=1e-6
        )

    def test_first_order_agreement_ok(self, two_mode_catalogue):
        # second derivative of the sum minus that of the envelope, over 2
        c = abs(1.0 + 9.0 - 2.0 * 4.0) / 2 / 2.0
        for t in np.linspace(0.001, 0.1 / 3.0, 10):
            gap = abs(
                evaluate_mode_sum(two_mode_catalogue, t)
                - linearized_envelope(two_mode_catalogue, t)
            )
            assert gap / 2.0 <= 2 * c * t**2
