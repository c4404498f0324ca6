import logging
import math

import numpy as np

import pytest

from decolab.exceptions import InvalidParameter, NoCrossover, OrderingError
from decolab.khalfin import (
    EvolutionProfile,
    KhalfinTail,
    crossover_time,
    model1_profile,
    model2_profile,
    model2_times,
)
from decolab.modes import DecayMode, ModeCatalogue
from decolab.poles import pole_rate

Z0 = complex(1.0, -0.02)
Z1 = complex(3.0, -1.0)


@pytest.fixture
def model2():
    """gamma1 = 50 gamma0, unit weights on every decaying term."""
    return model2_profile(Z0, Z1, [0.0, 1.0, 1.0, 1.0, 1.0])


class TestKhalfinTail:
    def test_tail_ok(self):
        tail = KhalfinTail(0.4, 10.0)
        values = tail(np.linspace(0.0, 100.0, 11))

        assert tail(0.0) == pytest.approx(0.4)
        assert tail(10.0) == pytest.approx(0.1)
        assert np.all(np.diff(values) < 0)

    def test_for_pole_ok(self):
        tail = KhalfinTail.for_pole(1.0, complex(2.0, -0.05), hbar=2.0)

        assert tail.onset == pytest.approx(40.0)
        assert tail.exponent == 2.0

    @pytest.mark.parametrize("onset, exponent", [(0.0, 2.0), (1.0, 0.0)])
    def test_tail_error(self, onset, exponent):
        with pytest.raises(InvalidParameter):
            KhalfinTail(1.0, onset, exponent)


class TestModel1:
    def test_characteristic_times_ok(self):
        profile = model1_profile(complex(2.0, -0.05), None, [1.0, 0.3, 0.2, 0.0])

        expected = (20.0, 40.0, 40.0, math.inf)
        assert profile.characteristic_times == pytest.approx(expected)
        assert pole_rate(complex(2.0, -0.05)) == pytest.approx(0.05)

    def test_single_exponential_ok(self):
        profile = model1_profile(complex(2.0, -0.05), None, [0.8, 0.0, 0.0, 0.0])
        t = np.linspace(0.0, 40.0, 9)

        np.testing.assert_allclose(profile.evaluate(t), 0.8 * np.exp(-0.05 * t))

    def test_pure_tail_ok(self):
        z0 = complex(2.0, -0.05)
        tail = KhalfinTail.for_pole(0.5, z0)
        profile = model1_profile(z0, tail, [0.0, 0.0, 0.0, 1.0])
        t = np.linspace(0.0, 40.0, 9)

        np.testing.assert_allclose(profile.evaluate(t), tail(t))

    def test_tail_dominates_ok(self):
        z0 = complex(2.0, -0.05)
        profile = model1_profile(
            z0, KhalfinTail.for_pole(1.0, z0), [1.0, 0.5, 0.5, 0.2]
        )
        t = np.array([400.0, 1000.0, 2000.0])

        tail = profile.tail(t)
        ratio = np.abs(profile.evaluate(t) - profile.equilibrium - tail) / tail
        assert np.all(np.diff(ratio) < 0)
        assert ratio[-1] < 1e-10

    def test_weights_error(self):
        with pytest.raises(InvalidParameter):
            model1_profile(Z0, None, [1.0, 0.0, 0.0])

    @pytest.mark.parametrize("z0", [complex(1.0, 0.0), complex(1.0, 0.1)])
    def test_pole_error(self, z0):
        with pytest.raises(InvalidParameter):
            model1_profile(z0, None, [1.0, 0.0, 0.0, 0.0])


class TestModel2:
    def test_characteristic_times_ok(self, model2):
        assert model2.characteristic_times == pytest.approx((50.0, 1 / 1.02, 1 / 1.02))
        assert list(model2.pole_terms.rates) == pytest.approx([0.02, 0.51, 0.51, 1.0])

    def test_times_ok(self):
        t_R, t_D = model2_times(Z0, Z1)

        assert t_R == pytest.approx(50.0)
        assert t_D == pytest.approx(1.0)
        assert t_D / t_R == pytest.approx(0.02)

    def test_equilibrium_ok(self):
        profile = model2_profile(Z0, Z1, [0.3, 0.4, 0.1, 0.1, 0.1])

        assert profile.evaluate(0.0) == pytest.approx(0.3 + 0.4 + 0.1 + 0.1)
        assert profile.evaluate(5000.0) == pytest.approx(0.3)

    def test_equal_rates_ok(self, caplog):
        with caplog.at_level(logging.WARNING, logger="decolab.khalfin"):
            profile = model2_profile(Z0, Z0, [0.0, 1.0, 0.0, 0.0, 1.0])

        assert "single rate" in caplog.text
        np.testing.assert_allclose(profile.pole_terms.rates, 0.02)

    @pytest.mark.parametrize(
        "z0, z1", [(Z1, Z0), (complex(1.0, 0.0), Z1), (complex(1.0, 0.2), Z1)]
    )
    def test_ordering_error(self, z0, z1):
        with pytest.raises(OrderingError):
            model2_profile(z0, z1, [0.0, 1.0, 1.0, 1.0, 1.0])

    def test_weights_error(self):
        with pytest.raises(InvalidParameter):
            model2_profile(Z0, Z1, [1.0, 1.0, 1.0, 1.0])

    def test_slow_profile_ok(self, model2):
        slow = model2.slow_profile(model2.indices_below(0.5))
        t = np.linspace(0.0, 10.0, 6)

        assert model2.indices_below(0.5) == (0,)
        np.testing.assert_allclose(slow.evaluate(t), np.exp(-0.02 * t))


class TestCrossover:
    @pytest.mark.parametrize(
        "a, b, gamma, eta", [(3.0, 1.0, 0.7, 0.01), (1.0, 0.2, 2.5, 0.05)]
    )
    def test_single_exponential_ok(self, a, b, gamma, eta):
        profile = EvolutionProfile(
            ModeCatalogue((DecayMode(b, 0.0), DecayMode(a, gamma)))
        )

        expected = math.log(a / (eta * b)) / gamma
        assert crossover_time(profile, (0,), eta) == pytest.approx(expected, rel=1e-6)

    def test_no_fast_weight_ok(self):
        profile = model2_profile(Z0, Z1, [0.0, 1.0, 0.0, 0.0, 0.0])

        assert crossover_time(profile, (0,), 0.01) == 0.0

    def test_model2_estimate_ok(self, model2):
        gamma0 = pole_rate(Z0)

        estimate = math.log(2 / 0.01) / (24.5 * gamma0)
        assert crossover_time(model2, (0,), 0.01) == pytest.approx(estimate, rel=0.2)

    def test_eta_from_settings_ok(self, model2, override_settings):
        override_settings(CROSSOVER_ETA=0.1)

        assert crossover_time(model2, (0,)) == pytest.approx(
            crossover_time(model2, (0,), 0.1)
        )

    def test_monotone_in_eta_ok(self, model2):
        times = [crossover_time(model2, (0,), eta) for eta in (1e-4, 1e-3, 0.01, 0.5)]

        assert all(t2 <= t1 for t1, t2 in zip(times, times[1:]))

    def test_rate_scaling_ok(self, model2):
        scaled = model2_profile(
            complex(1.0, 3 * Z0.imag),
            complex(3.0, 3 * Z1.imag),
            [0.0, 1.0, 1.0, 1.0, 1.0],
        )

        assert crossover_time(scaled, (0,), 0.01) == pytest.approx(
            crossover_time(model2, (0,), 0.01) / 3, rel=1e-9
        )

    def test_tail_in_slow_envelope_ok(self):
        z0 = complex(2.0, -0.05)
        profile = model1_profile(
            z0, KhalfinTail.for_pole(1.0, z0), [1.0, 0.0, 0.0, 0.01]
        )

        t_star = crossover_time(profile, (), 0.5)
        fast, slow = profile.envelopes(t_star, ())
        assert fast == pytest.approx(0.5 * slow, rel=1e-6)

    def test_no_crossover_error(self, model2):
        with pytest.raises(NoCrossover):
            crossover_time(model2, (0,), 0.01, horizon=1.0)
        with pytest.raises(NoCrossover):
            crossover_time(model2, (), 0.01, horizon=100.0)

    @pytest.mark.parametrize("eta", [0.0, 1.0, -0.1])
    def test_eta_error(self, model2, eta):
        with pytest.raises(InvalidParameter):
            crossover_time(model2, (0,), eta)
