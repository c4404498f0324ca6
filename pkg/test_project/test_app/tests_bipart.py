import logging

import numpy as np

import pytest

from decolab.bipart import (
    BiPartSpec,
    PartSpec,
    build_bipart,
    classicality_window,
    cross_independence_check,
    fit_part_rate,
    part_observable_expectation,
    part_poles,
    swap_parts,
)
from decolab.exceptions import InvalidParameter, OverlappingBands
from decolab.poles import FormFactor


def part(level, strength, support):
    return PartSpec(level, FormFactor("flat_band", strength, support))


@pytest.fixture
def spec():
    """Part 1 on [0, 4], part 2 on [6, 24], a shared grid up to 24."""
    return BiPartSpec(
        part(2.0, 0.08, (0.0, 4.0)),
        part(15.0, 0.1, (6.0, 24.0)),
        n_grid=1000,
        omega_max=24.0,
    )


@pytest.fixture
def model(spec):
    return build_bipart(spec)


class TestBuild:
    def test_commuting_parts_ok(self, model):
        assert model.commutator_norm <= 1e-10
        assert model.h1.shape == (1002, 1002)

    def test_default_horizon_ok(self, spec):
        default = BiPartSpec(spec.part1, spec.part2)

        assert default.omega_max == pytest.approx(24.0)
        assert default.n_grid == 1000

    def test_open_upper_band_ok(self, model):
        spec = BiPartSpec.from_band_gap(4.0, 6.0, (2.0, 15.0), (0.08, 0.1))
        lo1, hi1 = spec.part1.form_factor.support
        lo2, hi2 = spec.part2.form_factor.support

        assert spec.omega_max == pytest.approx(24.0)
        assert (lo1, hi1, lo2, hi2) == (0.0, 4.0, 6.0, 24.0)
        assert hi1 < lo2
        assert spec.part2.form_factor.center == pytest.approx(15.0)
        assert part_poles(build_bipart(spec)) == part_poles(model)

    def test_uncoupled_part_diagonal_ok(self, spec):
        spec = BiPartSpec(spec.part1, spec.part2.rescaled(0.0), omega_max=24.0)
        h2 = build_bipart(spec).h2

        np.testing.assert_array_equal(h2, np.diag(np.diag(h2)))

    def test_swap_parts_ok(self, spec):
        poles = part_poles(build_bipart(spec))
        swapped = part_poles(build_bipart(swap_parts(spec)))

        assert swapped == poles[::-1]

    @pytest.mark.parametrize(
        "support2", [(3.0, 24.0), (0.0, 4.0), (4.0, 10.0)]
    )
    def test_overlapping_bands_error(self, spec, support2):
        with pytest.raises(OverlappingBands):
            BiPartSpec(spec.part1, part(15.0, 0.1, support2), omega_max=24.0)

    @pytest.mark.parametrize(
        "kwargs", [{"omega_max": 20.0}, {"omega_max": 24.0, "n_grid": 5}]
    )
    def test_spec_error(self, spec, kwargs):
        with pytest.raises(InvalidParameter):
            BiPartSpec(spec.part1, spec.part2, **kwargs)

    def test_part_index_error(self, model):
        with pytest.raises(InvalidParameter):
            part_observable_expectation(model, 3, [0.0])


class TestPartObservable:
    @pytest.mark.parametrize("index", [1, 2])
    def test_initial_value_ok(self, model, index):
        values = part_observable_expectation(model, index, [0.0])

        assert values[0] == pytest.approx(1.0, abs=1e-12)

    def test_uncoupled_level_ok(self, spec):
        spec = BiPartSpec(spec.part1.rescaled(0.0), spec.part2, omega_max=24.0)
        model = build_bipart(spec)

        values = part_observable_expectation(model, 1, np.linspace(0.0, 50.0, 11))
        np.testing.assert_allclose(values, 1.0, atol=1e-12)

    @pytest.mark.parametrize("index", [1, 2])
    def test_fitted_rate_ok(self, model, index):
        pole = part_poles(model)[index - 1]
        t = np.linspace(0.0, 100.0, 201)
        window = (0.5 / pole.gamma0, 2.0 / pole.gamma0)

        values = part_observable_expectation(model, index, t)
        rate = fit_part_rate(t, values, window)
        assert rate == pytest.approx(2 * pole.gamma0, rel=0.1)

    def test_swap_relabels_evolution_ok(self, spec, model):
        t = np.linspace(0.0, 60.0, 13)
        swapped = build_bipart(swap_parts(spec))

        np.testing.assert_allclose(
            part_observable_expectation(swapped, 2, t),
            part_observable_expectation(model, 1, t),
            atol=1e-10,
        )


class TestCrossIndependence:
    def test_unchanged_coupling_ok(self, model):
        assert cross_independence_check(model, 1.0) == 0.0

    @pytest.mark.parametrize("perturb", [0.0, 2.0])
    def test_rescaled_coupling_ok(self, model, perturb):
        t = np.linspace(0.0, 100.0, 41)

        assert cross_independence_check(model, perturb, t) <= 1e-12

    def test_swapped_parts_ok(self, spec):
        swapped = build_bipart(swap_parts(spec))

        assert cross_independence_check(swapped, 0.0) <= 1e-12

    def test_perturb_error(self, model):
        with pytest.raises(InvalidParameter):
            cross_independence_check(model, -1.0)


class TestClassicalityWindow:
    def test_window_ok(self):
        window = classicality_window(1.0, 100.0)

        assert (window.start, window.end) == (1.0, 100.0)
        assert window.is_empty is False

    def test_empty_window_ok(self, caplog):
        with caplog.at_level(logging.WARNING, logger="decolab.bipart"):
            window = classicality_window(5.0, 5.0)

        assert window.is_empty is True
        assert "Empty classicality window" in caplog.text

    def test_window_from_poles_ok(self, model):
        pole1, pole2 = part_poles(model)
        window = classicality_window(1 / pole1.gamma0, 1 / pole2.gamma0)

        # part 1 decays more slowly here, so it is still coherent
        assert pole1.gamma0 < pole2.gamma0
        assert window.is_empty is True
        assert window.start == pytest.approx(1 / (np.pi * 0.0064))
