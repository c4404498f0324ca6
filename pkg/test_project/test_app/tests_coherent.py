import math

import numpy as np

import pytest

from decolab.coherent import (
    QuasiCoherentState,
    build_quasi_coherent,
    coherent_overlap,
    evolved_overlap,
    log_normalization,
    macroscopicity_check,
    normalization_correction,
    overlap_direct,
    overlap_series,
    remainder_bound,
    survival_amplitude,
)
from decolab.exceptions import InvalidParameter, LengthMismatch, MismatchedCutoffs


class TestBuild:
    @pytest.mark.parametrize(
        "alpha, cutoff_n, expected",
        [(0.0, 5, [1, 0, 0, 0, 0, 0]), (1.0, 0, [1]), (0.0, 0, [1])],
    )
    def test_build_quasi_coherent_ok(self, alpha, cutoff_n, expected):
        state = build_quasi_coherent(alpha, cutoff_n)

        np.testing.assert_allclose(state.coeffs, expected, atol=1e-15)

    def test_normalized_ok(self):
        state = build_quasi_coherent(2.0, 40)

        assert state.norm == pytest.approx(1.0, abs=1e-12)
        # c_3 and c_4 tie exactly at alpha = 2
        assert int(np.argmax(np.abs(state.coeffs))) in (3, 4)

    def test_large_cutoff_ok(self):
        state = build_quasi_coherent(15.0, 500)

        assert np.all(np.isfinite(state.coeffs))
        assert state.norm == pytest.approx(1.0, abs=1e-12)

    def test_log_normalization_ok(self):
        assert log_normalization(3.0, 200) == pytest.approx(9.0, abs=1e-12)
        assert log_normalization(1.0, 1) == pytest.approx(math.log(2.0))

    def test_negative_alpha_error(self):
        with pytest.raises(InvalidParameter):
            build_quasi_coherent(-0.5, 10)

    def test_cutoff_error(self, override_settings):
        override_settings(MAX_CUTOFF=50)

        with pytest.raises(InvalidParameter):
            build_quasi_coherent(1.0, 51)
        with pytest.raises(InvalidParameter):
            build_quasi_coherent(1.0, -1)

    def test_to_dict_ok(self):
        data = build_quasi_coherent(0.0, 2).to_dict()

        assert data == {
            "alpha": 0.0,
            "N": 2,
            "coeffs": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        }
        assert QuasiCoherentState.from_dict(data).norm == 1.0

    def test_from_dict_error(self):
        data = {"alpha": 1.0, "N": 3, "coeffs": [[1.0, 0.0]]}

        with pytest.raises(LengthMismatch):
            QuasiCoherentState.from_dict(data)


class TestOverlap:
    def test_overlap_direct_ok(self):
        state = build_quasi_coherent(2.5, 30)

        assert overlap_direct(state, state) == pytest.approx(1.0, abs=1e-12)
        vacuum = build_quasi_coherent(0.0, 30)
        assert overlap_direct(vacuum, vacuum) == 1.0

    def test_overlap_direct_vacuum_ok(self):
        vacuum = build_quasi_coherent(0.0, 40)
        displaced = build_quasi_coherent(3.0, 40)

        assert overlap_direct(vacuum, displaced) == pytest.approx(
            math.exp(-4.5), rel=1e-10
        )

    def test_overlap_direct_error(self):
        with pytest.raises(MismatchedCutoffs):
            overlap_direct(build_quasi_coherent(1.0, 10), build_quasi_coherent(1.0, 11))

    @pytest.mark.parametrize(
        "alpha1, alpha2, cutoff_n, expected",
        [
            (1.5, 1.5, 7, 1.0),
            (0.0, 1.0, 3, 0.604167),
            (3.0, 1.0, 60, math.exp(-2.0)),
        ],
    )
    def test_overlap_series_ok(self, alpha1, alpha2, cutoff_n, expected):
        series = overlap_series(alpha1, alpha2, cutoff_n)

        assert series == pytest.approx(expected, abs=1e-6)

    @pytest.mark.parametrize(
        "alpha1, alpha2, cutoff_n, expected",
        [(1.0, 1.0, 10, 0.0), (0.0, 2.0, 10, 5.1307e-5)],
    )
    def test_remainder_bound_ok(self, alpha1, alpha2, cutoff_n, expected):
        bound = remainder_bound(alpha1, alpha2, cutoff_n)

        assert bound == pytest.approx(expected, rel=1e-4)

    def test_remainder_bound_monotone_ok(self):
        # decreasing once N + 1 exceeds delta^2 / 2 = 8
        bounds = [remainder_bound(0.0, 4.0, n) for n in range(8, 40)]

        assert all(b2 < b1 for b1, b2 in zip(bounds, bounds[1:]))

    @pytest.mark.parametrize("cutoff_n", [10, 20, 40, 80])
    @pytest.mark.parametrize("alpha", [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    def test_series_within_bound_ok(self, alpha, cutoff_n):
        bound = remainder_bound(0.0, alpha, cutoff_n)
        series = overlap_series(0.0, alpha, cutoff_n)
        exact = math.exp(-(alpha**2) / 2)

        assert abs(series - exact) <= bound * (1 + 1e-9) + 1e-18

        direct = overlap_direct(
            build_quasi_coherent(0.0, cutoff_n), build_quasi_coherent(alpha, cutoff_n)
        )
        envelope = 3 * bound + normalization_correction(0.0, alpha, cutoff_n)
        assert abs(direct - series) <= envelope + 1e-12

    def test_series_macroscopic_separation_ok(self):
        alpha, cutoff_n = 14.0, 400
        assert macroscopicity_check(0.0, alpha, cutoff_n).macroscopic

        series = overlap_series(0.0, alpha, cutoff_n)
        exact = math.exp(-(alpha**2) / 2)

        assert series > 0
        assert series == pytest.approx(exact, rel=1e-12)
        bound = remainder_bound(0.0, alpha, cutoff_n)
        assert abs(series - exact) <= bound + 2 * math.ulp(exact)

    @pytest.mark.parametrize("alpha1, alpha2", [(1.0, 4.0), (2.5, 6.0), (6.0, 3.0)])
    def test_direct_matches_series_ok(self, alpha1, alpha2):
        cutoff_n = 40
        s1 = build_quasi_coherent(alpha1, cutoff_n)
        s2 = build_quasi_coherent(alpha2, cutoff_n)

        gap = abs(overlap_direct(s1, s2) - overlap_series(alpha1, alpha2, cutoff_n))
        envelope = 3 * remainder_bound(alpha1, alpha2, cutoff_n)
        envelope += normalization_correction(alpha1, alpha2, cutoff_n)
        assert gap <= envelope + 1e-12


class TestMacroscopicity:
    @pytest.mark.parametrize(
        "alpha1, alpha2, cutoff_n, lower_ok, upper_ok",
        [
            (0.0, 10.0, 200, True, True),
            (2.0, 3.0, 200, False, True),
            (0.0, 10.0, 10, True, False),
        ],
    )
    def test_macroscopicity_check_ok(
        self, alpha1, alpha2, cutoff_n, lower_ok, upper_ok
    ):
        report = macroscopicity_check(alpha1, alpha2, cutoff_n)

        assert report.lower_ok is lower_ok
        assert report.upper_ok is upper_ok
        assert report.macroscopic is (lower_ok and upper_ok)

    def test_upper_bounds_ok(self):
        report = macroscopicity_check(0.0, 10.0, 200)

        assert report.upper_bound == pytest.approx(20.0499, rel=1e-5)
        # Stirling's form sits above the factorial threshold
        assert report.upper_bound_exact < report.upper_bound

    def test_k_lower_from_settings_ok(self, override_settings):
        override_settings(K_LOWER=0.5)

        assert macroscopicity_check(2.0, 3.0, 200).macroscopic is True

    def test_macroscopicity_check_error(self):
        with pytest.raises(InvalidParameter):
            macroscopicity_check(0.0, 10.0, 200, k_lower=0.0)


class TestEvolvedOverlap:
    def test_initial_overlap_ok(self):
        assert evolved_overlap(2.0, 2.0, 1.0, 0.0, 80) == pytest.approx(1.0, abs=1e-12)

    def test_vacuum_bra_ok(self):
        t = np.linspace(0.0, 20.0, 9)
        value = evolved_overlap(0.0, 3.0, complex(1.0, -0.05), t, 40)

        np.testing.assert_allclose(value, math.exp(-4.5), rtol=1e-14)

    def test_closed_form_ok(self):
        z0 = complex(1.0, -0.05)
        t = np.linspace(0.0, 30.0, 31)

        value = evolved_overlap(3.0, 3.0, z0, t, 100)
        expected = np.exp(-9.0 * (1 - np.exp(-1j * z0 * t)))
        np.testing.assert_allclose(value, expected, rtol=1e-10, atol=1e-14)

    def test_hbar_ok(self):
        z0 = complex(2.0, -0.1)

        value = evolved_overlap(1.0, 2.0, z0, 3.0, 60, hbar=2.0)
        assert value == pytest.approx(evolved_overlap(1.0, 2.0, z0, 1.5, 60))

    def test_stable_modulus_ok(self):
        # pure phases: periodic in general, constant for a vacuum bra
        omega = 2.0
        period = 2 * math.pi / omega
        t = np.linspace(0.0, period, 7)

        value = evolved_overlap(1.0, 2.0, omega, t, 60)
        assert abs(value[-1]) == pytest.approx(abs(value[0]), rel=1e-12)
        flat = evolved_overlap(0.0, 2.0, omega, t, 60)
        np.testing.assert_allclose(np.abs(flat), abs(flat[0]), rtol=1e-14)

    def test_bounded_modulus_ok(self):
        t = np.linspace(0.0, 50.0, 26)

        for alpha_bra, alpha_ket in ((0.0, 10.0), (10.0, 10.0), (4.0, 12.0)):
            value = evolved_overlap(alpha_bra, alpha_ket, complex(1.0, -0.02), t, 200)
            assert np.all(np.abs(value) <= 1 + 1e-8)

    def test_truncated_normalization_ok(self):
        z0 = complex(1.3, -0.04)
        t = np.linspace(0.0, 10.0, 11)
        bra = build_quasi_coherent(1.5, 12)
        ket = build_quasi_coherent(2.5, 12)

        value = evolved_overlap(1.5, 2.5, z0, t, 12, normalization="truncated")
        expected = survival_amplitude(bra.coeffs, ket.coeffs, z0, t)
        np.testing.assert_allclose(value, expected, rtol=1e-12)

    def test_evolved_overlap_error(self):
        with pytest.raises(InvalidParameter):
            evolved_overlap(1.0, 2.0, 1.0, -1.0, 10)
        with pytest.raises(InvalidParameter):
            evolved_overlap(1.0, 2.0, 1.0, 1.0, 10, normalization="poisson")


class TestSurvivalAmplitude:
    def test_initial_inner_product_ok(self):
        bra = [1.0, 2j, 0.5]
        ket = [0.3, 1.0, -1j]

        expected = np.vdot(bra, ket)
        value = survival_amplitude(bra, ket, complex(1.0, -0.2), 0.0)
        assert value == pytest.approx(expected)

    def test_periodic_ok(self):
        state = build_quasi_coherent(1.7, 20)
        period = 2 * math.pi / 1.5

        start = survival_amplitude(state.coeffs, state.coeffs, 1.5, 0.4)
        later = survival_amplitude(state.coeffs, state.coeffs, 1.5, 0.4 + period)
        assert abs(later) == pytest.approx(abs(start), rel=1e-12)

    def test_conjugate_symmetry_ok(self):
        bra = build_quasi_coherent(1.0, 15).coeffs * np.exp(0.3j)
        ket = build_quasi_coherent(2.0, 15).coeffs
        t = np.array([0.5, 1.0, 4.0])

        forward = survival_amplitude(bra, ket, 0.8, t)
        backward = np.conj(survival_amplitude(ket, bra, 0.8, -t))
        np.testing.assert_allclose(forward, backward, rtol=1e-14)

    def test_survival_amplitude_error(self):
        with pytest.raises(LengthMismatch):
            survival_amplitude([1.0, 0.0], [1.0], 1.0, 0.0)


class TestCoherentOverlap:
    def test_coherent_overlap_ok(self):
        assert coherent_overlap(1.0, 1.0) == pytest.approx(1.0)
        assert coherent_overlap(1.0, 1j) == pytest.approx(np.exp(-1 + 1j))
