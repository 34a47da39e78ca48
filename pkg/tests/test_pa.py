import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dabprecoding.errors import InvalidInputError
from dabprecoding.pa import (
    DEFAULT_PA,
    PaParams,
    apply_pa,
    bussgang_gain,
    distortion_covariance,
    expected_output_power,
    sample_distortion,
)
from dabprecoding.validate import bussgang_moments, empirical_output_power

from .conftest import crandn

LINEAR = PaParams(0.98, 0.0)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


@st.composite
def precoders(draw, max_m=6, max_k=4):
    m = draw(st.integers(1, max_m))
    k = draw(st.integers(1, max_k))
    re = draw(arrays(float, (m, k), elements=finite))
    im = draw(arrays(float, (m, k), elements=finite))
    return re + 1j * im


pa_params = st.builds(
    PaParams,
    st.complex_numbers(min_magnitude=0.1, max_magnitude=2, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=0.2, allow_nan=False, allow_infinity=False),
)


class TestApplyPa:
    def test_zero_input(self):
        assert apply_pa(np.zeros(3), DEFAULT_PA).tolist() == [0, 0, 0]

    def test_unit_input(self):
        assert apply_pa(1.0, DEFAULT_PA) == pytest.approx(0.94 - 0.01j, abs=1e-15)

    def test_linear_pa(self, rng):
        x = crandn(rng, 10)
        np.testing.assert_array_equal(apply_pa(x, LINEAR), 0.98 * x)

    def test_rejects_nonfinite(self):
        with pytest.raises(InvalidInputError):
            apply_pa(np.array([1.0, np.nan]), DEFAULT_PA)


def test_pa_params_validation():
    with pytest.raises(InvalidInputError):
        PaParams(0.0, 0.1)
    with pytest.raises(InvalidInputError):
        PaParams(1.0, complex(np.inf, 0))


class TestBussgangGain:
    def test_zero_precoder(self):
        np.testing.assert_array_equal(bussgang_gain(np.zeros((3, 2)), DEFAULT_PA), [0.98] * 3)

    def test_single_active_antenna(self):
        b = bussgang_gain(np.array([[1.0], [0.0]]), DEFAULT_PA)
        np.testing.assert_allclose(b, [0.98 + 2 * (-0.04 - 0.01j), 0.98], rtol=0, atol=1e-15)

    def test_homogeneity(self, rng):
        P = crandn(rng, 5, 3)
        b, b2 = bussgang_gain(P, DEFAULT_PA), bussgang_gain(1.7 * P, DEFAULT_PA)
        np.testing.assert_allclose(b2 - 0.98, 1.7**2 * (b - 0.98), rtol=1e-13)

    def test_matches_definition_by_sampling(self, rng):
        # [B]_mm = E[phi(x_m) x_m^*] / E|x_m|^2
        P = crandn(rng, 3, 2)
        x, _ = sample_distortion(P, DEFAULT_PA, 400_000, 3)
        y = apply_pa(x, DEFAULT_PA)
        est = np.mean(y * np.conj(x), axis=0) / np.mean(np.abs(x) ** 2, axis=0)
        np.testing.assert_allclose(est, bussgang_gain(P, DEFAULT_PA), atol=5e-3)


class TestDistortionCovariance:
    def test_zero(self):
        np.testing.assert_array_equal(distortion_covariance(np.zeros((3, 2)), DEFAULT_PA), 0)

    def test_single_active_antenna(self):
        C = distortion_covariance(np.array([[1.0], [0.0]]), DEFAULT_PA)
        np.testing.assert_allclose(C, np.diag([0.0034, 0.0]), atol=1e-15)

    @pytest.mark.slow
    def test_monte_carlo(self, rng):
        P = crandn(rng, 4, 2)
        _, ee = bussgang_moments(P, DEFAULT_PA, 1_000_000, 11)
        z = np.abs(ee.mean - distortion_covariance(P, DEFAULT_PA)) / ee.stderr
        assert z.max() < 3.0

    @given(precoders(), pa_params)
    @settings(max_examples=50, deadline=None)
    def test_hermitian_psd(self, P, pa):
        C = distortion_covariance(P, pa)
        np.testing.assert_array_equal(C, C.conj().T)
        tr = np.trace(C).real
        assert np.linalg.eigvalsh(C).min() >= -1e-10 * max(tr, 1e-300)
        assert np.all(np.diag(C).real >= 0)

    @given(precoders(), st.floats(0.1, 3))
    @settings(max_examples=30, deadline=None)
    def test_degree_six_scaling(self, P, a):
        np.testing.assert_allclose(
            distortion_covariance(a * P, DEFAULT_PA),
            a**6 * distortion_covariance(P, DEFAULT_PA),
            rtol=1e-12,
            atol=1e-12 * a**6 * np.abs(distortion_covariance(P, DEFAULT_PA)).max(initial=0),
        )


class TestExpectedOutputPower:
    def test_zero(self):
        assert expected_output_power(np.zeros((4, 2)), DEFAULT_PA) == 0

    def test_single_antenna_value(self):
        assert expected_output_power(np.array([[1.0]]), DEFAULT_PA) == pytest.approx(0.8138, rel=1e-13)

    @pytest.mark.slow
    def test_single_antenna_monte_carlo(self):
        mean, se = empirical_output_power(np.array([[1.0]]), DEFAULT_PA, 10_000_000, 5)
        assert abs(mean - 0.8138) < 3 * se

    def test_linear_reduction(self):
        P = np.zeros((16, 2))
        P[:, 0] = 1.0
        assert expected_output_power(P, LINEAR) == pytest.approx(15.3664, rel=1e-14)

    def test_batched(self, rng):
        P = crandn(rng, 3, 4, 2)
        np.testing.assert_allclose(expected_output_power(P, DEFAULT_PA), [expected_output_power(p, DEFAULT_PA) for p in P])

    @given(precoders(), pa_params)
    @settings(max_examples=60, deadline=None)
    def test_bussgang_consistency(self, P, pa):
        # sum_m |B_mm|^2 sigma_m^2 + [C_e]_mm equals the output power
        s2 = np.sum(np.abs(P) ** 2, axis=1)
        lhs = np.sum(np.abs(bussgang_gain(P, pa)) ** 2 * s2 + np.diag(distortion_covariance(P, pa)).real)
        assert lhs == pytest.approx(expected_output_power(P, pa), rel=1e-10, abs=1e-300)

    @given(precoders())
    @settings(max_examples=30, deadline=None)
    def test_linear_degeneracy(self, P):
        assert expected_output_power(P, LINEAR) == pytest.approx(0.98**2 * np.sum(np.abs(P) ** 2), rel=1e-12, abs=1e-300)
        np.testing.assert_array_equal(distortion_covariance(P, LINEAR), 0)
        np.testing.assert_array_equal(bussgang_gain(P, LINEAR), 0.98)


class TestSampleDistortion:
    def test_linear_pa_has_no_distortion(self, rng):
        _, e = sample_distortion(crandn(rng, 4, 2), LINEAR, 1000, 0)
        np.testing.assert_array_equal(e, 0)

    def test_deterministic(self, rng):
        P = crandn(rng, 4, 2)
        a, b = sample_distortion(P, DEFAULT_PA, 100, 9), sample_distortion(P, DEFAULT_PA, 100, 9)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])

    def test_input_covariance(self, rng):
        P = crandn(rng, 3, 2)
        x, _ = sample_distortion(P, DEFAULT_PA, 200_000, 1)
        np.testing.assert_allclose(x.T @ x.conj() / len(x), P @ P.conj().T, atol=0.02)

    @pytest.mark.slow
    def test_uncorrelated_with_input(self, rng):
        P = crandn(rng, 4, 2)
        xe, _ = bussgang_moments(P, DEFAULT_PA, 1_000_000, 12)
        assert (np.abs(xe.mean) / xe.stderr).max() < 3.0

    def test_rejects_bad_count(self):
        with pytest.raises(InvalidInputError):
            sample_distortion(np.ones((2, 1)), DEFAULT_PA, 0, 0)
