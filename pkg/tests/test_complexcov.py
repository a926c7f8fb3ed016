import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinkcov.complexcov import ComplexSampleSet, estimate_complex, stack_real, unstack_cov
from shrinkcov.errors import InvalidInputError
from shrinkcov.estimators import Method, SampleSet, estimate, sample_covariance
from shrinkcov.beamform import UlaScenario
from shrinkcov.models import rng_for


def complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@st.composite
def complex_sets(draw, max_p=8, max_n=12):
    p = draw(st.integers(1, max_p))
    n = draw(st.integers(1, max_n))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    scales = np.exp(rng.uniform(-1, 1, size=p))
    return ComplexSampleSet(scales[:, None] * complex_normal(rng, (p, n)))


class TestStacking:
    def test_single_entry(self):
        np.testing.assert_array_equal(stack_real(ComplexSampleSet([[1 + 1j]])).data, [[1.0], [1.0]])

    def test_real_data_lower_half_zero(self, rng):
        x = ComplexSampleSet(rng.standard_normal((4, 3)))
        np.testing.assert_array_equal(stack_real(x).data[4:], 0.0)

    def test_round_trip(self, rng):
        z = complex_normal(rng, (5, 7))
        s = stack_real(ComplexSampleSet(z)).data
        np.testing.assert_array_equal(s[:5] + 1j * s[5:], z)

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            ComplexSampleSet([[np.nan + 0j]])


class TestUnstack:
    def test_identity(self):
        np.testing.assert_array_equal(unstack_cov(np.eye(6)), 2 * np.eye(3))

    def test_real_embedding(self, rng):
        a = rng.standard_normal((3, 3))
        rr = a @ a.T
        big = np.zeros((6, 6))
        big[:3, :3] = rr
        np.testing.assert_allclose(unstack_cov(big), rr, atol=1e-15)

    def test_rejects_asymmetric(self):
        m = np.eye(4)
        m[0, 1] = 1.0
        with pytest.raises(InvalidInputError):
            unstack_cov(m)

    def test_rejects_odd_size(self):
        with pytest.raises(InvalidInputError):
            unstack_cov(np.eye(3))

    def test_monte_carlo_consistency(self):
        rng = rng_for(11)
        a = complex_normal(rng, (3, 3))
        C = a @ a.conj().T + np.eye(3)
        L = np.linalg.cholesky(C)
        z = L @ complex_normal(rng, (3, 1_000_000))
        est = unstack_cov(sample_covariance(stack_real(ComplexSampleSet(z))).s)
        assert np.linalg.norm(est - C) / np.linalg.norm(C) < 1e-2


class TestEstimateComplex:
    @pytest.mark.parametrize("method", ["lw", "rblw", "oas"])
    def test_real_data_matches_real_pipeline(self, rng, method):
        x = rng.standard_normal((4, 6)) * np.array([[0.5], [1.0], [2.0], [3.0]])
        c = estimate_complex(ComplexSampleSet(x), method)
        # stacked problem has an all-zero lower block, so the coefficient
        # comes from dimension 2p; the map folds the target over both halves
        stacked = estimate(SampleSet(np.vstack([x, np.zeros_like(x)])), method)
        S = sample_covariance(SampleSet(x)).s
        expected = (1 - stacked.rho) * S + stacked.rho * np.trace(S) / 4 * np.eye(4)
        assert c.rho == stacked.rho
        np.testing.assert_allclose(c.sigma_hat, expected, atol=1e-12)
        np.testing.assert_array_equal(c.sigma_hat.imag, 0.0)

    def test_n1_oas_is_scaled_identity(self, rng):
        c = estimate_complex(ComplexSampleSet(complex_normal(rng, (4, 1))), "oas")
        assert c.rho == 1.0
        np.testing.assert_allclose(c.sigma_hat, c.sigma_hat[0, 0] * np.eye(4), atol=1e-12)

    def test_scenario_estimate_positive_definite(self):
        scen = UlaScenario.default()
        x = ComplexSampleSet(scen.snapshots(60, rng_for(5)))
        c = estimate_complex(x, Method.LW)
        np.testing.assert_allclose(c.sigma_hat, c.sigma_hat.conj().T, atol=1e-12)
        assert np.linalg.eigvalsh(c.sigma_hat).min() > 0

    def test_oracle_rejected(self, rng):
        with pytest.raises(InvalidInputError):
            estimate_complex(ComplexSampleSet(complex_normal(rng, (3, 4))), "oracle")

    def test_dim_override_changes_coefficient(self, rng):
        x = ComplexSampleSet(complex_normal(rng, (10, 12)) * np.linspace(0.3, 3, 10)[:, None])
        assert estimate_complex(x, "oas").rho != estimate_complex(x, "oas", dim=10).rho

    @given(complex_sets(), st.sampled_from(["sample", "lw", "rblw", "oas"]))
    def test_hermitian_psd(self, x, method):
        c = estimate_complex(x, method)
        np.testing.assert_array_equal(c.sigma_hat, c.sigma_hat.conj().T)
        tr = np.trace(c.sigma_hat).real
        assert np.linalg.eigvalsh(c.sigma_hat).min() >= -1e-10 * tr / x.p

    @given(complex_sets(), st.integers(0, 2**32 - 1))
    def test_phase_conjugation_sample(self, x, seed):
        rng = np.random.default_rng(seed)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, x.p))
        base = estimate_complex(x, "sample").sigma_hat
        rot = estimate_complex(ComplexSampleSet(phases[:, None] * x.data), "sample").sigma_hat
        expected = phases[:, None] * base * phases.conj()[None, :]
        np.testing.assert_allclose(rot, expected, atol=1e-10 * max(1.0, np.abs(base).max()))

    @settings(max_examples=50)
    @given(complex_sets(), st.floats(0, 2 * np.pi), st.sampled_from(["lw", "rblw", "oas"]))
    def test_global_phase_keeps_coefficient(self, x, theta, method):
        a = estimate_complex(x, method).rho
        b = estimate_complex(ComplexSampleSet(np.exp(1j * theta) * x.data), method).rho
        assert b == pytest.approx(a, abs=1e-10)
