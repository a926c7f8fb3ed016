import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shrinkcov.beamform import Source, UlaScenario
from shrinkcov.errors import InvalidParameterError
from shrinkcov.models import CovModel, ar1_cov
from shrinkcov.montecarlo import (
    CLAIRVOYANT,
    ExperimentConfig,
    _check,
    ci95_halfwidth,
    mse_frobenius,
    run_mse_experiment,
    run_sinr_experiment,
    verify_haar_moments,
    verify_norm_moment,
    verify_wishart_moments,
)


def loop_mse(a, b):
    total = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            total += abs(a[i, j] - b[i, j]) ** 2
    return total


class TestMse:
    def test_zero(self, rng):
        m = rng.standard_normal((4, 4))
        assert mse_frobenius(m, m) == 0.0

    def test_zero_estimate(self):
        assert mse_frobenius(np.zeros((5, 5)), np.eye(5)) == 5.0

    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_matches_loop(self, p, seed):
        r = np.random.default_rng(seed)
        a, b = r.standard_normal((p, p)), r.standard_normal((p, p))
        assert mse_frobenius(a, b) == pytest.approx(loop_mse(a, b), rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mse_frobenius(np.eye(2), np.eye(3))


class TestCi:
    def test_formula(self):
        v = np.array([1.0, 2.0, 4.0, 7.0])
        assert ci95_halfwidth(v) == pytest.approx(1.96 * v.std(ddof=1) / 2)

    def test_shrinks_like_inverse_sqrt(self):
        model = CovModel.ar1(20, 0.5)
        small = run_mse_experiment(ExperimentConfig(model, (10,), 500, 1, ("lw",)))
        large = run_mse_experiment(ExperimentConfig(model, (10,), 2000, 1, ("lw",)))
        ratio = small.get(10, "lw").ci95 / large.get(10, "lw").ci95
        assert 0 < large.get(10, "lw").ci95
        assert ratio == pytest.approx(2.0, rel=0.15)


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [dict(n_grid=()), dict(n_grid=(0,)), dict(trials=0), dict(methods=())],
    )
    def test_invalid(self, kwargs):
        base = dict(model=CovModel.ar1(5, 0.1), n_grid=(3,), trials=10)
        base.update(kwargs)
        with pytest.raises(InvalidParameterError):
            ExperimentConfig(**base)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            ExperimentConfig(CovModel.ar1(5, 0.1), (3,), methods=("bogus",))


class TestMseExperiment:
    def test_sample_only_matches_wishart(self):
        sigma = ar1_cov(8, 0.5)
        res = run_mse_experiment(ExperimentConfig(CovModel.ar1(8, 0.5), (5,), 4000, 3, ("sample",)))
        row = res.get(5, "sample")
        expected = (np.sum(sigma * sigma) + np.trace(sigma) ** 2) / 5
        assert abs(row.mean - expected) < 3 * row.ci95

    def test_identity_oracle_is_one(self):
        res = run_mse_experiment(ExperimentConfig(CovModel.ar1(6, 0.0), (3, 9), 300, 0, ("oracle",)))
        for n in (3, 9):
            row = res.get(n, "oracle")
            assert row.mean_rho == 1.0

    def test_oracle_and_rblw_ordering(self):
        res = run_mse_experiment(ExperimentConfig(CovModel.ar1(30, 0.5), (6, 15), 2000, 5))
        for n in (6, 15):
            o = res.get(n, "oracle")
            for m in ("oas", "rblw", "lw"):
                r = res.get(n, m)
                assert o.mean <= r.mean + 2 * (o.ci95 + r.ci95)
            rb, lw = res.get(n, "rblw"), res.get(n, "lw")
            assert rb.mean <= lw.mean + 2 * lw.ci95

    def test_deterministic_and_worker_independent(self):
        cfg = ExperimentConfig(CovModel.fbm(12, 0.7), (4, 8), 600, 9)
        a = run_mse_experiment(cfg, workers=1)
        b = run_mse_experiment(cfg, workers=2)
        assert a.rows == b.rows

    def test_rejects_scenario(self):
        with pytest.raises(InvalidParameterError):
            run_mse_experiment(ExperimentConfig(UlaScenario.default(), (10,), 10))


class TestSinrExperiment:
    def test_clairvoyant_flat(self):
        cfg = ExperimentConfig(UlaScenario.default(), (10, 30), 50, 0, (CLAIRVOYANT,))
        res = run_sinr_experiment(cfg)
        assert res.get(10, CLAIRVOYANT).mean == res.get(30, CLAIRVOYANT).mean
        assert res.get(10, CLAIRVOYANT).ci95 == 0.0

    def test_sample_skipped_below_p(self):
        cfg = ExperimentConfig(UlaScenario.default(), (5, 20), 40, 0, ("sample", "oas"))
        res = run_sinr_experiment(cfg)
        assert res.get(5, "sample").trials_used == 0
        assert np.isnan(res.get(5, "sample").mean)
        assert res.get(20, "sample").trials_used == 40

    def test_array_gain_bound(self):
        scen = UlaScenario(6, (Source(0.5, 2.0),))
        res = run_sinr_experiment(ExperimentConfig(scen, (8, 20), 200, 2, ("lw", "rblw", "oas")))
        bound_db = 10 * np.log10(2.0 * 6)
        for row in res.rows:
            assert row.mean <= bound_db + 1e-9

    def test_worker_independent(self):
        cfg = ExperimentConfig(UlaScenario.default(), (10, 15), 300, 4, ("lw", "oas"))
        assert run_sinr_experiment(cfg, workers=1).rows == run_sinr_experiment(cfg, workers=2).rows

    def test_rejects_oracle(self):
        with pytest.raises(InvalidParameterError):
            run_sinr_experiment(ExperimentConfig(UlaScenario.default(), (10,), 10, methods=("oracle",)))


class TestVerification:
    def test_wishart_identity(self):
        assert verify_wishart_moments(np.eye(3), 5, trials=20_000, seed=1).passed

    def test_wishart_targets(self):
        rep = verify_wishart_moments(np.diag([2.0, 1.0]), 3, trials=10_000, seed=0)
        targets = [c.target for c in rep.checks]
        np.testing.assert_allclose(targets, [3, 4 / 3 * 5 + 9 / 3, 9 + 10 / 3])

    def test_check_flags_offset(self):
        samples = 3 + np.linspace(-1, 1, 100)
        assert _check("mean", samples, 3.0).passed
        bad = _check("mean", samples, 6.0)
        assert not bad.passed and bad.z < -4

    @pytest.mark.parametrize("p,n", [(4, 2), (2, 4)])
    def test_haar(self, p, n):
        rep = verify_haar_moments(p, n, trials=10_000, seed=2)
        assert rep.passed
        assert rep.checks[0].target == pytest.approx(3 / (n * (n + 2)))

    def test_haar_n1_exact(self):
        rep = verify_haar_moments(3, 1, trials=10_000, seed=0)
        assert rep.passed
        assert rep.checks[0].estimate == pytest.approx(1.0, abs=1e-12)

    def test_norm_n1_per_sample(self):
        rep = verify_norm_moment(np.diag([4.0, 1.0]), 1, trials=10_000, seed=3)
        assert rep.passed
        assert len(rep.checks) == 2

    def test_norm_identity_chi_square(self):
        p, n = 3, 5
        # right side through the Wishart identities equals E chi2_p^2
        tr_s2 = (n + 1) / n * p + p**2 / n
        tr_s_sq = p**2 + 2 * p / n
        assert n / (n + 2) * (2 * tr_s2 + tr_s_sq) == pytest.approx(p * (p + 2))
        rep = verify_norm_moment(np.eye(p), n, trials=20_000, seed=4)
        assert rep.passed

    def test_requires_trials(self):
        with pytest.raises(InvalidParameterError):
            verify_wishart_moments(np.eye(2), 3, trials=100)
