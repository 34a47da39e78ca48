import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dabprecoding.channel import GeometryConfig, db_to_linear, draw_channels, noise_power
from dabprecoding.errors import DabError
from dabprecoding.metrics import sum_rate
from dabprecoding.optimizer import (
    OptimizerOptions,
    dab_precoder,
    gamma_matrix,
    initializations,
    multi_init_dab,
    sum_rate_gradient,
    sum_rate_gradient_reference,
    upsilon_matrix,
)
from dabprecoding.pa import DEFAULT_PA, PaParams, expected_output_power
from dabprecoding.precoding import mrt, project_power, zf
from dabprecoding.validate import finite_difference_gradient

from .conftest import P_TOT_43DBM, crandn

LINEAR = PaParams(0.98, 0.0)
GAMMA2 = 1e-11


def _setup(seed, M=8, K=2, snr_db=20.0, pa=DEFAULT_PA):
    ch = draw_channels(GeometryConfig(M, K, 10, GAMMA2), seed)
    n0 = noise_power(db_to_linear(snr_db), GAMMA2, P_TOT_43DBM)
    return ch, n0


class TestMatrices:
    def test_gamma_linear(self, rng):
        h = crandn(rng, 4)
        G = gamma_matrix(crandn(rng, 4, 2), h, LINEAR)
        np.testing.assert_allclose(G, 0.98**2 * np.outer(h.conj(), h), rtol=1e-14)

    def test_gamma_hermitian(self, rng):
        G = gamma_matrix(crandn(rng, 5, 3), crandn(rng, 5), DEFAULT_PA)
        np.testing.assert_allclose(G, G.conj().T, atol=1e-14)

    def test_gamma_single_antenna(self):
        # M = 1: Gamma = |beta1 + 2 beta3 |p|^2|^2 |h|^2 with |p|^2 the antenna power
        P = np.array([[0.6 + 0.3j, -0.2j]])
        h = np.array([1.5 - 0.5j])
        b = DEFAULT_PA.beta1 + 2 * DEFAULT_PA.beta3 * np.sum(np.abs(P) ** 2)
        assert gamma_matrix(P, h, DEFAULT_PA)[0, 0] == pytest.approx(abs(b) ** 2 * abs(h[0]) ** 2, rel=1e-14)

    def test_upsilon_vanishes_for_linear_pa(self, rng):
        P = crandn(rng, 4, 2)
        np.testing.assert_array_equal(upsilon_matrix(P, crandn(rng, 4), P[:, 0], LINEAR), 0)

    def test_upsilon_is_diagonal(self, rng):
        P = crandn(rng, 4, 2)
        U = upsilon_matrix(P, crandn(rng, 4), P[:, 1], DEFAULT_PA)
        np.testing.assert_array_equal(U - np.diag(np.diag(U)), 0)
        # real diagonal: d|h^T B p|^2 / d|x_m|^2 is real
        np.testing.assert_allclose(np.diag(U).imag, 0, atol=1e-13)


class TestGradient:
    @pytest.mark.parametrize("seed", range(6))
    @pytest.mark.parametrize("snr_db", [-10.0, 15.0, 40.0])
    def test_matches_finite_differences(self, seed, snr_db):
        rng = np.random.default_rng(seed)
        M, K = [(2, 1), (4, 2), (8, 3)][seed % 3]
        ch, n0 = _setup(seed, M, K, snr_db)
        P = project_power(crandn(rng, M, K), DEFAULT_PA, P_TOT_43DBM)
        fd = finite_difference_gradient(lambda X: sum_rate(X, ch, DEFAULT_PA, n0), P, step=1e-6)
        an = sum_rate_gradient(P, ch, DEFAULT_PA, n0)
        np.testing.assert_allclose(an, fd, rtol=1e-5, atol=1e-5 * np.max(np.abs(fd)))

    def test_matches_finite_differences_strong_nonlinearity(self, rng):
        pa = PaParams(1.0, -0.3 + 0.1j)
        H, P = crandn(rng, 3, 4), 0.5 * crandn(rng, 4, 3)
        fd = finite_difference_gradient(lambda X: sum_rate(X, H, pa, 0.05), P, step=1e-6)
        np.testing.assert_allclose(sum_rate_gradient(P, H, pa, 0.05), fd, rtol=1e-6, atol=1e-8)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 5), st.integers(1, 4), st.integers(0, 2**32 - 1), st.floats(1e-3, 10.0))
    def test_reference_agrees(self, M, K, seed, n0):
        rng = np.random.default_rng(seed)
        H, P = crandn(rng, K, M), crandn(rng, M, K)
        ref = sum_rate_gradient_reference(P, H, DEFAULT_PA, n0)
        fast = sum_rate_gradient(P, H, DEFAULT_PA, n0)
        np.testing.assert_allclose(fast, ref, rtol=1e-9, atol=1e-12 * max(1.0, np.max(np.abs(ref))))

    def test_batched(self, rng):
        H, Ps = crandn(rng, 2, 4), crandn(rng, 5, 4, 2)
        batch = sum_rate_gradient(Ps, H, DEFAULT_PA, 0.1)
        for P, g in zip(Ps, batch):
            np.testing.assert_allclose(g, sum_rate_gradient(P, H, DEFAULT_PA, 0.1), rtol=1e-12)

    def test_zero_channel(self, rng):
        g = sum_rate_gradient(crandn(rng, 4, 2), np.zeros((2, 4)), DEFAULT_PA, 1.0)
        np.testing.assert_array_equal(g, 0)

    def test_single_user_linear_points_along_conj_channel(self, rng):
        h = crandn(rng, 1, 6)
        g = sum_rate_gradient(crandn(rng, 6, 1), h, LINEAR, 0.5)[:, 0]
        u = h[0].conj() / np.linalg.norm(h)
        assert abs(np.vdot(u, g)) == pytest.approx(np.linalg.norm(g), rel=1e-12)


class TestDabPrecoder:
    def test_trace_is_monotone(self):
        ch, n0 = _setup(3, 16, 2, 30.0)
        P0 = project_power(mrt(ch), DEFAULT_PA, P_TOT_43DBM)
        P, trace = dab_precoder(ch, DEFAULT_PA, n0, P_TOT_43DBM, P0, OptimizerOptions(max_iters=30))
        assert np.all(np.diff(trace.rates) >= 0)
        assert trace.rates.shape == (31,) and trace.accepted.shape == (30,)
        assert trace.rates[-1] == pytest.approx(sum_rate(P, ch, DEFAULT_PA, n0), rel=1e-12)

    def test_step_size_rule(self):
        ch, n0 = _setup(4, 8, 2, 20.0)
        P0 = project_power(mrt(ch), DEFAULT_PA, P_TOT_43DBM)
        opts = OptimizerOptions(max_iters=40, mu0=2.0)
        _, trace = dab_precoder(ch, DEFAULT_PA, n0, P_TOT_43DBM, P0, opts)
        for i, acc in enumerate(trace.accepted):
            expected = 2.0 if acc else 0.5 * trace.step_sizes[i]
            assert trace.step_sizes[i + 1] == expected
            assert (trace.rates[i + 1] > trace.rates[i]) == acc

    def test_every_iterate_meets_power_budget(self):
        ch, n0 = _setup(5, 16, 2, 30.0)
        seen = []

        def cb(i, P, acc):
            seen.append(expected_output_power(P[0], DEFAULT_PA))

        P0 = project_power(zf(ch), DEFAULT_PA, P_TOT_43DBM)
        dab_precoder(ch, DEFAULT_PA, n0, P_TOT_43DBM, P0, OptimizerOptions(max_iters=25), cb)
        assert len(seen) == 25
        np.testing.assert_allclose(seen, P_TOT_43DBM, rtol=1e-10)

    def test_stationary_point_is_kept(self, rng):
        P0 = project_power(crandn(rng, 4, 2), DEFAULT_PA, P_TOT_43DBM)
        P, trace = dab_precoder(np.zeros((2, 4)), DEFAULT_PA, 1.0, P_TOT_43DBM, P0, OptimizerOptions(max_iters=5))
        np.testing.assert_array_equal(P, P0)
        assert not trace.accepted.any()

    def test_improves_on_mrt_at_high_snr(self):
        ch, n0 = _setup(6, 16, 2, 30.0)
        P0 = project_power(mrt(ch), DEFAULT_PA, P_TOT_43DBM)
        P, trace = dab_precoder(ch, DEFAULT_PA, n0, P_TOT_43DBM, P0)
        assert trace.rates[-1] > 1.2 * trace.rates[0]

    def test_options_validation(self):
        for kw in ({"max_iters": 0}, {"mu0": 0.0}, {"n_random_inits": -1}, {"stall_tol": -1.0}):
            with pytest.raises(ValueError):
                OptimizerOptions(**kw)

    def test_stall_iteration(self):
        ch, n0 = _setup(7, 8, 2, 10.0)
        P0 = project_power(mrt(ch), DEFAULT_PA, P_TOT_43DBM)
        _, trace = dab_precoder(ch, DEFAULT_PA, n0, P_TOT_43DBM, P0)
        i = trace.stall_iteration()
        assert trace.rates[i] == trace.rates[-1]
        assert i == 0 or trace.rates[i - 1] < trace.rates[-1]


class TestMultiInit:
    opts = OptimizerOptions(max_iters=30, n_random_inits=6, seed=11)

    def test_not_worse_than_baselines(self):
        for seed in range(4):
            for snr_db in (-10.0, 30.0):
                ch, n0 = _setup(seed, 16, 2, snr_db)
                res = multi_init_dab(ch, DEFAULT_PA, n0, P_TOT_43DBM, self.opts)
                for base in (mrt, zf):
                    assert res.rate >= sum_rate(project_power(base(ch), DEFAULT_PA, P_TOT_43DBM), ch, DEFAULT_PA, n0)

    def test_best_of_traces(self):
        ch, n0 = _setup(1, 8, 2, 20.0)
        res = multi_init_dab(ch, DEFAULT_PA, n0, P_TOT_43DBM, self.opts)
        assert len(res.traces) == 8
        assert res.rate == max(t.rates[-1] for t in res.traces)
        assert res.best_so_far()[-1] == res.rate
        assert np.all(np.diff(res.best_so_far()) >= 0)
        assert res.rate == pytest.approx(sum_rate(res.P, ch, DEFAULT_PA, n0), rel=1e-12)

    def test_deterministic(self):
        ch, n0 = _setup(2, 8, 2, 20.0)
        a = multi_init_dab(ch, DEFAULT_PA, n0, P_TOT_43DBM, self.opts)
        b = multi_init_dab(ch, DEFAULT_PA, n0, P_TOT_43DBM, self.opts)
        np.testing.assert_array_equal(a.P, b.P)
        assert a.label == b.label

    def test_labels_and_order(self):
        ch, _ = _setup(0, 4, 2)
        inits, failures = initializations(ch, DEFAULT_PA, P_TOT_43DBM, self.opts)
        assert [label for label, _ in inits] == ["mrt", "zf"] + [f"random-{j}" for j in range(6)]
        assert failures == {}

    def test_zf_failure_is_recorded(self, rng):
        H = crandn(rng, 3, 2)  # more users than antennas
        res = multi_init_dab(H, DEFAULT_PA, 0.1, P_TOT_43DBM, OptimizerOptions(max_iters=5, n_random_inits=2))
        assert "zf" in res.failures
        assert len(res.traces) == 3

    def test_no_initializations(self, rng):
        opts = OptimizerOptions(n_random_inits=0, include_mrt=False, include_zf=False)
        with pytest.raises(DabError):
            multi_init_dab(crandn(rng, 2, 4), DEFAULT_PA, 0.1, P_TOT_43DBM, opts)
