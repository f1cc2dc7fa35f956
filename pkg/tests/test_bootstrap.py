import math

import numpy as np
import pytest
from scipy import stats

import specfreq.bootstrap as bootstrap_mod
from specfreq import (
    BandwidthConfig,
    DimensionMismatch,
    FlatTopKernel,
    FrequencySet,
    IndexSet,
    MultiplierConfig,
    TimePanel,
    build_lag_panel,
    draw_multipliers,
    estimate_longrun,
    factor_theta,
    freq_projection,
    qs_weight,
    run_bootstrap,
    xi_draw,
)
from specfreq.longrun import andrews_bandwidth
from specfreq.rng import STREAM_MULTIPLIER, substream

import oracles
from conftest import make_panel


def fixture_lag_panel(seed=5, n=40, p=3, l_n=1, pairs=None):
    rng = np.random.default_rng(seed)
    panel = make_panel(rng, n, p)
    pairs = pairs if pairs is not None else IndexSet.all_offdiagonal(p)
    bw = BandwidthConfig(l_n)
    return panel, build_lag_panel(panel, pairs, bw), bw


class TestFactorTheta:
    def test_scalar(self):
        factor = factor_theta(1, b_n=2.0, jitter=1e-10)
        assert factor.chol.shape == (1, 1)
        assert factor.chol[0, 0] == pytest.approx(math.sqrt(1 + 1e-10), abs=1e-15)

    def test_tiny_bandwidth_gives_identity(self):
        factor = factor_theta(6, b_n=1e-7, jitter=0.0)
        assert np.allclose(factor.chol, np.eye(6), atol=1e-8)

    def test_reconstruction(self):
        factor = factor_theta(5, b_n=2.0)
        theta = np.array([[qs_weight((i - j) / 2.0) for j in range(5)] for i in range(5)])
        assert np.abs(factor.chol @ factor.chol.T - theta).max() <= 1e-8

    def test_fallback_clips_negative_eigenvalues(self, monkeypatch):
        indefinite = np.diag([1.0, 1.0, -0.5])
        monkeypatch.setattr(bootstrap_mod, "qs_toeplitz", lambda n, b: indefinite.copy())
        with pytest.warns(RuntimeWarning):
            factor = factor_theta(3, b_n=1.0, jitter=1e-10)
        assert factor.fallback
        rebuilt = factor.chol @ factor.chol.T
        assert np.allclose(rebuilt, np.diag([1.0, 1.0, 0.0]), atol=1e-10)


class TestDrawMultipliers:
    def test_deterministic(self):
        factor = factor_theta(8, b_n=1.5)
        a = draw_multipliers(factor, substream(3, STREAM_MULTIPLIER, 0))
        b = draw_multipliers(factor, substream(3, STREAM_MULTIPLIER, 0))
        assert np.array_equal(a, b)

    def test_identity_marginals_standard_normal(self):
        factor = factor_theta(4, b_n=1e-7, jitter=0.0)
        rng = substream(11, STREAM_MULTIPLIER, 0)
        draws = np.array([draw_multipliers(factor, rng) for _ in range(25_000)])
        ks = stats.kstest(draws.ravel(), "norm")
        assert ks.pvalue > 0.01

    def test_lag_one_correlation_matches_kernel(self):
        b_n = 2.0
        factor = factor_theta(6, b_n=b_n)
        rng = substream(12, STREAM_MULTIPLIER, 0)
        draws = factor.chol @ rng.standard_normal((6, 100_000))
        first, second = draws[:-1].ravel(), draws[1:].ravel()
        corr = np.corrcoef(first, second)[0, 1]
        assert corr == pytest.approx(qs_weight(1.0 / b_n), abs=0.02)


class TestXiDraw:
    def test_zero_multipliers(self):
        _, lp, bw = fixture_lag_panel()
        projections = [freq_projection(bw, FlatTopKernel(0.5), w) for w in (0.0, 1.0)]
        assert xi_draw(lp, projections, np.zeros(lp.n_tilde)) == 0.0

    def test_matches_literal_implementation(self):
        panel, lp, bw = fixture_lag_panel(seed=21, n=20, p=2, l_n=1, pairs=IndexSet(((1, 2),)))
        kernel = FlatTopKernel(0.5)
        rng = np.random.default_rng(77)
        eps = rng.normal(size=lp.n_tilde)
        for omegas in ([0.0], [0.0, 0.7, -2.0]):
            projections = [freq_projection(bw, kernel, w) for w in omegas]
            got = xi_draw(lp, projections, eps)
            want = oracles.xi_statistic(lp.rows, 1, 1, 0.5, omegas, eps)
            assert got == pytest.approx(want, abs=1e-12)

    def test_multiplier_scale_is_quadratic(self):
        _, lp, bw = fixture_lag_panel(seed=2)
        projections = [freq_projection(bw, FlatTopKernel(0.5), 0.5)]
        eps = np.random.default_rng(4).normal(size=lp.n_tilde)
        base = xi_draw(lp, projections, eps)
        assert xi_draw(lp, projections, 3.0 * eps) == pytest.approx(9.0 * base, rel=1e-12)

    def test_dimension_checks(self):
        _, lp, bw = fixture_lag_panel()
        proj = freq_projection(BandwidthConfig(2), FlatTopKernel(0.5), 0.0)
        with pytest.raises(DimensionMismatch):
            xi_draw(lp, [proj], np.zeros(lp.n_tilde))
        good = freq_projection(bw, FlatTopKernel(0.5), 0.0)
        with pytest.raises(DimensionMismatch):
            xi_draw(lp, [good], np.zeros(lp.n_tilde + 1))


class TestRunBootstrap:
    def test_deterministic(self):
        _, lp, bw = fixture_lag_panel()
        cfg = MultiplierConfig(B=50, seed=9)
        d1 = run_bootstrap(lp, FrequencySet.quarterly(), bw, FlatTopKernel(0.5), 1.4, cfg)
        d2 = run_bootstrap(lp, FrequencySet.quarterly(), bw, FlatTopKernel(0.5), 1.4, cfg)
        assert np.array_equal(d1.xi, d2.xi)

    def test_nonnegative(self):
        _, lp, bw = fixture_lag_panel()
        draws = run_bootstrap(
            lp, FrequencySet.quarterly(), bw, FlatTopKernel(0.5), 1.2, MultiplierConfig(B=64, seed=1)
        )
        assert np.all(draws.xi >= 0.0)
        assert draws.per_draw_seed_offsets.tolist() == list(range(64))

    @pytest.mark.parametrize(
        ("pairs", "freqs", "B"),
        [
            (None, FrequencySet.quarterly(), 40),  # literal route: 2rK > budget
            (IndexSet(((1, 2),)), FrequencySet.discrete([0.3]), 40),  # projected route
        ],
    )
    def test_draws_match_per_draw_statistic(self, pairs, freqs, B):
        # reconstruct each draw through the one-at-a-time operation
        _, lp, bw = fixture_lag_panel(pairs=pairs)
        kernel = FlatTopKernel(0.5)
        b_n = 1.3
        cfg = MultiplierConfig(B=B, seed=123)
        draws = run_bootstrap(lp, freqs, bw, kernel, b_n, cfg, stream_id=4)
        factor = factor_theta(lp.n_tilde, b_n, cfg.jitter)
        z = substream(cfg.seed, STREAM_MULTIPLIER, 4).standard_normal((B, lp.n_tilde))
        projections = [freq_projection(bw, kernel, w) for w in freqs.evaluate(lp.n)]
        for b in range(B):
            xi_b = xi_draw(lp, projections, factor.chol @ z[b])
            assert draws.xi[b] == pytest.approx(xi_b, abs=1e-10 * max(1.0, xi_b))

    def test_routes_agree(self):
        # the two association orders must produce the same statistics: the
        # B=1 run picks the literal route, the B=2000 run the projected one,
        # and draw blocks are prefix-stable in B
        _, lp, bw = fixture_lag_panel(seed=31, n=30, p=2, l_n=1, pairs=IndexSet(((1, 2),)))
        kernel = FlatTopKernel(0.5)
        freqs = FrequencySet.discrete([0.4])
        projected = run_bootstrap(lp, freqs, bw, kernel, 1.1, MultiplierConfig(B=2000, seed=5))
        literal = run_bootstrap(lp, freqs, bw, kernel, 1.1, MultiplierConfig(B=1, seed=5))
        assert projected.xi[0] == pytest.approx(literal.xi[0], rel=1e-10)

    def test_bandwidth_mismatch_rejected(self):
        _, lp, _ = fixture_lag_panel()
        with pytest.raises(DimensionMismatch):
            run_bootstrap(
                lp,
                FrequencySet.quarterly(),
                BandwidthConfig(2),
                FlatTopKernel(0.5),
                1.0,
                MultiplierConfig(B=4, seed=0),
            )

    def test_percentile_stable_across_seeds(self):
        # white-noise fixture: the upper tail of xi should not depend on the seed
        rng = np.random.default_rng(40)
        panel = make_panel(rng, 120, 3)
        bw = BandwidthConfig(1)
        lp = build_lag_panel(panel, IndexSet.all_offdiagonal(3), bw)
        b_n = andrews_bandwidth(lp)
        qs = []
        for seed in (1, 2):
            draws = run_bootstrap(
                lp,
                FrequencySet.quarterly(),
                bw,
                FlatTopKernel(0.5),
                b_n,
                MultiplierConfig(B=2000, seed=seed),
            )
            qs.append(np.quantile(draws.xi, 0.95))
        assert abs(qs[0] - qs[1]) <= 0.05 * max(qs)


class TestConditionalCovariance:
    def test_scaled_sums_match_longrun_covariance(self):
        # the scaled multiplier sums have conditional covariance equal to the
        # kernel long-run covariance estimate, entry by entry
        panel, lp, bw = fixture_lag_panel(seed=6, n=36, p=3, l_n=1, pairs=IndexSet(((2, 1), (3, 1))))
        b_n = 1.5
        xi_hat = estimate_longrun(lp, b_n).matrix
        factor = factor_theta(lp.n_tilde, b_n)
        n_draws = 10_000
        z = substream(99, STREAM_MULTIPLIER, 0).standard_normal((lp.n_tilde, n_draws))
        s = lp.rows.T @ (factor.chol @ z) / math.sqrt(lp.n_tilde)
        emp = s @ s.T / n_draws
        se = np.sqrt(
            (np.outer(np.diag(xi_hat), np.diag(xi_hat)) + xi_hat**2) / n_draws
        )
        frac_ok = np.mean(np.abs(emp - xi_hat) <= 5.0 * se)
        assert frac_ok >= 0.99
