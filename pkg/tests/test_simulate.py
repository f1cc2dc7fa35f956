import math

import numpy as np
import pytest

from specfreq import (
    DgpSpec,
    FrequencySet,
    IndexSet,
    InferenceConfig,
    InvalidParameter,
    block_hypotheses,
    null_partition,
    run_fdr_experiment,
    run_size_experiment,
    simulate,
    true_spectrum,
)
from specfreq.simulate import _tridiag
from specfreq.spectral import BandwidthConfig, FlatTopKernel, estimate_spectrum
from specfreq.testing import sup_max_statistic


TWO_PI = 2 * math.pi


class TestSimulate:
    def test_deterministic(self):
        spec = DgpSpec(model="m2", n=50, p=3, param=0.4)
        a = simulate(spec, 77)
        b = simulate(spec, 77)
        assert np.array_equal(a.values, b.values)

    def test_white_noise_variance(self):
        spec = DgpSpec(model="m1", n=10_000, p=4, param=0.2)
        panel = simulate(spec, 5)
        var = panel.values.var(axis=0)
        assert np.all(np.abs(var - 0.04) <= 0.004)

    def test_ar_moments(self):
        spec = DgpSpec(model="m2", n=10_000, p=3, param=0.5)
        x = simulate(spec, 6).values
        var = x.var(axis=0)
        assert np.all(np.abs(var - 1.0) <= 0.08)
        lag1 = np.mean(x[1:] * x[:-1], axis=0) / var
        assert np.all(np.abs(lag1 - 0.5) <= 0.05)

    def test_ma_lag_one_autocov(self):
        spec = DgpSpec(model="m3", n=20_000, p=2, param=0.4)
        x = simulate(spec, 7).values
        lag1 = np.mean(x[1:] * x[:-1], axis=0)
        assert np.all(np.abs(lag1 + 0.4) <= 0.05)

    def test_shapes_and_labels(self):
        for model, param in [("m1", 0.2), ("m2", 0.4), ("m3", 0.4), ("m4", 0.05), ("m5", 0.2), ("m6", 0.3)]:
            panel = simulate(DgpSpec(model=model, n=64, p=5, param=param), 1)
            assert panel.values.shape == (64, 5)
            assert panel.labels == ("s1", "s2", "s3", "s4", "s5")

    def test_stationarity_validation(self):
        with pytest.raises(InvalidParameter):
            DgpSpec(model="m2", n=50, p=3, param=1.0)
        with pytest.raises(InvalidParameter):
            DgpSpec(model="m5", n=50, p=20, param=0.35)


class TestTrueSpectrum:
    def test_white_noise(self):
        f = true_spectrum(DgpSpec(model="m1", n=100, p=3, param=0.2), 0.7)
        assert np.allclose(f, 0.04 / TWO_PI * np.eye(3), atol=1e-15)

    def test_banded_instantaneous(self):
        spec = DgpSpec(model="m4", n=100, p=6, param=0.05)
        psi = _tridiag(6, 0.05)
        f = true_spectrum(spec, 1.3)
        assert np.allclose(f, psi @ psi / TWO_PI, atol=1e-15)
        # second off-diagonal entries come from squaring the band
        assert f[0, 2] == pytest.approx(0.05**2 / TWO_PI, abs=1e-15)

    def test_moving_average_at_zero(self):
        # with no off-band loading the corner reduces to scalar arithmetic
        diagonal_only = DgpSpec(model="m6", n=100, p=4, param=0.0)
        f0 = true_spectrum(diagonal_only, 0.0)
        assert f0[0, 0].real == pytest.approx((1 + 0.4**2 - 2 * 0.4) / TWO_PI, abs=1e-15)
        # a banded loading adds its squared weight to the corner entry
        banded = DgpSpec(model="m6", n=100, p=4, param=0.3)
        f = true_spectrum(banded, 0.0)
        assert f[0, 0].real == pytest.approx((1 + 0.4**2 + 0.3**2 - 2 * 0.4) / TWO_PI, abs=1e-15)

    def test_var_series_matches_resolvent(self):
        # independent closed form: 0.84/(2 pi) (I - Psi e^{-iw})^{-1} (I - Psi e^{iw})^{-1}
        spec = DgpSpec(model="m5", n=100, p=5, param=0.25)
        psi = _tridiag(5, 0.25)
        for w in (0.0, 0.9, -2.4):
            eye = np.eye(5)
            resolvent = np.linalg.inv(eye - psi * np.exp(-1j * w)) @ np.linalg.inv(
                eye - psi * np.exp(1j * w)
            )
            f = true_spectrum(spec, w)
            assert np.abs(f - 0.84 / TWO_PI * resolvent).max() <= 1e-10

    @pytest.mark.parametrize("model,param", [("m1", 0.2), ("m2", 0.6), ("m3", 0.4), ("m4", 0.05), ("m5", 0.25), ("m6", 0.35)])
    def test_hermitian_psd(self, model, param):
        spec = DgpSpec(model=model, n=100, p=5, param=param)
        for w in (-math.pi, -1.0, 0.0, 2.2):
            f = true_spectrum(spec, w)
            assert np.abs(f - f.conj().T).max() <= 1e-10
            vals = np.linalg.eigvalsh((f + f.conj().T) / 2)
            assert vals.min() >= -1e-10

    def test_centered_statistic_matches_raw_under_null(self):
        # off-diagonal truth is zero for scalar dynamics, so centering by the
        # true spectrum changes nothing there
        spec = DgpSpec(model="m2", n=200, p=4, param=0.4)
        panel = simulate(spec, 9)
        bw, kernel = BandwidthConfig(1), FlatTopKernel(0.5)
        freqs = FrequencySet.quarterly()
        est = estimate_spectrum(panel, bw, kernel, freqs)
        pairs = IndexSet.all_offdiagonal(4)
        stat, _ = sup_max_statistic(est, pairs, freqs, panel.n, 1)
        centered = 0.0
        for g, w in enumerate(est.frequencies):
            truth = true_spectrum(spec, float(w))
            diff = est.matrices[g] - truth
            sub = diff[pairs.row_indices(), pairs.col_indices()]
            centered = max(centered, float((panel.n / 1) * (sub.real**2 + sub.imag**2).max()))
        assert centered == pytest.approx(stat, rel=1e-12)


class TestBlockDesign:
    def test_hypothesis_count(self):
        hyps = block_hypotheses(50, list(FrequencySet.quarterly().frequencies))
        assert len(hyps) == 220
        assert {h.id for h in hyps} == set(range(220))

    def test_null_partition_matches_band_structure(self):
        freqs = list(FrequencySet.quarterly().frequencies)
        hyps = block_hypotheses(50, freqs)
        for model, param in (("m4", 0.04), ("m6", 0.3)):
            nulls = null_partition(DgpSpec(model=model, n=600, p=50, param=param), hyps)
            assert len(nulls) == 144  # 36 null block pairs x 4 frequencies
        # the VAR resolvent fills every block in exact arithmetic; entries
        # decay geometrically with block distance, so adjacent blocks are
        # unambiguously non-null while far corners fall below float precision
        nulls_m5 = null_partition(DgpSpec(model="m5", n=600, p=50, param=0.25), hyps)
        adjacent = {
            h.id
            for h in hyps
            if abs((min(i for i, _ in h.pairs.pairs) - 1) // 5 - (min(j for _, j in h.pairs.pairs) - 1) // 5) <= 1
        }
        assert nulls_m5.isdisjoint(adjacent)

    def test_divisibility_required(self):
        with pytest.raises(InvalidParameter):
            block_hypotheses(55, [0.0])


class TestRunners:
    def test_reps_positive(self):
        spec = DgpSpec(model="m1", n=50, p=4, param=0.5)
        with pytest.raises(InvalidParameter):
            run_size_experiment(spec, reps=0)

    def test_size_runner_shape(self):
        spec = DgpSpec(model="m1", n=64, p=4, param=0.5)
        res = run_size_experiment(spec, reps=5, cfg=InferenceConfig(B=50, seed=3))
        assert res.replications == 5
        assert 0.0 <= res.rejection_rate <= 1.0
        assert res.config["model"] == "m1"

    def test_size_runner_deterministic(self):
        spec = DgpSpec(model="m1", n=64, p=4, param=0.5)
        r1 = run_size_experiment(spec, reps=4, cfg=InferenceConfig(B=50, seed=3))
        r2 = run_size_experiment(spec, reps=4, cfg=InferenceConfig(B=50, seed=3))
        assert r1.rejection_rate == r2.rejection_rate

    def test_seed_stability_of_rates(self):
        # two seeds at modest replication count stay within Monte-Carlo noise
        spec = DgpSpec(model="m1", n=128, p=4, param=0.5)
        rates = [
            run_size_experiment(spec, reps=150, cfg=InferenceConfig(B=99, seed=s)).rejection_rate
            for s in (11, 22)
        ]
        pooled = (rates[0] + rates[1]) / 2
        se = math.sqrt(max(pooled * (1 - pooled), 1e-4) * 2 / 150)
        assert abs(rates[0] - rates[1]) <= 2 * se + 1e-9

    def test_fdr_runner_small(self):
        spec = DgpSpec(model="m4", n=128, p=10, param=0.3)
        res = run_fdr_experiment(
            spec, reps=3, freqs=[0.0, math.pi / 2], blocks=5, cfg=InferenceConfig(B=99, seed=5)
        )
        assert res.config["Q"] == 30
        assert 0.0 <= res.fdr <= 1.0
        assert 0.0 <= res.power <= 1.0
