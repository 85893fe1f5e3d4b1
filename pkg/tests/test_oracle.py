import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

import immi.oracle as oracle
from immi.closed_form import kernel_for, mi_first_order
from immi.model import ChannelRealization, augment, build_constellation, parse_constellation
from immi.oracle import MiEstimate, g_integrand, mi_monte_carlo, noise_moments, standard_noise

from conftest import random_channel
from oracles import BPSK_I1


@pytest.fixture
def bpsk_scalar():
    return augment(ChannelRealization([[1]]), build_constellation("psk", 2))


def bpsk_mi_quadrature(gamma):
    """Exact MI of BPSK on h = 1 by 1-D quadrature over the real noise part."""
    sigma = math.sqrt(1 / (2 * gamma))

    def integrand(u):
        return np.logaddexp(0.0, -4 * gamma * (1 + u)) / math.log(2) * stats.norm.pdf(u, scale=sigma)

    val, _ = integrate.quad(integrand, -12 * sigma, 12 * sigma, limit=200, epsabs=1e-13)
    return 1.0 - val


class TestIntegrand:
    def test_origin_is_log_row_sum(self, rng):
        aug = augment(random_channel(rng, 2, 2), build_constellation("psk", 4))
        k = kernel_for(aug, 1.7)
        for idx in range(aug.size):
            s_idx, l_idx = aug.pair(idx)
            assert g_integrand(aug, s_idx, l_idx, np.zeros(2), 1.7) == pytest.approx(
                math.log2(k.row_sums[idx]), abs=1e-13)

    def test_single_hypothesis(self):
        aug = augment(ChannelRealization([[0.3 + 1j]]), build_constellation("qam", 1))
        assert g_integrand(aug, 0, 0, [2.0 - 1j], 5.0) == 0.0

    def test_bpsk_offset(self, bpsk_scalar):
        assert g_integrand(bpsk_scalar, 0, 0, [0.5 + 0j], 1.0) == pytest.approx(
            math.log2(1 + math.exp(-6)), rel=1e-13)

    @pytest.mark.parametrize("gamma", [1e3, 1e6, 1e9, 1e12])
    def test_finite_at_high_snr(self, rng, gamma):
        aug = augment(random_channel(rng, 2, 2), build_constellation("qam", 16))
        w = (rng.standard_normal(2) + 1j * rng.standard_normal(2)) * 0.1
        for idx in range(aug.size):
            v = g_integrand(aug, *aug.pair(idx), w, gamma)
            assert math.isfinite(v) and v >= 0

    def test_vectorized_draws_match_direct(self, rng):
        aug = augment(random_channel(rng, 2, 2), build_constellation("psk", 4))
        gamma = 0.8
        w = (rng.standard_normal((5, 2)) + 1j * rng.standard_normal((5, 2)))
        from immi.model import pairwise_sq_distances
        fast = oracle._draw_values(aug, pairwise_sq_distances(aug), gamma, w)
        for i in range(5):
            direct = np.mean([g_integrand(aug, *aug.pair(k), w[i], gamma) for k in range(aug.size)])
            assert fast[i] == pytest.approx(direct, abs=1e-12)


class TestNoiseMoments:
    def test_values(self):
        assert noise_moments(1, 3.0) == 0.0
        assert noise_moments(3, 0.1) == 0.0
        assert noise_moments(2, 1.0) == 0.5
        assert noise_moments(4, 2.0) == 3 / 16
        assert noise_moments(6, 1.0) == 15 / 8

    def test_invalid(self):
        with pytest.raises(ValueError):
            noise_moments(0, 1.0)

    @pytest.mark.parametrize("gamma", [0.1, 1.0, 20.0])
    def test_sampler_matches(self, gamma):
        n = 200_000
        w = standard_noise(2024, 0, n, 1)[:, 0] / math.sqrt(gamma)
        var = noise_moments(2, gamma)
        sigma = math.sqrt(var)
        for part in (w.real, w.imag):
            assert abs(np.var(part) - var) <= 3 * var * math.sqrt(2 / n)
            assert abs(np.mean(part)) <= 3 * sigma / math.sqrt(n)
            assert abs(np.mean(part ** 3)) <= 3 * math.sqrt(noise_moments(6, gamma) / n)
            assert abs(np.mean(part ** 4) - noise_moments(4, gamma)) <= 3 * math.sqrt(
                (105 * var ** 4 - noise_moments(4, gamma) ** 2) / n)
        assert stats.kstest(w.real / sigma, "norm").pvalue > 0.01
        assert abs(np.corrcoef(w.real, w.imag)[0, 1]) < 3 / math.sqrt(n)


class TestStream:
    def test_chunking_is_exact(self):
        full = standard_noise(7, 0, 100, 3)
        parts = np.concatenate([standard_noise(7, 0, 37, 3), standard_noise(7, 37, 63, 3)])
        np.testing.assert_array_equal(full, parts)

    def test_seed_dependence(self):
        assert not np.array_equal(standard_noise(1, 0, 10, 2), standard_noise(2, 0, 10, 2))


class TestMonteCarlo:
    def test_single_hypothesis(self):
        aug = augment(ChannelRealization([[1.0]]), build_constellation("qam", 1))
        est = mi_monte_carlo(aug, 2.0, 100, 0)
        assert est.mean_bits == 0.0 and est.std_error_bits == 0.0
        assert est.method == "monte_carlo" and est.n_samples == 100

    def test_high_snr_ceiling(self, rng):
        aug = augment(random_channel(rng, 2, 2), build_constellation("psk", 4))
        est = mi_monte_carlo(aug, 1e6, 1000, 3)
        assert abs(est.mean_bits - 3.0) <= 0.01

    def test_bpsk_against_quadrature_and_bound(self, bpsk_scalar):
        est = mi_monte_carlo(bpsk_scalar, 1.0, 10 ** 6, 11)
        exact = bpsk_mi_quadrature(1.0)
        assert abs(est.mean_bits - exact) <= 4 * est.std_error_bits
        assert est.mean_bits - 3 * est.std_error_bits <= BPSK_I1
        assert exact < BPSK_I1

    @pytest.mark.parametrize("gamma", [0.1, 0.5, 3.0, 10.0])
    def test_bpsk_quadrature_sweep(self, bpsk_scalar, gamma):
        est = mi_monte_carlo(bpsk_scalar, gamma, 50_000, 5)
        assert abs(est.mean_bits - bpsk_mi_quadrature(gamma)) <= 4 * est.std_error_bits

    def test_invalid(self, bpsk_scalar):
        with pytest.raises(ValueError):
            mi_monte_carlo(bpsk_scalar, 1.0, 1, 0)
        with pytest.raises(ValueError):
            mi_monte_carlo(bpsk_scalar, 0.0, 10, 0)
        with pytest.raises(ValueError):
            MiEstimate(1.0, -1.0, "monte_carlo", 2)

    def test_stderr_scaling(self, rng):
        aug = augment(random_channel(rng, 2, 2), build_constellation("psk", 4))
        for seed in range(5):
            a = mi_monte_carlo(aug, 1.0, 4000, seed).std_error_bits
            b = mi_monte_carlo(aug, 1.0, 8000, seed + 100).std_error_bits
            assert 0.85 / math.sqrt(2) <= b / a <= 1.15 / math.sqrt(2)

    def test_reproducible_under_parallel_schedule(self, rng, monkeypatch):
        aug = augment(random_channel(rng, 2, 2), build_constellation("qam", 16))
        monkeypatch.setattr(oracle, "_CHUNK_ELEMENTS", 1024 * 50)
        serial = mi_monte_carlo(aug, 2.0, 3000, 42)
        threaded = mi_monte_carlo(aug, 2.0, 3000, 42, workers=4)
        monkeypatch.setattr(oracle, "_CHUNK_ELEMENTS", 1024 * 1000)
        one_chunk = mi_monte_carlo(aug, 2.0, 3000, 42)
        assert serial == threaded == one_chunk

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(-10, 30), st.sampled_from(["bpsk", "qpsk", "qam16"]),
           st.integers(1, 2), st.integers(1, 2))
    def test_first_order_bounds_oracle(self, seed, snr_db, name, r, t):
        aug = augment(random_channel(np.random.default_rng(seed), r, t), parse_constellation(name))
        gamma = 10 ** (snr_db / 10)
        est = mi_monte_carlo(aug, gamma, 2000, seed)
        assert est.mean_bits - 3 * est.std_error_bits <= mi_first_order(kernel_for(aug, gamma))
