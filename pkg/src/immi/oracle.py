"""
Monte Carlo reference for the exact mutual information.

The estimator draws ``w' ~ CN(0, I / gamma)`` and averages

    g_sl(w') = log2 sum_{s', l'} exp(-gamma (||x_sl - x_s'l' + w'||^2 - ||w'||^2))

over all ``(s, l)`` for every draw. The MI estimate is ``log2(tS)`` minus the
sample mean.

Random stream
-------------
Noise is derived from a Philox4x64 counter-based generator keyed by
``SeedSequence(seed).generate_state(2, uint64)``. Draw ``i`` owns the Philox
blocks ``[i * B, (i + 1) * B)`` with ``B = ceil(2 r / 4)``; its first ``2 r``
64-bit words become uniforms ``u = (word >> 11) * 2**-53`` and each pair
``(u1, u2)`` maps to one complex entry through Box-Muller,
``sqrt(-ln(1 - u1)) * exp(2j pi u2)``, which has variance 1/2 per real
dimension. Any draw can therefore be regenerated on its own, and chunked or
parallel evaluation gives bit-identical results.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .model import AugmentedSymbolSet, pairwise_sq_distances

LN2 = math.log(2.0)
METHODS = ("first_order", "second_order", "monte_carlo")

# cap on the (tS, tS, draws) exponent tensor per chunk
_CHUNK_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class MiEstimate:
    mean_bits: float
    std_error_bits: float = 0.0
    method: str = "first_order"
    n_samples: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not math.isfinite(self.mean_bits):
            raise ValueError("mean_bits must be finite")
        if not self.std_error_bits >= 0:
            raise ValueError("std_error_bits must be non-negative")


def noise_moments(n: int, gamma: float) -> float:
    """Central moment of order ``n`` of one real component of ``w'``."""
    if n < 1:
        raise ValueError("moment order must be >= 1")
    if n % 2:
        return 0.0
    return math.prod(range(n - 1, 0, -2)) / (2.0 * gamma) ** (n // 2)


def g_integrand(aug: AugmentedSymbolSet, s_idx: int, l_idx: int, w_prime, gamma: float) -> float:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    w = np.asarray(w_prime, dtype=np.complex128).reshape(aug.r)
    x = aug.vectors[aug.flat_index(s_idx, l_idx)]
    v = x[None, :] - aug.vectors + w[None, :]
    a = -gamma * (np.sum(np.abs(v) ** 2, axis=1) - np.sum(np.abs(w) ** 2))
    # the self term is exp(0) = 1; split it off so g near 0 keeps relative precision
    others = np.delete(a, aug.flat_index(s_idx, l_idx))
    if others.size == 0:
        return 0.0
    a_max = np.max(others)
    if a_max <= 0:
        return float(np.log1p(np.sum(np.exp(others))) / LN2)
    return float((a_max + np.log(np.exp(-a_max) + np.sum(np.exp(others - a_max)))) / LN2)


def _philox_key(seed: int) -> np.ndarray:
    return np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)


def standard_noise(seed: int, start: int, count: int, r: int) -> np.ndarray:
    """
    Draws ``start .. start + count - 1`` of the unit-variance complex
    Gaussian stream for ``seed``; shape ``(count, r)``.
    """
    blocks = -(-2 * r // 4)
    bg = np.random.Philox(key=_philox_key(seed))
    bg.advance(start * blocks)
    raw = bg.random_raw(count * blocks * 4).reshape(count, blocks * 4)[:, : 2 * r]
    u = (raw >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    u1 = u[:, 0::2]
    u2 = u[:, 1::2]
    return np.sqrt(-np.log1p(-u1)) * np.exp(2j * np.pi * u2)


def _draw_values(aug: AugmentedSymbolSet, d2: np.ndarray, gamma: float, w: np.ndarray) -> np.ndarray:
    """(1/tS) sum_k g_k(w_i) for each row ``w_i`` of ``w``."""
    # ||x_k - x_k' + w||^2 - ||w||^2 = d2[k, k'] + 2 Re<x_k - x_k', w>
    p = (aug.vectors.conj() @ w.T).real
    a = -gamma * (d2[:, :, None] + 2.0 * (p[:, None, :] - p[None, :, :]))
    g = logsumexp(a, axis=1) / LN2
    return g.mean(axis=0)


def mi_monte_carlo(
    aug: AugmentedSymbolSet,
    gamma: float,
    n_samples: int,
    seed: int,
    workers: int = 1,
) -> MiEstimate:
    """
    Monte Carlo MI estimate with its standard error.

    The standard error is the sample standard deviation of the per-draw
    ``(s, l)``-averaged integrand divided by ``sqrt(n_samples)``.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    n = aug.size
    d2 = pairwise_sq_distances(aug)
    chunk = max(1, _CHUNK_ELEMENTS // (n * n))
    starts = list(range(0, n_samples, chunk))
    scale = 1.0 / math.sqrt(gamma)

    def run(start):
        count = min(chunk, n_samples - start)
        w = standard_noise(seed, start, count, aug.r) * scale
        return _draw_values(aug, d2, gamma, w)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    values = np.concatenate(parts)
    mean_g = float(np.mean(values))
    stderr = float(np.std(values, ddof=1) / math.sqrt(n_samples))
    return MiEstimate(math.log2(n) - mean_g, stderr, "monte_carlo", n_samples)
