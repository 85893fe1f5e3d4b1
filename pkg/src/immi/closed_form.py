"""
Closed-form first- and second-order approximations of the mutual information
of an index modulation for a fixed channel realization.

Both come from expanding ``E{g_sl(w')}`` in a Taylor series around the noise
mean ``w' = 0``. The zeroth term gives ``log2(D_sl)``; the second-order term
adds ``1 / (4 gamma)`` times the noise-direction Laplacian of ``g_sl``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .model import AugmentedSymbolSet, pairwise_sq_distances

LN2 = np.log(2.0)


@dataclass(frozen=True, eq=False)
class GibbsKernel:
    """``d_matrix[k, k'] = exp(-gamma * ||x_k - x_k'||^2)`` and its row sums."""

    gamma: float
    d_matrix: np.ndarray
    row_sums: np.ndarray
    t: int
    S: int

    @property
    def size(self) -> int:
        return self.t * self.S


@dataclass(frozen=True, eq=False)
class SecondOrderTerms:
    """
    Per flat index ``k = (s, l)``: the two pieces of the Laplacian of g_sl
    at the origin. Their difference is the Laplacian itself.
    """

    dlog_term: np.ndarray
    grad_sq_term: np.ndarray

    @property
    def laplacian(self) -> np.ndarray:
        return self.dlog_term - self.grad_sq_term


def _row_sums(d: np.ndarray) -> np.ndarray:
    # fixed order: largest entries first
    return np.sort(d, axis=-1)[..., ::-1].sum(axis=-1)


def gibbs_kernel(distances: np.ndarray, gamma: float, t: int, S: int) -> GibbsKernel:
    d2 = np.asarray(distances, dtype=float)
    if not np.all(np.isfinite(d2)) or not np.isfinite(gamma):
        raise ValueError("distances and gamma must be finite")
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")
    if d2.shape != (t * S, t * S):
        raise ValueError(f"distance matrix shape {d2.shape} does not match tS = {t * S}")
    if np.any(np.diag(d2) != 0) or not np.array_equal(d2, d2.T):
        raise ValueError("distance matrix must be symmetric with zero diagonal")
    d = np.exp(-gamma * d2)
    d.setflags(write=False)
    rs = _row_sums(d)
    rs.setflags(write=False)
    return GibbsKernel(float(gamma), d, rs, t, S)


def kernel_for(aug: AugmentedSymbolSet, gamma: float) -> GibbsKernel:
    return gibbs_kernel(pairwise_sq_distances(aug), gamma, aug.t, aug.S)


def mi_first_order(kernel: GibbsKernel) -> float:
    """``log2(tS) - mean_k log2(D_k)``; lies in ``[0, log2(tS)]``."""
    n = kernel.size
    return float(np.log2(n) - np.mean(np.log2(kernel.row_sums)))


def second_order_terms(kernel: GibbsKernel, aug: AugmentedSymbolSet) -> SecondOrderTerms:
    """
    Split the Laplacian of g_sl at ``w' = 0`` into a non-negative
    ``D log2(1/D)`` part and a non-negative squared-gradient part.
    """
    if kernel.size != aug.size or (kernel.t, kernel.S) != (aug.t, aug.S):
        raise ValueError("kernel and augmented set dimensions differ")
    g = kernel.gamma
    d = kernel.d_matrix
    rs = kernel.row_sums
    x = aug.vectors

    # D * log2(1/D), with 0 * log(inf) -> 0 for underflowed entries
    ent = -xlogy(d, d) / LN2
    dlog = 4.0 * g * ent.sum(axis=1) / rs

    # D_{m,k} = sum_k' (x_{m,k'} - x_{m,k}) D_{k,k'}; real/imag parts at once
    dm = d @ x - d.sum(axis=1)[:, None] * x
    grad_sq = (2.0 * g) ** 2 / LN2 * np.sum(dm.real ** 2 + dm.imag ** 2, axis=1) / rs ** 2
    return SecondOrderTerms(dlog, grad_sq)


def mi_second_order_raw(kernel: GibbsKernel, aug: AugmentedSymbolSet) -> float:
    """Second-order value before clamping; may leave ``[0, log2(tS)]``."""
    terms = second_order_terms(kernel, aug)
    correction = np.mean(terms.laplacian) / (4.0 * kernel.gamma)
    return mi_first_order(kernel) - float(correction)


def mi_second_order(kernel: GibbsKernel, aug: AugmentedSymbolSet) -> float:
    raw = mi_second_order_raw(kernel, aug)
    return float(np.clip(raw, 0.0, np.log2(kernel.size)))


def mi_curves(aug: AugmentedSymbolSet, gammas) -> tuple[np.ndarray, np.ndarray]:
    """
    Vectorized over an SNR grid: returns ``(first_order, second_order_raw)``
    arrays, one value per gamma. Same arithmetic as the scalar functions.
    """
    gammas = np.asarray(gammas, dtype=float)
    if np.any(gammas <= 0) or not np.all(np.isfinite(gammas)):
        raise ValueError("gammas must be positive and finite")
    n = aug.size
    x = aug.vectors
    d2 = pairwise_sq_distances(aug)
    g = gammas[:, None, None]
    d = np.exp(-g * d2[None])
    rs = _row_sums(d)
    i1 = np.log2(n) - np.mean(np.log2(rs), axis=-1)

    ent = -xlogy(d, d) / LN2
    dlog = 4.0 * g[..., 0] * ent.sum(axis=-1) / rs
    dm = d @ x - d.sum(axis=-1)[..., None] * x[None]
    grad_sq = (2.0 * g[..., 0]) ** 2 / LN2 * np.sum(dm.real ** 2 + dm.imag ** 2, axis=-1) / rs ** 2
    i2 = i1 - np.mean(dlog - grad_sq, axis=-1) / (4.0 * gammas)
    return i1, i2
