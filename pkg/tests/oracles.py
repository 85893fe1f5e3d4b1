"""Independent reference computations shared by the test modules."""

import numpy as np

from immi.oracle import g_integrand

# mpmath, 30 digits: BPSK, t = r = 1, h = 1, gamma = 1
BPSK_I1 = 0.973815189000483738
BPSK_DLOG = 0.415177854667154581
BPSK_GRAD_SQ = 0.00746747606565417678
BPSK_I2 = 0.871887594350108637


def laplacian_fd(aug, k, gamma, step=1e-4):
    """Sum over noise coordinates of central second differences of g_k at w' = 0."""
    s_idx, l_idx = aug.pair(k)
    g0 = g_integrand(aug, s_idx, l_idx, np.zeros(aug.r), gamma)
    total = 0.0
    for m in range(aug.r):
        for unit in (1.0, 1j):
            e = np.zeros(aug.r, dtype=complex)
            e[m] = unit * step
            gp = g_integrand(aug, s_idx, l_idx, e, gamma)
            gm = g_integrand(aug, s_idx, l_idx, -e, gamma)
            total += (gp - 2 * g0 + gm) / step ** 2
    return total


def dlog_mean_form(kernel):
    """-4 gamma log2(G_k(D^D)) / A_k(D): geometric/arithmetic means over k'."""
    n = kernel.size
    d = kernel.d_matrix
    out = np.empty(n)
    for k in range(n):
        geo = np.prod(d[k] ** (d[k] / n))
        arith = np.sum(d[k]) / n
        out[k] = -4 * kernel.gamma * np.log2(geo) / arith
    return out


def first_order_geometric(kernel):
    """log2(tS / G(D_sl)) with the geometric mean taken as a product of roots."""
    n = kernel.size
    geo = np.prod(kernel.row_sums ** (1.0 / n))
    return np.log2(n / geo)
