"""Full-CSI max-min power allocation.

Closed form for two receivers, bisection on the feasibility function varpi
for any number of receivers. Rates are bits/s/Hz (log base 2); noise power
is 1, so p is the transmit SNR. Array inputs broadcast elementwise.
"""

import math
from dataclasses import dataclass

import numpy as np

ITERATION_CAP = 64


@dataclass(frozen=True)
class PowerAllocation:
    """Power fractions in decoding order plus the order itself.

    alphas[k] belongs to the receiver with the (k+1)-th largest gain;
    order[k] is that receiver's original index.
    """

    alphas: np.ndarray
    order: np.ndarray


@dataclass(frozen=True)
class SolverResult:
    r_max: float
    allocation: PowerAllocation
    iterations: int
    residual: float


def _check_power(p):
    if np.any(np.asarray(p) <= 0):
        raise ValueError("power must be positive")


def sic_snr(h_last, h_first, p):
    """Equivalent SNR of the max-min split when h_last decodes last.

    This is the crossing point of the two per-receiver rate curves; the
    max-min rate is log2(1 + p * sic_snr).
    """
    x = np.asarray(h_last, dtype=np.float64)
    y = np.asarray(h_first, dtype=np.float64)
    s = x + y
    return 2.0 * x * y / (np.sqrt(s * s + 4.0 * x * y * y * p) + s)


def optimal_alpha_two_user(h_strong, h_weak, p):
    """Power fraction of the stronger receiver that equalizes both rates."""
    hs = np.asarray(h_strong, dtype=np.float64)
    hw = np.asarray(h_weak, dtype=np.float64)
    _check_power(p)
    if np.any(hw <= 0):
        raise ValueError("gains must be positive")
    if np.any(hs < hw):
        raise ValueError("h_strong must be >= h_weak; order the gains first")
    s = hs + hw
    a = 2.0 * hw / (np.sqrt(s * s + 4.0 * hs * hw * hw * p) + s)
    return float(a) if a.ndim == 0 else a


def max_min_rate_two_user(h1, h2, p):
    """Largest achievable min rate over all power splits, either ordering."""
    h1 = np.asarray(h1, dtype=np.float64)
    h2 = np.asarray(h2, dtype=np.float64)
    _check_power(p)
    if np.any(h1 <= 0) or np.any(h2 <= 0):
        raise ValueError("gains must be positive")
    r = np.log2(1.0 + p * sic_snr(np.maximum(h1, h2), np.minimum(h1, h2), p))
    return float(r) if r.ndim == 0 else r


def _check_desc(gains):
    g = np.asarray(gains, dtype=np.float64)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("gains must be a nonempty vector")
    if np.any(g <= 0):
        raise ValueError("gains must be positive")
    if np.any(np.diff(g) > 0):
        raise ValueError("gains must be sorted in descending order")
    return g


def rate_k(alphas, gains_desc, p, k):
    """Rate of the k-th receiver (1-based) under SIC in descending-gain order."""
    g = _check_desc(gains_desc)
    a = np.asarray(alphas, dtype=np.float64)
    _check_power(p)
    if a.shape != g.shape:
        raise ValueError("alphas and gains must have the same length")
    if a.sum() > 1.0 + 1e-9 or np.any(a < 0):
        raise ValueError("alphas must be nonnegative and sum to at most 1")
    if not 1 <= k <= g.size:
        raise ValueError("receiver index k out of range")
    interference = a[: k - 1].sum()
    return float(np.log2(1.0 + a[k - 1] / (interference + 1.0 / (p * g[k - 1]))))


def sic_rates(alphas, gains, p):
    """All K rates for allocation rows applied to gain rows in the given order.

    alphas and gains are (..., K); column k is decoded k-th from the end of
    the SIC chain, i.e. sees interference from columns before it.
    """
    a = np.asarray(alphas, dtype=np.float64)
    g = np.asarray(gains, dtype=np.float64)
    _check_power(p)
    interference = np.cumsum(a, axis=-1) - a
    return np.log2(1.0 + a / (interference + 1.0 / (p * g)))


def varpi(r, gains_desc, p):
    """Feasibility measure of equal rate r; its root at 1 is the max-min rate."""
    g = _check_desc(gains_desc)
    _check_power(p)
    if r < 0:
        raise ValueError("rate must be nonnegative")
    k = g.size
    powers = 2.0 ** (r * np.arange(k - 1, -1, -1, dtype=np.float64))
    return float((2.0**r - 1.0) * np.sum(powers / (p * g)))


def alloc_from_rate(r, gains_desc, p):
    """Power fractions giving every receiver exactly rate r."""
    g = _check_desc(gains_desc)
    _check_power(p)
    if r < 0:
        raise ValueError("rate must be nonnegative")
    b = 2.0**r - 1.0
    out = np.empty_like(g)
    consumed = 0.0
    for k in range(g.size):
        out[k] = b * (consumed + 1.0 / (p * g[k]))
        consumed += out[k]
    return out


def _alloc_from_rate_rows(r, gains_desc, p):
    # rows version of alloc_from_rate: r is (n,), gains_desc is (n, K)
    b = 2.0 ** r - 1.0
    out = np.empty_like(gains_desc)
    consumed = np.zeros_like(r)
    for k in range(gains_desc.shape[1]):
        out[:, k] = b * (consumed + 1.0 / (p * gains_desc[:, k]))
        consumed += out[:, k]
    return out


def _varpi_rows(r, gains_desc, p):
    k = gains_desc.shape[1]
    expo = np.arange(k - 1, -1, -1, dtype=np.float64)
    powers = 2.0 ** (r[:, None] * expo[None, :])
    return (2.0 ** r - 1.0) * np.sum(powers / (p * gains_desc), axis=1)


def batch_max_min_rate(gains_desc, p, eps):
    """Bisection over rows: gains_desc is (n, K), descending along axis 1.

    Returns (r, iterations) with each r on the feasible (low) side of its
    bracket, within eps of the root.
    """
    g = np.asarray(gains_desc, dtype=np.float64)
    if g.ndim != 2 or g.size == 0:
        raise ValueError("gains_desc must be a nonempty (n, K) array")
    if np.any(g <= 0):
        raise ValueError("gains must be positive")
    _check_power(p)
    if eps <= 0:
        raise ValueError("eps must be positive")
    r_ub = np.log2(1.0 + p * g[:, -1])
    top = float(r_ub.max())
    if top <= eps:
        return np.zeros(g.shape[0]), 0
    n_iter = math.ceil(math.log2(top / eps))
    if n_iter > ITERATION_CAP:
        raise RuntimeError("bisection would need %d iterations (cap %d)" % (n_iter, ITERATION_CAP))
    lo = np.zeros(g.shape[0])
    hi = r_ub.copy()
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        feasible = _varpi_rows(mid, g, p) < 1.0
        lo = np.where(feasible, mid, lo)
        hi = np.where(feasible, hi, mid)
    return lo, n_iter


def solve_max_min_k(gains, p, eps=1e-4):
    """Max-min rate and allocation for any number of receivers.

    Gains may arrive in any order; the result carries the descending
    permutation so callers can map fractions back to receiver indices.
    """
    g = np.asarray(gains, dtype=np.float64)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("gains must be a nonempty vector")
    if np.any(g <= 0):
        raise ValueError("gains must be positive")
    _check_power(p)
    if eps <= 0:
        raise ValueError("eps must be positive")
    order = np.argsort(-g, kind="stable")
    gd = g[order]
    r, n_iter = batch_max_min_rate(gd[None, :], p, eps)
    r_max = float(r[0])
    alphas = alloc_from_rate(r_max, gd, p)
    residual = abs(varpi(r_max, gd, p) - 1.0)
    alloc = PowerAllocation(alphas=alphas, order=order)
    return SolverResult(r_max=r_max, allocation=alloc, iterations=n_iter, residual=residual)


def tdma_min_rate(gains, p):
    """Worst per-receiver rate when K receivers each get a 1/K time share."""
    g = np.asarray(gains, dtype=np.float64)
    if g.size == 0:
        raise ValueError("gains must be nonempty")
    if np.any(g <= 0):
        raise ValueError("gains must be positive")
    _check_power(p)
    k = g.shape[-1]
    r = np.log2(1.0 + p * np.min(g, axis=-1)) / k
    return float(r) if np.ndim(r) == 0 else r
