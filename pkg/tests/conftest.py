"""Shared independent oracles for the test suite.

Everything here is written from the defining formulas, not from the package
internals, so tests compare two independent routes to the same number.
"""

import math

import numpy as np


def grid_min_rate(h1, h2, p, step=1e-5):
    """Brute-force max-min over a power-split grid; returns (alpha, value).

    alpha is the share of the receiver with the larger gain, which decodes
    last; the other receiver treats that share as interference.
    """
    hs, hw = max(h1, h2), min(h1, h2)
    a = np.arange(0.0, 1.0 + 0.5 * step, step)
    r_strong = np.log2(1.0 + p * a * hs)
    r_weak = np.log2(1.0 + p * hw * (1.0 - a) / (p * hw * a + 1.0))
    rmin = np.minimum(r_strong, r_weak)
    i = int(np.argmax(rmin))
    return float(a[i]), float(rmin[i])


def random_triples(count, rng, p_db_low=-10.0, p_db_high=30.0):
    """(H1, H2, P) draws matching the experiment setup, P log-uniform in dB."""
    h1 = rng.exponential(1.0, count)
    h2 = rng.exponential(0.5, count)
    p = 10.0 ** (rng.uniform(p_db_low, p_db_high, count) / 10.0)
    return h1, h2, p


def vle_mean_analytic(delta, lam, t):
    """Exact expected VLE bits for an exponential gain under the lower-edge
    quantizer: sum the codeword length over every bin's probability mass."""
    total = 0.0
    for n in range(t):
        p_bin = math.exp(-n * delta / lam) - math.exp(-(n + 1) * delta / lam)
        total += math.floor(math.log2(n + 2)) * p_bin
    total += math.floor(math.log2(t + 2)) * math.exp(-t * delta / lam)
    return total


def enumerate_binary_strings(count):
    """First `count` nonempty binary strings ordered by length then value."""
    out = []
    length = 1
    while len(out) < count:
        for v in range(1 << length):
            out.append(format(v, "0%db" % length))
            if len(out) == count:
                break
        length += 1
    return out
