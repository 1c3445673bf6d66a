"""Uniform gain quantizers and the feedback codecs.

Two flavors: "rate" snaps to the lower bin edge and never overstates a gain;
"outage" snaps to the upper edge, never understates one, and never returns
zero. Levels are encoded either with the variable-length enumeration
0, 1, 00, 01, 10, 11, 000, ... (level n costs floor(log2(n+2)) bits) or with
plain fixed-length indices.
"""

import math
from dataclasses import dataclass

import numpy as np

RATE = "rate"
OUTAGE = "outage"


@dataclass(frozen=True)
class QuantizerConfig:
    delta: float
    t: int
    flavor: str = RATE

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if int(self.t) != self.t or self.t < 1:
            raise ValueError("t must be a positive integer")
        if self.flavor not in (RATE, OUTAGE):
            raise ValueError("flavor must be %r or %r" % (RATE, OUTAGE))


@dataclass(frozen=True)
class FeedbackWord:
    level: int
    bit_length: int
    reconstructed: float


def rate_levels(x, delta, t):
    """Bin indices under the lower-edge quantizer, saturating at t.

    Float division can land floor(x/delta) one bin off when x sits on a bin
    boundary (0.3/0.1 -> 2.9999...), so the index is nudged until
    n*delta <= x < (n+1)*delta holds exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise ValueError("gain must be nonnegative")
    n = np.floor(x / delta)
    n = np.where((n + 1.0) * delta <= x, n + 1.0, n)
    n = np.where(n * delta > x, n - 1.0, n)
    return np.minimum(n, float(t)).astype(np.int64)


def outage_levels(x, delta, t):
    """Bin indices under the upper-edge quantizer: 1..t+1, never zero."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0):
        raise ValueError("gain must be positive; zero would quantize to zero")
    m = np.ceil(x / delta)
    m = np.where((m - 1.0) * delta >= x, m - 1.0, m)
    m = np.where(m * delta < x, m + 1.0, m)
    return np.clip(m, 1.0, float(t + 1)).astype(np.int64)


def quantize_rate(x, cfg):
    if cfg.flavor != RATE:
        raise ValueError("config flavor is not %r" % RATE)
    n = int(rate_levels(x, cfg.delta, cfg.t))
    return FeedbackWord(level=n, bit_length=vle_length(n), reconstructed=n * cfg.delta)


def quantize_outage(x, cfg):
    if cfg.flavor != OUTAGE:
        raise ValueError("config flavor is not %r" % OUTAGE)
    n = int(outage_levels(x, cfg.delta, cfg.t))
    return FeedbackWord(level=n, bit_length=vle_length(n), reconstructed=n * cfg.delta)


def _check_delta_for_default(delta):
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1) for the default bin-count rule")


def default_t_rate(delta, lambda1=1.0):
    """Bin count making the saturation tail as small as one bin: T*delta = lambda1*ln(1/delta)."""
    _check_delta_for_default(delta)
    if not lambda1 > 0:
        raise ValueError("lambda1 must be positive")
    return math.ceil(lambda1 / delta * math.log(1.0 / delta))


def default_t_outage(delta, lambda1=1.0):
    """Half the rate rule: saturation tail sqrt(delta) instead of delta."""
    _check_delta_for_default(delta)
    if not lambda1 > 0:
        raise ValueError("lambda1 must be positive")
    return math.ceil(lambda1 / (2.0 * delta) * math.log(1.0 / delta))


def vle_length(level):
    """Codeword length for one level: floor(log2(level+2))."""
    if level < 0:
        raise ValueError("level must be nonnegative")
    return (int(level) + 2).bit_length() - 1


def vle_lengths(levels):
    """Vectorized vle_length with the same boundary-exactness guarantee."""
    v = np.asarray(levels, dtype=np.int64) + 2
    if np.any(v < 2):
        raise ValueError("levels must be nonnegative")
    n = np.floor(np.log2(v)).astype(np.int64)
    n = np.where(2 ** (n + 1) <= v, n + 1, n)
    n = np.where(2**n > v, n - 1, n)
    return n


def vle_encode(level):
    """The (level+1)-th nonempty binary string, ordered by length then value."""
    n = int(level)
    if n < 0:
        raise ValueError("level must be nonnegative")
    length = vle_length(n)
    value = n + 2 - (1 << length)
    return format(value, "0%db" % length)


def vle_decode(bits):
    """Inverse of vle_encode; the caller supplies the length out-of-band."""
    if not bits or any(c not in "01" for c in bits):
        raise ValueError("bits must be a nonempty string of 0s and 1s")
    return int(bits, 2) + (1 << len(bits)) - 2


def fle_bits(t, flavor):
    """Fixed-length cost: ceil(log2(#levels)) for t+1 rate or t+2 outage levels."""
    if t < 1:
        raise ValueError("t must be at least 1")
    if flavor == RATE:
        return int(t).bit_length()
    if flavor == OUTAGE:
        return (int(t) + 1).bit_length()
    raise ValueError("flavor must be %r or %r" % (RATE, OUTAGE))


def vle_rate_bound(delta, lam):
    """Analytic cap on expected VLE bits per channel state for mean gain lam."""
    if not delta > 0 or not lam > 0:
        raise ValueError("delta and lam must be positive")
    return 2.0 / math.log(2.0) + 1.0 + math.log2(1.0 + lam / delta)
