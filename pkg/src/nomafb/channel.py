"""Rayleigh-fading power gains with reproducible, parallel-safe draws.

Gains are exponential: H_k = |h_k|^2 with h_k ~ CN(0, lambda_k), so H_k has
mean lambda_k. Draws are keyed by (master seed, block index) only, never by
execution order, so any worker can regenerate any trial.
"""

from dataclasses import dataclass

import numpy as np

# Trials per random block. Fixed so that trial t always lives at row
# t % CHUNK of block t // CHUNK, whatever the worker count.
CHUNK = 1 << 14

_GAIN_DOMAIN = 0


@dataclass(frozen=True)
class ChannelParams:
    """Mean power gains, one per receiver."""

    variances: tuple

    def __post_init__(self):
        if len(self.variances) == 0:
            raise ValueError("need at least one receiver")
        if any(not v > 0 for v in self.variances):
            raise ValueError("every mean gain must be positive")

    @property
    def count(self):
        return len(self.variances)


@dataclass(frozen=True)
class ChannelState:
    """Instantaneous power gains for one trial."""

    gains: np.ndarray


@dataclass(frozen=True)
class StreamSeed:
    master: int
    trial: int


def block_rng(master, block_index):
    """Generator for one block of trials, keyed by (seed, block) alone."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=(_GAIN_DOMAIN, block_index))
    return np.random.default_rng(ss)


def sample_block(params, master, block_index, count=CHUNK):
    """Draw the gains for one block as a (count, K) array.

    The full block is always generated before slicing, so row i holds the
    same trial no matter how many rows the caller asked for. Exact zeros
    (measure zero, but the gain contract is strict positivity) are redrawn.
    """
    if not 0 < count <= CHUNK:
        raise ValueError("count must be in 1..%d" % CHUNK)
    rng = block_rng(master, block_index)
    lam = np.asarray(params.variances, dtype=np.float64)
    g = rng.exponential(1.0, size=(CHUNK, lam.size)) * lam
    bad = ~(g > 0)
    while bad.any():
        g[bad] = rng.exponential(1.0, size=int(bad.sum())) * np.broadcast_to(lam, g.shape)[bad]
        bad = ~(g > 0)
    return g[:count]


def sample_channel(params, seed):
    """Single-trial draw at seed.trial, consistent with sample_block."""
    if seed.trial < 0 or seed.master < 0:
        raise ValueError("seed fields must be nonnegative")
    block = sample_block(params, seed.master, seed.trial // CHUNK)
    return ChannelState(gains=block[seed.trial % CHUNK].copy())
