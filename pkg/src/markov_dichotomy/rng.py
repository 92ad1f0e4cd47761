"""Counter-based pseudo-random numbers (vectorized SplitMix64).

Every output is a pure function of (seed, stream index, counter), so repeated
runs, batch splits and any parallel schedule reproduce identical values:

    stream_seed = seed XOR stream_index                      (64-bit)
    state       = stream_seed + (counter + 1) * GOLDEN       (mod 2**64)
    output      = mix64(state)

mix64 is the SplitMix64 finalizer: three xor-shift/multiply rounds with the
constants below.  Uniform doubles take the top 53 bits, giving values in
[0, 1).  There is deliberately no hidden state anywhere in this module.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_SCALE53 = float(1.0 / (1 << 53))


def mix64(state: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on uint64 arrays (wraps modulo 2**64)."""
    x = np.asarray(state, dtype=np.uint64)
    x = (x ^ (x >> np.uint64(30))) * _MUL1
    x = (x ^ (x >> np.uint64(27))) * _MUL2
    return x ^ (x >> np.uint64(31))


def stream_seeds(seed: int, first_stream: int, count: int) -> np.ndarray:
    """Per-stream seeds: seed XOR stream index, as a uint64 array."""
    base = np.uint64(int(seed) & MASK64)
    idx = np.arange(first_stream, first_stream + count, dtype=np.uint64)
    return base ^ idx


def uniforms(streams: np.ndarray, counter: int) -> np.ndarray:
    """One float64 in [0, 1) per stream at the given counter."""
    bump = np.uint64((GOLDEN * (int(counter) + 1)) & MASK64)
    bits = mix64(streams + bump)
    return (bits >> np.uint64(11)).astype(np.float64) * _SCALE53
