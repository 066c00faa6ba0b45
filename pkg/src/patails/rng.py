"""Deterministic random-stream derivation.

Every replication owns two independent streams derived from the 64-bit
master seed and its replication index:

* a numpy ``Philox`` generator (counter-based) for the distributional
  samplers (categorical, Dirichlet, multinomial), keyed by
  ``(seed, index)``, and
* a 256-bit xoshiro state for the compiled draw-scan kernels, expanded from
  ``(seed, index)`` with splitmix64.

Because streams are keyed by the absolute replication index, results are
bit-identical no matter how replications are partitioned across workers.
Utility streams (e.g. batch sampling of observation times) use key indices
above 2**63 so they can never collide with replication streams.
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_UTIL_BASE = 1 << 63
_N_BLOCK = 1 << 16  # replications per utility block when batch-sampling


def replication_stream(seed: int, index: int) -> np.random.Generator:
    """Philox generator for replication ``index`` under ``seed``."""
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def utility_stream(seed: int, tag: int, block: int = 0) -> np.random.Generator:
    """Philox generator for non-replication randomness (tag < 2**16)."""
    idx = _UTIL_BASE + (tag << 32) + block
    key = np.array([seed & _MASK64, idx & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def splitmix64(x: int) -> int:
    """One splitmix64 output step; the de-facto standard seed expander."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def xoshiro_state(seed: int, index: int, tag: int = 0) -> np.ndarray:
    """256-bit xoshiro256** state for the scan kernels, one per replication."""
    base = splitmix64((seed & _MASK64) ^ splitmix64((index << 16) ^ tag))
    s = np.empty(4, dtype=np.uint64)
    x = base
    for i in range(4):
        x = splitmix64(x)
        s[i] = x
    if not s.any():  # the all-zero state is invalid for xoshiro
        s[0] = 0x9E3779B97F4A7C15
    return s


def xoshiro_states(seed: int, indices, tag: int = 0) -> np.ndarray:
    """Stacked xoshiro states for an array of replication indices."""
    out = np.empty((len(indices), 4), dtype=np.uint64)
    for row, idx in enumerate(indices):
        out[row] = xoshiro_state(seed, int(idx), tag)
    return out


def batch_uniforms(seed: int, tag: int, start: int, count: int) -> np.ndarray:
    """Uniforms for absolute positions [start, start+count).

    Generated in fixed blocks of 2**16 keyed by block number, so any worker
    can regenerate any slice without coordinating with the others.
    """
    out = np.empty(count, dtype=np.float64)
    pos = start
    filled = 0
    while filled < count:
        block, offset = divmod(pos, _N_BLOCK)
        take = min(_N_BLOCK - offset, count - filled)
        g = utility_stream(seed, tag, block)
        vals = g.random(_N_BLOCK)
        out[filled : filled + take] = vals[offset : offset + take]
        filled += take
        pos += take
    return out
