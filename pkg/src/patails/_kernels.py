"""Compiled inner loops for the Monte Carlo engine.

Two scan kernels, both exact per-draw simulations:

* ``prefix_hits_batch`` advances only the combined mass of the tracked
  colour prefix against the deterministic total (one Bernoulli per draw);
  the allocation of hits among the tracked colours is reconstructed later
  from urn exchangeability.
* ``full_urn_scan`` advances every colour, sampling each draw in O(1) via
  the mass decomposition "past draws + immigrated offsets + initial
  masses" (one uniform per draw, branch by mass share).

Randomness is xoshiro256** seeded per replication; states are mutated in
place so successive segment calls continue the same stream.
"""

import numpy as np
from numba import njit, prange

_U64_5 = np.uint64(5)
_U64_7 = np.uint64(7)
_U64_9 = np.uint64(9)
_U64_11 = np.uint64(11)
_U64_17 = np.uint64(17)
_U64_45 = np.uint64(45)
_U64_57 = np.uint64(57)
_U64_19 = np.uint64(19)
_INV_2_53 = 1.0 / 9007199254740992.0


@njit(inline="always")
def _rotl(x, k, inv_k):
    return (x << k) | (x >> inv_k)


@njit(inline="always")
def _xoshiro_next(state, i):
    # xoshiro256**: returns a uint64, mutates state[i, :]
    s0 = state[i, 0]
    s1 = state[i, 1]
    s2 = state[i, 2]
    s3 = state[i, 3]
    result = _rotl(s1 * _U64_5, _U64_7, _U64_57) * _U64_9
    t = s1 << _U64_17
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, _U64_45, _U64_19)
    state[i, 0] = s0
    state[i, 1] = s1
    state[i, 2] = s2
    state[i, 3] = s3
    return result


@njit(inline="always")
def _uniform(state, i):
    return float(_xoshiro_next(state, i) >> _U64_11) * _INV_2_53


@njit(cache=True, parallel=True)
def prefix_hits_batch(m_start, m_stop, u0, z, beta, l, states):
    """Draws landing on the tracked prefix, one replication per row.

    Replication ``i`` scans draws ``m_start[i]+1 .. m_stop[i]``; the prefix
    mass starts at ``u0[i]`` and gains 1 per hit, while the total after
    ``m`` draws is ``z + m + beta * (m // l)`` regardless of outcomes.
    """
    n = len(m_start)
    hits = np.zeros(n, dtype=np.int64)
    for i in prange(n):
        u_mass = u0[i]
        h = 0
        q = m_start[i] // l
        rem = m_start[i] % l
        for m in range(m_start[i], m_stop[i]):
            total = z + m + beta * q
            if _uniform(states, i) * total < u_mass:
                u_mass += 1.0
                h += 1
            rem += 1
            if rem == l:
                rem = 0
                q += 1
        hits[i] = h
    return hits


@njit(cache=True)
def full_urn_scan(draws, m_start, m_stop, init_masses, init_total, beta, l, states, i):
    """Exact full-urn scan storing each draw's 0-based colour in ``draws``.

    A colour's mass is (initial mass | beta for immigrants) + one per past
    draw on it, so a draw proportional to mass splits into three branches:
    uniform past draw, uniform immigrated colour, or a walk over the initial
    masses.  Total work is O(1) per draw plus O(s) on the rare third branch.
    """
    s = len(init_masses)
    for m in range(m_start, m_stop):
        q = m // l  # immigrated colours so far
        total = init_total + m + beta * q
        u = _uniform(states, i) * total
        if u < m:
            colour = draws[int(u)]
        else:
            v = u - m
            bq = beta * q
            if q > 0 and v < bq:
                colour = s + int(v / beta)
                if colour >= s + q:  # float roundoff at the branch edge
                    colour = s + q - 1
            else:
                w = v - bq
                colour = 0
                acc = init_masses[0]
                while w >= acc and colour + 1 < s:
                    colour += 1
                    acc += init_masses[colour]
        draws[m] = colour
    return m_stop
