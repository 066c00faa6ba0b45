"""Exact acceleration of tracked-prefix replications.

Simulating the weights of the first ``r`` vertices to a horizon of ``M``
draws does not require ``M`` categorical draws over ``r + 1`` categories.
The engine factorises each replication exactly:

1. *Warm-up*: until the ``r``-th colour has immigrated (a deterministic,
   small number of draws) the whole urn consists of tracked colours; those
   draws are simulated directly.
2. *Hit scan*: afterwards only the scalar mass of the tracked prefix
   matters for how many draws land on it; one Bernoulli per draw against
   the deterministic total (compiled kernel), or, for extremely long
   horizons, exact inversion of the closed-form waiting-time survival
   function (gamma-ratio products).
3. *Allocation*: given the hit count, the split among the tracked colours
   is a Dirichlet-multinomial with the warm-up composition as weights,
   by urn exchangeability within the prefix.

Every step is distribution-exact; tests compare against the per-draw
reference simulator.  Randomness: per-replication Philox streams for the
warm-up and allocation, per-replication xoshiro states for the scans, both
keyed by (seed, replication index), so any partition of replications over
workers produces identical output.
"""

from __future__ import annotations

import math

import numpy as np

from . import rng as rngmod
from ._kernels import full_urn_scan, prefix_hits_batch
from .config import ModelConfig

# one kernel segment handles this many draws before the gamma-ratio
# waiting-time sampler takes over (it costs O(prefix growth), not O(draws))
DIRECT_DRAW_LIMIT = 1 << 27


# --------------------------------------------------------------------------
# warm-up phase


def _phase1(cfg: ModelConfig, r: int, max_draws: int, gen: np.random.Generator):
    """Simulate draws until colour ``r`` exists (or ``max_draws`` is hit).

    Returns ``(composition, draws_done)`` where ``composition`` has length
    ``r`` with zeros for colours that do not exist yet.  During this phase
    every colour in the urn is a tracked colour, so the draw walk runs over
    the composition array alone.
    """
    urn0 = cfg.urn_initial()
    s, l, beta = cfg.s, cfg.l, cfg.beta
    comp = np.zeros(r)
    live = min(r, s)
    comp[:live] = urn0[:live]
    n0_draws = l * max(r - s, 0)
    stop = min(n0_draws, max_draws)
    for m in range(stop):
        total = cfg.total_mass(m)
        u = gen.random() * total
        acc = 0.0
        hit = live - 1
        for k in range(live):
            acc += comp[k]
            if u < acc:
                hit = k
                break
        comp[hit] += 1.0
        if (m + 1) % l == 0:
            live = s + (m + 1) // l  # new colour enters with mass beta
            comp[live - 1] = beta
    return comp, stop


# --------------------------------------------------------------------------
# gamma-ratio waiting-time sampler (horizons past DIRECT_DRAW_LIMIT)


def _log_survival(m_from: int, m_to: int, u_mass: float, cfg: ModelConfig) -> float:
    """log P(no prefix hit in draws m_from+1 .. m_to) at fixed prefix mass.

    The per-draw miss probabilities (S_i - U)/S_i multiply into gamma-ratio
    products, one per within-step draw slot, because S_i is affine in the
    step index along each slot.
    """
    l, beta, z = cfg.l, cfg.beta, cfg.z
    lb = l + beta
    out = 0.0
    for j in range(l):
        # draw indices i ≡ j (mod l) inside [m_from, m_to)
        n_lo = -((j - m_from) // l)  # ceil((m_from - j) / l)
        n_hi = -((j - m_to) // l)
        if n_hi <= n_lo:
            continue
        a = (z + j - u_mass) / lb
        b = (z + j) / lb
        out += math.lgamma(a + n_hi) - math.lgamma(a + n_lo)
        out -= math.lgamma(b + n_hi) - math.lgamma(b + n_lo)
    return out


def _hits_by_inversion(
    cfg: ModelConfig, u0: float, m_start: int, m_stop: int, gen: np.random.Generator
) -> int:
    """Exact prefix hit count by sequential inversion of the waiting time.

    Cost is proportional to the number of hits (which grows like the
    prefix mass, i.e. sublinearly in the horizon), not to the horizon.
    """
    u_mass = u0
    m = m_start
    hits = 0
    while m < m_stop:
        rest = cfg.total_mass(m) - u_mass
        if rest <= 1e-9:  # prefix is the whole urn: the next draw must hit
            m += 1
            u_mass += 1.0
            hits += 1
            continue
        log_v = math.log(1.0 - gen.random())
        if _log_survival(m, m_stop, u_mass, cfg) > log_v:
            break  # no further hit inside the horizon
        lo, hi = m, m + 1  # find smallest m' with log G(m') <= log_v
        while _log_survival(m, hi, u_mass, cfg) > log_v:
            lo = hi
            hi = min(m + 2 * (hi - m), m_stop)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _log_survival(m, mid, u_mass, cfg) <= log_v:
                hi = mid
            else:
                lo = mid
        m = hi
        u_mass += 1.0
        hits += 1
    return hits


# --------------------------------------------------------------------------
# allocation


def _allocate(comp: np.ndarray, hits: int, gen: np.random.Generator) -> np.ndarray:
    """Split ``hits`` prefix draws among the tracked colours.

    Within the prefix the draws follow a classical reinforced urn started at
    ``comp``, so the joint split is Dirichlet-multinomial(hits; comp).
    Colours with zero mass never receive draws.
    """
    if hits == 0:
        return comp.copy()
    pos = comp > 0.0
    p = gen.dirichlet(comp[pos])
    out = comp.copy()
    out[pos] += gen.multinomial(hits, p)
    return out


# --------------------------------------------------------------------------
# public drivers


def replicate_prefix_vectors(
    cfg: ModelConfig, r: int, horizons, indices, seed: int, tag: int = 0
) -> np.ndarray:
    """Weight vectors of the first ``r`` vertices, one replication per row.

    ``horizons[k]`` is the number of growth steps for replication
    ``indices[k]``; the row equals the tracked urn state after
    ``horizons[k] * l`` draws (zeros for vertices that never appeared).
    """
    horizons = np.asarray(horizons, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    if horizons.shape != indices.shape:
        raise ValueError("horizons and indices must have matching shapes")
    n = len(horizons)
    comps = np.empty((n, r))
    gens = []
    m_done = np.empty(n, dtype=np.int64)
    for k in range(n):
        gen = rngmod.replication_stream(seed, int(indices[k]))
        comp, m0 = _phase1(cfg, r, int(horizons[k]) * cfg.l, gen)
        comps[k] = comp
        m_done[k] = m0
        gens.append(gen)

    m_stop = horizons * cfg.l
    hits = np.zeros(n, dtype=np.int64)
    need = m_stop > m_done
    small = need & (m_stop - m_done <= DIRECT_DRAW_LIMIT)
    # prefix mass when the scan starts: the whole urn for r >= s (warm-up
    # ran to the r-th colour's arrival), the leading initial colours else
    u_start = comps.sum(axis=1)
    if small.any():
        rows = np.nonzero(small)[0]
        states = rngmod.xoshiro_states(seed, indices[rows], tag=tag)
        hits[rows] = prefix_hits_batch(
            m_done[rows], m_stop[rows], u_start[rows], cfg.z, cfg.beta, cfg.l, states
        )
    for k in np.nonzero(need & ~small)[0]:
        gen = rngmod.utility_stream(seed, tag=9, block=int(indices[k]))
        hits[k] = _hits_by_inversion(
            cfg, float(u_start[k]), int(m_done[k]), int(m_stop[k]), gen
        )

    out = np.empty((n, r))
    for k in range(n):
        out[k] = _allocate(comps[k], int(hits[k]), gens[k])
    return out


def prefix_ensemble(cfg: ModelConfig, r: int, n_graph: int, reps: int, seed: int) -> np.ndarray:
    """``reps`` independent weight vectors at the fixed horizon ``n_graph``."""
    horizons = np.full(reps, n_graph, dtype=np.int64)
    return replicate_prefix_vectors(cfg, r, horizons, np.arange(reps), seed)


def prefix_paths(
    cfg: ModelConfig, r: int, checkpoints, reps: int, seed: int, tag: int = 0
) -> np.ndarray:
    """Weight vectors along a common checkpoint grid, shape (reps, #ckpt, r).

    Segments between checkpoints reuse the hit-scan/allocation split; the
    per-segment allocations compose exactly because the within-prefix urn is
    consistent under restriction to sub-stretches of draws.
    """
    checkpoints = [int(c) for c in checkpoints]
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    n0_draws = cfg.l * max(r - cfg.s, 0)
    if checkpoints[0] * cfg.l < n0_draws:
        raise ValueError(
            f"first checkpoint must be at least {-(-n0_draws // cfg.l)} growth steps"
        )
    comps = np.empty((reps, r))
    gens = []
    for k in range(reps):
        gen = rngmod.replication_stream(seed, k)
        comp, _ = _phase1(cfg, r, n0_draws, gen)
        comps[k] = comp
        gens.append(gen)
    states = rngmod.xoshiro_states(seed, np.arange(reps), tag=tag)

    out = np.empty((reps, len(checkpoints), r))
    m_prev = np.full(reps, n0_draws, dtype=np.int64)
    u_prev = comps.sum(axis=1)
    for c_idx, ckpt in enumerate(checkpoints):
        m_next = np.full(reps, ckpt * cfg.l, dtype=np.int64)
        hits = prefix_hits_batch(m_prev, m_next, u_prev, cfg.z, cfg.beta, cfg.l, states)
        for k in range(reps):
            comps[k] = _allocate(comps[k], int(hits[k]), gens[k])
        u_prev = u_prev + hits
        m_prev = m_next
        out[:, c_idx, :] = comps
    return out


def full_urn_weights(
    cfg: ModelConfig,
    n_graph: int,
    seed: int,
    index: int,
    checkpoints=None,
    tag: int = 1,
):
    """Exact full weight vectors (all vertices) from the O(1)-per-draw urn.

    Returns the weight array at ``n_graph`` or, when ``checkpoints`` is
    given, the list of weight arrays at each checkpoint.  Memory is one
    int32 per draw, so horizons are bounded by ``n_graph * l`` fitting in
    RAM; callers enforce their own caps.
    """
    ckpts = [n_graph] if checkpoints is None else [int(c) for c in checkpoints]
    if any(b <= a for a, b in zip(ckpts, ckpts[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    if ckpts[-1] != n_graph:
        raise ValueError("last checkpoint must equal the horizon")
    m_total = n_graph * cfg.l
    draws = np.empty(m_total, dtype=np.int32)
    init = np.array(cfg.urn_initial(), dtype=np.float64)
    state = rngmod.xoshiro_state(seed, index, tag=tag)[None, :]
    outputs = []
    m_done = 0
    for ckpt in ckpts:
        m_next = ckpt * cfg.l
        if m_next > m_done:
            full_urn_scan(draws, m_done, m_next, init, float(init.sum()), cfg.beta, cfg.l, state, 0)
            m_done = m_next
        outputs.append(_weights_from_draws(cfg, draws, m_done, ckpt))
    return outputs[0] if checkpoints is None else outputs


def _weights_from_draws(cfg: ModelConfig, draws: np.ndarray, m: int, n_graph: int) -> np.ndarray:
    n_colours = cfg.s + m // cfg.l
    base = np.full(n_colours, cfg.beta)
    base[: cfg.s] = cfg.urn_initial()
    counts = base + np.bincount(draws[:m], minlength=n_colours)
    n_vertices = cfg.n_initial + n_graph
    return counts[:n_vertices]  # MODEL1 carries one not-yet-added colour at the end
