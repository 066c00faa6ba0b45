"""Per-draw reference simulators for the growth dynamics.

Two equivalent views are provided: the vertex view (``GraphState``,
``graph_step``), where each step adds one vertex with ``l`` sequentially
attached edges, and the ball-urn view (``UrnState``/``TrackedUrnState``,
``urn_step``), where one draw reinforces one colour and every ``l``-th draw
immigrates ``beta`` balls of a fresh colour.  ``l`` urn draws correspond to
one graph step, colourwise.

These simulators are the plain, auditable kernels used by the tests and the
diagnostics; the throughput path for large Monte Carlo lives in
:mod:`patails.engine`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ModelConfig

_MAX_DRAWS = 2**62


class InvalidStateError(RuntimeError):
    """Raised when stepping an empty urn or overflowing the draw counter."""


@dataclass
class UrnState:
    """Full per-colour masses after ``m`` draws."""

    counts: list
    m: int
    cfg: ModelConfig

    @property
    def s(self) -> int:
        return self.cfg.s

    def total(self) -> float:
        return self.cfg.total_mass(self.m)


@dataclass
class TrackedUrnState:
    """Masses of the first ``r`` colours plus one aggregate tail mass.

    The tracked prefix follows the same transition law as in the full urn;
    everything past colour ``r`` (including future immigrations) is lumped
    into ``tail_mass``.
    """

    tracked: np.ndarray
    tail_mass: float
    m: int
    r: int
    cfg: ModelConfig

    def total(self) -> float:
        return self.cfg.total_mass(self.m)


@dataclass
class GraphState:
    """Vertex weights after ``n`` growth steps; optionally the edge list."""

    weights: list
    n: int
    edges: list | None = None


def new_urn_state(cfg: ModelConfig) -> UrnState:
    return UrnState(counts=list(cfg.urn_initial()), m=0, cfg=cfg)


def new_tracked_state(cfg: ModelConfig, r: int) -> TrackedUrnState:
    if r < 1:
        raise ValueError(f"tracked prefix length must be >= 1, got {r}")
    urn0 = cfg.urn_initial()
    tracked = np.zeros(r)
    head = min(r, len(urn0))
    tracked[:head] = urn0[:head]
    return TrackedUrnState(
        tracked=tracked,
        tail_mass=float(sum(urn0[head:])),
        m=0,
        r=r,
        cfg=cfg,
    )


def new_graph_state(cfg: ModelConfig, keep_edges: bool = False) -> GraphState:
    return GraphState(
        weights=list(cfg.initial), n=0, edges=[] if keep_edges else None
    )


def collapse_to_tracked(state: UrnState, r: int) -> TrackedUrnState:
    """Project a full urn onto its first ``r`` colours plus a tail aggregate."""
    if r < 1:
        raise ValueError(f"tracked prefix length must be >= 1, got {r}")
    tracked = np.zeros(r)
    head = min(r, len(state.counts))
    tracked[:head] = state.counts[:head]
    tail = state.total() - float(tracked.sum())
    return TrackedUrnState(
        tracked=tracked, tail_mass=max(tail, 0.0), m=state.m, r=r, cfg=state.cfg
    )


def urn_step(state, rng: np.random.Generator):
    """One draw: a colour gains unit mass with probability mass/total, then
    ``beta`` balls of a fresh colour immigrate if the draw count hits a
    multiple of ``l``.  Mutates and returns ``state``."""
    cfg = state.cfg
    total = state.total()
    if total <= 0.0:
        raise InvalidStateError("cannot draw from an empty urn")
    if state.m + 1 >= _MAX_DRAWS:
        raise InvalidStateError("draw counter overflow")
    u = rng.random() * total

    if isinstance(state, TrackedUrnState):
        acc = 0.0
        hit = None
        for k in range(state.r):
            acc += state.tracked[k]
            if u < acc:
                hit = k
                break
        if hit is None:
            state.tail_mass += 1.0
        else:
            state.tracked[hit] += 1.0
        state.m += 1
        if state.m % cfg.l == 0:
            colour = cfg.s + state.m // cfg.l  # 1-based index of the new colour
            if colour <= state.r:
                state.tracked[colour - 1] += cfg.beta
            else:
                state.tail_mass += cfg.beta
        return state

    acc = 0.0
    hit = len(state.counts) - 1
    for k, c in enumerate(state.counts):
        acc += c
        if u < acc:
            hit = k
            break
    state.counts[hit] += 1.0
    state.m += 1
    if state.m % cfg.l == 0:
        state.counts.append(cfg.beta)
    return state


def run_to(state, n_graph_steps: int, rng: np.random.Generator):
    """Advance exactly ``n_graph_steps * l`` draws (urn states) or
    ``n_graph_steps`` vertex additions (graph states)."""
    if n_graph_steps < 0:
        raise ValueError("n_graph_steps must be >= 0")
    if isinstance(state, GraphState):
        raise TypeError("run_to advances urn states; call graph_step for graphs")
    cfg = state.cfg
    if state.m + n_graph_steps * cfg.l >= _MAX_DRAWS:
        raise InvalidStateError("draw counter overflow")
    for _ in range(n_graph_steps * cfg.l):
        urn_step(state, rng)
    return state


def graph_step(state: GraphState, cfg: ModelConfig, rng: np.random.Generator) -> GraphState:
    """Add one vertex with ``l`` sequentially attached edges.

    Each edge lands on vertex ``k`` with probability proportional to its
    weight plus the edges it already received within this step; the
    denominator is ``(i - 1) + sum of weights at step start``.  In MODEL1 the
    incoming vertex itself (weight ``beta``) is a valid target.
    """
    weights = state.weights
    n_old = len(weights)
    with_loops = cfg.j == 1
    base_total = float(sum(weights)) + (cfg.beta if with_loops else 0.0)
    n_targets = n_old + 1 if with_loops else n_old
    added = [0.0] * n_targets
    for i in range(cfg.l):
        denom = i + base_total
        if denom <= 0.0:
            raise InvalidStateError("cannot attach an edge: total weight is zero")
        u = rng.random() * denom
        acc = 0.0
        hit = n_targets - 1
        for k in range(n_targets):
            w = weights[k] if k < n_old else cfg.beta
            acc += w + added[k]
            if u < acc:
                hit = k
                break
        added[hit] += 1.0
        if state.edges is not None:
            state.edges.append((n_old + 1, hit + 1))  # 1-based (source, target)
    for k in range(n_old):
        weights[k] += added[k]
    weights.append(cfg.beta + (added[n_old] if with_loops else 0.0))
    state.n += 1
    return state


def run_graph(state: GraphState, cfg: ModelConfig, n_steps: int, rng) -> GraphState:
    for _ in range(n_steps):
        graph_step(state, cfg, rng)
    return state


# --------------------------------------------------------------------------
# exact transition enumeration (small states; used by tests and diagnostics)


def urn_transition_distribution(counts, m: int, cfg: ModelConfig, n_draws: int) -> dict:
    """Exact distribution over count tuples after ``n_draws`` draws.

    Immigrated colours are appended along the way, exactly as in
    :func:`urn_step`.  Intended for small states only: the support grows
    like ``(#colours)^n_draws``.
    """
    states = {tuple(float(c) for c in counts): 1.0}
    for step in range(n_draws):
        total = cfg.total_mass(m + step)
        nxt: dict = {}
        for cts, prob in states.items():
            for k, c_k in enumerate(cts):
                if c_k == 0.0:
                    continue
                new = list(cts)
                new[k] = c_k + 1.0
                if (m + step + 1) % cfg.l == 0:
                    new.append(cfg.beta)
                key = tuple(new)
                nxt[key] = nxt.get(key, 0.0) + prob * (c_k / total)
        states = nxt
    return states


def graph_step_distribution(weights, cfg: ModelConfig) -> dict:
    """Exact distribution over weight tuples after one growth step."""
    with_loops = cfg.j == 1
    n_old = len(weights)
    base_total = float(sum(weights)) + (cfg.beta if with_loops else 0.0)
    n_targets = n_old + 1 if with_loops else n_old
    base = tuple(float(w) for w in weights) + ((cfg.beta,) if with_loops else ())

    states = {base: 1.0}
    for i in range(cfg.l):
        denom = i + base_total
        nxt: dict = {}
        for ws, prob in states.items():
            for k in range(n_targets):
                w = ws[k]
                if w == 0.0:
                    continue
                new = list(ws)
                new[k] = w + 1.0
                key = tuple(new)
                nxt[key] = nxt.get(key, 0.0) + prob * (w / denom)
        states = nxt
    if not with_loops:
        states = {ws + (cfg.beta,): p for ws, p in states.items()}
    return states
