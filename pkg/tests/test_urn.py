import math
from types import SimpleNamespace

import numpy as np
import pytest

from conftest import assorted_configs, chi2_two_sample
from patails import rng as rngmod
from patails.config import LoopMode, ModelConfig
from patails.urn import (
    GraphState,
    InvalidStateError,
    TrackedUrnState,
    UrnState,
    collapse_to_tracked,
    graph_step,
    graph_step_distribution,
    new_graph_state,
    new_tracked_state,
    new_urn_state,
    run_graph,
    run_to,
    urn_step,
    urn_transition_distribution,
)


# ------------------------------------------------------- transition checks


def test_model0_first_edge_probabilities():
    """Three vertices with in-degrees (2,1,1): first edge lands on vertex 1
    with probability (2+beta)/(4+3beta), no self-target."""
    beta = 0.8
    cfg = ModelConfig(l=1, beta=beta, loop_mode=LoopMode.MODEL0, initial=(2 + beta, 1 + beta, 1 + beta))
    dist = graph_step_distribution(list(cfg.initial), cfg)
    p_vertex1 = sum(p for ws, p in dist.items() if ws[0] == 3 + beta)
    assert p_vertex1 == pytest.approx((2 + beta) / (4 + 3 * beta), rel=1e-14)
    # the incoming vertex never receives its own edge in MODEL0
    assert all(ws[3] == beta for ws in dist)


def test_model1_new_vertex_self_loop_probability():
    beta = 0.8
    cfg = ModelConfig(l=1, beta=beta, loop_mode=LoopMode.MODEL1, initial=(2 + beta, 1 + beta, 1 + beta))
    dist = graph_step_distribution(list(cfg.initial), cfg)
    p_self = sum(p for ws, p in dist.items() if ws[3] == beta + 1)
    assert p_self == pytest.approx(beta / (4 + 4 * beta), rel=1e-14)
    p_vertex1 = sum(p for ws, p in dist.items() if ws[0] == 3 + beta)
    assert p_vertex1 == pytest.approx((2 + beta) / (4 + 4 * beta), rel=1e-14)


def test_single_vertex_loop_model_step_probabilities():
    """The introductory one-edge-per-step model: probabilities at n = 0."""
    beta = 1.3
    cfg = ModelConfig(l=1, beta=beta, loop_mode=LoopMode.MODEL1)  # initial (1+beta,)
    dist = graph_step_distribution(list(cfg.initial), cfg)
    p_old = sum(p for ws, p in dist.items() if ws[0] == 2 + beta)
    p_new = sum(p for ws, p in dist.items() if ws[1] == beta + 1)
    assert p_old == pytest.approx((1 + beta) / (1 + 2 * beta), rel=1e-14)
    assert p_new == pytest.approx(beta / (1 + 2 * beta), rel=1e-14)
    assert p_old + p_new == pytest.approx(1.0, rel=1e-14)


def test_single_colour_block_is_deterministic():
    """With one colour in the urn, draws inside the first immigration window
    hit it with probability one."""
    cfg = ModelConfig(l=5, beta=1.0, loop_mode=LoopMode.MODEL0, initial=(2.0,))
    rng = rngmod.utility_stream(0, tag=41)
    st = new_urn_state(cfg)
    for m in range(1, 5):
        urn_step(st, rng)
        assert st.counts[0] == 2.0 + m


def test_urn_step_empty_urn_errors():
    fake_cfg = SimpleNamespace(total_mass=lambda m: 0.0, l=1, beta=0.0, s=1)
    st = UrnState(counts=[0.0], m=0, cfg=fake_cfg)
    with pytest.raises(InvalidStateError):
        urn_step(st, rngmod.utility_stream(0, tag=42))


# ------------------------------------------------------------- exact totals


@pytest.mark.parametrize("cfg", assorted_configs())
def test_total_mass_exact_along_path(cfg):
    rng = rngmod.utility_stream(2, tag=43)
    st = new_urn_state(cfg)
    for _ in range(2000):
        urn_step(st, rng)
        assert abs(sum(st.counts) - cfg.total_mass(st.m)) <= 1e-9
    tracked = new_tracked_state(cfg, 3)
    for _ in range(2000):
        urn_step(tracked, rng)
    assert tracked.tracked.sum() + tracked.tail_mass == pytest.approx(
        cfg.total_mass(tracked.m), abs=1e-9
    )


def test_run_to_zero_steps_is_identity():
    cfg = ModelConfig(l=2, beta=1.0, loop_mode=LoopMode.MODEL1)
    st = new_urn_state(cfg)
    before = (list(st.counts), st.m)
    run_to(st, 0, rngmod.utility_stream(0, tag=44))
    assert (st.counts, st.m) == before


def test_run_to_total_mass_toy_case():
    # l=1, beta=1, one vertex with one loop: total mass after n steps is 2 + 2n
    cfg = ModelConfig(l=1, beta=1.0, loop_mode=LoopMode.MODEL0, initial=(2.0,))
    st = new_urn_state(cfg)
    run_to(st, 50, rngmod.utility_stream(1, tag=45))
    assert sum(st.counts) == pytest.approx(2.0 + 2 * 50, abs=1e-9)


# ----------------------------------------------------------------- collapse


def test_collapse_arithmetic():
    cfg = ModelConfig(l=1, beta=1.0, loop_mode=LoopMode.MODEL0, initial=(3.0, 2.0, 1.0, 1.0))
    st = new_urn_state(cfg)
    tr = collapse_to_tracked(st, 2)
    assert tr.tracked.tolist() == [3.0, 2.0]
    assert tr.tail_mass == pytest.approx(2.0)


def test_collapse_with_fewer_colours_than_r():
    cfg = ModelConfig(l=1, beta=1.0, loop_mode=LoopMode.MODEL0, initial=(3.0,))
    tr = collapse_to_tracked(new_urn_state(cfg), 4)
    assert tr.tracked.tolist() == [3.0, 0.0, 0.0, 0.0]
    assert tr.tail_mass == 0.0


def test_collapse_commutes_with_stepping_in_distribution():
    """Chi-square on single-draw categories, full vs collapsed, 1% level."""
    cfg = ModelConfig(l=2, beta=0.7, loop_mode=LoopMode.MODEL1, initial=(1.3,))
    rng = rngmod.utility_stream(8, tag=46)
    base = new_urn_state(cfg)
    run_to(base, 5, rng)
    r = 3
    base_tr = collapse_to_tracked(base, r)
    n_samples = 6000
    cats = np.zeros((2, r + 1), dtype=int)
    ref_full = np.array(base.counts)
    ref_tr = np.append(base_tr.tracked, base_tr.tail_mass)
    for _ in range(n_samples):
        st = UrnState(counts=list(base.counts), m=base.m, cfg=cfg)
        urn_step(st, rng)
        hit = int(np.argmax(np.array(st.counts[: len(ref_full)]) - ref_full > 0.5))
        cats[0, min(hit, r)] += 1
        tr = TrackedUrnState(
            tracked=base_tr.tracked.copy(), tail_mass=base_tr.tail_mass,
            m=base_tr.m, r=r, cfg=cfg,
        )
        urn_step(tr, rng)
        cats[1, int(np.argmax(np.append(tr.tracked, tr.tail_mass) - ref_tr > 0.5))] += 1
    from scipy import stats

    assert stats.chi2_contingency(cats)[1] > 0.01


# ----------------------------------------------------------------- duality


@pytest.mark.parametrize("cfg", assorted_configs())
def test_graph_urn_one_step_duality_exact(cfg):
    """The enumerated one-step law of the graph equals l urn draws, colourwise."""
    rng = rngmod.utility_stream(4, tag=47)
    st = new_urn_state(cfg)
    run_to(st, 2, rng)
    n_vertices = cfg.n_initial + 2
    weights = list(st.counts[:n_vertices])
    graph_dist = graph_step_distribution(weights, cfg)
    urn_dist = urn_transition_distribution(st.counts, st.m, cfg, cfg.l)
    folded: dict = {}
    for counts, p in urn_dist.items():
        key = tuple(counts[: n_vertices + 1])
        folded[key] = folded.get(key, 0.0) + p
    assert set(folded) == set(graph_dist)
    for key, p in graph_dist.items():
        assert folded[key] == pytest.approx(p, abs=1e-12)


def test_graph_step_simulation_matches_enumeration():
    cfg = ModelConfig(l=2, beta=1.0, loop_mode=LoopMode.MODEL1, initial=(2.0,))
    dist = graph_step_distribution(list(cfg.initial), cfg)
    rng = rngmod.utility_stream(11, tag=48)
    from collections import Counter

    seen = Counter()
    n = 20_000
    for _ in range(n):
        g = new_graph_state(cfg)
        graph_step(g, cfg, rng)
        seen[tuple(g.weights)] += 1
    for key, p in dist.items():
        se = math.sqrt(p * (1 - p) / n)
        assert abs(seen[key] / n - p) <= 4 * se + 1e-9


def test_urn_graph_paired_means():
    """Mean weight of the first vertex agrees between the two views."""
    cfg = ModelConfig(l=1, beta=1.0, loop_mode=LoopMode.MODEL1)
    n_steps, reps = 100, 20_000
    rng = rngmod.utility_stream(12, tag=49)
    urn_first = np.empty(reps)
    for i in range(reps):
        st = new_tracked_state(cfg, 1)
        run_to(st, n_steps, rng)
        urn_first[i] = st.tracked[0]
    graph_first = np.empty(reps)
    for i in range(reps):
        g = new_graph_state(cfg)
        run_graph(g, cfg, n_steps, rng)
        graph_first[i] = g.weights[0]
    se = math.hypot(
        urn_first.std(ddof=1) / math.sqrt(reps), graph_first.std(ddof=1) / math.sqrt(reps)
    )
    assert abs(urn_first.mean() - graph_first.mean()) <= 3 * se


def test_divergence_of_first_vertex_weight():
    """Median weight of a fixed vertex increases along n = 100, 1000, 10000."""
    from patails.engine import replicate_prefix_vectors

    cfg = ModelConfig(l=1, beta=1.0, loop_mode=LoopMode.MODEL1)
    medians = []
    for n in (100, 1000, 10_000):
        vecs = replicate_prefix_vectors(
            cfg, 1, np.full(1000, n), np.arange(1000), seed=1000 + n
        )
        medians.append(float(np.median(vecs[:, 0])))
    assert medians[0] < medians[1] < medians[2]


def test_edge_list_collection():
    cfg = ModelConfig(l=2, beta=1.0, loop_mode=LoopMode.MODEL0, initial=(2.0,))
    g = new_graph_state(cfg, keep_edges=True)
    run_graph(g, cfg, 3, rngmod.utility_stream(1, tag=50))
    assert len(g.edges) == 6  # l edges per step
    sources = [s for s, _ in g.edges]
    assert sources == [2, 2, 3, 3, 4, 4]
    assert all(1 <= t < s for s, t in g.edges)  # MODEL0: no loops
