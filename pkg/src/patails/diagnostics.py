"""Named invariant suite with machine-readable pass/fail results.

Each check returns ``{"check": name, "passed": bool, "detail": ...}``;
``run_suite`` collects them.  Sizes are chosen so the quick suite runs in
well under a minute; ``quick=False`` scales the statistical checks up.
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from . import rng as rngmod
from .analytics import martingale_value
from .config import LoopMode, ModelConfig
from .engine import prefix_ensemble, replicate_prefix_vectors
from .spectral import spectral_params, stick_break_sample
from .stopping import StoppingLaw, sample_N_batch, tail_prob_power
from .urn import (
    TrackedUrnState,
    collapse_to_tracked,
    graph_step_distribution,
    new_tracked_state,
    new_urn_state,
    run_to,
    urn_step,
    urn_transition_distribution,
)


def _result(name, passed, **detail):
    return {"check": name, "passed": bool(passed), "detail": detail}


def check_total_mass(cfg: ModelConfig, seed: int, n_draws: int = 3000):
    rng = rngmod.utility_stream(seed, tag=11)
    st = new_urn_state(cfg)
    worst = 0.0
    for _ in range(n_draws):
        urn_step(st, rng)
        worst = max(worst, abs(sum(st.counts) - cfg.total_mass(st.m)))
    return _result("total_mass_identity", worst <= 1e-9, worst=worst, draws=n_draws)


def check_duality(cfg: ModelConfig, seed: int):
    """One growth step enumerated in both views must agree colourwise."""
    rng = rngmod.utility_stream(seed, tag=12)
    st = new_urn_state(cfg)
    run_to(st, 2, rng)
    weights = list(st.counts[: cfg.n_initial + 2])
    graph_dist = graph_step_distribution(weights, cfg)
    urn_dist = urn_transition_distribution(st.counts, st.m, cfg, cfg.l)
    n_compare = len(weights) + 1
    folded: dict = {}
    for counts, p in urn_dist.items():
        folded_key = tuple(counts[:n_compare])
        folded[folded_key] = folded.get(folded_key, 0.0) + p
    worst = 0.0
    for key in set(folded) | set(graph_dist):
        worst = max(worst, abs(folded.get(key, 0.0) - graph_dist.get(key, 0.0)))
    return _result("graph_urn_duality", worst <= 1e-12, worst=worst)


def check_martingale_step(cfg: ModelConfig, seed: int, n_states: int = 10):
    rng = rngmod.utility_stream(seed, tag=13)
    worst = 0.0
    for _ in range(n_states):
        st = new_urn_state(cfg)
        n_now = int(rng.integers(max(3 - cfg.s, 0) + 1, 6))
        run_to(st, n_now, rng)
        r = int(rng.integers(1, min(len(st.counts), 3) + 1))
        k_vec = rng.integers(0, 3, size=r).astype(float)
        if k_vec.sum() == 0:
            k_vec[0] = 1.0
        current = martingale_value(st.counts[:r], n_now, k_vec, cfg)
        nxt = urn_transition_distribution(st.counts, st.m, cfg, cfg.l)
        expected = sum(
            p * martingale_value(counts[:r], n_now + 1, k_vec, cfg)
            for counts, p in nxt.items()
        )
        worst = max(worst, abs(expected / current - 1.0))
    return _result("martingale_one_step", worst <= 1e-10, worst_rel=worst)


def check_tracked_equivalence(cfg: ModelConfig, seed: int, n_samples: int = 4000):
    """Single-draw category frequencies, full urn vs tracked projection."""
    from .urn import UrnState

    rng = rngmod.utility_stream(seed, tag=14)
    base = new_urn_state(cfg)
    run_to(base, 6, rng)
    r = min(3, len(base.counts) - 1)
    base_tracked = collapse_to_tracked(base, r)
    ref_full = np.array(base.counts)
    ref_tr = np.append(base_tracked.tracked, base_tracked.tail_mass)
    counts = np.zeros((2, r + 1), dtype=int)
    for _ in range(n_samples):
        st = UrnState(counts=list(base.counts), m=base.m, cfg=cfg)
        urn_step(st, rng)
        # the drawn colour gained exactly 1; immigration only appends
        diffs = np.array(st.counts[: len(ref_full)]) - ref_full
        hit = int(np.argmax(diffs > 0.5))
        counts[0, min(hit, r)] += 1

        tr = TrackedUrnState(
            tracked=base_tracked.tracked.copy(),
            tail_mass=base_tracked.tail_mass,
            m=base_tracked.m,
            r=r,
            cfg=cfg,
        )
        urn_step(tr, rng)
        diffs = np.append(tr.tracked, tr.tail_mass) - ref_tr
        counts[1, int(np.argmax(diffs > 0.5))] += 1
    chi2, p, _, _ = stats.chi2_contingency(counts)
    return _result("tracked_kernel_equivalence", p > 0.01, p_value=float(p))


def check_stopping_tail(law: StoppingLaw, seed: int, n: int = 200_000):
    u = rngmod.utility_stream(seed, tag=15).random(n)
    sample = sample_N_batch(law, u)
    worst = 0.0
    for k in (2, 10, 25):
        target = float(k) ** (-law.alpha)
        freq = float((sample >= k).mean())
        se = max(np.sqrt(target * (1 - target) / n), 1e-12)
        worst = max(worst, abs(freq - target) / se)
    return _result("stopping_tail_consistency", worst <= 4.0, worst_z=worst, n=n)


def check_tail_ratio(cfg: ModelConfig, law: StoppingLaw):
    idx = law.alpha * (cfg.l + cfg.beta) / cfg.l
    worst = 0.0
    t = 1e5
    for lam in (2.0, 5.0, 10.0):
        ratio = tail_prob_power(law, lam * t, cfg.l, cfg.beta) / tail_prob_power(
            law, t, cfg.l, cfg.beta
        )
        worst = max(worst, abs(ratio / lam**-idx - 1.0))
    return _result("tail_regular_variation", worst <= 0.01, worst_rel=worst, index=idx)


def check_stickbreak_simplex(cfg: ModelConfig, seed: int, n: int = 100_000):
    if cfg.beta <= 0:
        return _result("stickbreak_simplex", True, skipped="beta=0")
    params = spectral_params(4, cfg)
    pts = stick_break_sample(params, rngmod.utility_stream(seed, tag=16), size=n)
    sum_err = float(np.abs(pts.sum(axis=1) - 1.0).max())
    return _result(
        "stickbreak_simplex",
        sum_err <= 1e-12 and bool((pts >= 0).all()),
        max_sum_error=sum_err,
    )


def check_engine_equivalence(cfg: ModelConfig, seed: int, reps: int = 4000):
    """Joint law of the engine's vectors vs the per-draw reference."""
    r, horizon = 3, 5
    fast = prefix_ensemble(cfg, r, horizon, reps, seed=seed)
    rng = rngmod.utility_stream(seed, tag=17)
    ref = np.empty((reps, r))
    for i in range(reps):
        st = new_tracked_state(cfg, r)
        run_to(st, horizon, rng)
        ref[i] = st.tracked
    from collections import Counter

    cf = Counter(map(tuple, np.round(fast, 6)))
    cr = Counter(map(tuple, np.round(ref, 6)))
    keys = sorted(set(cf) | set(cr))
    f = np.array([cf.get(k, 0) for k in keys], float)
    g = np.array([cr.get(k, 0) for k in keys], float)
    pool = (f + g) >= 10
    f2 = np.append(f[pool], f[~pool].sum())
    g2 = np.append(g[pool], g[~pool].sum())
    keep = (f2 + g2) > 0
    chi2, p, _, _ = stats.chi2_contingency(np.vstack([f2[keep], g2[keep]]))
    return _result("engine_reference_equivalence", p > 0.001, p_value=p)


def check_divergence(cfg: ModelConfig, seed: int, runs: int = 400):
    """Median weight of the first vertex grows along n = 100, 1000, 10000."""
    if cfg.beta <= 0:
        return _result("weight_divergence", True, skipped="beta=0")
    medians = []
    for n in (100, 1000, 10_000):
        vecs = replicate_prefix_vectors(
            cfg, 1, np.full(runs, n), np.arange(runs), splitmix_seed(seed, n)
        )
        medians.append(float(np.median(vecs[:, 0])))
    ok = medians[0] < medians[1] < medians[2]
    return _result("weight_divergence", ok, medians=medians)


def splitmix_seed(seed: int, salt: int) -> int:
    return rngmod.splitmix64((seed << 8) ^ salt)


def run_suite(cfg: ModelConfig, law: StoppingLaw, seed: int = 0, quick: bool = True):
    scale = 1 if quick else 5
    checks = [
        check_total_mass(cfg, seed),
        check_duality(cfg, seed),
        check_martingale_step(cfg, seed) if cfg.beta > 0 else _result("martingale_one_step", True, skipped="beta=0"),
        check_tracked_equivalence(cfg, seed, n_samples=4000 * scale),
        check_stopping_tail(law, seed, n=200_000 * scale),
        check_tail_ratio(cfg, law),
        check_stickbreak_simplex(cfg, seed, n=100_000 * scale),
        check_engine_equivalence(cfg, seed, reps=4000 * scale),
        check_divergence(cfg, seed, runs=400 * scale),
    ]
    return checks
