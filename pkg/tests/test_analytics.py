import math
from itertools import product

import mpmath
import numpy as np
import pytest

from conftest import assorted_configs
from patails import rng as rngmod
from patails.analytics import (
    DomainError,
    MomentSpec,
    c_norm,
    gen_binom,
    log_c_norm,
    martingale_value,
    mixed_moment,
    sum_moment,
)
from patails.config import LoopMode, ModelConfig
from patails.engine import prefix_ensemble
from patails.urn import new_urn_state, run_to, urn_transition_distribution


# ---------------------------------------------------------------- gen_binom


def test_gen_binom_choose_zero_is_one():
    for x in (0.0, 1.0, 2.5, 7.3, 100.0):
        assert gen_binom(x, 0.0) == pytest.approx(1.0, rel=1e-14)


def test_gen_binom_integer_cases():
    assert gen_binom(5, 2) == pytest.approx(10.0, rel=1e-12)
    assert gen_binom(6, 3) == pytest.approx(20.0, rel=1e-12)


def test_gen_binom_matches_high_precision_gamma():
    mpmath.mp.dps = 50
    rng = rngmod.utility_stream(1, tag=99)
    cases = [(2.5, 1.5)] + [
        (float(10 * rng.random()), float(5 * rng.random())) for _ in range(20)
    ]
    for x, y in cases:
        want = mpmath.gamma(x + 1) / (mpmath.gamma(y + 1) * mpmath.gamma(x - y + 1))
        assert gen_binom(x, y) == pytest.approx(float(want), rel=1e-12)


def test_gen_binom_pole_raises():
    with pytest.raises(DomainError):
        gen_binom(-1.0, 0.5)  # x + 1 = 0
    with pytest.raises(DomainError):
        gen_binom(2.0, 4.0)  # x - y + 1 = -1


# ------------------------------------------------------------------- c_norm


def test_c_norm_at_zero_exponent():
    cfg = ModelConfig(l=3, beta=1.0, loop_mode=LoopMode.MODEL0, initial=(1.0,))
    for n in (0, 1, 5, 1000):
        assert c_norm(n, 0.0, cfg) == 1.0


@pytest.mark.parametrize("cfg", assorted_configs())
def test_c_norm_one_step_recurrence(cfg):
    if cfg.beta <= 0:
        pytest.skip("analytics need beta > 0")
    for n in (0, 1, 4, 17):
        for k in (0.5, 1.0, 2.3):
            lhs = c_norm(n + 1, k, cfg) / c_norm(n, k, cfg)
            rhs = 1.0
            for i in range(cfg.l):
                total = cfg.total_mass(n * cfg.l + i)
                rhs *= (total + k) / total
            assert lhs == pytest.approx(rhs, rel=1e-12)


def test_c_norm_asymptotic_normalisation():
    # c(n, k) ~ n^(k l/(l+beta)); ratio within 1% at n = 1e6 for (l, beta, k) = (3, 1, 2)
    cfg = ModelConfig(l=3, beta=1.0, loop_mode=LoopMode.MODEL0, initial=(1.0,))
    n, k = 1_000_000, 2.0
    ratio = c_norm(n, k, cfg) / n ** (k * cfg.l / (cfg.l + cfg.beta))
    assert ratio == pytest.approx(1.0, abs=0.01)


def test_c_norm_domain_errors():
    cfg = ModelConfig(l=1, beta=1.0)
    with pytest.raises(DomainError):
        c_norm(-1, 1.0, cfg)
    with pytest.raises(DomainError):
        c_norm(1, -0.5, cfg)


# ------------------------------------------------------------- mixed_moment


def test_mixed_moment_all_zero_exponents_is_one():
    cfg = ModelConfig(l=2, beta=0.5, loop_mode=LoopMode.MODEL1)
    assert mixed_moment(MomentSpec(k=(0, 0, 0), cfg=cfg)) == 1.0


def test_mixed_moment_known_value_default_model():
    # First-vertex mean for the one-loop start at l = beta = 1: sqrt(pi)
    cfg = ModelConfig(l=1, beta=1.0, loop_mode=LoopMode.MODEL1)
    got = mixed_moment(MomentSpec(k=(1.0,), cfg=cfg))
    assert got == pytest.approx(math.sqrt(math.pi), rel=1e-12)


def test_mixed_moment_rejects_negative_exponent():
    cfg = ModelConfig(l=1, beta=1.0)
    with pytest.raises(DomainError):
        MomentSpec(k=(-1.0,), cfg=cfg)


def test_mixed_moment_zero_weight_vertex_kills_moment():
    cfg = ModelConfig(l=1, beta=1.0, loop_mode=LoopMode.MODEL0, initial=(1.0, 0.0))
    assert mixed_moment(MomentSpec(k=(0.0, 2.0), cfg=cfg)) == 0.0
    assert mixed_moment(MomentSpec(k=(1.0, 0.0), cfg=cfg)) > 0.0


# --------------------------------------------------------------- sum_moment


def test_sum_moment_trivia():
    cfg = ModelConfig(l=3, beta=1.0, loop_mode=LoopMode.MODEL0, initial=(2.0,))
    assert sum_moment(4, 0.0, cfg) == 1.0
    for kappa in (0.5, 1.0, 2.7):
        assert sum_moment(1, kappa, cfg) == pytest.approx(
            mixed_moment(MomentSpec(k=(kappa,), cfg=cfg)), rel=1e-12
        )


@pytest.mark.parametrize("cfg", assorted_configs())
def test_sum_moment_multinomial_identity(cfg):
    """Integer-power aggregate moments expand over mixed moments."""
    if cfg.beta <= 0:
        pytest.skip("analytics need beta > 0")
    for r in (2, 3):
        for kappa in (1, 2, 3):
            lhs = sum_moment(r, float(kappa), cfg)
            rhs = 0.0
            for ks in product(range(kappa + 1), repeat=r):
                if sum(ks) != kappa:
                    continue
                coeff = math.factorial(kappa)
                for k_i in ks:
                    coeff //= math.factorial(k_i)
                rhs += coeff * mixed_moment(MomentSpec(k=[float(v) for v in ks], cfg=cfg))
            assert lhs == pytest.approx(rhs, rel=1e-8)


# ------------------------------------------------- martingale and closure


def test_martingale_zero_exponents_constant_one():
    cfg = ModelConfig(l=2, beta=0.7, loop_mode=LoopMode.MODEL1)
    assert martingale_value([3.0, 1.0], 5, [0.0, 0.0], cfg) == 1.0


@pytest.mark.parametrize("cfg", assorted_configs())
def test_martingale_one_step_exactness(cfg):
    """Exact transition enumeration reproduces the current martingale value."""
    if cfg.beta <= 0:
        pytest.skip("analytics need beta > 0")
    rng = rngmod.utility_stream(3, tag=21)
    for trial in range(4):
        st = new_urn_state(cfg)
        n_now = max(3 - cfg.s, 0) + 1 + trial
        run_to(st, n_now, rng)
        r = min(3, len(st.counts))
        k_vec = [float(rng.integers(0, 3)) for _ in range(r)]
        if sum(k_vec) == 0:
            k_vec[0] = 1.5
        current = martingale_value(st.counts[:r], n_now, k_vec, cfg)
        nxt = urn_transition_distribution(st.counts, st.m, cfg, cfg.l)
        expected = sum(
            p * martingale_value(c[:r], n_now + 1, k_vec, cfg) for c, p in nxt.items()
        )
        assert expected == pytest.approx(current, rel=1e-10)


def test_closure_against_monte_carlo():
    """Rescaled weight products at several horizons stay on the closed value."""
    cfg = ModelConfig(l=1, beta=1.0, loop_mode=LoopMode.MODEL1)
    spec = MomentSpec(k=(1.0, 1.0), cfg=cfg)
    want = mixed_moment(spec)
    expo = cfg.l / (cfg.l + cfg.beta)
    reps = 40_000
    for n in (300, 3000):
        vecs = prefix_ensemble(cfg, 2, n, reps, seed=101 + n)
        stat = vecs[:, 0] * vecs[:, 1] / n ** (2 * expo)
        se = stat.std(ddof=1) / math.sqrt(reps)
        assert abs(stat.mean() - want) <= 3 * se


def test_prefix_total_moment_bounds():
    """E[prefix total^q] scaled by n^(-q l/(l+beta)) stays inside fixed bounds."""
    cfg = ModelConfig(l=2, beta=0.7, loop_mode=LoopMode.MODEL1, initial=(1.3,))
    expo = cfg.l / (cfg.l + cfg.beta)
    k = 3
    for q in (1, 2, 3):
        scaled = []
        for n in (100, 1000, 10_000):
            vecs = prefix_ensemble(cfg, k, n, 4000, seed=7 * n + q)
            scaled.append((vecs.sum(axis=1) ** q).mean() / n ** (q * expo))
        assert 0.05 < min(scaled) and max(scaled) < 100.0
        assert max(scaled) / min(scaled) < 3.0
