"""Extreme-event probabilities: tail x moment x spectral factorisation
versus direct Monte Carlo.

For the event "combined weight of the oldest ``r`` vertices exceeds ``t``
and their proportions lie in a sphere region A*", the probability at large
``t`` factorises into

    P(N^(l/(l+beta)) > t) * E[(zeta_1+...+zeta_r)^(alpha (l+beta)/l)] * S(A*)

with ``S`` the spectral law of the proportions.  ``breiman_approx``
evaluates the right-hand side in closed form (spectral factor by quadrature
or stick-breaking Monte Carlo); ``empirical_extreme_prob`` estimates the
left-hand side by replication.
"""

from __future__ import annotations

import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .analytics import sum_moment
from .config import ConfigError, ModelConfig
from .engine import replicate_prefix_vectors
from .spectral import SphereEvent, spectral_params, spectral_prob
from .stopping import StoppingLaw, sample_N_batch, tail_prob_power

_N_STREAM_TAG = 3


@dataclass(frozen=True)
class ExtremeEventSpec:
    """Threshold event on the first ``r`` vertices, l1 norm throughout.

    The event is {sum of weights > t} intersected with {proportion vector
    in ``sphere_event``}; the norm comparison is strict.
    """

    r: int
    t: float
    sphere_event: SphereEvent

    def __post_init__(self):
        if self.r < 1:
            raise ConfigError(f"event needs r >= 1, got {self.r}")
        if self.t < 0:
            raise ConfigError(f"event needs t >= 0, got {self.t}")


@dataclass(frozen=True)
class ApproximationReport:
    """Factorised approximation; approx_prob is the product of the factors."""

    approx_prob: float
    tail_factor: float
    moment_factor: float
    spectral_factor: float
    spectral_se: float


@dataclass(frozen=True)
class EmpiricalEstimate:
    value: float
    ci_low: float
    ci_high: float
    hits: int
    reps: int

    @property
    def se(self) -> float:
        return math.sqrt(max(self.value * (1.0 - self.value), 0.0) / self.reps)


def index_of(cfg: ModelConfig, law: StoppingLaw) -> float:
    """Regular-variation index alpha*(l+beta)/l of the observed weight vector
    (the same index governs the offset-free in-degrees and the maximum
    degree)."""
    return law.alpha * (cfg.l + cfg.beta) / cfg.l


def breiman_approx(
    event: ExtremeEventSpec,
    cfg: ModelConfig,
    law: StoppingLaw,
    spectral_method: str = "quadrature",
    n_samples: int = 1_000_000,
    seed: int = 0,
) -> ApproximationReport:
    """Closed-form approximation of the extreme-event probability."""
    cfg.require_positive_beta("breiman_approx")
    if event.t < 1.0:
        raise ConfigError("the approximation needs t >= 1")
    tail = tail_prob_power(law, event.t, cfg.l, cfg.beta)
    moment = sum_moment(event.r, index_of(cfg, law), cfg)
    params = spectral_params(event.r, cfg)
    rng = rngmod.utility_stream(seed, tag=7) if spectral_method == "mc" else None
    est = spectral_prob(
        event.sphere_event, params, method=spectral_method, n_samples=n_samples, rng=rng
    )
    return ApproximationReport(
        approx_prob=tail * moment * est.value,
        tail_factor=tail,
        moment_factor=moment,
        spectral_factor=est.value,
        spectral_se=est.se,
    )


def wilson_interval(hits: int, n: int, z: float = 1.959963984540054) -> tuple:
    """95% Wilson score interval for a binomial proportion."""
    if n <= 0:
        raise ValueError("need n >= 1")
    p = hits / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))
    lo = 0.0 if hits == 0 else max(center - half, 0.0)
    hi = 1.0 if hits == n else min(center + half, 1.0)
    return lo, hi


def _chunk_hits(args) -> tuple:
    (cfg, law, event, seed, start, count) = args
    uniforms = rngmod.batch_uniforms(seed, _N_STREAM_TAG, start, count)
    horizons = sample_N_batch(law, uniforms)
    # a replication cannot reach the threshold unless the deterministic
    # total mass bound clears it: |D^r(N)|_1 <= z + N (l + beta)
    reachable = cfg.z + horizons * (cfg.l + cfg.beta) > event.t
    idx = np.nonzero(reachable)[0]
    if len(idx) == 0:
        return 0, count
    vectors = replicate_prefix_vectors(
        cfg, event.r, horizons[idx], start + idx, seed
    )
    norms = vectors.sum(axis=1)
    over = norms > event.t
    if not over.any():
        return 0, count
    props = vectors[over] / norms[over, None]
    return int(event.sphere_event.contains(props).sum()), count


def empirical_extreme_prob(
    event: ExtremeEventSpec,
    cfg: ModelConfig,
    law: StoppingLaw,
    reps: int,
    seed: int = 0,
    threads: int = 1,
    chunk: int = 1 << 15,
) -> EmpiricalEstimate:
    """Fraction of replications realising the extreme event, with Wilson CI.

    Replication ``i`` draws its observation time from a batch stream keyed
    by absolute index and simulates with streams keyed by ``(seed, i)``, so
    the estimate is identical for any ``threads``/``chunk`` setting.
    """
    if reps < 1:
        raise ConfigError("need reps >= 1")
    tasks = [
        (cfg, law, event, seed, start, min(chunk, reps - start))
        for start in range(0, reps, chunk)
    ]
    hits = 0
    if threads > 1 and len(tasks) > 1:
        # spawn: the compiled kernels' thread pools do not survive a fork
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as pool:
            for h, _ in pool.map(_chunk_hits, tasks):
                hits += h
    else:
        for task in tasks:
            h, _ = _chunk_hits(task)
            hits += h
    lo, hi = wilson_interval(hits, reps)
    return EmpiricalEstimate(value=hits / reps, ci_low=lo, ci_high=hi, hits=hits, reps=reps)
