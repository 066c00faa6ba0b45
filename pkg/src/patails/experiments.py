"""Monte Carlo harness, convergence diagnostics, tail-index estimation and
Zipf-plot data extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .analytics import martingale_value
from .config import ConfigError, ModelConfig
from .engine import full_urn_weights, prefix_paths, replicate_prefix_vectors
from .stopping import StoppingLaw, sample_N_batch

_N_STREAM_TAG = 3  # shared with the extreme-probability runs


@dataclass(frozen=True)
class ReplicationRecord:
    """One Monte Carlo outcome: observation time, tracked weights, summaries."""

    seed: int
    index: int
    N: int
    weights: tuple
    norm1: float
    max_degree: float | None = None
    clamped: bool = False

    @property
    def seed_path(self) -> tuple:
        return (self.seed, self.index)


@dataclass(frozen=True)
class TrajectoryStat:
    """A per-checkpoint scalar along one simulated path."""

    checkpoints: tuple
    values: tuple

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.checkpoints, self.checkpoints[1:])):
            raise ConfigError("checkpoints must be strictly increasing")


def run_replications(
    cfg: ModelConfig,
    law: StoppingLaw,
    r: int,
    reps: int,
    seed: int = 0,
    full_degrees: bool = False,
    max_draws: int = 1 << 26,
    chunk: int = 4096,
):
    """Yield :class:`ReplicationRecord` in index order, deterministically.

    With ``full_degrees`` every vertex is simulated and the record carries
    the maximum weight; horizons whose draw count would exceed
    ``max_draws`` are clamped there (flagged on the record) to bound
    memory.  Without it only the tracked prefix is simulated.
    """
    if reps < 1:
        raise ConfigError("need reps >= 1")
    for start in range(0, reps, chunk):
        count = min(chunk, reps - start)
        uniforms = rngmod.batch_uniforms(seed, _N_STREAM_TAG, start, count)
        horizons = sample_N_batch(law, uniforms)
        if full_degrees:
            for k in range(count):
                n = int(horizons[k])
                clamped = n * cfg.l > max_draws
                n_run = min(n, max_draws // cfg.l)
                weights = full_urn_weights(cfg, n_run, seed, start + k)
                prefix = weights[:r] if len(weights) >= r else np.pad(
                    weights, (0, r - len(weights))
                )
                yield ReplicationRecord(
                    seed=seed,
                    index=start + k,
                    N=n,
                    weights=tuple(float(w) for w in prefix),
                    norm1=float(prefix.sum()),
                    max_degree=float(weights.max()),
                    clamped=clamped,
                )
        else:
            vectors = replicate_prefix_vectors(
                cfg, r, horizons, start + np.arange(count), seed
            )
            for k in range(count):
                yield ReplicationRecord(
                    seed=seed,
                    index=start + k,
                    N=int(horizons[k]),
                    weights=tuple(float(w) for w in vectors[k]),
                    norm1=float(vectors[k].sum()),
                )


def max_degree_sample(
    cfg: ModelConfig,
    law: StoppingLaw,
    reps: int,
    seed: int = 0,
    max_draws: int = 1 << 26,
) -> np.ndarray:
    """Maximum weight per replication (full simulation)."""
    out = np.empty(reps)
    for rec in run_replications(
        cfg, law, r=1, reps=reps, seed=seed, full_degrees=True, max_draws=max_draws
    ):
        out[rec.index] = rec.max_degree
    return out


def lp_trajectory(
    cfg: ModelConfig,
    p: float,
    checkpoints,
    seed: int = 0,
    index: int = 0,
    power: bool = False,
) -> TrajectoryStat:
    """lp norm of the rescaled full weight vector along checkpoints.

    ``power=True`` returns the p-th power of the norm instead (the quantity
    whose growth rate separates the convergent from the divergent regime);
    ``p=inf`` gives the rescaled maximum weight.
    """
    if not (p >= 1.0):
        raise ConfigError(f"need p >= 1, got {p}")
    ckpts = [int(c) for c in checkpoints]
    snapshots = full_urn_weights(cfg, ckpts[-1], seed, index, checkpoints=ckpts)
    expo = cfg.index_exponent()
    values = []
    for n, weights in zip(ckpts, snapshots):
        scaled = weights / float(n) ** expo
        if math.isinf(p):
            values.append(float(scaled.max()))
        elif power:
            values.append(float((scaled**p).sum()))
        else:
            values.append(float((scaled**p).sum() ** (1.0 / p)))
    return TrajectoryStat(checkpoints=tuple(ckpts), values=tuple(values))


def martingale_trajectory(
    cfg: ModelConfig, k_vec, checkpoints, seed: int = 0
) -> TrajectoryStat:
    """Weight-martingale values along one tracked-prefix path."""
    paths = martingale_ensemble(cfg, k_vec, checkpoints, reps=1, seed=seed)
    return TrajectoryStat(checkpoints=tuple(int(c) for c in checkpoints), values=tuple(paths[0]))


def martingale_ensemble(
    cfg: ModelConfig, k_vec, checkpoints, reps: int, seed: int = 0
) -> np.ndarray:
    """Matrix (reps, #checkpoints) of martingale values over independent paths."""
    k_vec = [float(v) for v in k_vec]
    ckpts = [int(c) for c in checkpoints]
    r = len(k_vec)
    paths = prefix_paths(cfg, r, ckpts, reps, seed)
    out = np.empty((reps, len(ckpts)))
    for i in range(reps):
        for j, n in enumerate(ckpts):
            out[i, j] = martingale_value(paths[i, j], n, k_vec, cfg)
    return out


def hill_estimate(sample, k_order: int) -> float:
    """Hill estimator of the tail index from the k_order largest points.

    Averages the log-excesses of the top ``k_order`` order statistics over
    the (k_order+1)-th and returns the reciprocal.  A flat top (all
    log-excesses zero) has no finite tail index and returns ``inf``.
    """
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ConfigError("need a 1-d sample with at least two points")
    if not (0 < k_order < len(x)):
        raise ConfigError(f"k_order must lie in (0, {len(x)}), got {k_order}")
    if (x <= 0).any():
        raise ConfigError("Hill estimation needs strictly positive samples")
    top = np.sort(x)[-(k_order + 1) :]
    xi = float(np.mean(np.log(top[1:]) - np.log(top[0])))
    if xi <= 0.0:
        return math.inf
    return 1.0 / xi


def default_k_order(n: int) -> int:
    """Bias/variance compromise for the Hill estimator: floor(n**0.6)."""
    return max(1, int(n**0.6))


def zipf_ranks(degrees) -> list:
    """(rank, degree) pairs, degrees sorted descending, ranks 1-based.

    Ties keep their input order (stable sort) so output is reproducible.
    """
    arr = list(degrees)
    order = sorted(range(len(arr)), key=lambda i: -arr[i])
    return [(rank + 1, arr[i]) for rank, i in enumerate(order)]


class EdgeListError(ValueError):
    """Malformed edge-list line; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def zipf_from_edgelist(path) -> list:
    """Ranked in-degrees from a two-column (source, target) edge list.

    Lines may be comma- or whitespace-separated; ``#`` starts a comment.
    The tally counts incoming edges per target node.
    """
    tallies: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.replace(",", " ").split()
            if len(parts) != 2:
                raise EdgeListError(lineno, f"expected two columns, got {len(parts)}")
            try:
                _, target = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListError(lineno, f"non-integer node id in {body!r}") from None
            tallies[target] = tallies.get(target, 0) + 1
    return zipf_ranks(list(tallies.values()))


def empirical_degree_pmf(cfg: ModelConfig, n: int, seed: int = 0, index: int = 0) -> dict:
    """Empirical in-degree distribution at time ``n``: share of vertices per
    in-degree value (weight minus offset)."""
    if n < 0:
        raise ConfigError("need n >= 0")
    if n == 0:
        weights = np.array(cfg.initial)
    else:
        weights = full_urn_weights(cfg, n, seed, index)
    degrees = weights - cfg.beta
    rounded = np.round(degrees)
    degrees = np.where(np.abs(degrees - rounded) < 1e-9, rounded, degrees)
    values, counts = np.unique(degrees, return_counts=True)
    total = counts.sum()
    return {
        (int(v) if float(v).is_integer() else float(v)): c / total
        for v, c in zip(values.tolist(), counts.tolist())
    }
