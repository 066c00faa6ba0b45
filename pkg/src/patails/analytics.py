"""Closed-form moment analytics for the rescaled weight limits.

For each vertex ``i`` the rescaled weight ``D_i(n) / n^(l/(l+beta))``
converges almost surely; write ``zeta_i`` for the limit.  The functions here
evaluate the martingale normaliser ``c(n, k)``, mixed moments
``E[prod zeta_i^{k_i}]`` and aggregate moments ``E[(zeta_1+...+zeta_r)^k]``
in closed form.  Everything is computed through log-gamma so that horizons
up to 1e8 draws and exponents up to ~5 stay inside float range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import ModelConfig


class DomainError(ValueError):
    """Raised when a gamma-ratio argument hits a pole or a precondition fails."""


def _is_nonpositive_int(x: float, tol: float = 1e-12) -> bool:
    return x <= tol and abs(x - round(x)) <= tol * max(1.0, abs(x))


def _lgamma_signed(x: float):
    """(log|Gamma(x)|, sign) with poles rejected."""
    if _is_nonpositive_int(x):
        raise DomainError(f"gamma pole at argument {x}")
    if x > 0:
        return math.lgamma(x), 1.0
    # reflection: Gamma(x) has sign (-1)^floor(x) for negative non-integer x
    sign = 1.0 if math.floor(x) % 2 == 0 else -1.0
    return math.lgamma(x), sign


def gen_binom(x: float, y: float) -> float:
    """Generalised binomial coefficient Gamma(x+1) / (Gamma(y+1) Gamma(x-y+1)).

    Defined for real ``x, y`` as long as none of ``x+1``, ``y+1``, ``x-y+1``
    is a non-positive integer.  Reduces to the integer binomial coefficient
    on integers and equals 1 whenever ``y = 0``.
    """
    num, s_num = _lgamma_signed(x + 1.0)
    d1, s1 = _lgamma_signed(y + 1.0)
    d2, s2 = _lgamma_signed(x - y + 1.0)
    return s_num * s1 * s2 * math.exp(num - d1 - d2)


def log_c_norm(n: int, k: float, cfg: ModelConfig) -> float:
    """log of the martingale normaliser ``c(n, k)``.

    ``c(n, k)`` is the product over the ``l`` within-step draw slots of
    gamma ratios in the variable ``n`` (graph time), chosen so that
    ``c(n+1, k)/c(n, k)`` equals the one-step growth factor
    ``prod_i (S_{nl+i} + k) / S_{nl+i}`` of the weight martingale, with
    ``c(n, k) ~ n^(k l/(l+beta))`` as ``n`` grows.
    """
    if n < 0:
        raise DomainError(f"c(n, k) needs n >= 0, got n={n}")
    if k < 0:
        raise DomainError(f"c(n, k) needs k >= 0, got k={k}")
    cfg.require_positive_beta("c(n, k)")
    l, beta, z = cfg.l, cfg.beta, cfg.z
    total = 0.0
    for i in range(l):
        total += math.lgamma((z + k + i) / (l + beta) + n)
        total -= math.lgamma((z + i) / (l + beta) + n)
    return total


def c_norm(n: int, k: float, cfg: ModelConfig) -> float:
    """The normalising sequence ``c(n, k)``; ``c(n, 0) = 1`` exactly."""
    if k == 0:
        return 1.0
    return math.exp(log_c_norm(n, k, cfg))


@dataclass(frozen=True)
class MomentSpec:
    """Exponent vector ``k`` (one entry per tracked vertex) plus the model."""

    k: tuple
    cfg: ModelConfig

    def __post_init__(self):
        object.__setattr__(self, "k", tuple(float(v) for v in self.k))
        if len(self.k) < 1:
            raise DomainError("moment spec needs at least one exponent")
        if any(v < 0 for v in self.k):
            raise DomainError("moment exponents must be non-negative")

    @property
    def r(self) -> int:
        return len(self.k)


def _log_binom_start(weight0: float, k_i: float):
    """(log value, zero?) of binom(weight0 + k_i - 1, k_i) for k_i > 0.

    A vertex starting with zero weight never gains mass, so its positive
    moments vanish; that surfaces here as a pole of Gamma(weight0) in the
    denominator and is returned as an exact zero.
    """
    if _is_nonpositive_int(weight0 + k_i) or _is_nonpositive_int(k_i + 1.0):
        raise DomainError(f"binomial pole at ({weight0 + k_i - 1}, {k_i})")
    if _is_nonpositive_int(weight0):
        return 0.0, True
    val = (
        math.lgamma(weight0 + k_i)
        - math.lgamma(k_i + 1.0)
        - math.lgamma(weight0)
    )
    return val, False


def mixed_moment(spec: MomentSpec) -> float:
    """E[prod_i zeta_i^{k_i}] for the first ``r`` vertices.

    Evaluates the closed product formula obtained by running the weight
    martingale back to the (deterministic) times at which each of the first
    ``r`` urn colours appeared.
    """
    cfg = spec.cfg
    cfg.require_positive_beta("mixed_moment")
    s, n0v = cfg.s, cfg.n_initial
    log_total = 0.0
    running = 0.0  # partial exponent sum k_1 + ... + k_{i-1}
    for i, k_i in enumerate(spec.k, start=1):
        if k_i == 0.0:
            continue
        n_i = max(i - s, 0)
        log_total += math.lgamma(k_i + 1.0)
        log_total += log_c_norm(n_i, running, cfg) if running > 0 else 0.0
        log_total -= log_c_norm(n_i, running + k_i, cfg)
        start_weight = cfg.initial[i - 1] if i <= n0v else cfg.beta
        log_b, is_zero = _log_binom_start(start_weight, k_i)
        if is_zero:
            return 0.0
        log_total += log_b
        running += k_i
    return math.exp(log_total)


def sum_moment(r: int, kappa: float, cfg: ModelConfig) -> float:
    """E[(zeta_1 + ... + zeta_r)^kappa] for real ``kappa >= 0``.

    The combined mass of the first ``r`` colours evolves exactly like a
    single tracked colour once all of them are present, which happens at
    the deterministic time ``l * max(r - s, 0)`` with deterministic combined
    mass.  The single-colour closed martingale then gives the moment in one
    gamma-ratio product; non-integer ``kappa`` is allowed.
    """
    if r < 1:
        raise DomainError(f"sum_moment needs r >= 1, got {r}")
    if kappa < 0:
        raise DomainError(f"sum_moment needs kappa >= 0, got {kappa}")
    cfg.require_positive_beta("sum_moment")
    if kappa == 0:
        return 1.0
    s = cfg.s
    urn0 = cfg.urn_initial()
    if r <= s:
        prefix0 = float(sum(urn0[:r]))
        n0 = 0
    else:
        prefix0 = cfg.z + (cfg.l + cfg.beta) * (r - s)
        n0 = r - s
    log_b, is_zero = _log_binom_start(prefix0, kappa)
    if is_zero:
        return 0.0
    return math.exp(math.lgamma(kappa + 1.0) + log_b - log_c_norm(n0, kappa, cfg))


def martingale_value(weights, n: int, k_vec, cfg: ModelConfig) -> float:
    """Value of the weight martingale at graph time ``n``.

    ``(1/c(n, k)) * prod_i binom(D_i(n) + k_i - 1, k_i)`` for the current
    weights of the first ``len(k_vec)`` vertices.  Constant in expectation
    across ``n``; the per-path values converge almost surely.
    """
    k_vec = [float(v) for v in k_vec]
    if len(weights) < len(k_vec):
        raise DomainError("need one weight per exponent")
    k = sum(k_vec)
    log_val = -log_c_norm(n, k, cfg) if k > 0 else 0.0
    for d, k_i in zip(weights, k_vec):
        if k_i == 0.0:
            continue
        log_b, is_zero = _log_binom_start(float(d), k_i)
        if is_zero:
            return 0.0
        log_val += log_b
    return math.exp(log_val)
