"""Spectral measure of the weight vector given a large total.

Conditionally on the combined weight of the oldest ``r`` vertices being
large, their proportions follow (a) a mixture of Dirichlet laws indexed by
the urn composition at the deterministic time the ``r``-th colour appears,
or equivalently (b), after reversing the coordinate order, a generalised
Dirichlet law built from independent Beta stick-breaking fractions.  Both
routes are implemented, along with event probabilities on the simplex by
stick-breaking Monte Carlo or adaptive quadrature (``r <= 4``).

Ordering convention: :class:`GenDirichlet` describes the *reversed* vector
(youngest tracked vertex first).  All :class:`SphereEvent` predicates and
every point returned with ``order="forward"`` use the natural order
(oldest vertex first).  The ``order`` flag on the sampler maps between the
two; mixing them up is the classic index bug here, hence the explicit flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import betainc, betaln

from .config import ConfigError, ModelConfig


class SpectralError(ValueError):
    """Raised for invalid spectral parameters or unsupported evaluations."""


# --------------------------------------------------------------------------
# parameterisation


@dataclass(frozen=True)
class GenDirichlet:
    """Generalised Dirichlet parameters in stick-breaking (break) order.

    ``breaks[j] = (a, b)`` is the Beta law of the ``j``-th broken fraction;
    for the spectral law of an ``r``-vector there are ``r - 1`` breaks and
    ``breaks[0]`` belongs to the youngest tracked vertex.
    """

    breaks: tuple
    r: int

    def __post_init__(self):
        object.__setattr__(
            self, "breaks", tuple((float(a), float(b)) for a, b in self.breaks)
        )
        if self.r < 2:
            raise SpectralError(f"generalised Dirichlet needs r >= 2, got {self.r}")
        if len(self.breaks) != self.r - 1:
            raise SpectralError(
                f"need {self.r - 1} break pairs for r={self.r}, got {len(self.breaks)}"
            )
        if any(a <= 0 or b <= 0 for a, b in self.breaks):
            raise SpectralError("all Beta parameters must be positive")

    def pair_for(self, k: int) -> tuple:
        """(a_k, b_k) of the break fraction belonging to vertex ``k`` (2..r)."""
        if not 2 <= k <= self.r:
            raise SpectralError(f"k must lie in [2, {self.r}], got {k}")
        return self.breaks[self.r - k]

    @classmethod
    def from_dirichlet(cls, alphas) -> "GenDirichlet":
        """Embed a standard Dirichlet(alphas) as a stick-breaking law."""
        alphas = [float(a) for a in alphas]
        r = len(alphas)
        breaks = [(alphas[k - 1], sum(alphas[: k - 1])) for k in range(r, 1, -1)]
        return cls(breaks=tuple(breaks), r=r)


def spectral_params(r: int, cfg: ModelConfig) -> GenDirichlet:
    """Stick-breaking parameters of the spectral law for the first ``r`` vertices.

    The fraction belonging to vertex ``k`` is Beta(a_k, b_k) with
    ``(a_k, b_k) = (C_k(0), sum_{i<k} C_i(0))`` while ``k`` is an initial
    colour, and ``(beta, z + (l+beta)(k-1-s) + l)`` for later colours, where
    ``z`` is the initial urn mass and ``s`` the initial colour count.
    """
    cfg.require_positive_beta("spectral_params")
    if r < 2:
        raise SpectralError(f"spectral_params needs r >= 2, got {r}")
    urn0 = cfg.urn_initial()
    s, z = cfg.s, cfg.z
    pairs = {}
    for k in range(2, r + 1):
        if k <= s:
            a, b = urn0[k - 1], float(sum(urn0[: k - 1]))
        else:
            a, b = cfg.beta, z + (cfg.l + cfg.beta) * (k - 1 - s) + cfg.l
        if a <= 0 or b <= 0:
            raise SpectralError(
                f"vertex {k} yields a degenerate Beta({a}, {b}); "
                "initial weights must be positive for the spectral law"
            )
        pairs[k] = (a, b)
    breaks = tuple(pairs[k] for k in range(r, 1, -1))
    return GenDirichlet(breaks=breaks, r=r)


# --------------------------------------------------------------------------
# sampling and density


def stick_break_sample(
    params: GenDirichlet,
    rng: np.random.Generator,
    size: int | None = None,
    order: str = "reversed",
) -> np.ndarray:
    """Sample points on the simplex by breaking independent Beta fractions.

    Returns shape ``(size, r)`` (or ``(r,)`` when ``size`` is None).  With
    ``order="reversed"`` coordinates follow the distribution's own order
    (youngest vertex first); ``order="forward"`` flips to oldest-first.
    """
    n = 1 if size is None else int(size)
    r = params.r
    out = np.empty((n, r))
    rem = np.ones(n)
    for j, (a, b) in enumerate(params.breaks):
        frac = rng.beta(a, b, n)
        out[:, j] = rem * frac
        rem = rem * (1.0 - frac)
    out[:, r - 1] = rem  # the first vertex's fraction is what is left
    if order == "forward":
        out = out[:, ::-1]
    elif order != "reversed":
        raise SpectralError(f"order must be 'forward' or 'reversed', got {order!r}")
    return out[0] if size is None else out


def gen_dirichlet_density(y, params: GenDirichlet) -> float:
    """Density of the generalised Dirichlet at ``y`` (distribution order).

    ``y`` must have ``r`` coordinates; points outside the simplex get 0.
    Boundary points are treated as limits: a zero coordinate with a
    positive power gives 0, with a negative power +inf.
    """
    y = np.asarray(y, dtype=float)
    r = params.r
    if y.shape != (r,):
        raise SpectralError(f"point must have {r} coordinates, got shape {y.shape}")
    if np.any(y < -1e-12) or abs(float(y.sum()) - 1.0) > 1e-9:
        return 0.0
    y = np.clip(y, 0.0, None)

    # exponent per coordinate y_i and per tail sum T_i = y_i + ... + y_r
    coord_pow = np.zeros(r)
    tail_pow = np.zeros(r)
    log_norm = 0.0
    for i, (a, b) in enumerate(params.breaks, start=1):
        log_norm -= betaln(a, b)
        coord_pow[i - 1] = a - 1.0
        if i >= 2:
            prev_b = params.breaks[i - 2][1]
            tail_pow[i - 1] = prev_b - (a + b)
    coord_pow[r - 1] = params.breaks[-1][1] - 1.0  # b_{r-1} - 1 on the last coordinate

    tails = np.cumsum(y[::-1])[::-1]
    log_val = log_norm
    for i in range(r):
        for base, power in ((y[i], coord_pow[i]), (tails[i], tail_pow[i])):
            if power == 0.0:
                continue
            if base <= 0.0:
                if power > 0:
                    return 0.0
                return math.inf
            log_val += power * math.log(base)
    return math.exp(log_val)


# --------------------------------------------------------------------------
# mixture representation


@dataclass(frozen=True)
class DirichletMixture:
    """Mixture of Dirichlet laws: ``weights[i]`` with parameters ``components[i]``."""

    weights: np.ndarray
    components: np.ndarray
    r: int

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Forward-order simplex points from the mixture."""
        picks = rng.choice(len(self.weights), size=size, p=self.weights)
        out = np.empty((size, self.r))
        for idx in np.unique(picks):
            rows = picks == idx
            out[rows] = rng.dirichlet(self.components[idx], size=int(rows.sum()))
        return out


def dirichlet_mixture(r: int, cfg: ModelConfig, cap: int = 1_000_000) -> DirichletMixture:
    """Exact mixture representation of the spectral law (forward order).

    Enumerates the composition distribution of the first ``r`` colours at the
    deterministic time the ``r``-th colour enters the urn, by forward
    recursion over all draw outcomes; each composition ``c`` contributes a
    Dirichlet(c) component.  Raises when more than ``cap`` compositions
    would be tracked; use the stick-breaking sampler in that regime.
    """
    cfg.require_positive_beta("dirichlet_mixture")
    if r < 1:
        raise SpectralError(f"dirichlet_mixture needs r >= 1, got {r}")
    urn0 = cfg.urn_initial()
    s, l, beta = cfg.s, cfg.l, cfg.beta
    if any(w <= 0 for w in urn0[: min(r, s)]):
        raise SpectralError("zero-mass initial colours have no Dirichlet component")
    if r <= s:
        comp = np.array(urn0[:r], dtype=float)
        return DirichletMixture(np.array([1.0]), comp[None, :], r)

    n_draws = l * (r - s)
    states = {tuple(float(w) for w in urn0): 1.0}
    for m in range(n_draws):
        total = cfg.total_mass(m)
        nxt: dict = {}
        for counts, prob in states.items():
            for k, c_k in enumerate(counts):
                if c_k == 0.0:
                    continue
                new = list(counts)
                new[k] = round(c_k + 1.0, 9)
                if (m + 1) % l == 0:
                    key = tuple(new) + (beta,)
                else:
                    key = tuple(new)
                nxt[key] = nxt.get(key, 0.0) + prob * (c_k / total)
        states = nxt
        if len(states) > cap:
            raise SpectralError(
                f"mixture enumeration exceeded {cap} compositions; "
                "use stick-breaking Monte Carlo instead"
            )
    weights = np.array(list(states.values()))
    components = np.array([list(k) for k in states], dtype=float)
    order = np.argsort(-weights, kind="stable")
    return DirichletMixture(weights[order], components[order], r)


# --------------------------------------------------------------------------
# sphere events


class SphereEvent:
    """A measurable region of the l1-sphere, as a predicate on proportions.

    Predicates act on forward-order points (oldest vertex first).  Built-in
    events also know how to integrate the stick-breaking density over
    themselves; custom subclasses only need :meth:`contains` and then
    support the Monte Carlo method.
    """

    name = "custom"

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask for an ``(n, r)`` array of forward-order points."""
        raise NotImplementedError

    def quad_prob(self, params: GenDirichlet) -> tuple:
        """(probability, error bound) by quadrature; built-ins only."""
        raise SpectralError(
            f"quadrature is not implemented for event {self.name!r}; use method='mc'"
        )


class FullSphere(SphereEvent):
    """The whole sphere; probability one."""

    name = "full"

    def contains(self, points):
        points = np.atleast_2d(points)
        return np.ones(len(points), dtype=bool)

    def quad_prob(self, params):
        return 1.0, 0.0


class DescendingOrder(SphereEvent):
    """Proportions in weakly descending order: x_1 >= x_2 >= ... >= x_r."""

    name = "descending"

    def contains(self, points):
        points = np.atleast_2d(points)
        return np.all(points[:, :-1] >= points[:, 1:], axis=1)

    def quad_prob(self, params):
        return _descending_quad(params)


class CoordinateThreshold(SphereEvent):
    """Proportion of vertex ``i`` (1-based) at least ``c``: x_i >= c."""

    def __init__(self, i: int, c: float):
        if i < 1:
            raise SpectralError(f"coordinate index must be >= 1, got {i}")
        self.i = int(i)
        self.c = float(c)

    @property
    def name(self):
        return f"coord:{self.i}:{self.c:g}"

    def contains(self, points):
        points = np.atleast_2d(points)
        if self.i > points.shape[1]:
            raise SpectralError(
                f"event tests coordinate {self.i} but points have {points.shape[1]}"
            )
        return points[:, self.i - 1] >= self.c

    def quad_prob(self, params):
        return _coordinate_quad(params, self.i, self.c)


# --------------------------------------------------------------------------
# quadrature over the stick-breaking cube
#
# With u_k the break fraction of vertex k (independent Beta(a_k, b_k),
# u_1 = 1), the forward proportions are x_k = u_k * prod_{j>k} (1 - u_j).
# Events are integrated over (u_2, ..., u_r); u_2 is always handled
# analytically through the Beta cdf, which leaves at most a 2-d adaptive
# integral for r <= 4 and keeps every integrand smooth.

_QUAD_OPTS = dict(epsabs=1e-11, epsrel=1e-11, limit=200)


def _beta_logpdf(u, a, b):
    return (a - 1.0) * np.log(u) + (b - 1.0) * np.log1p(-u) - betaln(a, b)


def _beta_pdf(u, a, b):
    if u <= 0.0 or u >= 1.0:
        return 0.0
    return math.exp(_beta_logpdf(u, a, b))


def _beta_cdf(x, a, b):
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    return float(betainc(a, b, x))


def _descending_quad(params: GenDirichlet) -> tuple:
    r = params.r
    if r > 4:
        raise SpectralError("quadrature supports r <= 4; use method='mc'")
    a2, b2 = params.pair_for(2)
    # x_1 >= x_2 pins u_2 <= 1/2; x_2 >= x_3 pins u_2 >= u_3/(1-u_3);
    # x_3 >= x_4 pins u_4 <= u_3/(1+u_3)
    if r == 2:
        return _beta_cdf(0.5, a2, b2), 1e-15
    a3, b3 = params.pair_for(3)

    def weight2(u3):
        lo = u3 / (1.0 - u3)
        if lo >= 0.5:
            return 0.0
        return _beta_cdf(0.5, a2, b2) - _beta_cdf(lo, a2, b2)

    if r == 3:
        val, err = integrate.quad(
            lambda u3: _beta_pdf(u3, a3, b3) * weight2(u3), 0.0, 1.0 / 3.0, **_QUAD_OPTS
        )
        return val, err
    a4, b4 = params.pair_for(4)
    val, err = integrate.quad(
        lambda u3: _beta_pdf(u3, a3, b3)
        * weight2(u3)
        * _beta_cdf(u3 / (1.0 + u3), a4, b4),
        0.0,
        1.0 / 3.0,
        **_QUAD_OPTS,
    )
    return val, err


def _coordinate_quad(params: GenDirichlet, i: int, c: float) -> tuple:
    r = params.r
    if r > 4:
        raise SpectralError("quadrature supports r <= 4; use method='mc'")
    if i > r:
        raise SpectralError(f"event coordinate {i} exceeds dimension {r}")
    if c <= 0.0:
        return 1.0, 0.0
    if c >= 1.0:
        return 0.0, 0.0
    pair = {k: params.pair_for(k) for k in range(2, r + 1)}

    def cdf(k, x):
        return _beta_cdf(x, *pair[k])

    def pdf(k, u):
        return _beta_pdf(u, *pair[k])

    if r == 2:
        if i == 1:  # x_1 = 1 - u_2 >= c
            return cdf(2, 1.0 - c), 1e-15
        return 1.0 - cdf(2, c), 1e-15

    if r == 3:
        if i == 3:  # x_3 = u_3
            return 1.0 - cdf(3, c), 1e-15
        if i == 2:  # x_2 = u_2 (1 - u_3)
            f = lambda u3: pdf(3, u3) * (1.0 - cdf(2, c / (1.0 - u3)))
        else:  # x_1 = (1 - u_2)(1 - u_3)
            f = lambda u3: pdf(3, u3) * cdf(2, 1.0 - c / (1.0 - u3))
        val, err = integrate.quad(f, 0.0, 1.0 - c, **_QUAD_OPTS)
        return val, err

    # r == 4
    if i == 4:  # x_4 = u_4
        return 1.0 - cdf(4, c), 1e-15
    if i == 3:  # x_3 = u_3 (1 - u_4)
        val, err = integrate.quad(
            lambda u4: pdf(4, u4) * (1.0 - cdf(3, c / (1.0 - u4))),
            0.0,
            1.0 - c,
            **_QUAD_OPTS,
        )
        return val, err
    # x_2 = u_2 P and x_1 = (1 - u_2) P with P = (1 - u_3)(1 - u_4) > c
    if i == 2:
        inner = lambda u3, u4: 1.0 - cdf(2, c / ((1.0 - u3) * (1.0 - u4)))
    else:
        inner = lambda u3, u4: cdf(2, 1.0 - c / ((1.0 - u3) * (1.0 - u4)))
    val, err = integrate.dblquad(
        lambda u3, u4: pdf(3, u3) * pdf(4, u4) * inner(u3, u4),
        0.0,
        1.0 - c,
        0.0,
        lambda u4: 1.0 - c / (1.0 - u4),
        epsabs=1e-10,
        epsrel=1e-10,
    )
    return val, err


# --------------------------------------------------------------------------
# probability estimates


@dataclass(frozen=True)
class SpectralEstimate:
    value: float
    se: float
    method: str
    n_samples: int = 0


def spectral_prob(
    event: SphereEvent,
    params: GenDirichlet,
    method: str = "mc",
    n_samples: int = 1_000_000,
    rng: np.random.Generator | None = None,
) -> SpectralEstimate:
    """Probability that the spectral direction falls in ``event``.

    ``method="mc"`` draws stick-breaking samples and reports the binomial
    standard error; ``method="quadrature"`` integrates the Beta densities
    over the event (built-in events, ``r <= 4``) and reports the integrator
    error bound in ``se``.
    """
    if method in ("quad", "quadrature"):
        val, err = event.quad_prob(params)
        return SpectralEstimate(value=float(val), se=float(err), method="quadrature")
    if method != "mc":
        raise SpectralError(f"unknown method {method!r}; use 'mc' or 'quadrature'")
    if rng is None:
        raise SpectralError("method='mc' needs an rng")
    if n_samples < 1:
        raise SpectralError("n_samples must be >= 1")
    points = stick_break_sample(params, rng, size=n_samples, order="forward")
    hits = int(event.contains(points).sum())
    p = hits / n_samples
    se = math.sqrt(max(p * (1.0 - p), 0.0) / n_samples)
    return SpectralEstimate(value=p, se=se, method="mc", n_samples=n_samples)


def parse_event(text: str) -> SphereEvent:
    """Parse CLI event syntax: 'full', 'descending' or 'coord:i:c'."""
    if text == "full":
        return FullSphere()
    if text == "descending":
        return DescendingOrder()
    if text.startswith("coord:"):
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"bad event spec {text!r}; expected coord:i:c")
        try:
            return CoordinateThreshold(int(parts[1]), float(parts[2]))
        except ValueError as exc:
            raise ConfigError(f"bad event spec {text!r}: {exc}") from None
    raise ConfigError(f"unknown event {text!r}; use full, descending or coord:i:c")
