"""Heavy-tailed observation times and exact tail functionals.

The network is observed after a random number ``N`` of growth steps.  The
shipped law is the floored Pareto: ``N = floor(Y)`` with ``Y`` Pareto(alpha)
on [1, inf), so that ``P(N >= k) = k^(-alpha)`` exactly for integer
``k >= 1``.  The enum leaves room for other integer-valued regularly varying
laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .config import ConfigError


class StoppingKind(Enum):
    FLOORED_PARETO = "floored_pareto"


@dataclass(frozen=True)
class StoppingLaw:
    alpha: float
    kind: StoppingKind = StoppingKind.FLOORED_PARETO

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError(f"stopping law needs alpha > 0, got {self.alpha}")
        if not isinstance(self.kind, StoppingKind):
            object.__setattr__(self, "kind", StoppingKind(self.kind))


def sample_N(law: StoppingLaw, rng: np.random.Generator) -> int:
    """One observation time: floor(U^(-1/alpha)) with U uniform on (0, 1]."""
    u = 1.0 - rng.random()  # (0, 1]
    return int(u ** (-1.0 / law.alpha))


def sample_N_batch(law: StoppingLaw, uniforms: np.ndarray) -> np.ndarray:
    """Vectorised observation times from uniforms in [0, 1)."""
    u = 1.0 - uniforms
    return np.floor(u ** (-1.0 / law.alpha)).astype(np.int64)


def _floor_stable(x: float) -> int:
    # t**((l+beta)/l) may land a hair below a mathematically exact integer;
    # snap within one part in 1e12 before flooring.
    r = round(x)
    if abs(x - r) <= 1e-12 * max(1.0, abs(x)):
        return int(r)
    return math.floor(x)


def survival(law: StoppingLaw, x: float) -> float:
    """P(N > x) for real ``x >= 0``, exact for the floored Pareto."""
    if x < 1.0:
        return 1.0
    return (_floor_stable(x) + 1.0) ** (-law.alpha)


def tail_prob_power(law: StoppingLaw, t: float, l: int, beta: float) -> float:
    """P(N^(l/(l+beta)) > t) = (floor(t^((l+beta)/l)) + 1)^(-alpha).

    This is the tail factor of the extreme-event approximation; the
    integer-floor correction is kept exact because the reference thresholds
    sit at moderate ``t`` where dropping it is visible.
    """
    if t < 1.0:
        raise ConfigError(f"tail_prob_power needs t >= 1, got {t}")
    return survival(law, t ** ((l + beta) / l))
