"""Model configuration shared by the graph and urn views of the dynamics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

try:  # stdlib from 3.11 on
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


class ConfigError(ValueError):
    """Raised for invalid model or run configuration values."""


class LoopMode(Enum):
    """Whether the new vertex is added before or after its edges attach.

    MODEL0: the new vertex joins the graph after its edges are placed, so it
    can never receive one of its own edges (no loops).
    MODEL1: the new vertex joins first, carrying weight ``beta``, and may
    receive its own edges (loops allowed).
    """

    MODEL0 = "model0"
    MODEL1 = "model1"

    @property
    def j(self) -> int:
        """Colour-count shift of the equivalent urn (0 or 1)."""
        return 0 if self is LoopMode.MODEL0 else 1


@dataclass(frozen=True)
class ModelConfig:
    """Parameters of the linear preferential attachment dynamics.

    Parameters
    ----------
    l : int
        Number of edges each new vertex creates (>= 1).
    beta : float
        Additive offset in the attachment weight ``D_k = indegree_k + beta``.
        Must be >= 0; the closed-form analytics additionally require
        ``beta > 0``.
    loop_mode : LoopMode
        Loop convention, see :class:`LoopMode`.
    initial : tuple of float, optional
        Initial vertex weights ``D_k(0)``.  Defaults to a single vertex with
        one self-loop, i.e. ``(1 + beta,)``.
    """

    l: int = 1
    beta: float = 1.0
    loop_mode: LoopMode = LoopMode.MODEL1
    initial: tuple = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.initial is None:
            object.__setattr__(self, "initial", (1.0 + self.beta,))
        else:
            object.__setattr__(self, "initial", tuple(float(w) for w in self.initial))
        if not isinstance(self.l, int) or self.l < 1:
            raise ConfigError(f"l must be a positive integer, got {self.l!r}")
        if self.beta < 0:
            raise ConfigError(f"beta must be non-negative, got {self.beta!r}")
        if len(self.initial) < 1:
            raise ConfigError("initial weights must contain at least one vertex")
        if any(w < 0 for w in self.initial):
            raise ConfigError("initial weights must be non-negative")
        if self.z <= 0:
            raise ConfigError(
                "the urn must start non-empty: sum(initial) + j*beta must be > 0"
            )

    @property
    def j(self) -> int:
        return self.loop_mode.j

    @property
    def n_initial(self) -> int:
        """Number of vertices in the initial graph, N(0)."""
        return len(self.initial)

    @property
    def s(self) -> int:
        """Number of initial urn colours, N(0) + j."""
        return self.n_initial + self.j

    @property
    def z(self) -> float:
        """Total initial urn mass, sum of initial weights plus j*beta."""
        return float(sum(self.initial)) + self.j * self.beta

    def urn_initial(self) -> tuple:
        """Initial per-colour masses of the equivalent urn."""
        if self.j == 1:
            return self.initial + (self.beta,)
        return self.initial

    def total_mass(self, m: int) -> float:
        """Deterministic total urn mass after ``m`` draws: z + m + beta*floor(m/l)."""
        return self.z + m + self.beta * (m // self.l)

    def index_exponent(self) -> float:
        """Growth exponent l/(l+beta) of the per-vertex weights."""
        return self.l / (self.l + self.beta)

    def require_positive_beta(self, what: str = "this computation"):
        """Analytics formulas assume a strictly positive offset."""
        if self.beta <= 0:
            raise ConfigError(f"{what} requires beta > 0, got beta={self.beta}")


def _from_mapping(data: dict) -> ModelConfig:
    known = {"l", "beta", "loop_mode", "initial_weights"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
    kwargs = {}
    if "l" in data:
        if not isinstance(data["l"], int) or isinstance(data["l"], bool):
            raise ConfigError(f"config key 'l' must be an integer, got {data['l']!r}")
        kwargs["l"] = data["l"]
    if "beta" in data:
        kwargs["beta"] = float(data["beta"])
    if "loop_mode" in data:
        try:
            kwargs["loop_mode"] = LoopMode(str(data["loop_mode"]).lower())
        except ValueError:
            raise ConfigError(
                f"config key 'loop_mode' must be 'model0' or 'model1', got {data['loop_mode']!r}"
            ) from None
    if "initial_weights" in data:
        kwargs["initial"] = tuple(float(w) for w in data["initial_weights"])
    return ModelConfig(**kwargs)


def load_model_config(path) -> ModelConfig:
    """Load a :class:`ModelConfig` from a TOML or JSON file.

    Recognised keys: ``l`` (int), ``beta`` (float), ``loop_mode``
    ("model0" | "model1"), ``initial_weights`` (array of floats).  A ``model``
    table/object may wrap them; top-level keys outside the model table are
    ignored here so run files can carry extra sections.
    """
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix.lower() == ".json":
        data = json.loads(raw.decode())
    else:
        data = tomllib.loads(raw.decode())
    if not isinstance(data, dict):
        raise ConfigError(f"config root in {path} must be a table/object")
    if "model" in data:
        section = data["model"]
    else:
        model_keys = {"l", "beta", "loop_mode", "initial_weights"}
        section = {k: v for k, v in data.items() if k in model_keys}
    return _from_mapping(section)
