"""Simulation and closed-form analytics for the extremal behaviour of linear
preferential attachment networks observed at a heavy-tailed random time.

The package has three layers:

* exact per-draw simulators for the growth dynamics and the equivalent
  ball-urn process with colour immigration (:mod:`patails.urn`),
* closed-form analytics: martingale normalisers, mixed moments of the
  rescaled weight limits, generalized-Dirichlet spectral measures and the
  tail/moment/spectral factorisation of extreme-event probabilities
  (:mod:`patails.analytics`, :mod:`patails.spectral`,
  :mod:`patails.extremes`),
* a throughput-oriented Monte Carlo engine and experiment harness
  (:mod:`patails.engine`, :mod:`patails.experiments`) with a CLI front end
  (:mod:`patails.cli`).
"""

__version__ = "0.1.0"

from .config import LoopMode, ModelConfig, load_model_config
from .stopping import StoppingKind, StoppingLaw, sample_N, tail_prob_power
from .analytics import (
    MomentSpec,
    c_norm,
    gen_binom,
    martingale_value,
    mixed_moment,
    sum_moment,
)
from .spectral import (
    CoordinateThreshold,
    DescendingOrder,
    FullSphere,
    GenDirichlet,
    SphereEvent,
    dirichlet_mixture,
    gen_dirichlet_density,
    spectral_params,
    spectral_prob,
    stick_break_sample,
)
from .extremes import (
    ApproximationReport,
    EmpiricalEstimate,
    ExtremeEventSpec,
    breiman_approx,
    empirical_extreme_prob,
    index_of,
)
from .experiments import (
    ReplicationRecord,
    TrajectoryStat,
    empirical_degree_pmf,
    hill_estimate,
    lp_trajectory,
    martingale_trajectory,
    run_replications,
    zipf_from_edgelist,
    zipf_ranks,
)

__all__ = [
    "LoopMode",
    "ModelConfig",
    "load_model_config",
    "StoppingKind",
    "StoppingLaw",
    "sample_N",
    "tail_prob_power",
    "MomentSpec",
    "gen_binom",
    "c_norm",
    "mixed_moment",
    "sum_moment",
    "martingale_value",
    "GenDirichlet",
    "SphereEvent",
    "FullSphere",
    "DescendingOrder",
    "CoordinateThreshold",
    "spectral_params",
    "stick_break_sample",
    "gen_dirichlet_density",
    "dirichlet_mixture",
    "spectral_prob",
    "ExtremeEventSpec",
    "ApproximationReport",
    "EmpiricalEstimate",
    "index_of",
    "breiman_approx",
    "empirical_extreme_prob",
    "ReplicationRecord",
    "TrajectoryStat",
    "run_replications",
    "lp_trajectory",
    "martingale_trajectory",
    "hill_estimate",
    "zipf_ranks",
    "zipf_from_edgelist",
    "empirical_degree_pmf",
    "__version__",
]
