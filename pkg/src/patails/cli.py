"""Command-line entry point.

Subcommands: simulate, zipf, zipf-ingest, moments, spectral, extreme,
table1, diagnose.  Scalar results are emitted as JSON, tabular results as
CSV; every output begins with a config echo so runs can be reproduced from
their artefacts alone.  Exit codes: 0 success, 2 configuration error,
1 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import __version__
from . import rng as rngmod
from .analytics import DomainError, MomentSpec, mixed_moment
from .config import ConfigError, LoopMode, ModelConfig, load_model_config
from .engine import full_urn_weights, prefix_ensemble
from .extremes import (
    ApproximationReport,
    ExtremeEventSpec,
    breiman_approx,
    empirical_extreme_prob,
)
from .spectral import SpectralError, parse_event, spectral_params, spectral_prob
from .stopping import StoppingKind, StoppingLaw
from .experiments import run_replications, zipf_from_edgelist, zipf_ranks
from . import diagnostics


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Validated bundle of model, stopping law and run options."""

    model: ModelConfig
    stopping: StoppingLaw
    seed: int
    threads: int
    out: str | None
    format: str


def _count(text: str) -> int:
    """Replication counts accept scientific notation, e.g. --reps 1e6."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value < 1 or value != int(value):
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return int(value)


def _load_tables(path):
    import tomli  # noqa: local import keeps startup light

    raw = open(path, "rb").read()
    if str(path).endswith(".json"):
        return json.loads(raw.decode())
    return tomli.loads(raw.decode())


def _build_run_config(args) -> RunConfig:
    file_model = {}
    file_stopping = {}
    if getattr(args, "config", None):
        data = _load_tables(args.config)
        file_model = dict(data.get("model", {}))
        file_stopping = dict(data.get("stopping", {}))

    def pick(flag, key, table, default=None):
        val = getattr(args, flag, None)
        if val is not None:
            return val
        return table.get(key, default)

    l = pick("l", "l", file_model, 1)
    beta = pick("beta", "beta", file_model, 1.0)
    loop_mode = pick("loop_mode", "loop_mode", file_model, "model1")
    initial = pick("initial", "initial_weights", file_model, None)
    if isinstance(initial, str):
        try:
            initial = tuple(float(x) for x in initial.split(",") if x.strip())
        except ValueError:
            raise ConfigError(f"bad initial_weights value {initial!r}") from None
    try:
        mode = LoopMode(str(loop_mode).lower())
    except ValueError:
        raise ConfigError(
            f"loop_mode must be 'model0' or 'model1', got {loop_mode!r}"
        ) from None
    model = ModelConfig(l=int(l), beta=float(beta), loop_mode=mode, initial=initial)

    alpha = pick("alpha", "alpha", file_stopping, 1.0)
    kind = pick("stopping_kind", "stopping_kind", file_stopping, "floored_pareto")
    try:
        skind = StoppingKind(str(kind).lower())
    except ValueError:
        raise ConfigError(f"unknown stopping_kind {kind!r}") from None
    stopping = StoppingLaw(alpha=float(alpha), kind=skind)

    seed = getattr(args, "seed", None)
    if seed is None:
        seed = os.environ.get("SEED")
    seed = 0 if seed is None else int(seed)
    threads = int(getattr(args, "threads", None) or 1)
    if threads < 1:
        raise ConfigError(f"threads must be >= 1, got {threads}")
    fmt = getattr(args, "format", None) or "csv"
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    return RunConfig(
        model=model,
        stopping=stopping,
        seed=seed,
        threads=threads,
        out=getattr(args, "out", None),
        format=fmt,
    )


def _config_echo(rc: RunConfig, extra: dict) -> dict:
    return {
        "version": __version__,
        "model": {
            "l": rc.model.l,
            "beta": rc.model.beta,
            "loop_mode": rc.model.loop_mode.value,
            "initial_weights": list(rc.model.initial),
        },
        "stopping": {"alpha": rc.stopping.alpha, "kind": rc.stopping.kind.value},
        "seed": rc.seed,
        **extra,
    }


class _Sink:
    def __init__(self, path):
        self._own = path is not None and path != "-"
        self.fh = open(path, "w", encoding="utf-8") if self._own else sys.stdout

    def __enter__(self):
        return self.fh

    def __exit__(self, *exc):
        if self._own:
            self.fh.close()


def _emit_csv(fh, echo: dict, header: list, rows):
    fh.write(f"# patails {__version__}\n")
    fh.write("# config " + json.dumps(echo, sort_keys=True) + "\n")
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join("" if v is None else str(v) for v in row) + "\n")


def _emit_json(fh, payload: dict):
    json.dump(payload, fh, indent=2, sort_keys=True)
    fh.write("\n")


# --------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    rc = _build_run_config(args)
    echo = _config_echo(rc, {"command": "simulate", "reps": args.reps, "r": args.r})
    header = ["index", "N"] + [f"d{i}" for i in range(1, args.r + 1)] + [
        "norm1",
        "max_degree",
        "clamped",
    ]

    def rows():
        for rec in run_replications(
            rc.model,
            rc.stopping,
            r=args.r,
            reps=args.reps,
            seed=rc.seed,
            full_degrees=args.full,
        ):
            yield (
                [rec.index, rec.N]
                + [f"{w:.10g}" for w in rec.weights]
                + [
                    f"{rec.norm1:.10g}",
                    "" if rec.max_degree is None else f"{rec.max_degree:.10g}",
                    int(rec.clamped),
                ]
            )

    with _Sink(rc.out) as fh:
        _emit_csv(fh, echo, header, rows())
    return 0


def _cmd_zipf(args) -> int:
    rc = _build_run_config(args)
    weights = full_urn_weights(rc.model, args.n, rc.seed, index=0)
    degrees = (weights - rc.model.beta).tolist()
    ranked = zipf_ranks(degrees)
    echo = _config_echo(rc, {"command": "zipf", "n": args.n})
    with _Sink(rc.out) as fh:
        _emit_csv(fh, echo, ["rank", "degree"], ([r, f"{d:.10g}"] for r, d in ranked))
    return 0


def _cmd_zipf_ingest(args) -> int:
    rc = _build_run_config(args)
    ranked = zipf_from_edgelist(args.input)
    echo = {"version": __version__, "command": "zipf-ingest", "input": args.input}
    with _Sink(rc.out) as fh:
        _emit_csv(fh, echo, ["rank", "degree"], ([r, d] for r, d in ranked))
    return 0


def _cmd_moments(args) -> int:
    rc = _build_run_config(args)
    try:
        k = tuple(float(x) for x in args.k.split(","))
    except ValueError:
        raise ConfigError(f"bad --k value {args.k!r}; expected comma-separated reals")
    value = mixed_moment(MomentSpec(k=k, cfg=rc.model))
    payload = {
        "config": _config_echo(rc, {"command": "moments", "k": list(k)}),
        "value": value,
    }
    if args.verify:
        n = args.verify_n
        expo = rc.model.index_exponent()
        vectors = prefix_ensemble(rc.model, len(k), n, args.verify, rc.seed)
        stat = np.prod(vectors ** np.array(k), axis=1) / n ** (expo * sum(k))
        payload["mc_estimate"] = float(stat.mean())
        payload["mc_se"] = float(stat.std(ddof=1) / np.sqrt(len(stat)))
        payload["mc_reps"] = args.verify
        payload["mc_n"] = n
    with _Sink(rc.out) as fh:
        _emit_json(fh, payload)
    return 0


def _cmd_spectral(args) -> int:
    rc = _build_run_config(args)
    event = parse_event(args.event)
    params = spectral_params(args.r, rc.model)
    method = "quadrature" if args.method in ("quad", "quadrature") else "mc"
    rng = rngmod.utility_stream(rc.seed, tag=7) if method == "mc" else None
    est = spectral_prob(event, params, method=method, n_samples=args.samples, rng=rng)
    payload = {
        "config": _config_echo(
            rc, {"command": "spectral", "r": args.r, "event": event.name}
        ),
        "value": est.value,
        "se": est.se,
        "method": est.method,
        "n_samples": est.n_samples,
        "break_pairs": [list(p) for p in params.breaks],
    }
    with _Sink(rc.out) as fh:
        _emit_json(fh, payload)
    return 0


def _extreme_row(rc: RunConfig, event_spec: ExtremeEventSpec, reps: int, threads: int):
    approx = breiman_approx(event_spec, rc.model, rc.stopping)
    emp = empirical_extreme_prob(
        event_spec, rc.model, rc.stopping, reps=reps, seed=rc.seed, threads=threads
    )
    return approx, emp


def _cmd_extreme(args) -> int:
    rc = _build_run_config(args)
    event_spec = ExtremeEventSpec(r=args.r, t=args.t, sphere_event=parse_event(args.event))
    emp = empirical_extreme_prob(
        event_spec, rc.model, rc.stopping, reps=args.reps, seed=rc.seed, threads=rc.threads
    )
    approx = None
    if args.t >= 1.0 and rc.model.beta > 0:
        approx = breiman_approx(event_spec, rc.model, rc.stopping)
    echo = _config_echo(
        rc,
        {
            "command": "extreme",
            "r": args.r,
            "t": args.t,
            "event": event_spec.sphere_event.name,
            "reps": args.reps,
        },
    )
    header = [
        "l", "beta", "alpha", "t", "r", "event", "reps",
        "empirical", "ci_low", "ci_high",
        "approx", "tail_factor", "moment_factor", "spectral_factor",
    ]
    row = [
        rc.model.l, rc.model.beta, rc.stopping.alpha, args.t, args.r,
        event_spec.sphere_event.name, args.reps,
        f"{emp.value:.8g}", f"{emp.ci_low:.8g}", f"{emp.ci_high:.8g}",
    ]
    if approx is None:
        row += ["", "", "", ""]
    else:
        row += [
            f"{approx.approx_prob:.8g}", f"{approx.tail_factor:.8g}",
            f"{approx.moment_factor:.8g}", f"{approx.spectral_factor:.8g}",
        ]
    with _Sink(rc.out) as fh:
        if rc.format == "json":
            payload = {"config": echo, **dict(zip(header, row))}
            _emit_json(fh, payload)
        else:
            _emit_csv(fh, echo, header, [row])
    return 0


# reference benchmark: the network is grown from a single vertex without
# edges (weight beta) in MODEL0 dynamics, observed at a floored-Pareto time
_TABLE1_ROWS = [(1, 1.0, 150.0), (3, 1.0, 500.0), (3, 3.0, 500.0)]


def table1_config(l: int, beta: float) -> ModelConfig:
    return ModelConfig(l=l, beta=beta, loop_mode=LoopMode.MODEL0, initial=(beta,))


def _cmd_table1(args) -> int:
    rc = _build_run_config(args)
    law = StoppingLaw(alpha=1.0)
    from .spectral import DescendingOrder

    header = [
        "l", "beta", "t", "reps", "empirical_pct", "ci_low_pct", "ci_high_pct",
        "approx_pct", "tail_factor", "moment_factor", "spectral_factor",
    ]
    rows = []
    for l, beta, t in _TABLE1_ROWS:
        cfg = table1_config(l, beta)
        event_spec = ExtremeEventSpec(r=4, t=t, sphere_event=DescendingOrder())
        approx = breiman_approx(event_spec, cfg, law)
        emp = empirical_extreme_prob(
            event_spec, cfg, law, reps=args.reps, seed=rc.seed, threads=rc.threads
        )
        rows.append(
            [
                l, beta, t, args.reps,
                f"{100 * emp.value:.6f}", f"{100 * emp.ci_low:.6f}",
                f"{100 * emp.ci_high:.6f}", f"{100 * approx.approx_prob:.6f}",
                f"{approx.tail_factor:.8g}", f"{approx.moment_factor:.8g}",
                f"{approx.spectral_factor:.8g}",
            ]
        )
    echo = _config_echo(rc, {"command": "table1", "reps": args.reps, "note": "single edgeless initial vertex, model0, alpha=1"})
    with _Sink(rc.out) as fh:
        _emit_csv(fh, echo, header, rows)
    return 0


def _cmd_diagnose(args) -> int:
    rc = _build_run_config(args)
    results = diagnostics.run_suite(rc.model, rc.stopping, seed=rc.seed, quick=not args.thorough)
    with _Sink(rc.out) as fh:
        for res in results:
            fh.write(json.dumps(res, sort_keys=True) + "\n")
    return 0 if all(r["passed"] for r in results) else 1


# --------------------------------------------------------------------------
# parser


def _add_common(sub, stopping=False):
    sub.add_argument("--config", help="TOML/JSON config file with [model]/[stopping]")
    sub.add_argument("--seed", type=int, help="master seed (overrides SEED env var)")
    sub.add_argument("--threads", type=int, help="parallel workers for replications")
    sub.add_argument("--out", help="output path (default: stdout)")
    sub.add_argument("--format", choices=["csv", "json"], help="output format")
    sub.add_argument("--l", type=int, help="edges per new vertex")
    sub.add_argument("--beta", type=float, help="attachment weight offset")
    sub.add_argument("--loop-mode", dest="loop_mode", choices=["model0", "model1"])
    sub.add_argument("--initial", help="comma-separated initial vertex weights")
    if stopping:
        sub.add_argument("--alpha", type=float, help="tail index of the observation time")
        sub.add_argument("--stopping-kind", dest="stopping_kind")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="patails",
        description="Extremes of preferential attachment networks at heavy-tailed "
        "observation times: simulation, closed-form analytics, diagnostics.",
    )
    p.add_argument("--version", action="version", version=f"patails {__version__}")
    subs = p.add_subparsers(dest="command", required=True)

    s = subs.add_parser("simulate", help="replicate tracked weight vectors to CSV")
    _add_common(s, stopping=True)
    s.add_argument("--reps", type=_count, required=True)
    s.add_argument("--r", type=int, default=4, help="tracked prefix length")
    s.add_argument("--full", action="store_true", help="full simulation incl. max degree")
    s.set_defaults(func=_cmd_simulate)

    s = subs.add_parser("zipf", help="simulate one network and rank its in-degrees")
    _add_common(s)
    s.add_argument("--n", type=int, required=True, help="growth steps")
    s.set_defaults(func=_cmd_zipf)

    s = subs.add_parser("zipf-ingest", help="rank in-degrees from an edge-list file")
    _add_common(s)
    s.add_argument("--input", required=True, help="two-column (source, target) file")
    s.set_defaults(func=_cmd_zipf_ingest)

    s = subs.add_parser("moments", help="closed-form mixed moments of the weight limits")
    _add_common(s)
    s.add_argument("--k", required=True, help="comma-separated exponents, e.g. 1,1,0,2")
    s.add_argument("--verify", type=_count, help="cross-check with this many replications")
    s.add_argument("--verify-n", type=int, default=10_000, help="horizon for --verify")
    s.set_defaults(func=_cmd_moments)

    s = subs.add_parser("spectral", help="spectral probability of a sphere event")
    _add_common(s)
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--event", default="descending", help="full | descending | coord:i:c")
    s.add_argument("--method", choices=["mc", "quad", "quadrature"], default="mc")
    s.add_argument("--samples", type=_count, default=1_000_000)
    s.set_defaults(func=_cmd_spectral)

    s = subs.add_parser("extreme", help="extreme-event probability: empirical vs approximation")
    _add_common(s, stopping=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--r", type=int, default=4)
    s.add_argument("--event", default="descending")
    s.add_argument("--reps", type=_count, required=True)
    s.set_defaults(func=_cmd_extreme)

    s = subs.add_parser("table1", help="reproduce the three reference benchmark rows")
    _add_common(s)
    s.add_argument("--reps", type=_count, default=1_000_000)
    s.set_defaults(func=_cmd_table1)

    s = subs.add_parser("diagnose", help="run the named invariant suite")
    _add_common(s, stopping=True)
    s.add_argument("--thorough", action="store_true", help="larger sample sizes")
    s.set_defaults(func=_cmd_diagnose)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, SpectralError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime failures exit 1, config failures 2
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
