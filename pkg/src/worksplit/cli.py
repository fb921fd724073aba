"""Command-line front end.

Four subcommands cover the pipeline: `simulate` generates an observation
trace from a ground-truth unit, `infer` estimates one unit's parameters
from a trace, `frontier` sweeps split fractions for a two-unit system and
answers QoS budget queries, and `convergence` reduces an inference trace to
a (cumulative observations, log likelihood) series.

Configuration lives in a JSON file; any flag overrides its config key.
Exit codes: 0 success, 1 usage or configuration error, 2 input data error,
3 numerical failure (including infeasible QoS budgets).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import frontier as frontier_mod
from . import gibbs as gibbs_mod
from . import simulate as simulate_mod
from .errors import (
    InfeasibleBudgetError,
    NumericalError,
    ParameterError,
    TraceFormatError,
    WorksplitError,
)
from .frontier import SweepGrid
from .gibbs import GibbsConfig
from .inference import BetaParams, NormalGammaParams
from .model import SystemParams, UnitParams
from .quadrature import QuadratureConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


class ConfigError(WorksplitError):
    """Bad or missing configuration."""


@dataclass
class UnitPriors:
    normal_gamma: NormalGammaParams | None
    alpha: BetaParams
    beta: BetaParams


@dataclass
class RunConfig:
    seed: int
    quadrature: QuadratureConfig
    grid: SweepGrid
    gibbs: GibbsConfig
    priors: dict[str, UnitPriors]
    raw: dict


def _build(section: dict, builder, context: str):
    try:
        return builder(**section)
    except TypeError as exc:
        raise ConfigError(f"bad keys in config section {context!r}: {exc}") from None
    except ParameterError as exc:
        raise ConfigError(f"invalid value in config section {context!r}: {exc}") from None


def _unit_priors(section: dict, context: str) -> UnitPriors:
    ng = section.get("normal_gamma")
    return UnitPriors(
        normal_gamma=_build(ng, NormalGammaParams, f"{context}.normal_gamma") if ng else None,
        alpha=_build(section.get("alpha", {"shape_a": 2.0, "shape_b": 2.0}),
                     BetaParams, f"{context}.alpha"),
        beta=_build(section.get("beta", {"shape_a": 2.0, "shape_b": 2.0}),
                    BetaParams, f"{context}.beta"),
    )


def load_config(path: str | None, seed_override: int | None = None) -> RunConfig:
    raw = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {path} must contain a JSON object")

    seed = raw.get("seed", 0)
    if seed_override is not None:
        seed = seed_override
    gibbs_section = dict(raw.get("gibbs") or {})
    gibbs_section.setdefault("rng_seed", seed)
    if seed_override is not None:
        gibbs_section["rng_seed"] = seed_override
    priors = {
        unit: _unit_priors((raw.get("priors") or {}).get(unit) or {}, f"priors.{unit}")
        for unit in ("unit_i", "unit_j")
    }
    return RunConfig(
        seed=int(seed),
        quadrature=_build(raw.get("quadrature") or {}, QuadratureConfig, "quadrature"),
        grid=_build(raw.get("grid") or {}, SweepGrid, "grid"),
        gibbs=_build(gibbs_section, GibbsConfig, "gibbs"),
        priors=priors,
        raw=raw,
    )


def _unit_from_section(spec, context: str) -> UnitParams:
    if not isinstance(spec, dict):
        raise ConfigError(f"config section {context!r} must be an object")
    if "estimates" in spec:
        path = Path(spec["estimates"])
        if not path.exists():
            raise TraceFormatError(f"estimates file not found: {path}")
        try:
            data = json.loads(path.read_text())
            return UnitParams(mu=data["mu"], sigma=data["sigma"],
                              alpha=data["alpha"], beta=data["beta"])
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise TraceFormatError(f"estimates file {path} is malformed: {exc}") from None
    return _build(spec, UnitParams, context)


def _system_from_config(cfg: RunConfig) -> SystemParams:
    section = cfg.raw.get("system")
    if not section:
        raise ConfigError("frontier needs a 'system' config section with unit_i and unit_j")
    if "unit_i" not in section or "unit_j" not in section:
        raise ConfigError("'system' section must define both unit_i and unit_j")
    return SystemParams(
        unit_i=_unit_from_section(section["unit_i"], "system.unit_i"),
        unit_j=_unit_from_section(section["unit_j"], "system.unit_j"),
    )


def _policy_from_section(spec, context: str) -> simulate_mod.SplitPolicy:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"config section {context!r} must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "fixed":
            return simulate_mod.SplitPolicy.fixed(spec["f"])
        if kind == "uniform":
            return simulate_mod.SplitPolicy.uniform(spec["lo"], spec["hi"])
        if kind == "cyclic":
            return simulate_mod.SplitPolicy.cyclic(spec["values"])
    except KeyError as exc:
        raise ConfigError(f"policy {kind!r} in {context!r} is missing key {exc}") from None
    except ParameterError as exc:
        raise ConfigError(f"invalid policy in {context!r}: {exc}") from None
    raise ConfigError(f"unknown policy kind {kind!r} in {context!r}")


def cmd_frontier(args) -> int:
    cfg = load_config(args.config, args.seed)
    system = _system_from_config(cfg)
    points = frontier_mod.sweep(system, cfg.grid, cfg.quadrature)
    points = frontier_mod.efficient_frontier(points)

    out = Path(args.out) if args.out else Path("frontier")
    csv_path = out.with_suffix(".csv")
    json_path = out.with_suffix(".json")
    frontier_mod.write_csv(points, csv_path)
    frontier_mod.write_json(points, json_path)
    print(f"wrote {csv_path} and {json_path} ({sum(p.on_frontier for p in points)} frontier points)")

    if args.budget_mu is not None:
        pick = frontier_mod.min_variance_given_mu(points, args.budget_mu)
        print(f"min variance with mu <= {args.budget_mu:.17g}: "
              f"f={pick.f:.17g} mu={pick.mu:.17g} var={pick.var:.17g}")
    if args.budget_var is not None:
        pick = frontier_mod.min_mu_given_variance(points, args.budget_var)
        print(f"min mu with var <= {args.budget_var:.17g}: "
              f"f={pick.f:.17g} mu={pick.mu:.17g} var={pick.var:.17g}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.seed)
    section = cfg.raw.get("simulate")
    if not section:
        raise ConfigError("simulate needs a 'simulate' config section")
    for key in ("n", "policy", "unit"):
        if key not in section:
            raise ConfigError(f"'simulate' section is missing key {key!r}")
    n = section["n"]
    if not isinstance(n, int) or n < 1:
        raise ConfigError(f"simulate.n must be a positive integer, got {n!r}")
    policy = _policy_from_section(section["policy"], "simulate.policy")
    unit = _build(section["unit"], UnitParams, "simulate.unit")
    out = Path(args.out) if args.out else Path("trace.csv")

    rng = np.random.default_rng(cfg.seed)
    records = simulate_mod.generate_trace(n, policy, unit, rng)
    simulate_mod.save_trace(records, out)
    print(f"wrote {len(records)} observations to {out}")
    return EXIT_OK


def cmd_infer(args) -> int:
    cfg = load_config(args.config, args.seed)
    if not args.trace:
        raise ConfigError("infer needs --trace pointing at an observation CSV")
    records = simulate_mod.load_trace(args.trace)
    if not records:
        raise TraceFormatError(f"trace file {args.trace} contains no observations")

    unit_name = (cfg.raw.get("infer") or {}).get("unit", "unit_i")
    if unit_name not in cfg.priors:
        raise ConfigError(f"infer.unit must be 'unit_i' or 'unit_j', got {unit_name!r}")
    priors = cfg.priors[unit_name]

    out = Path(args.out) if args.out else Path("infer")
    estimates_path = out.parent / (out.name + "_estimates.json")
    trace_csv = out.parent / (out.name + "_trace.csv")
    trace_jsonl = out.parent / (out.name + "_trace.jsonl")
    if str(trace_csv) == str(Path(args.trace)):
        raise ConfigError("output trace path collides with the input trace")

    rng = np.random.default_rng(cfg.gibbs.rng_seed)
    result = gibbs_mod.run(records, cfg.gibbs,
                           ng_prior=priors.normal_gamma,
                           alpha_prior=priors.alpha, beta_prior=priors.beta,
                           rng=rng, quad=cfg.quadrature)
    if result.aborted:
        print(f"inference aborted: {result.abort_reason}", file=sys.stderr)
        return EXIT_NUMERICAL

    state = result.state
    estimates = {
        "unit": unit_name,
        "mu": state.mu_sample,
        "sigma": state.sigma_sample,
        "alpha": state.alpha_sample,
        "beta": state.beta_sample,
        "batches": len(result.trace),
        "observations": result.trace[-1].cumulative_observations if result.trace else 0,
        "clamped_moment_fits": state.clamp_count,
        "final_priors": {
            "normal_gamma": {"mu0": state.ng.mu0, "kappa0": state.ng.kappa0,
                             "nu0": state.ng.nu0, "psi0": state.ng.psi0},
            "alpha": {"shape_a": state.alpha_prior.shape_a, "shape_b": state.alpha_prior.shape_b},
            "beta": {"shape_a": state.beta_prior.shape_a, "shape_b": state.beta_prior.shape_b},
        },
    }
    with open(estimates_path, "w") as fh:
        json.dump(estimates, fh, indent=2)
        fh.write("\n")
    gibbs_mod.write_trace_csv(result.trace, trace_csv)
    gibbs_mod.write_trace_jsonl(result.trace, trace_jsonl)
    print(f"wrote {estimates_path}, {trace_csv}, {trace_jsonl}")
    print(f"estimates: mu={state.mu_sample:.6g} sigma={state.sigma_sample:.6g} "
          f"alpha={state.alpha_sample:.6g} beta={state.beta_sample:.6g}")
    return EXIT_OK


def cmd_convergence(args) -> int:
    if not args.trace:
        raise ConfigError("convergence needs --trace pointing at an inference trace CSV")
    points = gibbs_mod.read_trace_csv(args.trace)
    if not points:
        raise TraceFormatError(f"trace file {args.trace} has no rows")

    out = Path(args.out) if args.out else Path("convergence.csv")
    with open(out, "w", newline="") as fh:
        fh.write("n_obs,loglik\n")
        for p in points:
            fh.write(f"{p.cumulative_observations},{p.log_likelihood:.17g}\n")

    logliks = [p.log_likelihood for p in points]
    window = min(10, len(logliks))
    leading = float(np.median(logliks[:window]))
    trailing = float(np.median(logliks[-window:]))
    print(f"wrote {out} ({len(points)} points)")
    print(f"leading-{window} median loglik: {leading:.17g}")
    print(f"trailing-{window} median loglik: {trailing:.17g}")
    print(f"trailing exceeds leading: {trailing > leading}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2; usage errors here must be 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="worksplit",
                     description="Infer two-unit completion-time characteristics and pick a workload split.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="output path (base name for multi-file outputs)")
    common.add_argument("--trace", help="observation or inference trace CSV")

    p = sub.add_parser("frontier", parents=[common],
                       help="sweep split fractions and report the efficient frontier")
    p.add_argument("--budget-mu", type=float, help="expected-time budget for the variance query")
    p.add_argument("--budget-var", type=float, help="variance budget for the expected-time query")
    p.set_defaults(fn=cmd_frontier)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic observation trace")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("infer", parents=[common], help="estimate one unit's parameters from a trace")
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("convergence", parents=[common],
                       help="reduce an inference trace to observations-vs-loglik")
    p.set_defaults(fn=cmd_convergence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"worksplit: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TraceFormatError as exc:
        print(f"worksplit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InfeasibleBudgetError, NumericalError) as exc:
        print(f"worksplit: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ParameterError as exc:
        print(f"worksplit: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"worksplit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
